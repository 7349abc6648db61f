#include <doctest.h>

#include <bit>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>

#include "ddiff/errors.hpp"
#include "ddiff/fft.hpp"
#include "ddiff/random.hpp"
#include "ddiff/tensor.hpp"
#include "ddiff/tensor_io.hpp"

using namespace ddiff;
using cd = std::complex<double>;

namespace {

std::vector<cd> naive_dft(const std::vector<cd>& x, int sign) {
  const std::size_t n = x.size();
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cd acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / static_cast<double>(n);
      acc += x[j] * cd(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

std::vector<cd> random_signal(std::size_t n, std::uint64_t seed) {
  RandomSource rs(seed, 9);
  std::vector<cd> x(n);
  for (auto& v : x) {
    const auto p = rs.next_normal_pair();
    v = cd(p[0], p[1]);
  }
  return x;
}

Tensor random_tensor(const Shape& s, std::uint64_t seed) {
  RandomSource rs(seed, 11);
  return gaussian_draw(rs, s);
}

}  // namespace

TEST_CASE("tensor construction validates length and finiteness") {
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), InvalidArgument);
  CHECK_THROWS_AS(Tensor({2}, std::vector<double>{1, std::numeric_limits<double>::quiet_NaN()}), InvalidArgument);
  CHECK_THROWS_AS(Tensor({1}, std::vector<double>{std::numeric_limits<double>::infinity()}), InvalidArgument);
  Tensor t({2, 3, 4}, 1.5);
  CHECK(t.size() == 24);
  CHECK(t.rank() == 3);
  CHECK(shape_string(t.shape()) == "(2,3,4)");
  t.at(1, 2, 3) = 7.0;
  CHECK(t[23] == 7.0);
}

TEST_CASE("tensor arithmetic") {
  Tensor a({3}, std::vector<double>{1, 2, 3});
  Tensor b({3}, std::vector<double>{4, -5, 6});
  CHECK((a + b) == Tensor({3}, std::vector<double>{5, -3, 9}));
  CHECK((a - b) == Tensor({3}, std::vector<double>{-3, 7, -3}));
  CHECK((2.0 * a) == Tensor({3}, std::vector<double>{2, 4, 6}));
  CHECK(axpy(-1.0, a, b) == Tensor({3}, std::vector<double>{3, -7, 3}));
  CHECK(hadamard(a, b) == Tensor({3}, std::vector<double>{4, -10, 18}));
  CHECK(dot(a, b) == 12.0);
  CHECK(squared_norm(a) == 14.0);
  CHECK(norm2(a) == doctest::Approx(std::sqrt(14.0)).epsilon(1e-15));
  CHECK(max_abs(b) == 6.0);
  CHECK(max_abs_diff(a, b) == 7.0);
  CHECK_THROWS_AS(a + Tensor({4}), InvalidArgument);
  CHECK_THROWS_AS(dot(a, Tensor({1, 3})), InvalidArgument);
}

TEST_CASE("plane geometry collapses leading extents") {
  auto g = plane_geometry({2, 3, 5, 7});
  CHECK(g.channels == 6);
  CHECK(g.height == 5);
  CHECK(g.width == 7);
  g = plane_geometry({4, 9});
  CHECK(g.channels == 1);
  CHECK_THROWS_AS(plane_geometry({5}), InvalidArgument);
}

TEST_CASE("fft1d matches a naive DFT for power-of-two and other lengths") {
  for (std::size_t n : {1u, 2u, 8u, 64u, 3u, 7u, 12u, 15u, 100u}) {
    CAPTURE(n);
    const auto x = random_signal(n, n);
    auto y = x;
    fft1d(y, FftDirection::forward);
    const auto ref = naive_dft(x, -1);
    double err = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      err = std::max(err, std::abs(y[k] - ref[k]));
      scale = std::max(scale, std::abs(ref[k]));
    }
    CHECK(err <= 1e-12 * std::max(1.0, scale));
    fft1d(y, FftDirection::inverse);
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(y[k] - x[k]) <= 1e-12);
  }
}

TEST_CASE("fft satisfies Parseval") {
  const auto x = random_signal(45, 3);
  auto y = x;
  fft1d(y, FftDirection::forward);
  double ex = 0.0, ey = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    ex += std::norm(x[k]);
    ey += std::norm(y[k]);
  }
  CHECK(ey / 45.0 == doctest::Approx(ex).epsilon(1e-12));
}

TEST_CASE("fft2 matches a naive separable DFT") {
  const std::size_t h = 5, w = 6;
  const Tensor x = random_tensor({2, h, w}, 4);
  const ComplexTensor f = fft2(x, FftDirection::forward);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t u = 0; u < h; ++u)
      for (std::size_t v = 0; v < w; ++v) {
        cd acc = 0.0;
        for (std::size_t i = 0; i < h; ++i)
          for (std::size_t j = 0; j < w; ++j) {
            const double ang = -2.0 * std::numbers::pi *
                               (static_cast<double>(u * i) / static_cast<double>(h) +
                                static_cast<double>(v * j) / static_cast<double>(w));
            acc += x.at(c, i, j) * cd(std::cos(ang), std::sin(ang));
          }
        CHECK(std::abs(f[(c * h + u) * w + v] - acc) <= 1e-11);
      }
  const Tensor back = fft2(f, FftDirection::inverse).real();
  CHECK(max_abs_diff(back, x) <= 1e-13);
  CHECK_THROWS_AS(fft2(Tensor({3}), FftDirection::forward), InvalidArgument);
}

TEST_CASE("circular_conv2 matches the modular direct sum") {
  const Tensor x = random_tensor({1, 7, 9}, 5);
  const Tensor k = random_tensor({3, 5}, 6);
  const Tensor y = circular_conv2(x, k);
  for (long i = 0; i < 7; ++i)
    for (long j = 0; j < 9; ++j) {
      double acc = 0.0;
      for (long a = 0; a < 3; ++a)
        for (long b = 0; b < 5; ++b) acc += k[a * 5 + b] * x.at(0, ((i - (a - 1)) % 7 + 7) % 7, ((j - (b - 2)) % 9 + 9) % 9);
      CHECK(y.at(0, i, j) == doctest::Approx(acc).epsilon(1e-13));
    }
}

TEST_CASE("circular_conv2 agrees with the convolution theorem") {
  const std::size_t h = 8, w = 6;
  const Tensor x = random_tensor({1, h, w}, 7);
  const Tensor k = random_tensor({3, 3}, 8);
  // Kernel embedded with its center at the origin.
  Tensor kp({1, h, w});
  for (long a = -1; a <= 1; ++a)
    for (long b = -1; b <= 1; ++b) kp.at(0, (a + h) % h, (b + w) % w) = k[(a + 1) * 3 + (b + 1)];
  const ComplexTensor fx = fft2(x, FftDirection::forward), fk = fft2(kp, FftDirection::forward);
  ComplexTensor prod(x.shape());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = fx[i] * fk[i];
  const Tensor ref = fft2(prod, FftDirection::inverse).real();
  CHECK(max_abs_diff(circular_conv2(x, k), ref) <= 1e-12);
}

TEST_CASE("circular_conv2 edge cases") {
  const Tensor x = random_tensor({2, 5, 5}, 9);
  Tensor delta({3, 3});
  delta[4] = 1.0;
  CHECK(circular_conv2(x, delta) == x);
  CHECK_THROWS_AS(circular_conv2(x, Tensor({2, 3})), InvalidArgument);
  CHECK_THROWS_AS(circular_conv2(x, Tensor({7, 7})), InvalidArgument);
  const Tensor k = random_tensor({3, 5}, 10);
  const Tensor f = flip_kernel(k);
  CHECK(f[0] == k[14]);
  CHECK(flip_kernel(f) == k);
}

TEST_CASE("philox4x32-10 known-answer vectors") {
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("random streams are reproducible and independent") {
  RandomSource a(42, 1), b(42, 1), c(42, 2), d(43, 1);
  bool differ_stream = false, differ_seed = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    differ_stream |= va != c.next_u64();
    differ_seed |= va != d.next_u64();
  }
  CHECK(differ_stream);
  CHECK(differ_seed);
  CHECK(a.position() == 100);
  RandomSource u(1, 0);
  for (int i = 0; i < 10000; ++i) {
    const double v = u.next_uniform();
    CHECK((v > 0.0 && v <= 1.0));
  }
}

TEST_CASE("gaussian draws have unit moments") {
  RandomSource rs(7, streams::measurement_noise);
  const std::size_t n = 200000;
  const Tensor g = gaussian_draw(rs, {n});
  double mean = 0.0, m2 = 0.0, m4 = 0.0;
  for (double v : g.data()) mean += v;
  mean /= n;
  for (double v : g.data()) {
    m2 += (v - mean) * (v - mean);
    m4 += std::pow(v - mean, 4);
  }
  m2 /= n;
  m4 /= n;
  CHECK(std::abs(mean) < 5.0 / std::sqrt(double(n)));
  CHECK(std::abs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(m4 - 3.0) < 5.0 * std::sqrt(96.0 / n));
  // Odd-length draws consume a whole pair.
  RandomSource r1(3, 0), r2(3, 0);
  const Tensor odd = gaussian_draw(r1, {3});
  const Tensor even = gaussian_draw(r2, {4});
  CHECK(odd[2] == even[2]);
  CHECK(r1.position() == r2.position());
}

TEST_CASE("derive_stream separates batch members") {
  CHECK(derive_stream(1, 0) == derive_stream(1, 0));
  CHECK(derive_stream(1, 0) != derive_stream(1, 1));
  CHECK(derive_stream(1, 0) != derive_stream(2, 0));
}

TEST_CASE("DDT1 golden bytes") {
  const Tensor t({2}, std::vector<double>{1.0, -2.0});
  const std::vector<std::uint8_t> expect = {'D', 'D', 'T', '1', 1, 0, 0, 0, 2, 0, 0, 0,
                                            0,   0,   0,   0,   0, 0, 0xf0, 0x3f,
                                            0,   0,   0,   0,   0, 0, 0, 0xc0};
  CHECK(encode_ddt1(t) == expect);
  std::size_t used = 0;
  CHECK(decode_ddt1(expect, &used) == t);
  CHECK(used == expect.size());
  CHECK(ddt1_header_size(expect) == 12);
}

TEST_CASE("DDT1 round trip is bitwise") {
  const Tensor t({2, 1, 3}, std::vector<double>{-0.0, 5e-324, std::numeric_limits<double>::max(), -1.0 / 3.0,
                                                1e-300, std::numbers::pi});
  const auto bytes = encode_ddt1(t);
  const Tensor back = decode_ddt1(bytes);
  CHECK(back.shape() == t.shape());
  CHECK(encode_ddt1(back) == bytes);
  CHECK(std::signbit(back[0]));
}

TEST_CASE("DDT1 rejects malformed input") {
  auto bytes = encode_ddt1(Tensor({2, 2}, 1.0));
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_ddt1(bad), FormatError);
  CHECK_THROWS_AS(decode_ddt1(std::span(bytes.data(), bytes.size() - 1)), FormatError);
  CHECK_THROWS_AS(decode_ddt1(std::span(bytes.data(), 10)), FormatError);
  std::vector<std::uint8_t> deep = {'D', 'D', 'T', '1'};
  put_u32le(deep, 9);
  CHECK_THROWS_AS(decode_ddt1(deep), FormatError);
  std::vector<std::uint8_t> huge = {'D', 'D', 'T', '1'};
  put_u32le(huge, 2);
  put_u32le(huge, 1u << 20);
  put_u32le(huge, 1u << 20);
  CHECK_THROWS_AS(decode_ddt1(huge), FormatError);
  auto nan = encode_ddt1(Tensor({1}));
  const auto bits = std::bit_cast<std::uint64_t>(std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i < 8; ++i) nan[12 + i] = static_cast<std::uint8_t>(bits >> (8 * i));
  CHECK_THROWS_AS(decode_ddt1(nan), FormatError);
}

TEST_CASE("DDT1 files are written atomically") {
  const auto dir = std::filesystem::temp_directory_path() / "ddiff_numerics_io";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const Tensor t({3, 2}, 0.25);
  write_ddt1(dir / "t.ddt1", t);
  write_ddt1(dir / "t.ddt1", t);
  CHECK(read_ddt1(dir / "t.ddt1") == t);
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
  CHECK(files == 1);
  CHECK_THROWS(read_ddt1(dir / "missing.ddt1"));
  std::filesystem::remove_all(dir);
}
