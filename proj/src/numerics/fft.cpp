#include "ddiff/fft.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <vector>

#include "ddiff/errors.hpp"

namespace ddiff {
namespace {

using cd = std::complex<double>;

void radix2(std::span<cd> a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    // Twiddles evaluated directly per index, not by recurrence.
    std::vector<cd> w(half);
    for (std::size_t k = 0; k < half; ++k) {
      const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
      w[k] = {std::cos(ang), std::sin(ang)};
    }
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const cd u = a[i + k];
        const cd v = a[i + k + half] * w[k];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

// Unnormalized forward DFT of arbitrary length via the chirp-z identity
// nk = (n^2 + k^2 - (k-n)^2) / 2.
void bluestein(std::span<cd> a) {
  const std::size_t n = a.size();
  const std::size_t m = std::bit_ceil(2 * n - 1);
  std::vector<cd> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the angle small for large k.
    const std::size_t k2 = (k * k) % (2 * n);
    const double ang = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
    chirp[k] = {std::cos(ang), std::sin(ang)};
  }
  std::vector<cd> fa(m, cd{}), fb(m, cd{});
  for (std::size_t k = 0; k < n; ++k) fa[k] = a[k] * chirp[k];
  fb[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) fb[k] = fb[m - k] = std::conj(chirp[k]);
  radix2(fa, false);
  radix2(fb, false);
  for (std::size_t i = 0; i < m; ++i) fa[i] *= fb[i];
  radix2(fa, true);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) a[k] = fa[k] * scale * chirp[k];
}

}  // namespace

void fft1d(std::span<cd> data, FftDirection direction) {
  const std::size_t n = data.size();
  if (n == 0) throw InvalidArgument("fft1d: zero-length transform");
  if (n == 1) return;
  const bool inverse = direction == FftDirection::inverse;
  if (std::has_single_bit(n)) {
    radix2(data, inverse);
  } else if (!inverse) {
    bluestein(data);
  } else {
    for (auto& v : data) v = std::conj(v);
    bluestein(data);
    for (auto& v : data) v = std::conj(v);
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : data) v *= scale;
  }
}

ComplexTensor fft2(const ComplexTensor& x, FftDirection direction) {
  const auto g = plane_geometry(x.shape());
  if (g.height == 0 || g.width == 0) throw InvalidArgument("fft2: zero-sized transform plane");
  ComplexTensor out(x);
  std::vector<cd> column(g.height);
  for (std::size_t c = 0; c < g.channels; ++c) {
    auto plane = out.data().subspan(c * g.height * g.width, g.height * g.width);
    for (std::size_t i = 0; i < g.height; ++i) fft1d(plane.subspan(i * g.width, g.width), direction);
    for (std::size_t j = 0; j < g.width; ++j) {
      for (std::size_t i = 0; i < g.height; ++i) column[i] = plane[i * g.width + j];
      fft1d(column, direction);
      for (std::size_t i = 0; i < g.height; ++i) plane[i * g.width + j] = column[i];
    }
  }
  return out;
}

ComplexTensor fft2(const Tensor& x, FftDirection direction) { return fft2(ComplexTensor(x), direction); }

}  // namespace ddiff
