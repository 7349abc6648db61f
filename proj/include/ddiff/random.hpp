#pragma once

#include <array>
#include <cstdint>

#include "ddiff/tensor.hpp"

namespace ddiff {

/// Counter-based random stream (Philox4x32-10 keyed by the seed, with the
/// stream id in the upper counter words). A (seed, stream) pair fully determines
/// the sequence; the position advances only through explicit draws.
class RandomSource {
 public:
  RandomSource(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t position() const noexcept { return position_; }

  std::uint64_t next_u64();
  /// Uniform on (0, 1], 53-bit resolution.
  double next_uniform();
  /// One standard normal pair via Box-Muller on two uniforms.
  std::array<double, 2> next_normal_pair();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
};

/// Philox4x32-10 block function on a 128-bit counter and 64-bit key.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Tensor of i.i.d. standard normals; advances rs.
Tensor gaussian_draw(RandomSource& rs, const Shape& shape);

/// Stream id for problem `index` of a batch seeded with `seed`.
std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index);

/// Well-known stream ids used across the library and CLI.
namespace streams {
inline constexpr std::uint64_t solver = 0;
inline constexpr std::uint64_t measurement_noise = 1;
inline constexpr std::uint64_t ground_truth = 2;
inline constexpr std::uint64_t operator_setup = 3;
}  // namespace streams

}  // namespace ddiff
