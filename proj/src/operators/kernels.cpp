#include <algorithm>
#include <cmath>
#include <numbers>

#include "ddiff/errors.hpp"
#include "ddiff/fft.hpp"
#include "ddiff/operators.hpp"

namespace ddiff {
namespace {

void normalize(Tensor& k) {
  double total = 0.0;
  for (double v : k.data()) total += v;
  for (double& v : k.data()) v /= total;
}

}  // namespace

Tensor gaussian_kernel(int size, double std) {
  if (size <= 0 || size % 2 == 0) throw InvalidArgument("gaussian_kernel: size must be odd and positive");
  if (!(std > 0.0)) throw InvalidArgument("gaussian_kernel: std must be positive");
  const int r = size / 2;
  Tensor k({static_cast<std::size_t>(size), static_cast<std::size_t>(size)});
  for (int a = -r; a <= r; ++a)
    for (int b = -r; b <= r; ++b) k[(a + r) * size + (b + r)] = std::exp(-(a * a + b * b) / (2.0 * std * std));
  normalize(k);
  return k;
}

Tensor motion_kernel(int size, double smooth_std, RandomSource& rs) {
  if (size <= 0 || size % 2 == 0) throw InvalidArgument("motion_kernel: size must be odd and positive");
  if (!(smooth_std > 0.0)) throw InvalidArgument("motion_kernel: std must be positive");
  const int r = size / 2;
  const int smooth_size = std::min(2 * static_cast<int>(std::ceil(3.0 * smooth_std)) + 1, size);
  const double limit = std::max(0.0, static_cast<double>(r - smooth_size / 2));

  Tensor path({static_cast<std::size_t>(size), static_cast<std::size_t>(size)});
  double px = 0.0, py = 0.0;
  double heading = 2.0 * std::numbers::pi * rs.next_uniform();
  auto deposit = [&](double x, double y) {
    const int i = static_cast<int>(std::lround(y)) + r;
    const int j = static_cast<int>(std::lround(x)) + r;
    path[i * size + j] += 1.0;
  };
  deposit(px, py);
  for (int step = 1; step < size; ++step) {
    heading += 0.5 * rs.next_normal_pair()[0];
    px = std::clamp(px + std::cos(heading), -limit, limit);
    py = std::clamp(py + std::sin(heading), -limit, limit);
    deposit(px, py);
  }
  Tensor smoothed = circular_conv2(path, gaussian_kernel(smooth_size, smooth_std));
  for (double& v : smoothed.data()) v = std::max(v, 0.0);
  normalize(smoothed);
  return smoothed;
}

}  // namespace ddiff
