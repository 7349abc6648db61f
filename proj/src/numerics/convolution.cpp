#include <string>

#include "ddiff/errors.hpp"
#include "ddiff/fft.hpp"

namespace ddiff {

Tensor circular_conv2(const Tensor& x, const Tensor& kernel) {
  const auto g = plane_geometry(x.shape());
  if (kernel.rank() != 2) throw InvalidArgument("circular_conv2: kernel must be rank 2");
  const std::size_t kh = kernel.extent(0), kw = kernel.extent(1);
  if (kh % 2 == 0 || kw % 2 == 0)
    throw InvalidArgument("circular_conv2: kernel extents must be odd, got " + shape_string(kernel.shape()));
  if (kh > g.height || kw > g.width)
    throw InvalidArgument("circular_conv2: kernel " + shape_string(kernel.shape()) + " larger than image " +
                          shape_string(x.shape()));

  const auto H = static_cast<long>(g.height), W = static_cast<long>(g.width);
  const long rh = static_cast<long>(kh / 2), rw = static_cast<long>(kw / 2);
  Tensor y(x.shape());
  auto in = x.data();
  auto out = y.data();
  auto k = kernel.data();
  for (std::size_t c = 0; c < g.channels; ++c) {
    const std::size_t base = c * g.height * g.width;
    for (long i = 0; i < H; ++i) {
      for (long j = 0; j < W; ++j) {
        double acc = 0.0;
        for (long a = 0; a < static_cast<long>(kh); ++a) {
          const long si = ((i - (a - rh)) % H + H) % H;
          for (long b = 0; b < static_cast<long>(kw); ++b) {
            const long sj = ((j - (b - rw)) % W + W) % W;
            acc += k[a * kw + b] * in[base + si * W + sj];
          }
        }
        out[base + i * W + j] = acc;
      }
    }
  }
  return y;
}

Tensor flip_kernel(const Tensor& kernel) {
  if (kernel.rank() != 2) throw InvalidArgument("flip_kernel: kernel must be rank 2");
  const std::size_t kh = kernel.extent(0), kw = kernel.extent(1);
  Tensor out(kernel.shape());
  for (std::size_t a = 0; a < kh; ++a)
    for (std::size_t b = 0; b < kw; ++b) out[a * kw + b] = kernel[(kh - 1 - a) * kw + (kw - 1 - b)];
  return out;
}

}  // namespace ddiff
