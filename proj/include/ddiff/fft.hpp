#pragma once

#include <complex>
#include <span>

#include "ddiff/tensor.hpp"

namespace ddiff {

enum class FftDirection { forward, inverse };

/// In-place 1-D DFT of any length. Forward is unnormalized; inverse scales by 1/n.
/// Powers of two use iterative radix-2, other lengths go through Bluestein's chirp-z.
void fft1d(std::span<std::complex<double>> data, FftDirection direction);

/// 2-D DFT over the last two extents, each leading slice transformed independently.
ComplexTensor fft2(const ComplexTensor& x, FftDirection direction);
ComplexTensor fft2(const Tensor& x, FftDirection direction);

/// Circular 2-D convolution with a centered odd-sized kernel:
/// y[i,j] = sum_{a,b} k[a,b] * x[(i-a') mod H, (j-b') mod W], a' and b' measured from the kernel center.
Tensor circular_conv2(const Tensor& x, const Tensor& kernel);

/// Kernel mirrored through its center, so conv with it is the adjoint of conv with the original.
Tensor flip_kernel(const Tensor& kernel);

}  // namespace ddiff
