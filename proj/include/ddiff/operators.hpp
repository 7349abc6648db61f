#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "ddiff/random.hpp"
#include "ddiff/tensor.hpp"

namespace ddiff {

/// Measurement operator A with noise level sigma, y = A(x) + sigma * eps.
/// Implementations are immutable; every method is safe to call concurrently.
class ForwardModel {
 public:
  ForwardModel(Shape input_shape, Shape output_shape, double sigma);
  virtual ~ForwardModel() = default;

  virtual std::string kind() const = 0;
  virtual bool is_linear() const = 0;

  const Shape& input_shape() const noexcept { return input_shape_; }
  const Shape& output_shape() const noexcept { return output_shape_; }
  double sigma() const noexcept { return sigma_; }

  Tensor apply(const Tensor& x) const;
  /// Gradient of ||y - A(v)||^2 with respect to v.
  Tensor grad_data(const Tensor& v, const Tensor& y) const;
  /// A^T w for linear kinds; throws InvalidArgument for nonlinear ones.
  Tensor adjoint(const Tensor& w) const;
  /// A(x) + sigma * eps, eps drawn from rs.
  Tensor degrade(const Tensor& x, RandomSource& rs) const;

 protected:
  virtual Tensor apply_impl(const Tensor& x) const = 0;
  /// Default: 2 A^T (A v - y); nonlinear kinds override.
  virtual Tensor grad_impl(const Tensor& v, const Tensor& y) const;
  virtual Tensor adjoint_impl(const Tensor& w) const;

 private:
  Shape input_shape_;
  Shape output_shape_;
  double sigma_;
};

using ForwardModelPtr = std::shared_ptr<const ForwardModel>;

class IdentityOperator final : public ForwardModel {
 public:
  IdentityOperator(Shape shape, double sigma) : ForwardModel(shape, shape, sigma) {}
  std::string kind() const override { return "identity"; }
  bool is_linear() const override { return true; }

 protected:
  Tensor apply_impl(const Tensor& x) const override { return x; }
  Tensor adjoint_impl(const Tensor& w) const override { return w; }
};

/// Non-overlapping factor x factor block mean.
class SuperResolution final : public ForwardModel {
 public:
  SuperResolution(Shape input_shape, int factor, double sigma);
  std::string kind() const override { return "sr"; }
  bool is_linear() const override { return true; }
  int factor() const noexcept { return factor_; }

 protected:
  Tensor apply_impl(const Tensor& x) const override;
  Tensor adjoint_impl(const Tensor& w) const override;

 private:
  int factor_;
};

/// Elementwise 0/1 mask; dropped entries read as exact zeros.
class MaskOperator final : public ForwardModel {
 public:
  MaskOperator(std::string kind, Tensor mask, double sigma);
  std::string kind() const override { return kind_; }
  bool is_linear() const override { return true; }
  const Tensor& mask() const noexcept { return mask_; }

 protected:
  Tensor apply_impl(const Tensor& x) const override { return hadamard(x, mask_); }
  Tensor adjoint_impl(const Tensor& w) const override { return hadamard(w, mask_); }

 private:
  std::string kind_;
  Tensor mask_;
};

/// Circular convolution with a normalized odd-sized kernel.
class BlurOperator final : public ForwardModel {
 public:
  BlurOperator(std::string kind, Shape shape, Tensor kernel, double sigma);
  std::string kind() const override { return kind_; }
  bool is_linear() const override { return true; }
  const Tensor& kernel() const noexcept { return kernel_; }

 protected:
  Tensor apply_impl(const Tensor& x) const override;
  Tensor adjoint_impl(const Tensor& w) const override;

 private:
  std::string kind_;
  Tensor kernel_;
  Tensor flipped_;
};

/// Fourier magnitude of the image zero-padded (centered) into an
/// oversample-times larger canvas, per channel.
class PhaseRetrieval final : public ForwardModel {
 public:
  PhaseRetrieval(Shape input_shape, double oversample, double sigma);
  std::string kind() const override { return "phase_retrieval"; }
  bool is_linear() const override { return false; }

  static constexpr double kMagnitudeFloor = 1e-12;

 protected:
  Tensor apply_impl(const Tensor& x) const override;
  Tensor grad_impl(const Tensor& v, const Tensor& y) const override;

 private:
  Tensor pad(const Tensor& x) const;
  Tensor crop(const Tensor& canvas) const;

  std::size_t offset_h_ = 0;
  std::size_t offset_w_ = 0;
};

/// clamp(scale * x, -1, 1).
class HighDynamicRange final : public ForwardModel {
 public:
  HighDynamicRange(Shape shape, double scale, double sigma);
  std::string kind() const override { return "hdr"; }
  bool is_linear() const override { return false; }
  double scale() const noexcept { return scale_; }

 protected:
  Tensor apply_impl(const Tensor& x) const override;
  Tensor grad_impl(const Tensor& v, const Tensor& y) const override;

 private:
  double scale_;
};

/// Task parameters in the vocabulary of the `task.*` config keys.
struct TaskSpec {
  std::string kind = "identity";  // identity|sr|inpaint_box|inpaint_random|gaussian_blur|motion_blur|phase_retrieval|hdr
  int factor = 4;
  std::size_t box_top = 0;
  std::size_t box_left = 0;
  std::size_t box_size = 0;
  double keep_prob = 0.3;
  int kernel_size = 61;
  double kernel_std = 3.0;
  double oversample = 2.0;
  double scale = 2.0;
  double sigma = 0.05;
  std::uint64_t mask_seed = 0;
};

/// Builds a configured operator. Random masks and motion kernels draw from
/// RandomSource(mask_seed, streams::operator_setup).
ForwardModelPtr make_operator(const TaskSpec& spec, const Shape& input_shape);

/// Normalized isotropic Gaussian taps of odd size.
Tensor gaussian_kernel(int size, double std);
/// Seeded random-walk trajectory of `size` steps, smoothed by a Gaussian of
/// std `smooth_std`, normalized to unit sum.
Tensor motion_kernel(int size, double smooth_std, RandomSource& rs);

}  // namespace ddiff
