#include "ddiff/operators.hpp"

#include <algorithm>
#include <cmath>

#include "ddiff/errors.hpp"
#include "ddiff/fft.hpp"

namespace ddiff {

ForwardModel::ForwardModel(Shape input_shape, Shape output_shape, double sigma)
    : input_shape_(std::move(input_shape)), output_shape_(std::move(output_shape)), sigma_(sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("forward model: sigma must be >= 0");
}

Tensor ForwardModel::apply(const Tensor& x) const {
  require_shape(x, input_shape_, "apply");
  Tensor out = apply_impl(x);
  DDIFF_CHECK_FINITE(out, "ForwardModel::apply");
  return out;
}

Tensor ForwardModel::grad_data(const Tensor& v, const Tensor& y) const {
  require_shape(v, input_shape_, "grad_data input");
  require_shape(y, output_shape_, "grad_data measurement");
  Tensor out = grad_impl(v, y);
  DDIFF_CHECK_FINITE(out, "ForwardModel::grad_data");
  return out;
}

Tensor ForwardModel::adjoint(const Tensor& w) const {
  if (!is_linear()) throw InvalidArgument("adjoint: operator '" + kind() + "' is nonlinear");
  require_shape(w, output_shape_, "adjoint");
  return adjoint_impl(w);
}

Tensor ForwardModel::degrade(const Tensor& x, RandomSource& rs) const {
  Tensor y = apply(x);
  if (sigma_ == 0.0) return y;
  const Tensor eps = gaussian_draw(rs, y.shape());
  return axpy(sigma_, eps, y);
}

Tensor ForwardModel::grad_impl(const Tensor& v, const Tensor& y) const {
  Tensor r = apply_impl(v);
  r -= y;
  Tensor g = adjoint_impl(r);
  g *= 2.0;
  return g;
}

Tensor ForwardModel::adjoint_impl(const Tensor&) const {
  throw InvalidArgument("adjoint: operator '" + kind() + "' is nonlinear");
}

// --- super-resolution -------------------------------------------------------

namespace {
Shape downsampled(Shape shape, int factor) {
  if (factor <= 0) throw InvalidArgument("sr: factor must be positive");
  const auto g = plane_geometry(shape);
  const auto f = static_cast<std::size_t>(factor);
  if (g.height % f != 0 || g.width % f != 0)
    throw InvalidArgument("sr: factor " + std::to_string(factor) + " does not divide image " + shape_string(shape));
  shape[shape.size() - 2] /= f;
  shape[shape.size() - 1] /= f;
  return shape;
}
}  // namespace

SuperResolution::SuperResolution(Shape input_shape, int factor, double sigma)
    : ForwardModel(input_shape, downsampled(input_shape, factor), sigma), factor_(factor) {}

Tensor SuperResolution::apply_impl(const Tensor& x) const {
  const auto g = plane_geometry(x.shape());
  const auto f = static_cast<std::size_t>(factor_);
  const std::size_t h = g.height / f, w = g.width / f;
  const double inv = 1.0 / static_cast<double>(f * f);
  Tensor y(output_shape());
  for (std::size_t c = 0; c < g.channels; ++c)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) {
        double acc = 0.0;
        for (std::size_t a = 0; a < f; ++a)
          for (std::size_t b = 0; b < f; ++b) acc += x[(c * g.height + i * f + a) * g.width + j * f + b];
        y[(c * h + i) * w + j] = acc * inv;
      }
  return y;
}

Tensor SuperResolution::adjoint_impl(const Tensor& w) const {
  const auto g = plane_geometry(input_shape());
  const auto f = static_cast<std::size_t>(factor_);
  const std::size_t h = g.height / f, wd = g.width / f;
  const double inv = 1.0 / static_cast<double>(f * f);
  Tensor x(input_shape());
  for (std::size_t c = 0; c < g.channels; ++c)
    for (std::size_t i = 0; i < g.height; ++i)
      for (std::size_t j = 0; j < g.width; ++j) x[(c * g.height + i) * g.width + j] = w[(c * h + i / f) * wd + j / f] * inv;
  return x;
}

// --- masks ------------------------------------------------------------------

MaskOperator::MaskOperator(std::string kind, Tensor mask, double sigma)
    : ForwardModel(mask.shape(), mask.shape(), sigma), kind_(std::move(kind)), mask_(std::move(mask)) {
  for (double m : mask_.data())
    if (m != 0.0 && m != 1.0) throw InvalidArgument("mask entries must be 0 or 1");
}

// --- blur -------------------------------------------------------------------

BlurOperator::BlurOperator(std::string kind, Shape shape, Tensor kernel, double sigma)
    : ForwardModel(shape, shape, sigma), kind_(std::move(kind)), kernel_(std::move(kernel)), flipped_(flip_kernel(kernel_)) {
  const auto g = plane_geometry(shape);
  if (kernel_.extent(0) % 2 == 0 || kernel_.extent(1) % 2 == 0 || kernel_.extent(0) > g.height ||
      kernel_.extent(1) > g.width)
    throw InvalidArgument("blur: kernel " + shape_string(kernel_.shape()) + " must be odd and fit image " +
                          shape_string(shape));
}

Tensor BlurOperator::apply_impl(const Tensor& x) const { return circular_conv2(x, kernel_); }
Tensor BlurOperator::adjoint_impl(const Tensor& w) const { return circular_conv2(w, flipped_); }

// --- phase retrieval ----------------------------------------------------------

namespace {
Shape oversampled(Shape shape, double oversample) {
  if (!(oversample >= 1.0)) throw InvalidArgument("phase_retrieval: oversample must be >= 1");
  const auto g = plane_geometry(shape);
  if (g.height == 0 || g.width == 0) throw InvalidArgument("phase_retrieval: empty image");
  shape[shape.size() - 2] = static_cast<std::size_t>(std::lround(oversample * static_cast<double>(g.height)));
  shape[shape.size() - 1] = static_cast<std::size_t>(std::lround(oversample * static_cast<double>(g.width)));
  return shape;
}
}  // namespace

PhaseRetrieval::PhaseRetrieval(Shape input_shape, double oversample, double sigma)
    : ForwardModel(input_shape, oversampled(input_shape, oversample), sigma) {
  const auto in = plane_geometry(this->input_shape());
  const auto out = plane_geometry(output_shape());
  offset_h_ = (out.height - in.height) / 2;
  offset_w_ = (out.width - in.width) / 2;
}

Tensor PhaseRetrieval::pad(const Tensor& x) const {
  const auto in = plane_geometry(input_shape());
  const auto out = plane_geometry(output_shape());
  Tensor canvas(output_shape());
  for (std::size_t c = 0; c < in.channels; ++c)
    for (std::size_t i = 0; i < in.height; ++i)
      for (std::size_t j = 0; j < in.width; ++j)
        canvas[(c * out.height + i + offset_h_) * out.width + j + offset_w_] = x[(c * in.height + i) * in.width + j];
  return canvas;
}

Tensor PhaseRetrieval::crop(const Tensor& canvas) const {
  const auto in = plane_geometry(input_shape());
  const auto out = plane_geometry(output_shape());
  Tensor x(input_shape());
  for (std::size_t c = 0; c < in.channels; ++c)
    for (std::size_t i = 0; i < in.height; ++i)
      for (std::size_t j = 0; j < in.width; ++j)
        x[(c * in.height + i) * in.width + j] = canvas[(c * out.height + i + offset_h_) * out.width + j + offset_w_];
  return x;
}

Tensor PhaseRetrieval::apply_impl(const Tensor& x) const { return fft2(pad(x), FftDirection::forward).magnitude(); }

Tensor PhaseRetrieval::grad_impl(const Tensor& v, const Tensor& y) const {
  ComplexTensor u = fft2(pad(v), FftDirection::forward);
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double mag = std::abs(u[k]);
    u[k] = mag < kMagnitudeFloor ? std::complex<double>{} : u[k] * ((mag - y[k]) / mag);
  }
  // F^H = N * F^{-1} for the unnormalized forward transform.
  const auto g = plane_geometry(output_shape());
  Tensor back = fft2(u, FftDirection::inverse).real();
  back *= 2.0 * static_cast<double>(g.height * g.width);
  return crop(back);
}

// --- HDR --------------------------------------------------------------------

HighDynamicRange::HighDynamicRange(Shape shape, double scale, double sigma)
    : ForwardModel(shape, shape, sigma), scale_(scale) {
  if (!(scale > 0.0)) throw InvalidArgument("hdr: scale must be positive");
}

Tensor HighDynamicRange::apply_impl(const Tensor& x) const {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::clamp(scale_ * x[i], -1.0, 1.0);
  return y;
}

Tensor HighDynamicRange::grad_impl(const Tensor& v, const Tensor& y) const {
  Tensor g(v.shape());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double sv = scale_ * v[i];
    g[i] = std::abs(sv) < 1.0 ? -2.0 * scale_ * (y[i] - sv) : 0.0;
  }
  return g;
}

// --- factory ----------------------------------------------------------------

ForwardModelPtr make_operator(const TaskSpec& spec, const Shape& input_shape) {
  const auto g = plane_geometry(input_shape);
  const std::string& kind = spec.kind;
  if (kind == "identity") return std::make_shared<IdentityOperator>(input_shape, spec.sigma);
  if (kind == "sr") return std::make_shared<SuperResolution>(input_shape, spec.factor, spec.sigma);
  if (kind == "inpaint_box") {
    if (spec.box_size == 0 || spec.box_top + spec.box_size > g.height || spec.box_left + spec.box_size > g.width)
      throw InvalidArgument("inpaint_box: box (" + std::to_string(spec.box_top) + "," + std::to_string(spec.box_left) +
                            "," + std::to_string(spec.box_size) + ") does not fit image " + shape_string(input_shape));
    Tensor mask(input_shape, 1.0);
    for (std::size_t c = 0; c < g.channels; ++c)
      for (std::size_t i = spec.box_top; i < spec.box_top + spec.box_size; ++i)
        for (std::size_t j = spec.box_left; j < spec.box_left + spec.box_size; ++j) mask[(c * g.height + i) * g.width + j] = 0.0;
    return std::make_shared<MaskOperator>("inpaint_box", std::move(mask), spec.sigma);
  }
  if (kind == "inpaint_random") {
    if (!(spec.keep_prob >= 0.0 && spec.keep_prob <= 1.0))
      throw InvalidArgument("inpaint_random: keep_prob must lie in [0, 1]");
    RandomSource rs(spec.mask_seed, streams::operator_setup);
    std::vector<double> pixel(g.height * g.width);
    for (auto& p : pixel) p = rs.next_uniform() <= spec.keep_prob ? 1.0 : 0.0;
    Tensor mask(input_shape);
    for (std::size_t c = 0; c < g.channels; ++c)
      for (std::size_t k = 0; k < pixel.size(); ++k) mask[c * pixel.size() + k] = pixel[k];
    return std::make_shared<MaskOperator>("inpaint_random", std::move(mask), spec.sigma);
  }
  if (kind == "gaussian_blur")
    return std::make_shared<BlurOperator>("gaussian_blur", input_shape, gaussian_kernel(spec.kernel_size, spec.kernel_std),
                                          spec.sigma);
  if (kind == "motion_blur") {
    RandomSource rs(spec.mask_seed, streams::operator_setup);
    return std::make_shared<BlurOperator>("motion_blur", input_shape,
                                          motion_kernel(spec.kernel_size, spec.kernel_std, rs), spec.sigma);
  }
  if (kind == "phase_retrieval") return std::make_shared<PhaseRetrieval>(input_shape, spec.oversample, spec.sigma);
  if (kind == "hdr") return std::make_shared<HighDynamicRange>(input_shape, spec.scale, spec.sigma);
  throw InvalidArgument("unknown task kind '" + kind + "'");
}

}  // namespace ddiff
