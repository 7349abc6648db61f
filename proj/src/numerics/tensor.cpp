#include "ddiff/tensor.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>

#include "ddiff/errors.hpp"

namespace ddiff {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ')';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {
  if (!std::isfinite(fill)) throw InvalidArgument("tensor fill value must be finite");
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_))
    throw InvalidArgument("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                          shape_string(shape_));
  if (!all_finite()) throw InvalidArgument("tensor data contains non-finite values");
}

double& Tensor::at(std::size_t c, std::size_t i, std::size_t j) {
  assert(rank() == 3);
  return data_[(c * shape_[1] + i) * shape_[2] + j];
}

double Tensor::at(std::size_t c, std::size_t i, std::size_t j) const {
  assert(rank() == 3);
  return data_[(c * shape_[1] + i) * shape_[2] + j];
}

Tensor& Tensor::operator+=(const Tensor& rhs) {
  require_same_shape(*this, rhs, "tensor +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& rhs) {
  require_same_shape(*this, rhs, "tensor -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(double s) {
  for (auto& v : data_) v *= s;
  return *this;
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor operator+(Tensor lhs, const Tensor& rhs) { return lhs += rhs; }
Tensor operator-(Tensor lhs, const Tensor& rhs) { return lhs -= rhs; }
Tensor operator*(double s, Tensor t) { return t *= s; }

Tensor axpy(double a, const Tensor& x, const Tensor& y) {
  require_same_shape(x, y, "axpy");
  Tensor out(y);
  auto o = out.data();
  auto xs = x.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += a * xs[i];
  return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  Tensor out(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

double dot(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(const Tensor& t) {
  double s = 0.0;
  for (double v : t.data()) s += v * v;
  return s;
}

double norm2(const Tensor& t) { return std::sqrt(squared_norm(t)); }

double max_abs(const Tensor& t) {
  double m = 0.0;
  for (double v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape())
    throw InvalidArgument(std::string(what) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                          shape_string(b.shape()));
}

void require_shape(const Tensor& t, const Shape& shape, const char* what) {
  if (t.shape() != shape)
    throw InvalidArgument(std::string(what) + ": expected shape " + shape_string(shape) + ", got " +
                          shape_string(t.shape()));
}

PlaneGeometry plane_geometry(const Shape& shape) {
  if (shape.size() < 2) throw InvalidArgument("expected at least a 2-D plane, got shape " + shape_string(shape));
  PlaneGeometry g{1, shape[shape.size() - 2], shape[shape.size() - 1]};
  for (std::size_t i = 0; i + 2 < shape.size(); ++i) g.channels *= shape[i];
  return g;
}

ComplexTensor::ComplexTensor(Shape shape) : shape_(std::move(shape)), data_(shape_size(shape_)) {}

ComplexTensor::ComplexTensor(const Tensor& real) : shape_(real.shape()), data_(real.size()) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] = {real[i], 0.0};
}

Tensor ComplexTensor::real() const {
  Tensor out(shape_);
  for (std::size_t i = 0; i < data_.size(); ++i) out[i] = data_[i].real();
  return out;
}

Tensor ComplexTensor::magnitude() const {
  Tensor out(shape_);
  for (std::size_t i = 0; i < data_.size(); ++i) out[i] = std::abs(data_[i]);
  return out;
}

bool ComplexTensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](const std::complex<double>& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

#ifndef NDEBUG
void debug_check_finite(const Tensor& t, const char* where) {
  if (!t.all_finite()) throw NumericalError(std::string("non-finite value produced by ") + where);
}
#endif

}  // namespace ddiff
