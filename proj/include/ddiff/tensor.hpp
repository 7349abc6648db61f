#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ddiff {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles with an arbitrary-rank shape.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape()); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  /// Element access for (channel, row, col) tensors.
  double& at(std::size_t c, std::size_t i, std::size_t j);
  double at(std::size_t c, std::size_t i, std::size_t j) const;

  Tensor& operator+=(const Tensor& rhs);
  Tensor& operator-=(const Tensor& rhs);
  Tensor& operator*=(double s);

  bool all_finite() const noexcept;
  bool operator==(const Tensor& rhs) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

Tensor operator+(Tensor lhs, const Tensor& rhs);
Tensor operator-(Tensor lhs, const Tensor& rhs);
Tensor operator*(double s, Tensor t);

/// a*x + y, elementwise.
Tensor axpy(double a, const Tensor& x, const Tensor& y);
Tensor hadamard(const Tensor& a, const Tensor& b);

double dot(const Tensor& a, const Tensor& b);
double norm2(const Tensor& t);
double squared_norm(const Tensor& t);
double max_abs(const Tensor& t);
double max_abs_diff(const Tensor& a, const Tensor& b);

void require_same_shape(const Tensor& a, const Tensor& b, const char* what);
void require_shape(const Tensor& t, const Shape& shape, const char* what);

/// Image-plane view of a tensor: leading extents collapse into a channel count.
struct PlaneGeometry {
  std::size_t channels;
  std::size_t height;
  std::size_t width;
};
PlaneGeometry plane_geometry(const Shape& shape);

/// Complex array sharing Tensor's shape rules; storage is interleaved re/im.
class ComplexTensor {
 public:
  ComplexTensor() = default;
  explicit ComplexTensor(Shape shape);
  explicit ComplexTensor(const Tensor& real);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::span<std::complex<double>> data() noexcept { return data_; }
  std::span<const std::complex<double>> data() const noexcept { return data_; }
  std::complex<double>& operator[](std::size_t i) noexcept { return data_[i]; }
  const std::complex<double>& operator[](std::size_t i) const noexcept { return data_[i]; }

  Tensor real() const;
  Tensor magnitude() const;
  bool all_finite() const noexcept;

 private:
  Shape shape_;
  std::vector<std::complex<double>> data_;
};

#ifndef NDEBUG
void debug_check_finite(const Tensor& t, const char* where);
#define DDIFF_CHECK_FINITE(t, where) ::ddiff::debug_check_finite((t), (where))
#else
#define DDIFF_CHECK_FINITE(t, where) ((void)0)
#endif

}  // namespace ddiff
