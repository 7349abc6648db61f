#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "ddiff/operators.hpp"
#include "ddiff/tensor.hpp"

namespace ddiff {

/// PSNR in dB of images in [-1, 1], measured after mapping to [0, 1] with peak 1.
/// Identical inputs return +infinity.
double psnr(const Tensor& a, const Tensor& b);

/// Mean local SSIM over 11x11 Gaussian windows (std 1.5, valid placement),
/// C1 = 0.01^2, C2 = 0.03^2, averaged over channels; inputs mapped to [0, 1].
double ssim(const Tensor& a, const Tensor& b);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// Per-element ||y - A(x)||^2 minus sigma^2; zero in expectation at the noise floor.
double residual(const ForwardModel& m, const Tensor& x, const Tensor& y);

struct ImageMetrics {
  std::string image_id;
  double psnr = std::numeric_limits<double>::quiet_NaN();
  double ssim = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
};

/// Mean and 95% CI half-width (1.96 sample-std / sqrt(n)) over finite values.
/// Infinite PSNR sentinels are excluded and counted separately.
struct Aggregate {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double ci_half_width = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;
  std::size_t excluded = 0;
};
Aggregate aggregate(const std::vector<double>& values);

struct MetricReport {
  std::vector<ImageMetrics> images;
  Aggregate psnr() const;
  Aggregate ssim() const;
  Aggregate residual() const;
};

/// CSV `image_id,psnr,ssim,residual`, one row per image, then `mean` and
/// `ci95` footer rows.
void write_metrics_csv(std::ostream& os, const MetricReport& report);
std::string metrics_csv(const MetricReport& report);

/// %.17g, with inf/nan spelled as "inf", "-inf", "nan".
std::string format_double(double v);

}  // namespace ddiff
