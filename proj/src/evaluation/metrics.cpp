#include "ddiff/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "ddiff/errors.hpp"

namespace ddiff {
namespace {

Tensor to_unit_range(const Tensor& t) {
  Tensor out(t.shape());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = 0.5 * (t[i] + 1.0);
  return out;
}

std::vector<double> ssim_taps() {
  std::vector<double> taps(kSsimWindow);
  double total = 0.0;
  const int r = kSsimWindow / 2;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - r;
    total += taps[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
  }
  for (auto& v : taps) v /= total;
  return taps;
}

// Separable valid-mode filtering of one h x w plane.
std::vector<double> filter_valid(const double* plane, std::size_t h, std::size_t w, const std::vector<double>& taps) {
  const std::size_t n = taps.size();
  const std::size_t oh = h - n + 1, ow = w - n + 1;
  std::vector<double> rows(h * ow);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < ow; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += taps[k] * plane[i * w + j + k];
      rows[i * ow + j] = acc;
    }
  std::vector<double> out(oh * ow);
  for (std::size_t i = 0; i < oh; ++i)
    for (std::size_t j = 0; j < ow; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += taps[k] * rows[(i + k) * ow + j];
      out[i * ow + j] = acc;
    }
  return out;
}

}  // namespace

double psnr(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "psnr");
  if (a.size() == 0) throw InvalidArgument("psnr: empty images");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = 0.5 * (a[i] + 1.0) - 0.5 * (b[i] + 1.0);
    acc += d * d;
  }
  const double mse = acc / static_cast<double>(a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mse);
}

double ssim(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "ssim");
  const auto g = plane_geometry(a.shape());
  if (g.height < static_cast<std::size_t>(kSsimWindow) || g.width < static_cast<std::size_t>(kSsimWindow))
    throw InvalidArgument("ssim: image " + shape_string(a.shape()) + " smaller than the 11x11 window");
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  const auto taps = ssim_taps();
  const Tensor ua = to_unit_range(a), ub = to_unit_range(b);
  const std::size_t plane = g.height * g.width;
  std::vector<double> aa(plane), bb(plane), ab(plane);
  double total = 0.0;
  for (std::size_t c = 0; c < g.channels; ++c) {
    const double* pa = ua.data().data() + c * plane;
    const double* pb = ub.data().data() + c * plane;
    for (std::size_t i = 0; i < plane; ++i) {
      aa[i] = pa[i] * pa[i];
      bb[i] = pb[i] * pb[i];
      ab[i] = pa[i] * pb[i];
    }
    const auto mu_a = filter_valid(pa, g.height, g.width, taps);
    const auto mu_b = filter_valid(pb, g.height, g.width, taps);
    const auto e_aa = filter_valid(aa.data(), g.height, g.width, taps);
    const auto e_bb = filter_valid(bb.data(), g.height, g.width, taps);
    const auto e_ab = filter_valid(ab.data(), g.height, g.width, taps);
    double acc = 0.0;
    for (std::size_t k = 0; k < mu_a.size(); ++k) {
      const double va = e_aa[k] - mu_a[k] * mu_a[k];
      const double vb = e_bb[k] - mu_b[k] * mu_b[k];
      const double cov = e_ab[k] - mu_a[k] * mu_b[k];
      acc += ((2.0 * mu_a[k] * mu_b[k] + c1) * (2.0 * cov + c2)) /
             ((mu_a[k] * mu_a[k] + mu_b[k] * mu_b[k] + c1) * (va + vb + c2));
    }
    total += acc / static_cast<double>(mu_a.size());
  }
  return total / static_cast<double>(g.channels);
}

double residual(const ForwardModel& m, const Tensor& x, const Tensor& y) {
  require_shape(y, m.output_shape(), "residual");
  const double sq = squared_norm(y - m.apply(x));
  return sq / static_cast<double>(y.size()) - m.sigma() * m.sigma();
}

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate out;
  std::vector<double> kept;
  for (double v : values) {
    if (std::isinf(v)) ++out.excluded;
    else if (std::isfinite(v)) kept.push_back(v);
  }
  out.n = kept.size();
  if (kept.empty()) return out;
  double sum = 0.0;
  for (double v : kept) sum += v;
  out.mean = sum / static_cast<double>(kept.size());
  if (kept.size() == 1) {
    out.ci_half_width = 0.0;
    return out;
  }
  double ss = 0.0;
  for (double v : kept) ss += (v - out.mean) * (v - out.mean);
  const double sd = std::sqrt(ss / static_cast<double>(kept.size() - 1));
  out.ci_half_width = 1.96 * sd / std::sqrt(static_cast<double>(kept.size()));
  return out;
}

Aggregate MetricReport::psnr() const {
  std::vector<double> v;
  for (const auto& m : images) v.push_back(m.psnr);
  return aggregate(v);
}

Aggregate MetricReport::ssim() const {
  std::vector<double> v;
  for (const auto& m : images) v.push_back(m.ssim);
  return aggregate(v);
}

Aggregate MetricReport::residual() const {
  std::vector<double> v;
  for (const auto& m : images) v.push_back(m.residual);
  return aggregate(v);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_metrics_csv(std::ostream& os, const MetricReport& report) {
  os << "image_id,psnr,ssim,residual\n";
  for (const auto& m : report.images)
    os << m.image_id << ',' << format_double(m.psnr) << ',' << format_double(m.ssim) << ','
       << format_double(m.residual) << '\n';
  const auto p = report.psnr(), s = report.ssim(), r = report.residual();
  os << "mean," << format_double(p.mean) << ',' << format_double(s.mean) << ',' << format_double(r.mean) << '\n';
  os << "ci95," << format_double(p.ci_half_width) << ',' << format_double(s.ci_half_width) << ','
     << format_double(r.ci_half_width) << '\n';
}

std::string metrics_csv(const MetricReport& report) {
  std::ostringstream os;
  write_metrics_csv(os, report);
  return os.str();
}

}  // namespace ddiff
