#include "ddiff/prior.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ddiff/errors.hpp"
#include "ddiff/random.hpp"

namespace ddiff {

GaussianPrior::GaussianPrior(Tensor m, Tensor v) : mean(std::move(m)), var(std::move(v)) {
  require_same_shape(mean, var, "gaussian prior");
  for (double s : var.data())
    if (!(s > 0.0)) throw InvalidArgument("gaussian prior: variances must be positive");
}

MixturePrior::MixturePrior(std::vector<double> w, std::vector<GaussianPrior> c)
    : weights(std::move(w)), components(std::move(c)) {
  if (components.empty()) throw InvalidArgument("mixture prior: need at least one component");
  if (weights.size() != components.size()) throw InvalidArgument("mixture prior: weight count mismatch");
  double total = 0.0;
  for (double wk : weights) {
    if (!(wk > 0.0)) throw InvalidArgument("mixture prior: weights must be positive");
    total += wk;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("mixture prior: weights must sum to 1");
  for (const auto& comp : components)
    if (comp.shape() != components.front().shape()) throw InvalidArgument("mixture prior: component shapes differ");
}

Tensor score_gaussian(const GaussianPrior& p, double bar_alpha, const Tensor& x) {
  require_same_shape(x, p.mean, "score_gaussian");
  const double root = std::sqrt(bar_alpha);
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cov = bar_alpha * p.var[i] + (1.0 - bar_alpha);
    out[i] = -(x[i] - root * p.mean[i]) / cov;
  }
  return out;
}

Tensor score_gaussian(const GaussianPrior& p, const Schedule& s, const Tensor& x, int t) {
  return score_gaussian(p, s.bar_alpha(t), x);
}

namespace {

double component_log_density(const GaussianPrior& g, double bar_alpha, const Tensor& x) {
  const double root = std::sqrt(bar_alpha);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cov = bar_alpha * g.var[i] + (1.0 - bar_alpha);
    const double d = x[i] - root * g.mean[i];
    acc += d * d / cov + std::log(2.0 * std::numbers::pi * cov);
  }
  return -0.5 * acc;
}

std::vector<double> log_joint(const MixturePrior& p, double bar_alpha, const Tensor& x) {
  std::vector<double> lj(p.components.size());
  for (std::size_t k = 0; k < lj.size(); ++k)
    lj[k] = std::log(p.weights[k]) + component_log_density(p.components[k], bar_alpha, x);
  return lj;
}

}  // namespace

std::vector<double> mixture_responsibilities(const MixturePrior& p, double bar_alpha, const Tensor& x) {
  require_same_shape(x, p.components.front().mean, "mixture responsibilities");
  auto lj = log_joint(p, bar_alpha, x);
  const double top = *std::max_element(lj.begin(), lj.end());
  double total = 0.0;
  for (auto& v : lj) total += (v = std::exp(v - top));
  for (auto& v : lj) v /= total;
  return lj;
}

double mixture_log_density(const MixturePrior& p, double bar_alpha, const Tensor& x) {
  require_same_shape(x, p.components.front().mean, "mixture log density");
  const auto lj = log_joint(p, bar_alpha, x);
  const double top = *std::max_element(lj.begin(), lj.end());
  double total = 0.0;
  for (double v : lj) total += std::exp(v - top);
  return top + std::log(total);
}

Tensor score_mixture(const MixturePrior& p, double bar_alpha, const Tensor& x) {
  const auto resp = mixture_responsibilities(p, bar_alpha, x);
  Tensor out(x.shape());
  for (std::size_t k = 0; k < resp.size(); ++k) {
    if (resp[k] == 0.0) continue;
    const Tensor sk = score_gaussian(p.components[k], bar_alpha, x);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += resp[k] * sk[i];
  }
  return out;
}

Tensor score_mixture(const MixturePrior& p, const Schedule& s, const Tensor& x, int t) {
  return score_mixture(p, s.bar_alpha(t), x);
}

Tensor GaussianScore::score(const Tensor& x, int, double bar_alpha) { return score_gaussian(prior_, bar_alpha, x); }

Tensor MixtureScore::score(const Tensor& x, int, double bar_alpha) { return score_mixture(prior_, bar_alpha, x); }

Tensor tweedie_denoise(ScoreModel& model, const Tensor& x_t, int t, double bar_alpha) {
  if (!(bar_alpha > 0.0)) throw InvalidArgument("tweedie_denoise: bar_alpha must be positive");
  const Tensor s = model.score(x_t, t, bar_alpha);
  require_same_shape(s, x_t, "tweedie_denoise score");
  const double inv_root = 1.0 / std::sqrt(bar_alpha);
  const double noise = 1.0 - bar_alpha;
  Tensor out(x_t.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (x_t[i] + noise * s[i]) * inv_root;
  DDIFF_CHECK_FINITE(out, "tweedie_denoise");
  return out;
}

Tensor tweedie_denoise(ScoreModel& model, const Schedule& s, const Tensor& x_t, int t) {
  if (t < 1 || t > s.steps()) throw InvalidArgument("tweedie_denoise: step " + std::to_string(t) + " out of range");
  return tweedie_denoise(model, x_t, t, s.bar_alpha(t));
}

GaussianPrior toy_gaussian_prior(const Shape& shape, double amplitude, double variance) {
  if (!(variance > 0.0) || !std::isfinite(amplitude))
    throw InvalidArgument("toy_gaussian_prior: need variance > 0 and finite amplitude");
  const auto g = plane_geometry(shape);
  Tensor mean(shape), var(shape);
  for (std::size_t c = 0; c < g.channels; ++c)
    for (std::size_t i = 0; i < g.height; ++i)
      for (std::size_t j = 0; j < g.width; ++j) {
        const double di = static_cast<double>(i), dj = static_cast<double>(j), dc = static_cast<double>(c);
        mean.at(c, i, j) = amplitude * std::tanh(3 * std::sin(0.4 * di + 0.5 + dc) * std::cos(0.3 * dj - 0.4));
        var.at(c, i, j) = variance * (0.75 + 0.125 * static_cast<double>((i + j) % 3));
      }
  return GaussianPrior(std::move(mean), std::move(var));
}

Tensor sample_prior(const GaussianPrior& p, RandomSource& rs) {
  Tensor x = gaussian_draw(rs, p.shape());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = p.mean[i] + std::sqrt(p.var[i]) * x[i];
  return x;
}

Tensor sample_prior(const MixturePrior& p, RandomSource& rs) {
  const double u = rs.next_uniform();
  double acc = 0.0;
  std::size_t pick = p.components.size() - 1;
  for (std::size_t k = 0; k < p.weights.size(); ++k) {
    acc += p.weights[k];
    if (u <= acc) {
      pick = k;
      break;
    }
  }
  return sample_prior(p.components[pick], rs);
}

}  // namespace ddiff
