#include "ddiff/schedule.hpp"

#include <cmath>
#include <string>

#include "ddiff/errors.hpp"

namespace ddiff {

Schedule::Schedule(int steps, double beta_min, double beta_max)
    : steps_(steps), beta_min_(beta_min), beta_max_(beta_max) {
  if (steps <= 0) throw InvalidArgument("schedule: step count must be positive");
  if (!(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0))
    throw InvalidArgument("schedule: need 0 < beta_min <= beta_max < 1");
  beta_.resize(steps);
  bar_alpha_.resize(steps + 1);
  bar_alpha_[0] = 1.0;
  for (int t = 1; t <= steps; ++t) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(t - 1) / static_cast<double>(steps - 1);
    beta_[t - 1] = beta_min + frac * (beta_max - beta_min);
    bar_alpha_[t] = bar_alpha_[t - 1] * (1.0 - beta_[t - 1]);
  }
}

double Schedule::beta(int t) const {
  if (t < 1 || t > steps_) throw InvalidArgument("schedule: step " + std::to_string(t) + " out of range");
  return beta_[t - 1];
}

double Schedule::alpha(int t) const { return 1.0 - beta(t); }

double Schedule::bar_alpha(int t) const {
  if (t < 0 || t > steps_) throw InvalidArgument("schedule: step " + std::to_string(t) + " out of range");
  return bar_alpha_[t];
}

Schedule build_schedule(int steps, double beta_min, double beta_max) { return Schedule(steps, beta_min, beta_max); }

Schedule default_schedule(int steps) {
  if (steps <= 0) throw InvalidArgument("schedule: step count must be positive");
  const double scale = 1000.0 / static_cast<double>(steps);
  return Schedule(steps, 1e-4 * scale, 0.02 * scale);
}

double sigma_between(double bar_alpha_t, double bar_alpha_prev, SigmaChoice choice) {
  const double headroom = 1.0 - bar_alpha_prev;
  switch (choice.kind) {
    case SigmaKind::ddpm: {
      const double denom = 1.0 - bar_alpha_t;
      if (denom <= 0.0) return 0.0;
      const double s = std::sqrt(headroom / denom) * std::sqrt(1.0 - bar_alpha_t / bar_alpha_prev);
      return std::min(s, std::sqrt(headroom));
    }
    case SigmaKind::full:
      return std::sqrt(headroom);
    case SigmaKind::zeta:
      if (choice.zeta < 0.0 || choice.zeta > 1.0) throw InvalidArgument("sigma: zeta must lie in [0, 1]");
      return std::sqrt(choice.zeta * headroom);
  }
  throw InvalidArgument("sigma: unknown choice");
}

double sigma_t(const Schedule& s, int t, SigmaChoice choice) {
  if (t < 1 || t > s.steps()) throw InvalidArgument("sigma_t: step " + std::to_string(t) + " out of range");
  return sigma_between(s.bar_alpha(t), s.bar_alpha(t - 1), choice);
}

double eps_hat_coefficient(double bar_alpha_prev, double sigma) {
  const double r = 1.0 - bar_alpha_prev - sigma * sigma;
  if (r < -1e-12) throw NumericalError("noise budget exceeded: 1 - bar_alpha_prev - sigma^2 = " + std::to_string(r));
  return r > 0.0 ? std::sqrt(r) : 0.0;
}

void validate_policy(const StepPolicy& p, int steps) {
  if (!(p.gamma0 >= 0.0)) throw InvalidArgument("policy: gamma0 must be non-negative");
  if (p.t_gamma < 0 || p.t_gamma > steps) throw InvalidArgument("policy: t_gamma out of [0, T]");
  if (p.t0 < 0 || p.t0 > steps) throw InvalidArgument("policy: t0 out of [0, T]");
  if (p.sigma.kind == SigmaKind::zeta && (p.sigma.zeta < 0.0 || p.sigma.zeta > 1.0))
    throw InvalidArgument("policy: zeta must lie in [0, 1]");
}

double gamma_t(const StepPolicy& p, int t) { return p.gamma0 * (t > p.t_gamma ? 3.3 : 0.1); }

std::vector<int> time_grid(int steps, int nfe) {
  if (steps <= 0) throw InvalidArgument("time_grid: step count must be positive");
  if (nfe <= 0 || nfe > steps) throw InvalidArgument("time_grid: need 1 <= nfe <= T");
  std::vector<int> grid(nfe);
  if (nfe == 1) {
    grid[0] = steps;
    return grid;
  }
  // Round-half-up of T - k (T-1)/(nfe-1) in exact integer arithmetic.
  const long long span = steps - 1, denom = nfe - 1;
  for (long long k = 0; k < nfe; ++k) grid[k] = steps - static_cast<int>((2 * k * span + denom) / (2 * denom));
  return grid;
}

}  // namespace ddiff
