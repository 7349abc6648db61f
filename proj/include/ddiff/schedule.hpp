#pragma once

#include <vector>

namespace ddiff {

/// Diffusion coefficients over steps t = 1..T with the convention bar_alpha(0) = 1.
class Schedule {
 public:
  Schedule(int steps, double beta_min, double beta_max);

  int steps() const noexcept { return steps_; }
  double beta_min() const noexcept { return beta_min_; }
  double beta_max() const noexcept { return beta_max_; }

  double beta(int t) const;
  double alpha(int t) const;
  /// Cumulative product of alpha up to t; t = 0 returns exactly 1.
  double bar_alpha(int t) const;

 private:
  int steps_;
  double beta_min_;
  double beta_max_;
  std::vector<double> beta_;       // index t-1
  std::vector<double> bar_alpha_;  // index t, bar_alpha_[0] = 1
};

/// Linear beta from beta_min to beta_max over t = 1..T.
Schedule build_schedule(int steps, double beta_min, double beta_max);

/// Linear 1e-4..0.02 at T = 1000; other T rescale both endpoints by 1000/T.
Schedule default_schedule(int steps = 1000);

enum class SigmaKind { ddpm, full, zeta };

struct SigmaChoice {
  SigmaKind kind = SigmaKind::full;
  double zeta = 0.0;  // used by SigmaKind::zeta only
};

/// Noise scale for a reverse step from bar_alpha_t to bar_alpha_prev (the next,
/// less noisy point of the grid). Never exceeds sqrt(1 - bar_alpha_prev).
double sigma_between(double bar_alpha_t, double bar_alpha_prev, SigmaChoice choice);

/// sigma_between evaluated on consecutive steps t and t-1.
double sigma_t(const Schedule& s, int t, SigmaChoice choice);

/// Coefficient of the predicted-noise term, sqrt(1 - bar_alpha_prev - sigma^2),
/// clamped to zero when the radicand is negative within 1e-12.
double eps_hat_coefficient(double bar_alpha_prev, double sigma);

struct StepPolicy {
  double gamma0 = 1.0;
  int t_gamma = 0;
  int t0 = 0;
  SigmaChoice sigma;
};

void validate_policy(const StepPolicy& p, int steps);

/// Measurement step size: gamma0 * 3.3 above t_gamma, gamma0 * 0.1 at or below it.
double gamma_t(const StepPolicy& p, int t);

/// Strictly decreasing subsequence of nfe steps from T down to 1.
std::vector<int> time_grid(int steps, int nfe);

}  // namespace ddiff
