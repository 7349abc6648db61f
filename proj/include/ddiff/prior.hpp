#pragma once

#include <memory>
#include <vector>

#include "ddiff/schedule.hpp"
#include "ddiff/tensor.hpp"

namespace ddiff {

/// Diagonal Gaussian prior N(mean, diag(var)).
struct GaussianPrior {
  Tensor mean;
  Tensor var;

  GaussianPrior(Tensor mean, Tensor var);
  const Shape& shape() const noexcept { return mean.shape(); }
};

/// Finite Gaussian mixture with a shared shape across components.
struct MixturePrior {
  std::vector<double> weights;
  std::vector<GaussianPrior> components;

  MixturePrior(std::vector<double> weights, std::vector<GaussianPrior> components);
  const Shape& shape() const noexcept { return components.front().shape(); }
};

/// Smooth synthetic diagonal prior used by the desk-scale test problems:
/// mean amplitude * tanh(3 sin(0.4 i + 0.5 + c) cos(0.3 j - 0.4)),
/// variance variance * (0.75 + 0.125 ((i + j) mod 3)).
GaussianPrior toy_gaussian_prior(const Shape& shape, double amplitude, double variance);

/// Score of the prior diffused to the noise level bar_alpha:
/// -(bar_alpha * var + 1 - bar_alpha)^-1 (x - sqrt(bar_alpha) mean).
Tensor score_gaussian(const GaussianPrior& p, double bar_alpha, const Tensor& x);
Tensor score_gaussian(const GaussianPrior& p, const Schedule& s, const Tensor& x, int t);

/// Responsibility-weighted component scores, responsibilities in log space.
Tensor score_mixture(const MixturePrior& p, double bar_alpha, const Tensor& x);
Tensor score_mixture(const MixturePrior& p, const Schedule& s, const Tensor& x, int t);

/// Posterior component responsibilities at noise level bar_alpha.
std::vector<double> mixture_responsibilities(const MixturePrior& p, double bar_alpha, const Tensor& x);

/// Log density of the diffused mixture (up to nothing: full normalization included).
double mixture_log_density(const MixturePrior& p, double bar_alpha, const Tensor& x);

/// Evaluator of s_theta(x, t). Requests carry the step and its bar_alpha so that
/// implementations need no schedule of their own.
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;
  virtual Tensor score(const Tensor& x, int t, double bar_alpha) = 0;
};

class GaussianScore final : public ScoreModel {
 public:
  explicit GaussianScore(GaussianPrior prior) : prior_(std::move(prior)) {}
  Tensor score(const Tensor& x, int t, double bar_alpha) override;
  const GaussianPrior& prior() const noexcept { return prior_; }

 private:
  GaussianPrior prior_;
};

class MixtureScore final : public ScoreModel {
 public:
  explicit MixtureScore(MixturePrior prior) : prior_(std::move(prior)) {}
  Tensor score(const Tensor& x, int t, double bar_alpha) override;
  const MixturePrior& prior() const noexcept { return prior_; }

 private:
  MixturePrior prior_;
};

/// (x_t + (1 - bar_alpha_t) s(x_t, t)) / sqrt(bar_alpha_t).
Tensor tweedie_denoise(ScoreModel& model, const Schedule& s, const Tensor& x_t, int t);
Tensor tweedie_denoise(ScoreModel& model, const Tensor& x_t, int t, double bar_alpha);

/// Prior sample x = mean + sqrt(var) * eps.
class RandomSource;
Tensor sample_prior(const GaussianPrior& p, RandomSource& rs);
Tensor sample_prior(const MixturePrior& p, RandomSource& rs);

}  // namespace ddiff
