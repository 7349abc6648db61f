#pragma once

#include "ddiff/operators.hpp"
#include "ddiff/prior.hpp"

namespace ddiff {

struct CgOptions {
  double relative_tolerance = 1e-10;
  /// Iteration cap as a multiple of the problem dimension.
  int max_iterations_per_dim = 10;
};

/// argmin ||y - Ax||^2 / (2 sigma^2) + (x - mu)^T Sigma^-1 (x - mu) / 2 for a
/// linear operator, via matrix-free conjugate gradients on
/// (A^T A / sigma^2 + Sigma^-1) x = A^T y / sigma^2 + Sigma^-1 mu.
Tensor map_oracle_gaussian(const ForwardModel& m, const Tensor& y, const GaussianPrior& prior, const CgOptions& opts = {});

/// Negative log posterior (up to a constant) and its gradient for a Gaussian prior.
double map_objective(const ForwardModel& m, const Tensor& y, const GaussianPrior& prior, const Tensor& x);
Tensor map_objective_gradient(const ForwardModel& m, const Tensor& y, const GaussianPrior& prior, const Tensor& x);

/// Exact negative log posterior under a mixture prior (data term plus -log p(x)).
double map_objective(const ForwardModel& m, const Tensor& y, const MixturePrior& prior, const Tensor& x);

/// Best of the per-component Gaussian MAP points after monotone
/// majorize-minimize refinement on the joint mixture objective.
Tensor map_oracle_mixture(const ForwardModel& m, const Tensor& y, const MixturePrior& prior, const CgOptions& opts = {});

/// ||a - b|| / ||b||.
double relative_l2(const Tensor& a, const Tensor& b);

}  // namespace ddiff
