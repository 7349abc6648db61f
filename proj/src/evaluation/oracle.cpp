#include "ddiff/oracle.hpp"

#include <cmath>
#include <limits>

#include "ddiff/errors.hpp"

namespace ddiff {
namespace {

void require_linear(const ForwardModel& m, const char* who) {
  if (!m.is_linear()) throw InvalidArgument(std::string(who) + ": operator '" + m.kind() + "' is not linear");
  if (!(m.sigma() > 0.0)) throw InvalidArgument(std::string(who) + ": measurement sigma must be positive");
}

// Solves (A^T A / sigma^2 + diag(precision)) x = rhs by conjugate gradients.
Tensor solve_normal_equations(const ForwardModel& m, const Tensor& precision, const Tensor& rhs, const Tensor& start,
                              const CgOptions& opts) {
  const double inv_var = 1.0 / (m.sigma() * m.sigma());
  auto apply_h = [&](const Tensor& v) {
    Tensor out = m.adjoint(m.apply(v));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] * inv_var + precision[i] * v[i];
    return out;
  };
  Tensor x = start;
  Tensor r = rhs - apply_h(x);
  Tensor p = r;
  double rr = squared_norm(r);
  const double target = opts.relative_tolerance * norm2(rhs);
  if (std::sqrt(rr) <= target) return x;
  const long limit = static_cast<long>(opts.max_iterations_per_dim) * static_cast<long>(x.size());
  for (long it = 0; it < limit; ++it) {
    const Tensor hp = apply_h(p);
    const double alpha = rr / dot(p, hp);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * hp[i];
    }
    const double rr_next = squared_norm(r);
    if (std::sqrt(rr_next) <= target) return x;
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
  }
  throw NumericalError("map oracle: conjugate gradients did not converge in " + std::to_string(limit) + " iterations");
}

Tensor gaussian_map(const ForwardModel& m, const Tensor& y, const GaussianPrior& prior, const CgOptions& opts) {
  const double inv_var = 1.0 / (m.sigma() * m.sigma());
  Tensor precision(prior.shape());
  Tensor rhs = m.adjoint(y);
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    precision[i] = 1.0 / prior.var[i];
    rhs[i] = rhs[i] * inv_var + precision[i] * prior.mean[i];
  }
  return solve_normal_equations(m, precision, rhs, prior.mean, opts);
}

}  // namespace

Tensor map_oracle_gaussian(const ForwardModel& m, const Tensor& y, const GaussianPrior& prior, const CgOptions& opts) {
  require_linear(m, "map_oracle_gaussian");
  require_shape(y, m.output_shape(), "map_oracle_gaussian measurement");
  require_shape(prior.mean, m.input_shape(), "map_oracle_gaussian prior");
  return gaussian_map(m, y, prior, opts);
}

double map_objective(const ForwardModel& m, const Tensor& y, const GaussianPrior& prior, const Tensor& x) {
  const double data = squared_norm(y - m.apply(x)) / (2.0 * m.sigma() * m.sigma());
  double reg = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - prior.mean[i];
    reg += d * d / prior.var[i];
  }
  return data + 0.5 * reg;
}

Tensor map_objective_gradient(const ForwardModel& m, const Tensor& y, const GaussianPrior& prior, const Tensor& x) {
  Tensor g = m.grad_data(x, y);
  const double scale = 1.0 / (2.0 * m.sigma() * m.sigma());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = g[i] * scale + (x[i] - prior.mean[i]) / prior.var[i];
  return g;
}

double map_objective(const ForwardModel& m, const Tensor& y, const MixturePrior& prior, const Tensor& x) {
  const double data = squared_norm(y - m.apply(x)) / (2.0 * m.sigma() * m.sigma());
  return data - mixture_log_density(prior, 1.0, x);
}

Tensor map_oracle_mixture(const ForwardModel& m, const Tensor& y, const MixturePrior& prior, const CgOptions& opts) {
  require_linear(m, "map_oracle_mixture");
  require_shape(y, m.output_shape(), "map_oracle_mixture measurement");
  require_shape(prior.components.front().mean, m.input_shape(), "map_oracle_mixture prior");
  if (prior.components.size() == 1) return gaussian_map(m, y, prior.components.front(), opts);

  const double inv_var = 1.0 / (m.sigma() * m.sigma());
  const Tensor aty = m.adjoint(y);
  Tensor best;
  double best_value = std::numeric_limits<double>::infinity();
  for (const auto& comp : prior.components) {
    Tensor x = gaussian_map(m, y, comp, opts);
    // Majorize-minimize: Jensen's bound on -log sum_k w_k N_k at the current
    // responsibilities gives a quadratic surrogate whose minimizer never
    // increases the objective.
    for (int it = 0; it < 1000; ++it) {
      const auto resp = mixture_responsibilities(prior, 1.0, x);
      Tensor precision(x.shape()), rhs(x.shape());
      for (std::size_t k = 0; k < resp.size(); ++k) {
        const auto& c = prior.components[k];
        for (std::size_t i = 0; i < x.size(); ++i) {
          precision[i] += resp[k] / c.var[i];
          rhs[i] += resp[k] * c.mean[i] / c.var[i];
        }
      }
      for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += aty[i] * inv_var;
      Tensor next = solve_normal_equations(m, precision, rhs, x, opts);
      const double step = norm2(next - x);
      x = std::move(next);
      if (step <= 1e-13 * (1.0 + norm2(x))) break;
    }
    const double value = map_objective(m, y, prior, x);
    if (value < best_value) {
      best_value = value;
      best = std::move(x);
    }
  }
  return best;
}

double relative_l2(const Tensor& a, const Tensor& b) { return norm2(a - b) / norm2(b); }

}  // namespace ddiff
