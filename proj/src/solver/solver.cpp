#include "ddiff/solver.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "ddiff/errors.hpp"
#include "ddiff/random.hpp"

namespace ddiff {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::ddiff: return "ddiff";
    case Variant::ddiff_hqs: return "ddiff_hqs";
    case Variant::diff_pnp_admm: return "diff_pnp_admm";
    case Variant::diff_pnp_hqs: return "diff_pnp_hqs";
    case Variant::diffpir: return "diffpir";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  for (Variant v : {Variant::ddiff, Variant::ddiff_hqs, Variant::diff_pnp_admm, Variant::diff_pnp_hqs, Variant::diffpir})
    if (to_string(v) == name) return v;
  throw InvalidArgument("unknown solver variant '" + name + "'");
}

void validate(const SolverConfig& cfg) {
  const int T = cfg.schedule.steps();
  if (cfg.nfe < 1 || cfg.nfe > T) throw InvalidArgument("solver: nfe must lie in [1, T]");
  validate_policy(cfg.policy, T);
  if (cfg.diffpir.has_value() != (cfg.variant == Variant::diffpir))
    throw InvalidArgument("solver: diffpir parameters must be present exactly for the diffpir variant");
  if (cfg.diffpir) {
    const auto& p = *cfg.diffpir;
    if (p.zeta < 0.0 || p.zeta > 1.0) throw InvalidArgument("diffpir: zeta must lie in [0, 1]");
    if (!(p.lambda > 0.0)) throw InvalidArgument("diffpir: lambda must be positive");
    if (p.sigma_bar.size() != static_cast<std::size_t>(T)) throw InvalidArgument("diffpir: sigma_bar length must equal T");
  }
  if (cfg.gamma_sequence && cfg.gamma_sequence->size() != static_cast<std::size_t>(T))
    throw InvalidArgument("solver: gamma sequence length must equal T");
}

DiffPirSchedules diffpir_params(double zeta, double lambda, double sigma, const std::vector<double>& sigma_bar,
                                const Schedule& s) {
  if (zeta < 0.0 || zeta > 1.0) throw InvalidArgument("diffpir_params: zeta must lie in [0, 1]");
  if (!(lambda > 0.0)) throw InvalidArgument("diffpir_params: lambda must be positive");
  if (!(sigma > 0.0)) throw InvalidArgument("diffpir_params: measurement sigma must be positive");
  const int T = s.steps();
  if (sigma_bar.size() != static_cast<std::size_t>(T))
    throw InvalidArgument("diffpir_params: sigma_bar length must equal T");
  DiffPirSchedules out{std::vector<double>(T), std::vector<double>(T)};
  for (int t = 1; t <= T; ++t) {
    out.sigma[t - 1] = sigma_t(s, t, SigmaChoice{SigmaKind::zeta, zeta});
    const double sb = sigma_bar[t - 1];
    out.gamma[t - 1] = sb * sb / (2.0 * lambda * sigma * sigma);
  }
  return out;
}

SolverConfig mapped_ddiff_config(const SolverConfig& diffpir_cfg, double measurement_sigma) {
  if (!diffpir_cfg.diffpir) throw InvalidArgument("mapped_ddiff_config: source config has no diffpir parameters");
  const auto& p = *diffpir_cfg.diffpir;
  SolverConfig cfg = diffpir_cfg;
  cfg.variant = Variant::ddiff;
  cfg.ablate_dual = true;
  cfg.policy.t0 = 0;
  cfg.policy.sigma = SigmaChoice{SigmaKind::zeta, p.zeta};
  cfg.gamma_sequence = diffpir_params(p.zeta, p.lambda, measurement_sigma, p.sigma_bar, cfg.schedule).gamma;
  cfg.diffpir.reset();
  return cfg;
}

namespace {

void check_iterate(const Tensor& t, int step, const char* name) {
  if (!t.all_finite()) throw DivergenceError(step, std::string(name) + " is not finite");
  if (max_abs(t) > kDivergenceBound) throw DivergenceError(step, std::string(name) + " exceeds the divergence bound");
}

// v - gamma * grad ||y - A(v)||^2
Tensor measurement_step(const ForwardModel& model, const Tensor& v, const Tensor& y, double gamma) {
  if (gamma == 0.0) return v;
  return axpy(-gamma, model.grad_data(v, y), v);
}

Tensor predicted_noise(const Tensor& x_t, const Tensor& x, double bar_alpha) {
  const double root = std::sqrt(bar_alpha);
  const double denom = std::max(std::sqrt(1.0 - bar_alpha), 1e-12);
  Tensor out(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (x_t[i] - root * x[i]) / denom;
  return out;
}

class Engine {
 public:
  Engine(const SolverConfig& cfg, const ForwardModel& model, ScoreModel& score, const Tensor& y)
      : cfg_(cfg), model_(model), score_(score), y_(y), rs_(cfg.seed, cfg.stream) {}

  SolveResult run(const StepObserver& observer) {
    const Shape& shape = model_.input_shape();
    const auto grid = time_grid(cfg_.schedule.steps(), cfg_.nfe);
    x_t_ = gaussian_draw(rs_, shape);
    u_ = Tensor(shape);
    SolveResult result;
    result.trace.records.reserve(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const int t = grid[k];
      const int t_prev = k + 1 < grid.size() ? grid[k + 1] : 0;
      step(t, t_prev);
      check_iterate(x_, t, "x");
      check_iterate(x_prev_, t, "x_t");
      result.trace.records.push_back(
          {t, squared_norm(y_ - model_.apply(x_)), norm2(x_ - z_), norm2(u_)});
      if (observer) observer(StepView{t, t_prev, x_t_, z_, x_, u_, x_prev_});
      x_t_ = std::move(x_prev_);
    }
    result.x0 = x_;
    return result;
  }

 private:
  double gamma_at(int t) const {
    return cfg_.gamma_sequence ? (*cfg_.gamma_sequence)[t - 1] : gamma_t(cfg_.policy, t);
  }

  Tensor noise(bool draw, const Shape& shape) { return draw ? gaussian_draw(rs_, shape) : Tensor(shape); }

  void step(int t, int t_prev) {
    const double ab = cfg_.schedule.bar_alpha(t);
    const double ab_prev = cfg_.schedule.bar_alpha(t_prev);
    switch (cfg_.variant) {
      case Variant::ddiff: return ddiff_step(t, ab, ab_prev);
      case Variant::ddiff_hqs: return ddiff_hqs_step(t, ab, ab_prev);
      case Variant::diff_pnp_admm: return pnp_admm_step(t, ab);
      case Variant::diff_pnp_hqs: return pnp_hqs_step(t, ab);
      case Variant::diffpir: return diffpir_step(t, ab, ab_prev);
    }
  }

  void ddiff_step(int t, double ab, double ab_prev) {
    z_ = tweedie_denoise(score_, x_t_, t, ab);                  // denoising
    x_ = measurement_step(model_, z_ - u_, y_, gamma_at(t));    // measurement
    const Tensor eps_hat = predicted_noise(x_t_, x_, ab);
    const Tensor eps = noise(t > cfg_.policy.t0, x_.shape());
    const double sigma = sigma_between(ab, ab_prev, cfg_.policy.sigma);
    const double a = std::sqrt(ab_prev);
    const double b = eps_hat_coefficient(ab_prev, sigma);
    x_prev_ = Tensor(x_.shape());
    for (std::size_t i = 0; i < x_prev_.size(); ++i)
      x_prev_[i] = a * x_[i] + b * eps_hat[i] + sigma * eps[i] + a * u_[i];  // reverse diffusion
    if (!cfg_.ablate_dual) u_ += x_ - z_;                                     // dual update
  }

  void ddiff_hqs_step(int t, double ab, double ab_prev) {
    z_ = tweedie_denoise(score_, x_t_, t, ab);
    x_ = measurement_step(model_, z_, y_, gamma_at(t));
    const Tensor eps_hat = predicted_noise(x_t_, x_, ab);
    const Tensor eps = noise(t > cfg_.policy.t0, x_.shape());
    const double sigma = sigma_between(ab, ab_prev, cfg_.policy.sigma);
    const double a = std::sqrt(ab_prev);
    const double b = eps_hat_coefficient(ab_prev, sigma);
    x_prev_ = Tensor(x_.shape());
    for (std::size_t i = 0; i < x_prev_.size(); ++i) x_prev_[i] = a * x_[i] + b * eps_hat[i] + sigma * eps[i];
  }

  void pnp_admm_step(int t, double ab) {
    z_ = tweedie_denoise(score_, x_t_ + u_, t, ab);
    x_ = measurement_step(model_, z_ - u_, y_, gamma_at(t));
    x_prev_ = x_;
    u_ += x_ - z_;
  }

  void pnp_hqs_step(int t, double ab) {
    z_ = tweedie_denoise(score_, x_t_, t, ab);
    x_ = measurement_step(model_, z_, y_, gamma_at(t));
    x_prev_ = x_;
  }

  void diffpir_step(int t, double ab, double ab_prev) {
    const auto& p = *cfg_.diffpir;
    const double sb = p.sigma_bar[t - 1];
    const double sigma = model_.sigma();
    if (!(sigma > 0.0)) throw InvalidArgument("diffpir: measurement sigma must be positive");
    z_ = tweedie_denoise(score_, x_t_, t, ab);
    x_ = measurement_step(model_, z_, y_, sb * sb / (2.0 * p.lambda * sigma * sigma));
    const Tensor eps_hat = predicted_noise(x_t_, x_, ab);
    const Tensor eps = noise(true, x_.shape());
    // sqrt(1 - ab') (sqrt(1 - zeta) eps_hat + sqrt(zeta) eps), with the two
    // coefficients evaluated in the sigma form shared with the other steps.
    const double fresh = sigma_between(ab, ab_prev, SigmaChoice{SigmaKind::zeta, p.zeta});
    const double a = std::sqrt(ab_prev);
    const double keep = eps_hat_coefficient(ab_prev, fresh);
    x_prev_ = Tensor(x_.shape());
    for (std::size_t i = 0; i < x_prev_.size(); ++i) x_prev_[i] = a * x_[i] + keep * eps_hat[i] + fresh * eps[i];
  }

  const SolverConfig& cfg_;
  const ForwardModel& model_;
  ScoreModel& score_;
  const Tensor& y_;
  RandomSource rs_;
  Tensor x_t_, z_, x_, u_, x_prev_;
};

}  // namespace

SolveResult solve(const SolverConfig& cfg, const ForwardModel& model, ScoreModel& score, const Tensor& y,
                  const StepObserver& observer) {
  validate(cfg);
  require_shape(y, model.output_shape(), "solve measurement");
  return Engine(cfg, model, score, y).run(observer);
}

void write_trace_csv(std::ostream& os, const Trace& trace) {
  os << "t,residual,primal_gap,dual_norm\n";
  char buf[128];
  for (const auto& r : trace.records) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", r.t, r.residual, r.primal_gap, r.dual_norm);
    os << buf;
  }
}

std::string trace_csv(const Trace& trace) {
  std::ostringstream os;
  write_trace_csv(os, trace);
  return os.str();
}

}  // namespace ddiff
