#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ddiff/operators.hpp"
#include "ddiff/prior.hpp"
#include "ddiff/schedule.hpp"

namespace ddiff {

enum class Variant { ddiff, ddiff_hqs, diff_pnp_admm, diff_pnp_hqs, diffpir };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);

struct DiffPirParams {
  double zeta = 0.0;
  double lambda = 1.0;
  std::vector<double> sigma_bar;  // index t-1, length T
};

struct SolverConfig {
  Variant variant = Variant::ddiff;
  Schedule schedule = default_schedule();
  StepPolicy policy;
  int nfe = 1000;
  std::uint64_t seed = 0;
  std::uint64_t stream = streams::solver;
  std::optional<DiffPirParams> diffpir;
  /// Per-step gamma indexed by t-1; replaces the step-function policy when set.
  std::optional<std::vector<double>> gamma_sequence;
  /// Forces u = 0 throughout a DDIFF run (the dual update ablated in place).
  bool ablate_dual = false;
};

void validate(const SolverConfig& cfg);

struct TraceRecord {
  int t = 0;
  double residual = 0.0;    // ||y - A(x)||^2
  double primal_gap = 0.0;  // ||x - z||
  double dual_norm = 0.0;   // ||u|| after the step
};

struct Trace {
  std::vector<TraceRecord> records;
};

struct SolveResult {
  Tensor x0;
  Trace trace;
};

/// Snapshot of one executed step, handed to an optional observer.
struct StepView {
  int t;
  int t_prev;
  const Tensor& x_t;     // diffusion iterate entering the step
  const Tensor& z;       // denoised estimate
  const Tensor& x;       // measurement-step output
  const Tensor& u;       // dual variable after the step
  const Tensor& x_prev;  // diffusion iterate leaving the step
};
using StepObserver = std::function<void(const StepView&)>;

/// Runs the configured variant over time_grid(T, nfe), descending. Returns the
/// last measurement-step output and one trace record per step.
/// Throws DivergenceError on non-finite iterates or ||x_t||_inf > 1e6, and
/// propagates ScoreTransportError from remote score models.
SolveResult solve(const SolverConfig& cfg, const ForwardModel& model, ScoreModel& score, const Tensor& y,
                  const StepObserver& observer = {});

inline constexpr double kDivergenceBound = 1e6;

struct DiffPirSchedules {
  std::vector<double> sigma;  // index t-1
  std::vector<double> gamma;  // index t-1
};

/// sigma_t = sqrt(zeta (1 - bar_alpha_{t-1})) and gamma_t = sigma_bar_t^2 / (2 lambda sigma^2),
/// the DDIFF settings under which it reproduces DiffPIR once dual updates and t0 are removed.
DiffPirSchedules diffpir_params(double zeta, double lambda, double sigma, const std::vector<double>& sigma_bar,
                                const Schedule& s);

/// DDIFF configuration mirroring a DIFFPIR one: zeta sigma choice, mapped
/// gamma sequence, t0 = 0, dual update disabled.
SolverConfig mapped_ddiff_config(const SolverConfig& diffpir_cfg, double measurement_sigma);

void write_trace_csv(std::ostream& os, const Trace& trace);
std::string trace_csv(const Trace& trace);

// --- batches ----------------------------------------------------------------

using ScoreFactory = std::function<std::unique_ptr<ScoreModel>()>;

struct Problem {
  ForwardModelPtr model;
  ScoreFactory score;
  Tensor y;
  std::uint64_t stream = 0;
};

/// Problem carrying the stream id derived from (seed, index).
Problem make_problem(ForwardModelPtr model, ScoreFactory score, Tensor y, std::uint64_t seed, std::size_t index);

struct BatchResult {
  bool ok = false;
  std::optional<SolveResult> result;
  std::string error;
};

/// Solves every problem with its own stream; `cfgs` holds one config per
/// problem or a single shared one. Failures are reported per entry.
/// Results do not depend on `workers`.
std::vector<BatchResult> solve_batch(const std::vector<SolverConfig>& cfgs, const std::vector<Problem>& problems,
                                     unsigned workers = 1);

}  // namespace ddiff
