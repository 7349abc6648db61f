#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ddiff/config.hpp"
#include "ddiff/operators.hpp"
#include "ddiff/prior.hpp"
#include "ddiff/solver.hpp"

namespace ddiff {

struct PriorSpec {
  std::string kind = "toy";  // toy|gaussian|mixture|remote
  std::optional<Shape> shape;
  double amplitude = 0.8;
  double variance = 0.0015;
  std::filesystem::path mean;
  std::filesystem::path var;
  std::vector<double> weights;
  std::vector<std::filesystem::path> means;
  std::vector<std::filesystem::path> vars;
  std::string endpoint;
  std::chrono::milliseconds timeout{30000};
};

struct IoSpec {
  std::optional<std::filesystem::path> input;  // ground truth image or tensor
  bool sample_truth = false;                   // draw the ground truth from the prior instead
  std::optional<std::filesystem::path> y;      // measurement; defaults to out/y.ddt1
  std::filesystem::path out = "out";
  std::string image_id = "image";
};

struct CompareSpec {
  std::vector<Variant> variants;  // empty: the solver variant only
  int seeds = 1;
  unsigned workers = 1;
};

struct RunConfig {
  Config raw;
  std::string name;  // config file stem
  std::uint64_t seed = 0;
  TaskSpec task;
  SolverConfig solver;
  bool map_diffpir = false;  // run DDIFF under the settings that reproduce DiffPIR
  PriorSpec prior;
  IoSpec io;
  CompareSpec compare;
};

/// Every key a run configuration accepts; `preset.` keys are free-form notes.
const std::vector<std::string>& known_config_keys();

/// Validates and interprets a configuration. Relative paths from the file are
/// resolved against its directory, those set on the command line against the
/// working directory. DDIFF_SCORE_ENDPOINT overrides prior.endpoint.
RunConfig load_run_config(const Config& cfg);

/// Solver configuration actually run (DiffPIR mapping applied).
SolverConfig effective_solver(const RunConfig& rc);

/// Canonical `key = value` echo of the interpreted configuration.
Config describe(const RunConfig& rc);

using AnalyticPrior = std::variant<std::monostate, GaussianPrior, MixturePrior>;
AnalyticPrior load_analytic_prior(const RunConfig& rc);

/// Signal shape: ground truth file, then analytic prior, then prior.shape.
Shape signal_shape(const RunConfig& rc, const AnalyticPrior& prior);

/// Ground truth from io.input or drawn from the prior with (seed, ground_truth).
std::optional<Tensor> ground_truth(const RunConfig& rc, const AnalyticPrior& prior, std::uint64_t seed);

ScoreFactory score_factory(const RunConfig& rc, const AnalyticPrior& prior);

/// "3x256x256" and back.
Shape parse_shape(const std::string& text);
std::string join_shape(const Shape& s);

}  // namespace ddiff
