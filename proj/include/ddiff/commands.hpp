#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ddiff/metrics.hpp"
#include "ddiff/run_config.hpp"

namespace ddiff {

/// Process exit codes of the command line tool.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config = 2;
inline constexpr int io = 3;
inline constexpr int divergence = 4;
inline constexpr int remote = 5;
}  // namespace exit_code

/// Writes y.ddt1, y.ppm (image-shaped measurements) and meta.cfg; with a
/// sampled ground truth also x.ddt1 and x.ppm.
void cmd_degrade(const RunConfig& rc, std::ostream& log);

/// Writes x0.ddt1, x0.ppm, trace.csv, metrics.csv and run.cfg.
void cmd_run(const RunConfig& rc, std::ostream& log);

/// Writes oracle.ddt1, oracle.ppm and oracle.csv (MAP objective, residual and,
/// when x0.ddt1 exists, its relative L2 distance to the oracle).
void cmd_oracle(const RunConfig& rc, std::ostream& log);

struct CompareRow {
  std::string config;
  std::string variant;
  std::uint64_t seed = 0;
  std::string status;  // ok|failed
  std::string error;
  ImageMetrics metrics;
};

struct CompareSummary {
  std::string config;
  std::string variant;
  std::size_t ok = 0;
  std::size_t failed = 0;
  Aggregate psnr;
  Aggregate ssim;
  Aggregate residual;
  Aggregate abs_residual;
};

struct CompareResult {
  std::vector<CompareRow> rows;          // config, variant, seed order
  std::vector<CompareSummary> summary;  // config, variant order
};

/// For every config, variant and seed in [seed, seed + compare.seeds): draws
/// or reads the truth, degrades it with that seed and solves with that seed.
CompareResult run_compare(const std::vector<RunConfig>& configs);

/// Writes compare_runs.csv and compare.csv into the first config's io.out.
void cmd_compare(const std::vector<RunConfig>& configs, std::ostream& log);

std::string compare_runs_csv(const CompareResult& r);
std::string compare_summary_csv(const CompareResult& r);

/// Entry point of the `ddiff` executable; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ddiff
