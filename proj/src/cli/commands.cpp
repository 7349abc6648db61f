#include "ddiff/commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <system_error>

#include "ddiff/errors.hpp"
#include "ddiff/image_io.hpp"
#include "ddiff/oracle.hpp"
#include "ddiff/random.hpp"
#include "ddiff/tensor_io.hpp"

namespace ddiff {
namespace fs = std::filesystem;

namespace {

void require_file(const RunConfig& rc, const std::string& key, const fs::path& p) {
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) rc.raw.fail(key, "file not found: " + p.string());
}

void require_inputs(const RunConfig& rc) {
  if (rc.io.input) require_file(rc, "io.input", *rc.io.input);
  if (rc.io.y) require_file(rc, "io.y", *rc.io.y);
  if (rc.prior.kind == "gaussian") {
    require_file(rc, "prior.mean", rc.prior.mean);
    require_file(rc, "prior.var", rc.prior.var);
  }
  for (const auto& p : rc.prior.means) require_file(rc, "prior.means", p);
  for (const auto& p : rc.prior.vars) require_file(rc, "prior.vars", p);
}

fs::path prepare_out(const RunConfig& rc) {
  std::error_code ec;
  fs::create_directories(rc.io.out, ec);
  if (ec || !fs::is_directory(rc.io.out)) throw IoError("cannot create output directory " + rc.io.out.string());
  return rc.io.out;
}

// The toy prior takes its shape from the ground truth file when none is given.
AnalyticPrior load_prior(const RunConfig& rc) {
  if (rc.prior.kind == "toy" && !rc.prior.shape && rc.io.input) {
    RunConfig shaped = rc;
    shaped.prior.shape = read_tensor_or_image(*rc.io.input).shape();
    return load_analytic_prior(shaped);
  }
  return load_analytic_prior(rc);
}

Tensor load_measurement(const RunConfig& rc) {
  const fs::path p = rc.io.y.value_or(rc.io.out / "y.ddt1");
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) throw IoError("measurement " + p.string() + " not found (run degrade first or set io.y)");
  return read_tensor_or_image(p);
}

void write_preview(const fs::path& path, const Tensor& t) {
  if (is_image_shaped(t.shape())) write_ppm(path, t);
}

ImageMetrics image_metrics(const std::string& id, const ForwardModel& op, const Tensor& x0, const Tensor& y,
                           const std::optional<Tensor>& truth) {
  ImageMetrics m;
  m.image_id = id;
  m.residual = residual(op, x0, y);
  if (truth && truth->shape() == x0.shape()) {
    m.psnr = psnr(*truth, x0);
    const auto g = plane_geometry(x0.shape());
    if (g.height >= static_cast<std::size_t>(kSsimWindow) && g.width >= static_cast<std::size_t>(kSsimWindow))
      m.ssim = ssim(*truth, x0);
  }
  return m;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

void require_operator_fit(const RunConfig& rc, const ForwardModel& op, const Tensor& y) {
  if (op.output_shape() != y.shape())
    throw ConfigError(rc.raw.source(), 0,
                      "measurement shape " + shape_string(y.shape()) + " does not match the " + op.kind() +
                          " operator output " + shape_string(op.output_shape()));
}

}  // namespace

void cmd_degrade(const RunConfig& rc, std::ostream& log) {
  require_inputs(rc);
  if (!rc.io.input && !rc.io.sample_truth) rc.raw.fail("io.input", "required key is missing (or set io.sample_truth = true)");
  const AnalyticPrior prior = rc.io.sample_truth ? load_prior(rc) : AnalyticPrior{};
  const Tensor truth = *ground_truth(rc, prior, rc.seed);
  const auto op = make_operator(rc.task, truth.shape());
  RandomSource noise(rc.seed, streams::measurement_noise);
  const Tensor y = op->degrade(truth, noise);

  const fs::path out = prepare_out(rc);
  write_ddt1(out / "y.ddt1", y);
  write_preview(out / "y.ppm", y);
  if (rc.io.sample_truth) {
    write_ddt1(out / "x.ddt1", truth);
    write_preview(out / "x.ppm", truth);
  }
  Config meta = describe(rc);
  meta.set("measurement.shape", join_shape(y.shape()));
  meta.set("measurement.noise_stream", std::to_string(streams::measurement_noise));
  write_file_atomic(out / "meta.cfg", meta.to_text());
  log << "degrade: " << op->kind() << " " << shape_string(truth.shape()) << " -> " << shape_string(y.shape())
      << ", wrote " << (out / "y.ddt1").string() << "\n";
}

void cmd_run(const RunConfig& rc, std::ostream& log) {
  require_inputs(rc);
  const AnalyticPrior prior = load_prior(rc);
  const Shape shape = signal_shape(rc, prior);
  const Tensor y = load_measurement(rc);
  const auto op = make_operator(rc.task, shape);
  require_operator_fit(rc, *op, y);
  const SolverConfig cfg = effective_solver(rc);
  auto score = score_factory(rc, prior)();
  const SolveResult res = solve(cfg, *op, *score, y);

  const fs::path out = prepare_out(rc);
  write_ddt1(out / "x0.ddt1", res.x0);
  write_preview(out / "x0.ppm", res.x0);
  write_file_atomic(out / "trace.csv", trace_csv(res.trace));
  MetricReport report;
  report.images.push_back(image_metrics(rc.io.image_id, *op, res.x0, y, ground_truth(rc, prior, rc.seed)));
  write_file_atomic(out / "metrics.csv", metrics_csv(report));
  Config meta = describe(rc);
  meta.set("result.steps", std::to_string(res.trace.records.size()));
  write_file_atomic(out / "run.cfg", meta.to_text());
  log << "run: " << to_string(cfg.variant) << " nfe=" << cfg.nfe << " residual=" << format_double(report.images[0].residual)
      << ", wrote " << (out / "x0.ddt1").string() << "\n";
}

void cmd_oracle(const RunConfig& rc, std::ostream& log) {
  require_inputs(rc);
  const AnalyticPrior prior = load_prior(rc);
  if (std::holds_alternative<std::monostate>(prior)) rc.raw.fail("prior.kind", "the oracle needs an analytic prior");
  const Shape shape = signal_shape(rc, prior);
  const Tensor y = load_measurement(rc);
  const auto op = make_operator(rc.task, shape);
  require_operator_fit(rc, *op, y);
  Tensor xs;
  double objective = 0.0;
  if (const auto* g = std::get_if<GaussianPrior>(&prior)) {
    xs = map_oracle_gaussian(*op, y, *g);
    objective = map_objective(*op, y, *g, xs);
  } else {
    const auto& m = std::get<MixturePrior>(prior);
    xs = map_oracle_mixture(*op, y, m);
    objective = map_objective(*op, y, m, xs);
  }
  const fs::path out = prepare_out(rc);
  write_ddt1(out / "oracle.ddt1", xs);
  write_preview(out / "oracle.ppm", xs);
  std::string csv = "quantity,value\n";
  csv += "map_objective," + format_double(objective) + "\n";
  csv += "residual," + format_double(residual(*op, xs, y)) + "\n";
  std::error_code ec;
  if (fs::is_regular_file(out / "x0.ddt1", ec)) {
    const Tensor x0 = read_ddt1(out / "x0.ddt1");
    if (x0.shape() == xs.shape()) csv += "relative_l2_x0," + format_double(relative_l2(x0, xs)) + "\n";
  }
  write_file_atomic(out / "oracle.csv", csv);
  log << "oracle: wrote " << (out / "oracle.ddt1").string() << "\n";
}

CompareResult run_compare(const std::vector<RunConfig>& configs) {
  if (configs.empty()) throw InvalidArgument("compare: no configurations");
  CompareResult result;
  for (const RunConfig& rc : configs) {
    require_inputs(rc);
    const AnalyticPrior prior = load_prior(rc);
    const Shape shape = signal_shape(rc, prior);
    const ForwardModelPtr op = make_operator(rc.task, shape);
    const ScoreFactory factory = score_factory(rc, prior);

    std::vector<std::uint64_t> seeds;
    std::vector<Tensor> ys;
    std::vector<std::optional<Tensor>> truths;
    for (int k = 0; k < rc.compare.seeds; ++k) {
      const std::uint64_t s = rc.seed + static_cast<std::uint64_t>(k);
      auto truth = ground_truth(rc, prior, s);
      if (!truth) rc.raw.fail("io.input", "compare needs a ground truth (io.input or io.sample_truth = true)");
      RandomSource noise(s, streams::measurement_noise);
      ys.push_back(op->degrade(*truth, noise));
      truths.push_back(std::move(truth));
      seeds.push_back(s);
    }

    std::vector<Variant> variants = rc.compare.variants;
    if (variants.empty()) variants.push_back(rc.solver.variant);
    std::vector<SolverConfig> cfgs;
    std::vector<Problem> problems;
    for (Variant v : variants)
      for (std::size_t k = 0; k < seeds.size(); ++k) {
        SolverConfig cfg = v == Variant::diffpir ? rc.solver : effective_solver(rc);
        cfg.variant = v;
        if (v != Variant::diffpir) cfg.diffpir.reset();
        cfg.seed = seeds[k];
        cfgs.push_back(std::move(cfg));
        problems.push_back(Problem{op, factory, ys[k], streams::solver});
      }
    const auto solved = solve_batch(cfgs, problems, rc.compare.workers);

    std::size_t i = 0;
    for (Variant v : variants) {
      CompareSummary sum;
      sum.config = rc.name;
      sum.variant = to_string(v);
      std::vector<double> ps, ss, rs, as;
      for (std::size_t k = 0; k < seeds.size(); ++k, ++i) {
        CompareRow row;
        row.config = rc.name;
        row.variant = sum.variant;
        row.seed = seeds[k];
        if (solved[i].ok) {
          row.status = "ok";
          row.metrics = image_metrics(rc.io.image_id, *op, solved[i].result->x0, ys[k], truths[k]);
          ps.push_back(row.metrics.psnr);
          ss.push_back(row.metrics.ssim);
          rs.push_back(row.metrics.residual);
          as.push_back(std::fabs(row.metrics.residual));
          ++sum.ok;
        } else {
          row.status = "failed";
          row.error = solved[i].error;
          row.metrics.image_id = rc.io.image_id;
          ++sum.failed;
        }
        result.rows.push_back(std::move(row));
      }
      sum.psnr = aggregate(ps);
      sum.ssim = aggregate(ss);
      sum.residual = aggregate(rs);
      sum.abs_residual = aggregate(as);
      result.summary.push_back(std::move(sum));
    }
  }
  return result;
}

std::string compare_runs_csv(const CompareResult& r) {
  std::string out = "config,variant,seed,status,psnr,ssim,residual,abs_residual,error\n";
  for (const auto& row : r.rows) {
    const auto& m = row.metrics;
    out += csv_quote(row.config) + "," + row.variant + "," + std::to_string(row.seed) + "," + row.status + "," +
           format_double(m.psnr) + "," + format_double(m.ssim) + "," + format_double(m.residual) + "," +
           format_double(std::fabs(m.residual)) + "," + csv_quote(row.error) + "\n";
  }
  return out;
}

std::string compare_summary_csv(const CompareResult& r) {
  std::string out =
      "config,variant,ok,failed,psnr_mean,psnr_ci95,ssim_mean,ssim_ci95,residual_mean,residual_ci95,"
      "abs_residual_mean,abs_residual_ci95\n";
  for (const auto& s : r.summary) {
    out += csv_quote(s.config) + "," + s.variant + "," + std::to_string(s.ok) + "," + std::to_string(s.failed);
    for (const Aggregate* a : {&s.psnr, &s.ssim, &s.residual, &s.abs_residual})
      out += "," + format_double(a->mean) + "," + format_double(a->ci_half_width);
    out += "\n";
  }
  return out;
}

void cmd_compare(const std::vector<RunConfig>& configs, std::ostream& log) {
  const CompareResult r = run_compare(configs);
  const fs::path out = prepare_out(configs.front());
  write_file_atomic(out / "compare_runs.csv", compare_runs_csv(r));
  write_file_atomic(out / "compare.csv", compare_summary_csv(r));
  for (const auto& s : r.summary)
    log << "compare: " << s.config << " " << s.variant << " ok=" << s.ok << " failed=" << s.failed
        << " residual=" << format_double(s.residual.mean) << " |residual|=" << format_double(s.abs_residual.mean) << "\n";
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual-ascent diffusion solver for imaging inverse problems", "ddiff"};
  app.require_subcommand(1);
  std::vector<std::string> configs;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string variant, outdir;
  for (const char* name : {"degrade", "run", "compare", "oracle"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", configs, "configuration file")->required();
    sub->add_option("--seed", seed, "seed override");
    sub->add_option("--variant", variant, "solver variant override");
    sub->add_option("--out", outdir, "output directory override");
    sub->add_option("--set", overrides, "key=value override (repeatable)");
  }

  std::vector<std::string> argv_store = args;
  argv_store.insert(argv_store.begin(), "ddiff");
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::ok : exit_code::config;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  if (command != "compare" && configs.size() != 1) {
    err << "error: " << command << " takes exactly one --config\n";
    return exit_code::config;
  }

  try {
    std::vector<RunConfig> runs;
    for (const auto& path : configs) {
      Config cfg = Config::load(path);
      for (const auto& o : overrides) cfg.apply_override(o);
      if (seed) cfg.set("seed", std::to_string(*seed));
      if (!variant.empty()) cfg.set("solver.variant", variant);
      if (!outdir.empty()) cfg.set("io.out", outdir);
      runs.push_back(load_run_config(cfg));
    }
    if (command == "degrade") cmd_degrade(runs.front(), out);
    else if (command == "run") cmd_run(runs.front(), out);
    else if (command == "oracle") cmd_oracle(runs.front(), out);
    else cmd_compare(runs, out);
    return exit_code::ok;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_code::config;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << "\n";
    return exit_code::config;
  } catch (const DivergenceError& e) {
    err << "divergence: " << e.what() << "\n";
    return exit_code::divergence;
  } catch (const ScoreTransportError& e) {
    err << "remote score error: " << e.what() << "\n";
    return exit_code::remote;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return exit_code::io;
  } catch (const FormatError& e) {
    err << "i/o error: " << e.what() << "\n";
    return exit_code::io;
  } catch (const std::system_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return exit_code::io;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ddiff
