#include "ddiff/run_config.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "ddiff/errors.hpp"
#include "ddiff/image_io.hpp"
#include "ddiff/metrics.hpp"
#include "ddiff/random.hpp"
#include "ddiff/score_remote.hpp"
#include "ddiff/tensor_io.hpp"

namespace ddiff {
namespace {

std::filesystem::path resolve(const Config& cfg, const std::string& key, const std::string& value) {
  std::filesystem::path p(value);
  if (p.is_absolute()) return p;
  const auto& entry = cfg.entries().at(key);
  if (entry.line > 0) {
    const auto dir = std::filesystem::path(cfg.source()).parent_path();
    if (!dir.empty()) return dir / p;
  }
  return p;
}

std::filesystem::path resolve(const Config& cfg, const std::string& key) {
  return resolve(cfg, key, cfg.get_string(key));
}

int get_int_in(const Config& cfg, const std::string& key, long long fallback, long long lo, long long hi) {
  const long long v = cfg.get_int(key, fallback);
  if (v < lo || v > hi) cfg.fail(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

SigmaKind parse_sigma_kind(const Config& cfg, const std::string& key) {
  const std::string s = cfg.get_string(key, "full");
  if (s == "ddpm") return SigmaKind::ddpm;
  if (s == "full") return SigmaKind::full;
  if (s == "zeta") return SigmaKind::zeta;
  cfg.fail(key, "expected ddpm, full or zeta, got '" + s + "'");
}

std::string sigma_kind_name(SigmaKind k) {
  switch (k) {
    case SigmaKind::ddpm: return "ddpm";
    case SigmaKind::full: return "full";
    case SigmaKind::zeta: return "zeta";
  }
  return "full";
}

Variant variant_from(const Config& cfg, const std::string& key, const std::string& name) {
  try {
    return parse_variant(name);
  } catch (const InvalidArgument&) {
    cfg.fail(key, "unknown variant '" + name + "'");
  }
}

}  // namespace

std::string join_shape(const Shape& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "x" : "") + std::to_string(s[i]);
  return out;
}

Shape parse_shape(const std::string& text) {
  Shape shape;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, 'x')) {
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos || part.size() > 9)
      throw InvalidArgument("bad shape '" + text + "', expected e.g. 3x256x256");
    const std::size_t v = std::stoul(part);
    if (v == 0) throw InvalidArgument("bad shape '" + text + "': zero extent");
    shape.push_back(v);
  }
  if (shape.size() != 3) throw InvalidArgument("bad shape '" + text + "', expected CxHxW");
  return shape;
}

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "seed",
      "task.kind", "task.sigma", "task.factor", "task.box",
      "task.keep_prob", "task.kernel_size", "task.kernel_std", "task.oversample", "task.scale", "task.mask_seed",
      "solver.variant", "schedule.T", "schedule.beta_min", "schedule.beta_max", "solver.nfe", "solver.gamma0",
      "solver.t_gamma", "solver.t0", "solver.sigma", "solver.zeta", "solver.lambda", "solver.ablate_dual",
      "solver.map_diffpir",
      "prior.kind", "prior.shape", "prior.amplitude", "prior.variance", "prior.mean", "prior.var",
      "prior.weights", "prior.means", "prior.vars", "prior.endpoint", "prior.timeout_ms",
      "io.input", "io.sample_truth", "io.y", "io.out", "io.image_id",
      "compare.variants", "compare.seeds", "compare.workers",
      "preset.",
  };
  return keys;
}

RunConfig load_run_config(const Config& cfg) {
  cfg.require_known(known_config_keys());
  RunConfig rc;
  rc.raw = cfg;
  rc.name = std::filesystem::path(cfg.source()).stem().string();
  rc.seed = cfg.get_u64("seed", 0);

  TaskSpec& t = rc.task;
  t.kind = cfg.get_string("task.kind", t.kind);
  t.sigma = cfg.get_double("task.sigma", t.sigma);
  if (t.sigma < 0.0) cfg.fail("task.sigma", "must be non-negative");
  t.factor = get_int_in(cfg, "task.factor", t.factor, 1, 1 << 16);
  if (cfg.has("task.box")) {
    const auto parts = cfg.get_list("task.box");
    std::vector<std::size_t> v;
    for (const auto& part : parts) {
      if (part.size() > 7 || part.find_first_not_of("0123456789") != std::string::npos)
        cfg.fail("task.box", "expected top,left,size as non-negative integers");
      v.push_back(std::stoul(part));
    }
    if (v.size() != 3) cfg.fail("task.box", "expected top,left,size");
    t.box_top = v[0];
    t.box_left = v[1];
    t.box_size = v[2];
  }
  t.keep_prob = cfg.get_double("task.keep_prob", t.keep_prob);
  if (t.keep_prob < 0.0 || t.keep_prob > 1.0) cfg.fail("task.keep_prob", "must lie in [0, 1]");
  t.kernel_size = get_int_in(cfg, "task.kernel_size", t.kernel_size, 1, 1 << 12);
  t.kernel_std = cfg.get_double("task.kernel_std", t.kernel_std);
  t.oversample = cfg.get_double("task.oversample", t.oversample);
  t.scale = cfg.get_double("task.scale", t.scale);
  t.mask_seed = cfg.get_u64("task.mask_seed", rc.seed);

  const int steps = get_int_in(cfg, "schedule.T", 1000, 1, 1 << 20);
  SolverConfig& s = rc.solver;
  if (cfg.has("schedule.beta_min") || cfg.has("schedule.beta_max")) {
    const double lo = cfg.get_double("schedule.beta_min");
    const double hi = cfg.get_double("schedule.beta_max");
    try {
      s.schedule = build_schedule(steps, lo, hi);
    } catch (const InvalidArgument& e) {
      cfg.fail("schedule.beta_min", e.what());
    }
  } else {
    s.schedule = default_schedule(steps);
  }
  s.variant = variant_from(cfg, "solver.variant", cfg.get_string("solver.variant", "ddiff"));
  s.nfe = get_int_in(cfg, "solver.nfe", steps, 1, steps);
  s.seed = rc.seed;
  s.policy.gamma0 = cfg.get_double("solver.gamma0", 1.0);
  s.policy.t_gamma = get_int_in(cfg, "solver.t_gamma", 0, 0, steps);
  s.policy.t0 = get_int_in(cfg, "solver.t0", 0, 0, steps);
  s.policy.sigma.kind = parse_sigma_kind(cfg, "solver.sigma");
  s.policy.sigma.zeta = cfg.get_double("solver.zeta", 0.0);
  s.ablate_dual = cfg.get_bool("solver.ablate_dual", false);
  rc.map_diffpir = cfg.get_bool("solver.map_diffpir", false);
  if (s.variant == Variant::diffpir || rc.map_diffpir) {
    DiffPirParams p;
    p.zeta = cfg.get_double("solver.zeta", 0.0);
    p.lambda = cfg.get_double("solver.lambda", 1.0);
    p.sigma_bar.resize(steps);
    for (int k = 1; k <= steps; ++k) {
      const double ab = s.schedule.bar_alpha(k);
      p.sigma_bar[k - 1] = std::sqrt((1.0 - ab) / ab);
    }
    s.diffpir = std::move(p);
  }
  if (rc.map_diffpir && s.variant != Variant::ddiff)
    cfg.fail("solver.map_diffpir", "requires solver.variant = ddiff");
  try {
    SolverConfig probe = s;
    if (rc.map_diffpir) probe.variant = Variant::diffpir;
    validate(probe);
    if (rc.map_diffpir && !(t.sigma > 0.0)) throw InvalidArgument("DiffPIR mapping needs task.sigma > 0");
  } catch (const InvalidArgument& e) {
    throw ConfigError(cfg.source(), 0, e.what());
  }

  PriorSpec& p = rc.prior;
  p.kind = cfg.get_string("prior.kind", p.kind);
  if (cfg.has("prior.shape")) {
    try {
      p.shape = parse_shape(cfg.get_string("prior.shape"));
    } catch (const InvalidArgument& e) {
      cfg.fail("prior.shape", e.what());
    }
  }
  if (p.kind == "toy") {
    p.amplitude = cfg.get_double("prior.amplitude", p.amplitude);
    p.variance = cfg.get_double("prior.variance", p.variance);
    if (!(p.variance > 0.0)) cfg.fail("prior.variance", "must be positive");
  } else if (p.kind == "gaussian") {
    p.mean = resolve(cfg, "prior.mean");
    p.var = resolve(cfg, "prior.var");
  } else if (p.kind == "mixture") {
    for (const auto& w : cfg.get_list("prior.weights")) {
      char* end = nullptr;
      const double v = std::strtod(w.c_str(), &end);
      if (end != w.c_str() + w.size() || !(v >= 0.0)) cfg.fail("prior.weights", "bad weight '" + w + "'");
      p.weights.push_back(v);
    }
    for (const auto& m : cfg.get_list("prior.means")) p.means.push_back(resolve(cfg, "prior.means", m));
    for (const auto& v : cfg.get_list("prior.vars")) p.vars.push_back(resolve(cfg, "prior.vars", v));
    if (p.means.size() != p.weights.size() || p.vars.size() != p.weights.size())
      cfg.fail("prior.weights", "weights, means and vars must have equal lengths");
  } else if (p.kind == "remote") {
    p.endpoint = cfg.get_string("prior.endpoint", "");
    if (const char* env = std::getenv("DDIFF_SCORE_ENDPOINT"); env && *env) p.endpoint = env;
    if (p.endpoint.empty()) cfg.fail("prior.endpoint", "required for a remote prior (or set DDIFF_SCORE_ENDPOINT)");
    try {
      net::parse_endpoint(p.endpoint);
    } catch (const std::exception& e) {
      cfg.fail("prior.endpoint", e.what());
    }
    p.timeout = std::chrono::milliseconds(get_int_in(cfg, "prior.timeout_ms", 30000, 1, 86400000));
  } else {
    cfg.fail("prior.kind", "expected toy, gaussian, mixture or remote, got '" + p.kind + "'");
  }

  IoSpec& io = rc.io;
  if (cfg.has("io.input")) io.input = resolve(cfg, "io.input");
  io.sample_truth = cfg.get_bool("io.sample_truth", false);
  if (io.sample_truth && io.input) cfg.fail("io.sample_truth", "conflicts with io.input");
  if (io.sample_truth && p.kind == "remote") cfg.fail("io.sample_truth", "needs an analytic prior");
  if (cfg.has("io.y")) io.y = resolve(cfg, "io.y");
  if (cfg.has("io.out")) io.out = cfg.get_string("io.out");
  io.image_id = cfg.get_string("io.image_id", io.image_id);
  if (io.image_id.find_first_of(",\n\"") != std::string::npos) cfg.fail("io.image_id", "must not contain , \" or newlines");

  CompareSpec& c = rc.compare;
  if (cfg.has("compare.variants"))
    for (const auto& v : cfg.get_list("compare.variants")) c.variants.push_back(variant_from(cfg, "compare.variants", v));
  c.seeds = get_int_in(cfg, "compare.seeds", 1, 1, 1 << 20);
  c.workers = static_cast<unsigned>(get_int_in(cfg, "compare.workers", 1, 1, 1024));
  for (Variant v : c.variants)
    if (v == Variant::diffpir && !s.diffpir) cfg.fail("compare.variants", "diffpir needs solver.variant = diffpir parameters");
  return rc;
}

SolverConfig effective_solver(const RunConfig& rc) {
  if (!rc.map_diffpir) return rc.solver;
  SolverConfig src = rc.solver;
  src.variant = Variant::diffpir;
  return mapped_ddiff_config(src, rc.task.sigma);
}

Config describe(const RunConfig& rc) {
  Config out;
  const auto& t = rc.task;
  const auto& s = rc.solver;
  out.set("seed", std::to_string(rc.seed));
  out.set("task.kind", t.kind);
  out.set("task.sigma", format_double(t.sigma));
  out.set("task.factor", std::to_string(t.factor));
  out.set("task.box", std::to_string(t.box_top) + "," + std::to_string(t.box_left) + "," + std::to_string(t.box_size));
  out.set("task.keep_prob", format_double(t.keep_prob));
  out.set("task.kernel_size", std::to_string(t.kernel_size));
  out.set("task.kernel_std", format_double(t.kernel_std));
  out.set("task.oversample", format_double(t.oversample));
  out.set("task.scale", format_double(t.scale));
  out.set("task.mask_seed", std::to_string(t.mask_seed));
  out.set("solver.variant", to_string(s.variant));
  out.set("schedule.T", std::to_string(s.schedule.steps()));
  out.set("schedule.beta_min", format_double(s.schedule.beta_min()));
  out.set("schedule.beta_max", format_double(s.schedule.beta_max()));
  out.set("solver.nfe", std::to_string(s.nfe));
  out.set("solver.gamma0", format_double(s.policy.gamma0));
  out.set("solver.t_gamma", std::to_string(s.policy.t_gamma));
  out.set("solver.t0", std::to_string(s.policy.t0));
  out.set("solver.sigma", sigma_kind_name(s.policy.sigma.kind));
  out.set("solver.zeta", format_double(s.policy.sigma.zeta));
  out.set("solver.ablate_dual", s.ablate_dual ? "true" : "false");
  out.set("solver.map_diffpir", rc.map_diffpir ? "true" : "false");
  if (s.diffpir) out.set("solver.lambda", format_double(s.diffpir->lambda));
  out.set("prior.kind", rc.prior.kind);
  if (rc.prior.shape) out.set("prior.shape", join_shape(*rc.prior.shape));
  if (rc.prior.kind == "toy") {
    out.set("prior.amplitude", format_double(rc.prior.amplitude));
    out.set("prior.variance", format_double(rc.prior.variance));
  }
  if (rc.prior.kind == "remote") out.set("prior.endpoint", rc.prior.endpoint);
  if (rc.io.input) out.set("io.input", rc.io.input->string());
  out.set("io.sample_truth", rc.io.sample_truth ? "true" : "false");
  out.set("io.out", rc.io.out.string());
  out.set("io.image_id", rc.io.image_id);
  return out;
}

AnalyticPrior load_analytic_prior(const RunConfig& rc) {
  const auto& p = rc.prior;
  auto check_shape = [&](const Shape& actual) {
    if (p.shape && *p.shape != actual)
      rc.raw.fail("prior.shape", join_shape(*p.shape) + " disagrees with prior tensors " + join_shape(actual));
  };
  if (p.kind == "toy") {
    if (!p.shape) rc.raw.fail("prior.shape", "required for the toy prior");
    return toy_gaussian_prior(*p.shape, p.amplitude, p.variance);
  }
  if (p.kind == "gaussian") {
    GaussianPrior g(read_ddt1(p.mean), read_ddt1(p.var));
    check_shape(g.shape());
    return g;
  }
  if (p.kind == "mixture") {
    std::vector<GaussianPrior> comps;
    for (std::size_t k = 0; k < p.weights.size(); ++k) comps.emplace_back(read_ddt1(p.means[k]), read_ddt1(p.vars[k]));
    MixturePrior m(p.weights, std::move(comps));
    check_shape(m.shape());
    return m;
  }
  return std::monostate{};
}

Shape signal_shape(const RunConfig& rc, const AnalyticPrior& prior) {
  std::optional<Shape> from_prior;
  if (const auto* g = std::get_if<GaussianPrior>(&prior)) from_prior = g->shape();
  if (const auto* m = std::get_if<MixturePrior>(&prior)) from_prior = m->shape();
  if (!from_prior) from_prior = rc.prior.shape;
  if (rc.io.input) {
    const Shape s = read_tensor_or_image(*rc.io.input).shape();
    if (from_prior && *from_prior != s)
      rc.raw.fail("io.input", "shape " + join_shape(s) + " disagrees with the prior shape " + join_shape(*from_prior));
    return s;
  }
  if (!from_prior) rc.raw.fail("prior.shape", "cannot infer the signal shape; set prior.shape or io.input");
  return *from_prior;
}

std::optional<Tensor> ground_truth(const RunConfig& rc, const AnalyticPrior& prior, std::uint64_t seed) {
  if (rc.io.input) return read_tensor_or_image(*rc.io.input);
  if (!rc.io.sample_truth) return std::nullopt;
  RandomSource rs(seed, streams::ground_truth);
  if (const auto* g = std::get_if<GaussianPrior>(&prior)) return sample_prior(*g, rs);
  if (const auto* m = std::get_if<MixturePrior>(&prior)) return sample_prior(*m, rs);
  rc.raw.fail("io.sample_truth", "needs an analytic prior");
}

ScoreFactory score_factory(const RunConfig& rc, const AnalyticPrior& prior) {
  if (const auto* g = std::get_if<GaussianPrior>(&prior))
    return [g = *g]() -> std::unique_ptr<ScoreModel> { return std::make_unique<GaussianScore>(g); };
  if (const auto* m = std::get_if<MixturePrior>(&prior))
    return [m = *m]() -> std::unique_ptr<ScoreModel> { return std::make_unique<MixtureScore>(m); };
  return [endpoint = rc.prior.endpoint, timeout = rc.prior.timeout]() -> std::unique_ptr<ScoreModel> {
    return std::make_unique<RemoteScore>(endpoint, timeout);
  };
}

}  // namespace ddiff
