#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>

#include "ddiff/errors.hpp"
#include "ddiff/metrics.hpp"
#include "ddiff/oracle.hpp"

using namespace ddiff;

namespace {

ForwardModelPtr op_for(const std::string& kind, const Shape& shape, double sigma) {
  TaskSpec s;
  s.kind = kind;
  s.sigma = sigma;
  s.kernel_size = 5;
  s.kernel_std = 1.0;
  s.mask_seed = 7;
  s.factor = 4;
  return make_operator(s, shape);
}

// Direct windowed SSIM on one plane of [0, 1] values: explicit 2-D weights,
// two-pass moments.
double reference_ssim(const std::vector<double>& a, const std::vector<double>& b, int h, int w) {
  const int n = 11, r = 5;
  std::vector<double> wgt(n * n);
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) total += wgt[i * n + j] = std::exp(-((i - r) * (i - r) + (j - r) * (j - r)) / 4.5);
  for (auto& v : wgt) v /= total;
  double acc = 0.0;
  int count = 0;
  for (int top = 0; top + n <= h; ++top)
    for (int left = 0; left + n <= w; ++left) {
      double ma = 0, mb = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          ma += wgt[i * n + j] * a[(top + i) * w + left + j];
          mb += wgt[i * n + j] * b[(top + i) * w + left + j];
        }
      double va = 0, vb = 0, cab = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double da = a[(top + i) * w + left + j] - ma, db = b[(top + i) * w + left + j] - mb;
          va += wgt[i * n + j] * da * da;
          vb += wgt[i * n + j] * db * db;
          cab += wgt[i * n + j] * da * db;
        }
      const double c1 = 1e-4, c2 = 9e-4;
      acc += (2 * ma * mb + c1) * (2 * cab + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return acc / count;
}

}  // namespace

TEST_CASE("psnr fixtures") {
  const Tensor a({1, 4, 4}, 0.3);
  // Differences are measured after mapping [-1, 1] to [0, 1].
  CHECK(std::abs(psnr(a, Tensor({1, 4, 4}, 0.3 - 0.2)) - 20.0) <= 1e-9);
  CHECK(std::abs(psnr(Tensor({1, 4, 4}, 1.0), Tensor({1, 4, 4}, 0.0)) - 6.020599913279624) <= 1e-9);
  CHECK(psnr(a, a) == std::numeric_limits<double>::infinity());
  RandomSource rs(1, 0);
  const Tensor x = gaussian_draw(rs, {3, 8, 8}), y = gaussian_draw(rs, {3, 8, 8});
  CHECK(psnr(x, y) == psnr(y, x));
  CHECK_THROWS_AS(psnr(a, Tensor({1, 4, 5})), InvalidArgument);
}

TEST_CASE("ssim fixtures") {
  RandomSource rs(2, 0);
  Tensor a = gaussian_draw(rs, {3, 16, 16});
  a *= 0.3;
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-14));
  // Constant 0.5 against constant 0.25 in unit range: luminance term only.
  const double lum = (2 * 0.5 * 0.25 + 1e-4) / (0.25 + 0.0625 + 1e-4);
  CHECK(ssim(Tensor({1, 12, 12}, 0.0), Tensor({1, 12, 12}, -0.5)) == doctest::Approx(lum).epsilon(1e-12));
  CHECK(lum == doctest::Approx(0.800064).epsilon(1e-6));

  const Tensor b = a + 0.2 * gaussian_draw(rs, {3, 16, 16});
  double expect = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<double> pa(256), pb(256);
    for (std::size_t k = 0; k < 256; ++k) {
      pa[k] = 0.5 * (a[c * 256 + k] + 1.0);
      pb[k] = 0.5 * (b[c * 256 + k] + 1.0);
    }
    expect += reference_ssim(pa, pb, 16, 16) / 3.0;
  }
  CHECK(std::abs(ssim(a, b) - expect) <= 1e-6);
  CHECK(ssim(a, b) < 1.0);
  CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));
  CHECK_THROWS_AS(ssim(Tensor({1, 10, 16}), Tensor({1, 10, 16})), InvalidArgument);
}

TEST_CASE("residual fixtures") {
  const auto op = op_for("identity", {1, 1, 4}, 0.1);
  const Tensor x({1, 1, 4}, {0.2, -0.1, 0.4, 0.0});
  CHECK(residual(*op, x, x) == -0.1 * 0.1);
  const Tensor y({1, 1, 4}, {0.3, -0.1, 0.5, 0.0});
  CHECK(residual(*op, x, y) == doctest::Approx(-0.005).epsilon(1e-12));

  // At the truth the per-element residual is (chi^2_n / n - 1) sigma^2.
  const auto big = op_for("inpaint_random", {1, 64, 64}, 0.1);
  RandomSource truth(3, 2), noise(3, 1);
  const Tensor t = gaussian_draw(truth, {1, 64, 64});
  const double r = residual(*big, t, big->degrade(t, noise));
  CHECK(std::abs(r) <= 4.0 * 0.01 * std::sqrt(2.0 / 4096.0));
  CHECK_THROWS_AS(residual(*op, x, Tensor({1, 1, 3})), InvalidArgument);
}

TEST_CASE("aggregates") {
  auto agg = aggregate({1.0, 2.0, 3.0, 4.0});
  CHECK(agg.mean == 2.5);
  CHECK(agg.ci_half_width == doctest::Approx(1.96 * std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-14));
  CHECK(agg.n == 4);
  agg = aggregate({7.0});
  CHECK(agg.mean == 7.0);
  CHECK(agg.ci_half_width == 0.0);
  const double inf = std::numeric_limits<double>::infinity();
  agg = aggregate({inf, 10.0, 20.0, std::nan("")});
  CHECK(agg.mean == 15.0);
  CHECK(agg.n == 2);
  CHECK(agg.excluded == 1);
  agg = aggregate({});
  CHECK(std::isnan(agg.mean));
  CHECK(agg.n == 0);
}

TEST_CASE("metrics csv layout") {
  MetricReport rep;
  rep.images.push_back({"a", 20.0, 0.5, -0.01});
  rep.images.push_back({"b", std::numeric_limits<double>::infinity(), 1.0, 0.01});
  rep.images.push_back({"c", 30.0, 0.75, 0.0});
  const std::string csv = metrics_csv(rep);
  CHECK(csv ==
        "image_id,psnr,ssim,residual\n"
        "a,20,0.5,-0.01\n"
        "b,inf,1,0.01\n"
        "c,30,0.75,0\n"
        "mean,25,0.75,0\n"
        "ci95," + format_double(1.96 * std::sqrt(50.0) / std::sqrt(2.0)) + "," +
            format_double(1.96 * 0.25 / std::sqrt(3.0)) + "," + format_double(1.96 * 0.01 / std::sqrt(3.0)) + "\n");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("gaussian map oracle closed forms") {
  const Shape shape{1, 8, 8};
  const GaussianPrior prior = toy_gaussian_prior(shape, 0.8, 0.01);
  RandomSource rs(4, 0);
  const Tensor y = gaussian_draw(rs, shape);

  // Identity: per-element precision-weighted average.
  const auto id = op_for("identity", shape, 0.05);
  const Tensor xi = map_oracle_gaussian(*id, y, prior);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double s2 = 0.05 * 0.05, v = prior.var[i];
    CHECK(xi[i] == doctest::Approx((y[i] * v + prior.mean[i] * s2) / (v + s2)).epsilon(1e-9));
  }
  // Zero-mean unit-variance prior: y / (1 + sigma^2).
  const GaussianPrior unit(Tensor(shape), Tensor(shape, 1.0));
  const Tensor xu = map_oracle_gaussian(*op_for("identity", shape, 0.5), y, unit);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(xu[i] == doctest::Approx(y[i] / (1.0 + 0.25)).epsilon(1e-9));

  // Masked pixels fall back to the prior mean.
  const auto mask = op_for("inpaint_random", shape, 0.05);
  const Tensor xm = map_oracle_gaussian(*mask, mask->apply(y), prior);
  const Tensor ones = mask->apply(Tensor(shape, 1.0));
  for (std::size_t i = 0; i < y.size(); ++i)
    if (ones[i] == 0.0) CHECK(std::abs(xm[i] - prior.mean[i]) <= 1e-9);

  for (const auto& op : {id, mask})
    CHECK(max_abs(map_objective_gradient(*op, op->apply(y), prior, map_oracle_gaussian(*op, op->apply(y), prior))) <=
          1e-6);
  CHECK_THROWS_AS(map_oracle_gaussian(*op_for("hdr", shape, 0.05), y, prior), InvalidArgument);
}

TEST_CASE("gaussian map oracle against a dense solve") {
  const Shape shape{1, 16, 16};
  const GaussianPrior prior = toy_gaussian_prior(shape, 0.8, 0.0015);
  RandomSource rs(5, 0);
  for (const std::string kind : {"gaussian_blur", "sr", "inpaint_random"}) {
    CAPTURE(kind);
    const auto op = op_for(kind, shape, 0.05);
    const Tensor y = op->degrade(sample_prior(prior, rs), rs);
    const int n = 256, m = static_cast<int>(shape_size(op->output_shape()));
    Eigen::MatrixXd a(m, n);
    for (int j = 0; j < n; ++j) {
      Tensor e(shape);
      e[j] = 1.0;
      const Tensor col = op->apply(e);
      for (int i = 0; i < m; ++i) a(i, j) = col[i];
    }
    Eigen::VectorXd yv(m), prec(n), mu(n);
    for (int i = 0; i < m; ++i) yv(i) = y[i];
    for (int i = 0; i < n; ++i) {
      prec(i) = 1.0 / prior.var[i];
      mu(i) = prior.mean[i];
    }
    const double s2 = 0.05 * 0.05;
    Eigen::MatrixXd h = a.transpose() * a / s2;
    h.diagonal() += prec;
    const Eigen::VectorXd rhs = a.transpose() * yv / s2 + prec.cwiseProduct(mu);
    const Eigen::VectorXd dense = h.ldlt().solve(rhs);
    const Tensor x = map_oracle_gaussian(*op, y, prior);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(x[i] - dense(i)));
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("mixture map oracle") {
  const Shape shape{1, 4, 4};
  const GaussianPrior g = toy_gaussian_prior(shape, 0.8, 0.01);
  RandomSource rs(6, 0);
  const auto id = op_for("identity", shape, 0.1);
  const Tensor y = gaussian_draw(rs, shape);
  CHECK(max_abs_diff(map_oracle_mixture(*id, y, MixturePrior({1.0}, {g})), map_oracle_gaussian(*id, y, g)) <= 1e-12);
  CHECK(map_objective(*id, y, MixturePrior({1.0}, {g}), y) - map_objective(*id, y, g, y) ==
        doctest::Approx(map_objective(*id, y, MixturePrior({1.0}, {g}), g.mean) - map_objective(*id, y, g, g.mean))
            .epsilon(1e-9));

  // Two well separated modes: the oracle lands in the one the data favour.
  const GaussianPrior lo(Tensor(shape, -0.5), Tensor(shape, 0.01)), hi(Tensor(shape, 0.5), Tensor(shape, 0.01));
  const MixturePrior two({0.5, 0.5}, {lo, hi});
  const Tensor near_hi(shape, 0.4);
  const Tensor x = map_oracle_mixture(*id, near_hi, two);
  const Tensor xh = map_oracle_gaussian(*id, near_hi, hi);
  CHECK(max_abs_diff(x, xh) <= 1e-6);
  CHECK(map_objective(*id, near_hi, two, x) <= map_objective(*id, near_hi, two, map_oracle_gaussian(*id, near_hi, lo)));
}

TEST_CASE("mixture map oracle matches a brute-force grid in two dimensions") {
  const Shape shape{1, 1, 2};
  const MixturePrior p({0.35, 0.65}, {GaussianPrior(Tensor(shape, {-0.6, 0.4}), Tensor(shape, {0.05, 0.2})),
                                      GaussianPrior(Tensor(shape, {0.5, -0.3}), Tensor(shape, {0.1, 0.03}))});
  const auto op = op_for("identity", shape, 0.4);
  const Tensor y(shape, {0.1, 0.05});
  const Tensor x = map_oracle_mixture(*op, y, p);
  double best = std::numeric_limits<double>::infinity();
  Tensor arg(shape);
  const int n = 400;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Tensor c(shape, {-1.5 + 3.0 * i / (n - 1), -1.5 + 3.0 * j / (n - 1)});
      const double v = map_objective(*op, y, p, c);
      if (v < best) {
        best = v;
        arg = c;
      }
    }
  const double h = 3.0 / (n - 1);
  CHECK(map_objective(*op, y, p, x) <= best + 1e-12);
  CHECK(max_abs_diff(x, arg) <= 2 * h);
}

TEST_CASE("relative l2") {
  CHECK(relative_l2(Tensor({1, 1, 2}, {3.0, 4.0}), Tensor({1, 1, 2}, {0.0, 8.0})) == doctest::Approx(5.0 / 8.0));
}
