#include <doctest.h>

#include <cmath>
#include <set>

#include "ddiff/errors.hpp"
#include "ddiff/schedule.hpp"

using namespace ddiff;

TEST_CASE("single-step schedule") {
  const Schedule s = build_schedule(1, 0.5, 0.5);
  CHECK(s.bar_alpha(0) == 1.0);
  CHECK(s.bar_alpha(1) == 0.5);
  CHECK(s.alpha(1) == 0.5);
}

TEST_CASE("default schedule is linear and strictly decreasing") {
  const Schedule s = default_schedule(1000);
  CHECK(s.beta(1) == 1e-4);
  CHECK(s.beta(1000) == doctest::Approx(0.02).epsilon(1e-15));
  CHECK(s.bar_alpha(0) == 1.0);
  for (int t = 1; t <= 1000; ++t) {
    CHECK(s.bar_alpha(t) < s.bar_alpha(t - 1));
    CHECK((s.alpha(t) > 0.0 && s.alpha(t) < 1.0));
  }
  CHECK(s.bar_alpha(1000) < 1e-4);
  // Independent running product in long double.
  long double prod = 1.0L;
  for (int t = 1; t <= 1000; ++t) prod *= 1.0L - (1e-4L + (t - 1) * (0.02L - 1e-4L) / 999.0L);
  CHECK(std::abs(static_cast<double>(prod) - s.bar_alpha(1000)) <= 1e-12 * static_cast<double>(prod));
}

TEST_CASE("bar_alpha is the exact running product") {
  for (const Schedule& s : {default_schedule(1000), default_schedule(50), build_schedule(10, 0.1, 0.3)})
    for (int t = 1; t <= s.steps(); ++t) {
      CHECK(s.bar_alpha(t) == s.bar_alpha(t - 1) * s.alpha(t));
      // The quotient recovers alpha up to the rounding of one multiply and one divide.
      CHECK(std::abs(s.bar_alpha(t) / s.bar_alpha(t - 1) - s.alpha(t)) <= 2.0 * std::nextafter(1.0, 2.0) - 2.0);
    }
}

TEST_CASE("rescaled default for other step counts") {
  const Schedule s = default_schedule(100);
  CHECK(s.beta(1) == doctest::Approx(1e-3).epsilon(1e-14));
  CHECK(s.beta(100) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("invalid schedules are rejected") {
  CHECK_THROWS_AS(build_schedule(0, 0.1, 0.2), InvalidArgument);
  CHECK_THROWS_AS(build_schedule(10, 0.0, 0.2), InvalidArgument);
  CHECK_THROWS_AS(build_schedule(10, 0.3, 0.2), InvalidArgument);
  CHECK_THROWS_AS(build_schedule(10, 0.1, 1.0), InvalidArgument);
  CHECK_THROWS_AS(default_schedule(10), InvalidArgument);  // beta_max rescales past 1
  const Schedule s = build_schedule(10, 0.01, 0.2);
  CHECK_THROWS_AS(s.bar_alpha(11), InvalidArgument);
  CHECK_THROWS_AS(s.beta(0), InvalidArgument);
  CHECK_THROWS_AS(sigma_t(s, 0, {}), InvalidArgument);
}

TEST_CASE("sigma choices") {
  CHECK(sigma_between(0.5, 0.91, {SigmaKind::full, 0}) == doctest::Approx(0.3).epsilon(1e-15));
  const Schedule s = default_schedule(1000);
  for (int t = 1; t <= 1000; ++t) {
    CHECK(sigma_t(s, t, {SigmaKind::zeta, 0.0}) == 0.0);
    CHECK(sigma_t(s, t, {SigmaKind::zeta, 1.0}) == sigma_t(s, t, {SigmaKind::full, 0}));
  }
  CHECK(sigma_t(s, 1, {SigmaKind::full, 0}) == 0.0);
  CHECK(sigma_t(s, 1, {SigmaKind::ddpm, 0}) == 0.0);
  CHECK_THROWS_AS(sigma_between(0.5, 0.9, {SigmaKind::zeta, 1.5}), InvalidArgument);
}

TEST_CASE("DDPM sigma leaves the closed-form noise budget") {
  const Schedule s = default_schedule(1000);
  for (int t = 2; t <= 1000; ++t) {
    const double ab = s.bar_alpha(t), abp = s.bar_alpha(t - 1);
    const double sg = sigma_t(s, t, {SigmaKind::ddpm, 0});
    const double budget = 1.0 - abp - sg * sg;
    const double closed = (1.0 - abp) * (ab / abp) * (1.0 - abp) / (1.0 - ab);
    CHECK(budget == doctest::Approx(closed).epsilon(1e-9));
    CHECK(closed >= 0.0);
  }
}

TEST_CASE("noise budget is non-negative for every choice") {
  const Schedule s = default_schedule(1000);
  for (const SigmaChoice c : {SigmaChoice{SigmaKind::ddpm, 0}, SigmaChoice{SigmaKind::full, 0}, SigmaChoice{SigmaKind::zeta, 0.3},
                              SigmaChoice{SigmaKind::zeta, 1.0}})
    for (int t = 1; t <= 1000; ++t) {
      const double sg = sigma_t(s, t, c);
      CHECK(1.0 - s.bar_alpha(t - 1) - sg * sg >= -1e-12);
      CHECK(std::isfinite(eps_hat_coefficient(s.bar_alpha(t - 1), sg)));
    }
}

TEST_CASE("eps_hat coefficient clamps tiny negatives and rejects real overdraws") {
  CHECK(eps_hat_coefficient(0.91, 0.3) == doctest::Approx(0.0).epsilon(1e-7));
  CHECK(eps_hat_coefficient(0.5, std::sqrt(0.5) + 1e-15) == 0.0);
  CHECK(eps_hat_coefficient(0.64, 0.0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK_THROWS_AS(eps_hat_coefficient(0.5, 0.8), NumericalError);
}

TEST_CASE("gamma step function") {
  StepPolicy p;
  p.gamma0 = 18;
  p.t_gamma = 90;
  CHECK(gamma_t(p, 100) == 59.4);
  CHECK(gamma_t(p, 91) == 59.4);
  CHECK(gamma_t(p, 90) == 1.8);
  CHECK(gamma_t(p, 1) == 1.8);
  p.gamma0 = 0.0;
  for (int t = 1; t <= 1000; ++t) CHECK(gamma_t(p, t) == 0.0);
}

TEST_CASE("policy validation") {
  StepPolicy p;
  CHECK_NOTHROW(validate_policy(p, 1000));
  p.gamma0 = -1.0;
  CHECK_THROWS_AS(validate_policy(p, 1000), InvalidArgument);
  p.gamma0 = 1.0;
  p.t_gamma = 1001;
  CHECK_THROWS_AS(validate_policy(p, 1000), InvalidArgument);
  p.t_gamma = 0;
  p.t0 = -1;
  CHECK_THROWS_AS(validate_policy(p, 1000), InvalidArgument);
  p.t0 = 0;
  p.sigma = {SigmaKind::zeta, -0.1};
  CHECK_THROWS_AS(validate_policy(p, 1000), InvalidArgument);
}

TEST_CASE("time grids") {
  auto g = time_grid(1000, 1000);
  for (int k = 0; k < 1000; ++k) CHECK(g[k] == 1000 - k);
  CHECK(time_grid(1000, 2) == std::vector<int>{1000, 1});
  CHECK(time_grid(1000, 1) == std::vector<int>{1000});
  for (int nfe : {3, 7, 200, 500, 999}) {
    CAPTURE(nfe);
    g = time_grid(1000, nfe);
    CHECK(g.size() == static_cast<std::size_t>(nfe));
    CHECK(g.front() == 1000);
    CHECK(g.back() == 1);
    int max_gap = 0;
    for (std::size_t k = 1; k < g.size(); ++k) {
      CHECK(g[k] < g[k - 1]);
      max_gap = std::max(max_gap, g[k - 1] - g[k]);
    }
    const int stride = static_cast<int>(std::ceil(999.0 / (nfe - 1)));
    CHECK(max_gap <= stride);
    if (nfe == 500) CHECK(max_gap <= 3);
  }
  CHECK_THROWS_AS(time_grid(1000, 0), InvalidArgument);
  CHECK_THROWS_AS(time_grid(10, 11), InvalidArgument);
}
