#include <doctest.h>

#include <cmath>

#include "ledits/error.hpp"
#include "ledits/schedule.hpp"
#include "support/oracles.hpp"

using namespace ledits;

TEST_CASE("default T=100 schedule is monotone with 100 sigmas") {
  const auto s = build_schedule(ScheduleParams::defaults(100, 1.0));
  CHECK(s.steps() == 100);
  CHECK(s.sigmas().size() == 100);
  CHECK(s.alpha_bar(0) == 1.0);
  CHECK(s.alpha_bar(100) < s.alpha_bar(1));
  CHECK(s.alpha_bar(1) < 1.0);
  for (int t = 1; t <= 100; ++t) {
    CHECK(s.alpha_bar(t) < s.alpha_bar(t - 1));
    CHECK(s.alpha_bar(t) > 0.0);
    CHECK(s.sigma(t) >= 0.0);
  }
  CHECK(s.beta(1) == doctest::Approx(1e-3));
  CHECK(s.beta(100) == doctest::Approx(0.2));
}

TEST_CASE("eta = 0 zeroes every sigma") {
  for (int T : {1, 7, 100}) {
    const auto s = build_schedule(T, 1e-3, 0.2, 0.0);
    for (double v : s.sigmas()) CHECK(v == 0.0);
  }
}

TEST_CASE("alpha_bar and sigma agree with a direct-product recomputation") {
  const auto p = ScheduleParams::defaults(100, 1.0);
  const auto s = build_schedule(p);
  for (int t = 1; t <= 100; ++t) {
    const double abar = oracle::alpha_bar(p.beta_start, p.beta_end, 100, t);
    const double abar_prev = oracle::alpha_bar(p.beta_start, p.beta_end, 100, t - 1);
    CHECK(std::abs(s.alpha_bar(t) - abar) <= 1e-12 * abar);
    const double beta = 1.0 - abar / abar_prev;
    const double var = beta * (1.0 - abar_prev) / (1.0 - abar);
    CHECK(std::abs(s.sigma(t) * s.sigma(t) - var) <= 1e-12);
  }
}

TEST_CASE("sigma_at edge cases") {
  const auto s1 = build_schedule(ScheduleParams::defaults(100, 1.0));
  const auto sh = build_schedule(ScheduleParams::defaults(100, 0.5));
  CHECK(sigma_at(s1, 1) == 0.0);
  for (int t = 1; t <= 100; ++t) CHECK(sigma_at(sh, t) == 0.5 * sigma_at(s1, t));
  CHECK_THROWS_AS(sigma_at(s1, 0), IndexError);
  CHECK_THROWS_AS(sigma_at(s1, 101), IndexError);
}

TEST_CASE("sigma stays below sqrt(1 - abar_{t-1})") {
  for (int T : {2, 10, 100, 1000}) {
    const auto s = build_schedule(T, 1e-3, 0.2, 1.0);
    for (int t = 2; t <= T; ++t) CHECK(s.sigma(t) < std::sqrt(1.0 - s.alpha_bar(t - 1)));
  }
}

TEST_CASE("build is a pure function of its arguments") {
  const auto a = build_schedule(100, 1e-3, 0.2, 1.0);
  const auto b = build_schedule(100, 1e-3, 0.2, 1.0);
  CHECK(a.betas() == b.betas());
  CHECK(a.sigmas() == b.sigmas());
  CHECK(a.fingerprint() == b.fingerprint());
  // Doubling T with fixed endpoints is not rescaled behind the caller's back.
  const auto c = build_schedule(200, 1e-3, 0.2, 1.0);
  CHECK(c.beta(1) == a.beta(1));
  CHECK(c.beta(200) == a.beta(100));
  CHECK(c.alpha_bar(200) < a.alpha_bar(100));
  CHECK(c.fingerprint() != a.fingerprint());
  CHECK(build_schedule(100, 1e-3, 0.2, 0.5).beta_fingerprint() == a.beta_fingerprint());
  CHECK(build_schedule(100, 1e-3, 0.2, 0.5).fingerprint() != a.fingerprint());
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(build_schedule(0, 1e-3, 0.2, 1.0), ParameterError);
  CHECK_THROWS_AS(build_schedule(10, 0.0, 0.2, 1.0), ParameterError);
  CHECK_THROWS_AS(build_schedule(10, 0.3, 0.2, 1.0), ParameterError);
  CHECK_THROWS_AS(build_schedule(10, 1e-3, 1.0, 1.0), ParameterError);
  CHECK_THROWS_AS(build_schedule(10, 1e-3, 0.2, -0.1), ParameterError);
  CHECK_THROWS_AS(build_schedule(10, 1e-3, 0.2, 1.5), ParameterError);
  CHECK_NOTHROW(build_schedule(1, 0.5, 0.5, 1.0));
  // The 1000/T default scaling only yields valid betas for T > 20.
  CHECK_THROWS_AS(build_schedule(ScheduleParams::defaults(20)), ParameterError);
  CHECK_NOTHROW(build_schedule(ScheduleParams::defaults(21)));
}
