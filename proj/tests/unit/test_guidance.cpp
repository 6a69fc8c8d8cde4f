#include <doctest.h>

#include <cmath>

#include "ledits/guidance.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace ledits;

namespace {

ConceptEdit edit_with(double scale, double threshold, int warmup = 0,
                      EditDirection dir = EditDirection::add) {
  ConceptEdit e;
  e.condition = Condition::subset({1});
  e.scale = scale;
  e.threshold = threshold;
  e.warmup = warmup;
  e.direction = dir;
  return e;
}

}  // namespace

TEST_CASE("cfg_combine") {
  Rng rng(30);
  const Vec u = rng.normal_vec(16);
  const Vec c = rng.normal_vec(16);
  CHECK(cfg_combine(u, c, 1.0) == c);
  CHECK(cfg_combine(u, c, 0.0) == u);
  const Vec g = cfg_combine(u, c, 15.0);
  for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(g[i] - (u[i] + 15.0 * (c[i] - u[i]))) <= 1e-12);
}

TEST_CASE("retained_count") {
  CHECK(retained_count(100, 0.95) == 5);
  CHECK(retained_count(256, 0.95) == 13);
  CHECK(retained_count(2, 0.95) == 1);
  CHECK(retained_count(10, 0.0) == 10);
  CHECK(retained_count(10, 0.5) == 5);
  CHECK(retained_count(10, 0.55) == 5);
  CHECK(retained_count(10, 0.45) == 6);
  CHECK(retained_count(10, 0.999) == 1);
}

TEST_CASE("threshold mask keeps the top quantile, matching a brute-force sort") {
  Rng rng(31);
  for (std::size_t n : {2u, 7u, 100u, 256u}) {
    for (double lambda : {0.0, 0.3, 0.9, 0.95}) {
      const Vec u = rng.normal_vec(n);
      const Vec c = rng.normal_vec(n);
      const Vec term = concept_term(u, c, edit_with(1.0, lambda), 0);
      Vec d(n);
      for (std::size_t i = 0; i < n; ++i) d[i] = c[i] - u[i];
      const std::size_t k = static_cast<std::size_t>(std::ceil((1.0 - lambda) * n - 1e-9));
      const auto expect = oracle::top_k_by_sort(d, k);
      std::vector<std::size_t> nonzero;
      for (std::size_t i = 0; i < n; ++i) {
        if (term[i] != 0.0) nonzero.push_back(i);
      }
      CHECK(nonzero == expect);
      for (std::size_t i : expect) CHECK(term[i] == d[i]);
    }
  }
  SUBCASE("lambda = 0.95 over 100 coordinates keeps exactly 5") {
    const Vec u = rng.normal_vec(100);
    const Vec c = rng.normal_vec(100);
    const Vec term = concept_term(u, c, edit_with(7.0, 0.95), 3);
    CHECK(std::count_if(term.begin(), term.end(), [](double v) { return v != 0.0; }) == 5);
  }
  SUBCASE("ties go to the lower index") {
    const Vec u(6, 0.0);
    const Vec c = {1.0, -3.0, 3.0, 2.0, -3.0, 0.5};
    CHECK(top_magnitude_indices(c, 0.5) == std::vector<std::size_t>{1, 2, 4});
    const Vec term = concept_term(u, c, edit_with(1.0, 0.7), 0);
    CHECK(term == Vec{0.0, -3.0, 3.0, 0.0, 0.0, 0.0});
  }
}

TEST_CASE("concept_term gating, direction and homogeneity") {
  Rng rng(32);
  const Vec u = rng.normal_vec(50);
  const Vec c = rng.normal_vec(50);
  CHECK(concept_term(u, c, edit_with(7.0, 0.95, 1), 0) == Vec(50, 0.0));
  CHECK(concept_term(u, c, edit_with(7.0, 0.95, 1), 1) != Vec(50, 0.0));

  const Vec one = concept_term(u, c, edit_with(1.0, 0.9), 2);
  for (double s : {0.5, 2.0, 7.0, 15.0}) {
    const Vec scaled = concept_term(u, c, edit_with(s, 0.9), 2);
    for (std::size_t i = 0; i < 50; ++i) CHECK(std::abs(scaled[i] - s * one[i]) <= 1e-12 * std::abs(s * one[i]));
  }
  const Vec twice = concept_term(u, c, edit_with(4.0, 0.9), 2);
  const Vec base = concept_term(u, c, edit_with(2.0, 0.9), 2);
  for (std::size_t i = 0; i < 50; ++i) CHECK(twice[i] == 2.0 * base[i]);

  const Vec removed = concept_term(u, c, edit_with(3.0, 0.9, 0, EditDirection::remove), 2);
  const Vec added = concept_term(u, c, edit_with(3.0, 0.9, 0, EditDirection::add), 2);
  for (std::size_t i = 0; i < 50; ++i) CHECK(removed[i] == -added[i]);
}

TEST_CASE("guided_eps") {
  const auto s = fixtures::default_schedule();
  const GmmPredictor pred(fixtures::three_component(), s);
  const Vec x = {0.4, -0.2};
  const int t = 60;
  const Vec eps_u = pred.predict(x, t, Condition::unconditional());
  const Vec eps_t = pred.predict(x, t, Condition::subset({2}));

  SUBCASE("no concepts at scale 1 gives the target estimate") {
    GuidanceConfig g;
    g.target_scale = 1.0;
    CHECK(guided_eps(x, t, 0, pred, Condition::subset({2}), g) == eps_t);
  }
  SUBCASE("unconditional target without concepts gives eps_u") {
    GuidanceConfig g;
    CHECK(max_abs_diff(guided_eps(x, t, 0, pred, Condition::unconditional(), g), eps_u) <= 1e-12);
  }
  SUBCASE("all scales zero gives eps_u") {
    GuidanceConfig g;
    g.target_scale = 0.0;
    g.concepts = {edit_with(0.0, 0.5), edit_with(0.0, 0.0, 0, EditDirection::remove)};
    CHECK(max_abs_diff(guided_eps(x, t, 5, pred, Condition::subset({2}), g), eps_u) <= 1e-12);
  }
  SUBCASE("opposite concepts cancel") {
    GuidanceConfig plain;
    plain.target_scale = 15.0;
    GuidanceConfig both = plain;
    both.concepts = {edit_with(7.0, 0.5, 1, EditDirection::add), edit_with(7.0, 0.5, 1, EditDirection::remove)};
    const Vec a = guided_eps(x, t, 4, pred, Condition::subset({2}), plain);
    const Vec b = guided_eps(x, t, 4, pred, Condition::subset({2}), both);
    CHECK(max_abs_diff(a, b) <= 1e-12);
  }
  SUBCASE("composition formula, both baselines") {
    GuidanceConfig g;
    g.target_scale = 3.0;
    g.concepts = {edit_with(5.0, 0.0, 0)};
    const Vec eps_e = pred.predict(x, t, Condition::subset({1}));
    const Vec got = guided_eps(x, t, 0, pred, Condition::subset({2}), g);
    for (int j = 0; j < 2; ++j) {
      const double expect = eps_u[j] + 3.0 * (eps_t[j] - eps_u[j]) + 5.0 * (eps_e[j] - eps_u[j]);
      CHECK(got[j] == doctest::Approx(expect).epsilon(1e-12));
    }
    g.baseline = ConceptBaseline::target;
    const Vec got_t = guided_eps(x, t, 0, pred, Condition::subset({2}), g);
    for (int j = 0; j < 2; ++j) {
      const double expect = eps_u[j] + 3.0 * (eps_t[j] - eps_u[j]) + 5.0 * (eps_e[j] - eps_t[j]);
      CHECK(got_t[j] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  SUBCASE("validation") {
    GuidanceConfig g;
    g.concepts = {edit_with(1.0, 1.0)};
    CHECK_THROWS_AS(validate(g), ParameterError);
    g.concepts = {edit_with(-1.0, 0.5)};
    CHECK_THROWS_AS(validate(g), ParameterError);
    g.concepts = {edit_with(1.0, 0.5, -1)};
    CHECK_THROWS_AS(validate(g), ParameterError);
    g.concepts.clear();
    g.target_scale = std::nan("");
    CHECK_THROWS_AS(validate(g), ParameterError);
  }
}
