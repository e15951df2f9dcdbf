#include <doctest.h>

#include <cmath>

#include "cvcon/errors.hpp"
#include "cvcon/harness.hpp"
#include "cvcon/learners.hpp"

using namespace cvcon;

namespace {

ExperimentSpec small_spec() {
  ExperimentSpec spec;
  spec.n = 12;
  spec.k = {3, 4};
  spec.delta = {0.1};
  spec.q_grid = {1, 2};
  spec.trials = 2000;
  spec.bootstrap = 50;
  spec.replications = 300;
  spec.seed = 11;
  return spec;
}

}  // namespace

TEST_CASE("spec validation") {
  auto spec = small_spec();
  CHECK_NOTHROW(validate_spec(spec, "coverage"));
  spec.k = {5};
  CHECK_THROWS_AS(validate_spec(spec, "coverage"), ArgumentError);
  spec = small_spec();
  spec.k = {1};
  CHECK_THROWS_AS(validate_spec(spec, "coverage"), ArgumentError);
  spec = small_spec();
  spec.delta = {1.0};
  CHECK_THROWS_AS(validate_spec(spec, "coverage"), ArgumentError);
  spec = small_spec();
  spec.replications = 10;
  CHECK_THROWS_AS(validate_spec(spec, "coverage"), ArgumentError);
  CHECK_NOTHROW(validate_spec(spec, "compute-bound"));
  spec = small_spec();
  spec.distribution = "cauchy";
  CHECK_THROWS_AS(validate_spec(spec, "coverage"), ArgumentError);
  spec = small_spec();
  spec.scaling_grid = {{20, 2}, {40, 4}};
  CHECK_THROWS_AS(validate_spec(spec, "scaling"), ArgumentError);
  spec.scaling_grid = {{20, 2}, {40, 4}, {8, 4}};
  CHECK_THROWS_AS(validate_spec(spec, "scaling"), ArgumentError);
}

TEST_CASE("factories pair learners with compatible tasks") {
  auto spec = small_spec();
  CHECK(make_learner(spec)->name() == "sample_mean");
  CHECK(make_loss(spec)->name() == "squared");
  spec.learner = "ridge";
  CHECK_THROWS_AS(make_learner(spec), ArgumentError);
  spec.distribution = "linear_regression";
  CHECK(make_learner(spec)->name() == "ridge(1)");
  spec.learner = "knn";
  spec.distribution = "two_class";
  CHECK(make_learner(spec)->name() == "knn(3)");
  CHECK(make_loss(spec)->name() == "zero_one");
  spec.learner = "constant";
  spec.constant_value = 1.0;
  const auto h = make_learner(spec)->fit(Sample({Instance{LabeledPoint{{0.3, 0.4}, 0}}}));
  CHECK(ZeroOneLoss()(h, Instance{LabeledPoint{{5.0, 5.0}, 1}}) == 0.0);
  spec.learner = "svm";
  CHECK_THROWS_AS(make_learner(spec), ArgumentError);
}

TEST_CASE("expected risk oracle agrees with exact enumeration") {
  auto spec = small_spec();
  spec.p = 0.3;
  CHECK(*expected_risk_oracle(spec, 10) == doctest::Approx(0.21 * 1.1));
  spec.learner = "constant";
  spec.constant_value = 0.5;
  CHECK(*expected_risk_oracle(spec, 10) == doctest::Approx(0.04 + 0.21));
  spec.learner = "sample_mean";
  spec.distribution = "linear_regression";
  CHECK_FALSE(expected_risk_oracle(spec, 10).has_value());

  SampleMeanLearner a;
  SquaredLoss sq;
  const auto ex = exact_term3(a, sq, *make_distribution(small_spec()), 4, 2);
  // sigma^2 (1 + 1/n) and sigma^2 (1 + 1/(n - m))
  CHECK(ex.expected_risk == doctest::Approx(0.25 * 1.25));
  CHECK(ex.expected_cv == doctest::Approx(0.25 * 1.5));
  CHECK(ex.term3 == doctest::Approx(0.0625));
  CHECK(ex.term3 <= ex.beta2);
}

TEST_CASE("coverage on a small sample-mean experiment") {
  const auto spec = small_spec();
  const auto report = run_coverage(spec);
  REQUIRE(report.cells.size() == 2);
  for (const auto& c : report.cells) {
    CHECK(c.replications == 300);
    CHECK(c.bound.total > c.q95_delta);
    CHECK(c.exceed_count == 0);
    CHECK(c.pass);
    CHECK(c.cv_sanity);
    CHECK(c.mean_delta <= c.q95_delta);
    CHECK(c.median_delta <= c.q95_delta);
    CHECK(c.wilson.hi <= c.delta);
  }
  CHECK(report.pass);
  // profiles for (n - m, m), (n, 1) and (n, m) per k, with (n, 1) shared
  CHECK(report.profiles.size() == 5);
}

TEST_CASE("coverage does not depend on the worker count") {
  auto spec = small_spec();
  spec.k = {3};
  spec.replications = 100;
  const auto one = run_coverage(spec);
  spec.workers = 3;
  const auto three = run_coverage(spec);
  CHECK(one.cells[0].bound.total == three.cells[0].bound.total);
  CHECK(one.cells[0].mean_delta == three.cells[0].mean_delta);
  CHECK(one.cells[0].q95_delta == three.cells[0].q95_delta);
}

TEST_CASE("k = 2 uses the trivial profile and says so") {
  auto spec = small_spec();
  spec.n = 4;
  spec.k = {2};
  spec.replications = 100;
  const auto report = run_coverage(spec);
  bool noted = false;
  for (const auto& c : report.cells[0].bound.caveats) noted = noted || c.find("trivial") != std::string::npos;
  CHECK(noted);
  CHECK(report.pass);
}

TEST_CASE("constant learner: zero term 3, degenerate a") {
  auto spec = small_spec();
  spec.learner = "constant";
  spec.k = {3};
  const auto report = run_coverage(spec);
  const auto& c = report.cells[0];
  CHECK(c.term3 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(c.bound.term3 == 0.0);
  CHECK(c.bound.a_used == doctest::Approx(spec.a_max));
}

TEST_CASE("decomposition with an enumerated term 3") {
  auto spec = small_spec();
  spec.k = {4};
  const auto report = run_decomposition(spec);
  REQUIRE(report.cells.size() == 1);
  const auto& cell = report.cells[0];
  REQUIRE(cell.terms.size() == 3);
  CHECK(cell.terms[2].exact);
  CHECK(cell.means_exact);
  CHECK(cell.mean_risk == doctest::Approx(0.25 * (1.0 + 1.0 / 12.0)));
  CHECK(cell.mean_cv == doctest::Approx(0.25 * (1.0 + 1.0 / 9.0)));
  for (const auto& t : cell.terms) {
    INFO(t.name << " empirical " << t.empirical << " bound " << t.bound);
    CHECK(t.pass);
    CHECK(t.empirical >= 0.0);
  }
  CHECK(report.pass);
}

TEST_CASE("scaling and rate diagnostics") {
  auto spec = small_spec();
  spec.trials = 1000;
  spec.scaling_grid = {{8, 1}, {12, 2}, {16, 2}};
  const auto report = run_scaling(spec);
  REQUIRE(report.rows.size() == 3);
  for (const auto& row : report.rows) {
    CHECK(row.beta2 > 0.0);
    CHECK(row.ratio == doctest::Approx(row.beta2 * row.n / std::sqrt(static_cast<double>(row.m))));
    CHECK(row.halving < 1.0);
  }
  CHECK_FALSE(report.degenerate);
  REQUIRE(report.rate.has_value());
  CHECK(report.rate->rows.size() == 12);
  CHECK(report.rate->c1 >= 0.0);
  CHECK(report.rate->c2 >= 0.0);
  CHECK(report.rate->worst_factor >= 1.0);

  spec.learner = "constant";
  const auto flat = run_scaling(spec);
  CHECK(flat.degenerate);
  CHECK_FALSE(flat.flagged);
  CHECK_FALSE(flat.rate.has_value());
}

TEST_CASE("efron-stein runs for each construction") {
  auto spec = small_spec();
  spec.n = 6;
  spec.k = {3};
  spec.es_trials = 1000;
  spec.inner = 20;
  spec.construction = "term2";
  const auto r2 = run_efron_stein(spec, false);
  CHECK(r2.chain.pass);
  CHECK(r2.moments.exact);
  CHECK(r2.multiplier == 6.0);
  CHECK(r2.inequality.size() == 3);
  CHECK(r2.pass);

  spec.construction = "mean";
  const auto rm = run_efron_stein(spec, false);
  CHECK(rm.inequality.empty());
  CHECK(rm.chain.pass);

  spec.construction = "term1";
  spec.cgf_trials = 10000;
  const auto r1 = run_efron_stein(spec, true);
  CHECK(r1.k == 3);
  CHECK(r1.multiplier == 3.0);
  REQUIRE(r1.cgf.has_value());
  CHECK(r1.cgf->rows.size() == spec.lambda_grid.size());

  spec.construction = "term3";
  CHECK_THROWS_AS(run_efron_stein(spec, false), ArgumentError);
}
