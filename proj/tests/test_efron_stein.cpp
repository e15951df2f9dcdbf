#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "cvcon/distributions.hpp"
#include "cvcon/efron_stein.hpp"
#include "cvcon/errors.hpp"
#include "cvcon/learners.hpp"
#include "cvcon/stability.hpp"

using namespace cvcon;

namespace {

LearnerPtr mean_learner() { return std::make_shared<SampleMeanLearner>(); }
LossPtr squared() { return std::make_shared<SquaredLoss>(); }

// E V_DEL^r for the mean statistic on Bernoulli(p), by bit patterns.
// V_DEL = sum_i (x_i - mean)^2 / (n - 1)^2.
double brute_mean_vdel_moment(double p, std::size_t n, double r) {
  double acc = 0.0;
  for (std::size_t bits = 0; bits < (std::size_t{1} << n); ++bits) {
    double weight = 1.0;
    double ones = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool one = (bits >> i) & 1u;
      weight *= one ? p : 1.0 - p;
      ones += one ? 1.0 : 0.0;
    }
    const double mean = ones / static_cast<double>(n);
    const double ss = ones * (1.0 - mean) * (1.0 - mean) + (static_cast<double>(n) - ones) * mean * mean;
    acc += weight * std::pow(ss / std::pow(static_cast<double>(n - 1), 2), r);
  }
  return acc;
}

}  // namespace

TEST_CASE("Term I diagnostics by hand") {
  SampleMeanLearner a;
  SquaredLoss sq;
  const auto s = scalar_sample({0.0, 1.0, 1.0, 0.0, 1.0, 1.0});
  const auto d = diagnostics_term1(a, sq, s, FoldPlan(6, 3));
  CHECK(d.z == doctest::Approx(7.0 / 24.0));
  REQUIRE(d.z_minus.size() == 3);
  CHECK(d.z_minus[0] == doctest::Approx(3.0 / 8.0));
  CHECK(d.z_minus[1] == doctest::Approx(3.0 / 8.0));
  CHECK(d.z_minus[2] == doctest::Approx(1.0 / 4.0));
  CHECK(d.v_del == doctest::Approx(1.0 / 64.0));
  CHECK(d.fits == 3 + 6);
  CHECK(d.construction == Construction::cv_term1);
  CHECK_THROWS_AS(diagnostics_term1(a, sq, scalar_sample({0.0, 1.0, 1.0, 0.0}), FoldPlan(4, 2)), ArgumentError);
}

TEST_CASE("Term II diagnostics by hand") {
  SampleMeanLearner a;
  SquaredLoss sq;
  BernoulliDistribution b(0.3);
  const auto d = diagnostics_term2(a, sq, scalar_sample({1.0, 0.0, 1.0}), b, 0, 1);
  CHECK(d.z == doctest::Approx(0.344444444444));
  REQUIRE(d.z_minus.size() == 3);
  CHECK(d.z_minus[0] == doctest::Approx(0.25));
  CHECK(d.z_minus[1] == doctest::Approx(0.70));
  CHECK(d.z_minus[2] == doctest::Approx(0.25));
  const double gap0 = 0.344444444444 - 0.25;
  const double gap1 = 0.344444444444 - 0.70;
  CHECK(d.v_del == doctest::Approx(2.0 * gap0 * gap0 + gap1 * gap1));

  auto dist = std::make_shared<BernoulliDistribution>(0.3);
  const RiskTermStatistic stat(mean_learner(), squared(), dist, 0, 1);
  const auto e = stat.evaluate(scalar_sample({1.0, 0.0, 1.0}));
  CHECK(e.z == doctest::Approx(d.z));
  CHECK(e.v_del == doctest::Approx(d.v_del));
}

TEST_CASE("Term II with a Monte Carlo risk shares one holdout") {
  RidgeLearner a(1.0);
  SquaredLoss sq;
  LinearRegressionTask task({1.0}, 0.2);
  Rng rng = stream(2, phase_tag("test/term2"), 0);
  const auto s = task.draw_sample(6, rng);
  const auto d1 = diagnostics_term2(a, sq, s, task, 5000, 9);
  const auto d2 = diagnostics_term2(a, sq, s, task, 5000, 9);
  CHECK(d1.z == d2.z);
  CHECK(d1.v_del == d2.v_del);
  CHECK(d1.v_del > 0.0);
}

TEST_CASE("variance chain for the sample mean") {
  MeanStatistic stat;
  BernoulliDistribution b(0.5);
  const auto r = variance_chain_check(stat, b, 8, 20000, 200, 5);
  // inner resampling inflates E V by n Var(X) / (n^2 inner)
  const double inner_bias = 8.0 * 0.25 / (64.0 * 200.0);
  CHECK(r.var_z == doctest::Approx(1.0 / 32.0).epsilon(0.05));
  CHECK(r.e_v == doctest::Approx(1.0 / 32.0 + inner_bias).epsilon(0.01));
  CHECK(r.e_v_del == doctest::Approx(1.0 / 28.0).epsilon(0.03));
  CHECK(r.pass);
  CHECK_THROWS_AS(variance_chain_check(stat, b, 8, 10, 200, 5), ArgumentError);
}

TEST_CASE("variance chain for a constant learner is identically zero") {
  auto constant = std::make_shared<ConstantLearner>(ScalarHypothesis{0.5});
  auto dist = std::make_shared<BernoulliDistribution>(0.5);
  const RiskTermStatistic stat(constant, squared(), dist, 0, 1);
  const auto r = variance_chain_check(stat, *dist, 6, 1000, 5, 1);
  CHECK(r.var_z == 0.0);
  CHECK(r.e_v == 0.0);
  CHECK(r.e_v_del == 0.0);
  CHECK(r.pass);
}

TEST_CASE("exact moments match brute force for the mean statistic") {
  MeanStatistic stat;
  BernoulliDistribution b(0.3);
  const auto report = moment_report_exact(stat, b, 5, {1, 2, 3});
  CHECK(report.exact);
  CHECK(report.mean_vdel == doctest::Approx(brute_mean_vdel_moment(0.3, 5, 1.0)));
  CHECK(report.mean_vdel == doctest::Approx(0.21 / 4.0));
  for (int q : {1, 2, 3}) {
    const double oracle = std::pow(brute_mean_vdel_moment(0.3, 5, 2.0 * q), 1.0 / (2.0 * q));
    CHECK(report.norms.at(q) == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("Monte Carlo moments bracket the exact values") {
  MeanStatistic stat;
  BernoulliDistribution b(0.3);
  const auto exact = moment_report_exact(stat, b, 6, {1, 2});
  const auto mc = moment_report(stat, b, 6, {1, 2}, 40000, 3);
  CHECK_FALSE(mc.exact);
  CHECK(std::abs(mc.mean_vdel - exact.mean_vdel) <= 4.0 * mc.mean_vdel_se);
  for (int q : {1, 2}) CHECK(std::abs(mc.norms.at(q) - exact.norms.at(q)) <= 4.0 * mc.se.at(q));
}

TEST_CASE("moment inequality rows") {
  MomentReport report;
  report.grid = {1, 2};
  report.norms = {{1, 0.1}, {2, 0.5}};
  report.se = {{1, 0.0}, {2, 0.01}};
  report.mean_vdel = 0.05;
  StabilityProfile profile;
  profile.beta = {{2, 0.1}, {4, 0.2}, {8, 0.3}};
  profile.se = {{2, 0.0}, {4, 0.0}, {8, 0.005}};
  const auto rows = check_moment_inequality(report, profile, 4.0);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].q == 0);
  CHECK(rows[0].rhs == doctest::Approx(0.04));
  CHECK_FALSE(rows[0].holds);
  CHECK(rows[1].rhs == doctest::Approx(0.16));
  CHECK(rows[1].holds);
  CHECK(rows[2].rhs == doctest::Approx(0.36));
  CHECK(rows[2].rhs_se == doctest::Approx(4.0 * 2.0 * 0.3 * 0.005));
  // 0.5 > 0.36 + 4 hypot(0.01, 0.012)
  CHECK_FALSE(rows[2].holds);
  CHECK(check_moment_inequality(report, profile, 4.0, 20.0)[2].holds);
}

TEST_CASE("property: moment inequalities hold on enumerated samples") {
  for (double p : {0.2, 0.5}) {
    auto dist = std::make_shared<BernoulliDistribution>(p);
    for (std::size_t n : {3, 4, 5}) {
      const RiskTermStatistic term2(mean_learner(), squared(), dist, 0, 1);
      const auto report = moment_report_exact(term2, *dist, n, {1, 2});
      const auto profile = sample_mean_bernoulli_beta(p, n, 1, moment_orders_for({1, 2}));
      for (const auto& row : check_moment_inequality(report, profile, static_cast<double>(n), 0.0)) {
        INFO("term2 p=" << p << " n=" << n << " q=" << row.q << " lhs=" << row.lhs << " rhs=" << row.rhs);
        CHECK(row.holds);
      }
    }
    for (std::size_t n : {3, 4, 5, 6}) {
      for (std::size_t k : {3, 4, 5}) {
        if (n % k != 0) continue;
        const CvTermStatistic term1(mean_learner(), squared(), k);
        const auto report = moment_report_exact(term1, *dist, n, {1, 2});
        const auto profile = sample_mean_bernoulli_beta(p, n - n / k, n / k, moment_orders_for({1, 2}));
        for (const auto& row : check_moment_inequality(report, profile, static_cast<double>(k), 0.0)) {
          if (row.q == 0) continue;  // see the next test case
          INFO("term1 p=" << p << " n=" << n << " k=" << k << " q=" << row.q << " lhs=" << row.lhs << " rhs=" << row.rhs);
          CHECK(row.holds);
        }
      }
    }
  }
}

TEST_CASE("Term I mean row can fail: E V_DEL exceeds k beta_2^2(n - m, m) at n = k = 3") {
  // Z_{-i} averages risks on other folds, so Z - Z_{-i} is not a stability
  // difference and the mean row has no guarantee; enumeration shows a strict
  // violation while the q >= 1 rows hold.
  auto dist = std::make_shared<BernoulliDistribution>(0.5);
  const CvTermStatistic term1(mean_learner(), squared(), 3);
  const auto report = moment_report_exact(term1, *dist, 3, {1, 2});
  const auto profile = sample_mean_bernoulli_beta(0.5, 2, 1, moment_orders_for({1, 2}));
  const auto rows = check_moment_inequality(report, profile, 3.0, 0.0);
  CHECK(rows[0].lhs == doctest::Approx(0.5625));
  CHECK(rows[0].rhs == doctest::Approx(0.46875));
  CHECK_FALSE(rows[0].holds);
  CHECK(rows[1].holds);
  CHECK(rows[2].holds);
}

TEST_CASE("CGF diagnostic") {
  auto constant = std::make_shared<ConstantLearner>(ScalarHypothesis{0.5});
  auto dist = std::make_shared<BernoulliDistribution>(0.4);
  const RiskTermStatistic flat(constant, squared(), dist, 0, 1);
  const auto r0 = cgf_diagnostic(flat, *dist, 6, {0.5, 1.0}, 0.5, 10000, 1);
  for (const auto& row : r0.rows) {
    CHECK(row.lhs == doctest::Approx(0.0));
    CHECK(row.rhs == doctest::Approx(0.0));
    CHECK(row.holds);
  }
  CHECK(r0.diagnostic);

  const RiskTermStatistic term2(mean_learner(), squared(), dist, 0, 1);
  const auto r1 = cgf_diagnostic(term2, *dist, 10, kDefaultLambdaGrid, 0.5, 10000, 2);
  REQUIRE(r1.rows.size() == kDefaultLambdaGrid.size());
  for (const auto& row : r1.rows) {
    CHECK(row.margin == doctest::Approx(row.rhs - row.lhs));
    CHECK(row.margin_ci.lo <= row.margin_ci.hi);
    CHECK(row.lhs >= 0.0);  // Jensen with the empirical centring
  }

  CHECK_THROWS_AS(cgf_diagnostic(term2, *dist, 10, {1.0}, 1.0, 10000, 1), ArgumentError);
  CHECK_THROWS_AS(cgf_diagnostic(term2, *dist, 10, {1.5}, 0.5, 10000, 1), ArgumentError);
  CHECK_THROWS_AS(cgf_diagnostic(term2, *dist, 10, {0.5}, 0.5, 100, 1), ArgumentError);
}
