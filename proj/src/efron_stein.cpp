#include "cvcon/efron_stein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "cvcon/errors.hpp"
#include "cvcon/estimators.hpp"
#include "cvcon/learners.hpp"
#include "cvcon/parallel.hpp"

namespace cvcon {

std::string to_string(Construction c) {
  switch (c) {
    case Construction::cv_term1:
      return "cv_term1";
    case Construction::risk_term2:
      return "risk_term2";
    case Construction::custom:
      return "custom";
  }
  return "custom";
}

namespace {

double sum_squared_gaps(double z, const std::vector<double>& z_minus) {
  CompensatedSum acc;
  for (double zi : z_minus) acc.add((z - zi) * (z - zi));
  return acc.value();
}

RiskValue risk_of(const Hypothesis& h, const Distribution& d, const Loss& loss, std::span<const Instance> holdout) {
  return true_risk_on(h, d, loss, holdout);
}

std::vector<Instance> shared_holdout(const Learner& learner, const Loss& loss, const Distribution& d,
                                     const Sample& probe, std::size_t oracle_size, std::uint64_t seed) {
  if (has_exact_risk(learner.fit(probe), d, loss)) return {};
  require(oracle_size >= 1, "Monte Carlo risk needs oracle_size >= 1");
  Rng rng = stream(seed, phase_tag("true_risk"), 0);
  return d.draw_items(oracle_size, rng);
}

}  // namespace

DeviationDiagnostics diagnostics_term1(const Learner& learner, const Loss& loss, const Sample& s,
                                       const FoldPlan& plan) {
  require(plan.n() == s.size(), "fold plan does not match the sample size");
  require(plan.k() >= 3, "Term I diagnostics need k >= 3 (k = 2 would train on an empty sequence)");
  const std::size_t k = plan.k();
  DeviationDiagnostics out;
  out.construction = Construction::cv_term1;

  const RiskEstimate cv = kfcv(learner, s, plan, loss);
  out.z = cv.value;
  out.fits = cv.fits;

  std::vector<Sample> folds;
  folds.reserve(k);
  for (std::size_t j = 1; j <= k; ++j) folds.push_back(fold_view(s, plan, j));

  out.z_minus.reserve(k);
  for (std::size_t i = 1; i <= k; ++i) {
    CompensatedSum acc;
    for (std::size_t j = 1; j <= k; ++j) {
      if (j == i) continue;
      const Hypothesis h = learner.fit(remove_folds(s, plan, {i, j}));
      ++out.fits;
      acc.add(empirical_risk(h, folds[j - 1], loss));
    }
    out.z_minus.push_back(acc.value() / static_cast<double>(k - 1));
  }
  out.v_del = sum_squared_gaps(out.z, out.z_minus);
  return out;
}

DeviationDiagnostics diagnostics_term2(const Learner& learner, const Loss& loss, const Sample& s,
                                       const Distribution& d, std::size_t oracle_size, std::uint64_t seed) {
  require(s.size() >= 2, "Term II diagnostics need n >= 2");
  const auto holdout = shared_holdout(learner, loss, d, s, oracle_size, seed);
  DeviationDiagnostics out;
  out.construction = Construction::risk_term2;
  out.z = risk_of(learner.fit(s), d, loss, holdout).value;
  out.fits = 1;
  out.z_minus.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.z_minus.push_back(risk_of(learner.fit(remove_indexed(s, i)), d, loss, holdout).value);
    ++out.fits;
  }
  out.v_del = sum_squared_gaps(out.z, out.z_minus);
  return out;
}

CvTermStatistic::CvTermStatistic(LearnerPtr learner, LossPtr loss, std::size_t k)
    : learner_(std::move(learner)), loss_(std::move(loss)), k_(k) {
  require(learner_ && loss_, "Term I statistic needs a learner and a loss");
  require(k >= 3, "Term I diagnostics need k >= 3");
}

DeviationDiagnostics CvTermStatistic::evaluate(const Sample& s) const {
  return diagnostics_term1(*learner_, *loss_, s, FoldPlan(s.size(), k_));
}

double CvTermStatistic::value(const Sample& s) const {
  return kfcv(*learner_, s, FoldPlan(s.size(), k_), *loss_).value;
}

RiskTermStatistic::RiskTermStatistic(LearnerPtr learner, LossPtr loss, DistributionPtr dist,
                                     std::size_t oracle_size, std::uint64_t seed)
    : learner_(std::move(learner)),
      loss_(std::move(loss)),
      dist_(std::move(dist)),
      oracle_size_(oracle_size),
      seed_(seed) {
  require(learner_ && loss_ && dist_, "Term II statistic needs a learner, a loss and a distribution");
  Rng probe_rng = stream(seed, phase_tag("risk-term-probe"), 0);
  const Sample probe = dist_->draw_sample(1, probe_rng);
  holdout_ = shared_holdout(*learner_, *loss_, *dist_, probe, oracle_size_, seed_);
}

DeviationDiagnostics RiskTermStatistic::evaluate(const Sample& s) const {
  require(s.size() >= 2, "Term II diagnostics need n >= 2");
  DeviationDiagnostics out;
  out.construction = Construction::risk_term2;
  out.z = value(s);
  out.fits = 1;
  out.z_minus.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.z_minus.push_back(risk_of(learner_->fit(remove_indexed(s, i)), *dist_, *loss_, holdout_).value);
    ++out.fits;
  }
  out.v_del = sum_squared_gaps(out.z, out.z_minus);
  return out;
}

double RiskTermStatistic::value(const Sample& s) const {
  return risk_of(learner_->fit(s), *dist_, *loss_, holdout_).value;
}

namespace {

double scalar_at(const Sample& s, std::size_t i) {
  const auto* v = std::get_if<double>(&s[i]);
  require(v != nullptr, "mean statistic needs scalar instances");
  return *v;
}

}  // namespace

DeviationDiagnostics MeanStatistic::evaluate(const Sample& s) const {
  require(s.size() >= 2, "mean statistic diagnostics need n >= 2");
  DeviationDiagnostics out;
  out.construction = Construction::custom;
  CompensatedSum total;
  for (std::size_t i = 0; i < s.size(); ++i) total.add(scalar_at(s, i));
  const auto n = static_cast<double>(s.size());
  out.z = total.value() / n;
  out.z_minus.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CompensatedSum rest;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (j != i) rest.add(scalar_at(s, j));
    }
    out.z_minus.push_back(rest.value() / (n - 1.0));
  }
  out.v_del = sum_squared_gaps(out.z, out.z_minus);
  return out;
}

double MeanStatistic::value(const Sample& s) const {
  CompensatedSum total;
  for (std::size_t i = 0; i < s.size(); ++i) total.add(scalar_at(s, i));
  return total.value() / static_cast<double>(s.size());
}

ChainReport variance_chain_check(const DeviationStatistic& stat, const Distribution& d, std::size_t n,
                                 std::size_t trials, std::size_t inner, std::uint64_t seed, unsigned workers) {
  require(trials >= 1000, "the variance chain check needs at least 1000 trials");
  require(inner >= 1, "inner resampling size must be positive");
  const std::size_t coords = stat.coordinates(n);
  const std::size_t block = stat.block(n);
  require(coords * block == n, "statistic coordinates do not tile the sample");
  const std::uint64_t tag = phase_tag("efron-stein/chain");
  const std::uint64_t inner_tag = phase_tag("efron-stein/chain-inner");

  std::vector<double> zs(trials);
  std::vector<double> vs(trials);
  std::vector<double> vdels(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    Rng rng = stream(seed, tag, t);
    const Sample s = d.draw_sample(n, rng);
    const DeviationDiagnostics diag = stat.evaluate(s);
    CompensatedSum v;
    for (std::size_t i = 0; i < coords; ++i) {
      Rng sub = stream(seed, inner_tag, t, i);
      CompensatedSum conditional;
      for (std::size_t r = 0; r < inner; ++r) {
        const auto fresh = d.draw_items(block, sub);
        conditional.add(stat.value(replace_range(s, i * block, fresh)));
      }
      const double gap = diag.z - conditional.value() / static_cast<double>(inner);
      v.add(gap * gap);
    }
    zs[t] = diag.z;
    vs[t] = v.value();
    vdels[t] = diag.v_del;
  });

  ChainReport report;
  report.trials = trials;
  report.inner = inner;
  const auto var = variance_with_stderr(zs);
  const auto ev = mean_with_stderr(vs);
  const auto evdel = mean_with_stderr(vdels);
  report.var_z = var.mean;
  report.var_z_se = var.se;
  report.e_v = ev.mean;
  report.e_v_se = ev.se;
  report.e_v_del = evdel.mean;
  report.e_v_del_se = evdel.se;
  const bool first = report.var_z <= report.e_v + 4.0 * std::hypot(report.var_z_se, report.e_v_se);
  const bool second = report.e_v <= report.e_v_del + 4.0 * std::hypot(report.e_v_se, report.e_v_del_se);
  report.pass = first && second;
  return report;
}

namespace {

std::vector<int> doubled_orders(const QGrid& grid) {
  std::vector<int> orders{1};
  for (int q : grid) {
    if (2 * q != 1) orders.push_back(2 * q);
  }
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
  return orders;
}

}  // namespace

MomentReport moment_report(const DeviationStatistic& stat, const Distribution& d, std::size_t n,
                           const QGrid& grid, std::size_t trials, std::uint64_t seed, unsigned workers) {
  validate_q_grid(grid);
  require(trials >= 1000, "moment reports need at least 1000 trials");
  const std::uint64_t tag = phase_tag(fmt::format("efron-stein/moments/{}", to_string(stat.construction())));
  std::vector<double> vdels(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    Rng rng = stream(seed, tag, t);
    vdels[t] = stat.evaluate(d.draw_sample(n, rng)).v_del;
  });

  const auto orders = doubled_orders(grid);
  const auto summary = summarize_norms(vdels, orders, 200, seed, phase_tag("efron-stein/moments-bootstrap"), workers);
  MomentReport report;
  report.grid = grid;
  report.trials = trials;
  report.seed = seed;
  for (int q : grid) {
    report.norms[q] = summary.norm.at(2 * q);
    report.se[q] = summary.se.at(2 * q);
  }
  const auto mean = mean_with_stderr(vdels);
  report.mean_vdel = mean.mean;
  report.mean_vdel_se = mean.se;
  return report;
}

MomentReport moment_report_exact(const DeviationStatistic& stat, const Distribution& d, std::size_t n,
                                 const QGrid& grid) {
  validate_q_grid(grid);
  const auto atoms = d.support();
  require(atoms.has_value(), "exact moments need a finite-support distribution");
  require(enumeration_size(atoms->size(), n) <= kMaxEnumeration, "support too large to enumerate");
  std::vector<double> vdels;
  std::vector<double> weights;
  enumerate_sequences(*atoms, n, [&](const std::vector<Instance>& seq, double w) {
    vdels.push_back(stat.evaluate(Sample(seq)).v_del);
    weights.push_back(w);
  });
  MomentReport report;
  report.grid = grid;
  report.trials = vdels.size();
  report.exact = true;
  for (int q : grid) {
    report.norms[q] = weighted_q_norm(vdels, weights, 2.0 * q);
    report.se[q] = 0.0;
  }
  report.mean_vdel = weighted_q_norm(vdels, weights, 1.0);
  return report;
}

std::vector<MomentInequalityRow> check_moment_inequality(const MomentReport& report, const StabilityProfile& profile,
                                                         double multiplier, double tolerance_se) {
  require(multiplier >= 0.0, "multiplier must be non-negative");
  std::vector<MomentInequalityRow> rows;
  auto finish = [&](MomentInequalityRow row) {
    row.holds = row.lhs <= row.rhs + tolerance_se * std::hypot(row.lhs_se, row.rhs_se);
    rows.push_back(row);
  };
  {
    const double beta = profile.at(2);
    finish({0, report.mean_vdel, report.mean_vdel_se, multiplier * beta * beta,
            multiplier * 2.0 * beta * profile.se_at(2), false});
  }
  for (int q : report.grid) {
    const double beta = profile.at(4 * q);
    finish({q, report.norms.at(q), report.se.at(q), multiplier * beta * beta,
            multiplier * 2.0 * beta * profile.se_at(4 * q), false});
  }
  return rows;
}

namespace {

double log_mean_exp(std::span<const double> xs, double scale, double shift) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double x : xs) peak = std::max(peak, scale * (x - shift));
  CompensatedSum acc;
  for (double x : xs) acc.add(std::exp(scale * (x - shift) - peak));
  return peak + std::log(acc.value() / static_cast<double>(xs.size()));
}

}  // namespace

CgfReport cgf_diagnostic(const DeviationStatistic& stat, const Distribution& d, std::size_t n,
                         const std::vector<double>& lambda_grid, double theta, std::size_t trials,
                         std::uint64_t seed, unsigned workers) {
  require(theta > 0.0, "theta must be positive");
  require(!lambda_grid.empty(), "lambda grid is empty");
  for (double lambda : lambda_grid) {
    require(lambda > 0.0 && lambda <= 1.0, "lambda must lie in (0, 1]");
    require(lambda * theta < 1.0, fmt::format("lambda * theta = {} must be < 1", lambda * theta));
  }
  require(trials >= 10000, "CGF diagnostics need at least 10^4 trials");

  const std::uint64_t tag = phase_tag(fmt::format("efron-stein/cgf/{}", to_string(stat.construction())));
  std::vector<double> zs(trials);
  std::vector<double> vdels(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    Rng rng = stream(seed, tag, t);
    const auto diag = stat.evaluate(d.draw_sample(n, rng));
    zs[t] = diag.z;
    vdels[t] = diag.v_del;
  });
  const double zbar = compensated_mean(zs);

  constexpr std::size_t kResamples = 200;
  const std::uint64_t boot_tag = phase_tag("efron-stein/cgf-bootstrap");
  CgfReport report;
  report.theta = theta;
  report.trials = trials;
  for (double lambda : lambda_grid) {
    const double factor = lambda * theta / (1.0 - lambda * theta);
    CgfRow row;
    row.lambda = lambda;
    row.lhs = log_mean_exp(zs, lambda, zbar);
    row.rhs = factor * log_mean_exp(vdels, lambda / theta, 0.0);
    row.margin = row.rhs - row.lhs;

    std::vector<double> lhs_b(kResamples);
    std::vector<double> rhs_b(kResamples);
    std::vector<double> margin_b(kResamples);
    parallel_for(kResamples, workers, [&](std::size_t b) {
      Rng rng = stream(seed, boot_tag, b);
      std::vector<double> z_r(trials);
      std::vector<double> v_r(trials);
      for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t idx = rng.below(trials);
        z_r[t] = zs[idx];
        v_r[t] = vdels[idx];
      }
      lhs_b[b] = log_mean_exp(z_r, lambda, zbar);
      rhs_b[b] = factor * log_mean_exp(v_r, lambda / theta, 0.0);
      margin_b[b] = rhs_b[b] - lhs_b[b];
    });
    row.lhs_se = replicate_stddev(lhs_b);
    row.rhs_se = replicate_stddev(rhs_b);
    std::sort(margin_b.begin(), margin_b.end());
    row.margin_ci = {quantile_sorted(margin_b, 0.025), quantile_sorted(margin_b, 0.975)};
    row.holds = row.margin_ci.hi >= 0.0;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace cvcon
