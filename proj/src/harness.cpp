#include "cvcon/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "cvcon/distributions.hpp"
#include "cvcon/errors.hpp"
#include "cvcon/estimators.hpp"
#include "cvcon/learners.hpp"
#include "cvcon/parallel.hpp"

namespace cvcon {

namespace {

enum class TaskKind { scalar, regression, classification };

TaskKind task_kind(const ExperimentSpec& spec) {
  const auto& d = spec.distribution;
  if (d == "bernoulli" || d == "point_mass" || d == "uniform") return TaskKind::scalar;
  if (d == "linear_regression") return TaskKind::regression;
  if (d == "two_class") return TaskKind::classification;
  throw ArgumentError(fmt::format(
      "unknown distribution '{}' (bernoulli, point_mass, uniform, linear_regression, two_class)", d));
}

bool enumerable(const Distribution& d, std::size_t length) {
  const auto atoms = d.support();
  return atoms && enumeration_size(atoms->size(), length) <= kMaxEnumeration;
}

double quantile_of(std::vector<double> xs, double p) {
  std::sort(xs.begin(), xs.end());
  return quantile_sorted(xs, p);
}

// Bootstrap standard error of the p-quantile.
double quantile_se(const std::vector<double>& xs, double p, std::uint64_t seed, std::uint64_t tag,
                   unsigned workers) {
  constexpr std::size_t kResamples = 200;
  std::vector<double> replicates(kResamples);
  parallel_for(kResamples, workers, [&](std::size_t b) {
    Rng rng = stream(seed, tag, b);
    std::vector<double> resample(xs.size());
    for (auto& x : resample) x = xs[rng.below(xs.size())];
    replicates[b] = quantile_of(std::move(resample), p);
  });
  return replicate_stddev(replicates);
}

// Per-replication quantities shared by coverage and decomposition.
struct Replications {
  std::vector<double> risk;     // R(A(S_n))
  std::vector<double> risk_se;  // holdout standard error (0 when exact)
  std::vector<std::vector<double>> cv;       // [k index][r]
  std::vector<std::vector<double>> reduced;  // [k index][r], R(A(S_n^{-[m]}))
};

Replications replicate(const ExperimentSpec& spec, const Learner& learner, const Loss& loss, const Distribution& d,
                       const std::string& phase) {
  const std::size_t reps = spec.replications;
  std::vector<Instance> holdout;
  {
    Rng probe_rng = stream(spec.seed, phase_tag(phase + "/probe"), 0);
    const Sample probe = d.draw_sample(spec.n, probe_rng);
    if (!has_exact_risk(learner.fit(probe), d, loss)) {
      require(spec.oracle_size >= 1, "Monte Carlo risk needs oracle_size >= 1");
      Rng rng = stream(spec.seed, phase_tag("true_risk"), 0);
      holdout = d.draw_items(spec.oracle_size, rng);
    }
  }

  Replications out;
  out.risk.resize(reps);
  out.risk_se.resize(reps);
  out.cv.assign(spec.k.size(), std::vector<double>(reps));
  out.reduced.assign(spec.k.size(), std::vector<double>(reps));
  const std::uint64_t tag = phase_tag(phase);
  parallel_for(reps, spec.workers, [&](std::size_t r) {
    Rng rng = stream(spec.seed, tag, r);
    const Sample s = d.draw_sample(spec.n, rng);
    const RiskValue risk = true_risk_on(learner.fit(s), d, loss, holdout);
    out.risk[r] = risk.value;
    out.risk_se[r] = risk.se;
    for (std::size_t ki = 0; ki < spec.k.size(); ++ki) {
      const FoldPlan plan(spec.n, spec.k[ki]);
      out.cv[ki][r] = kfcv(learner, s, plan, loss).value;
      out.reduced[ki][r] = true_risk_on(learner.fit(remove_prefix(s, plan.m())), d, loss, holdout).value;
    }
  });
  return out;
}

}  // namespace

void validate_spec(const ExperimentSpec& spec, const std::string& what) {
  (void)task_kind(spec);
  validate_q_grid(spec.q_grid);
  require(spec.n >= 2, "n must be at least 2");
  require(spec.workers >= 1, "workers must be at least 1");
  require(spec.trials >= 100, "trials must be at least 100");
  require(spec.a_min > 0.0 && spec.a_min < spec.a_max, "need 0 < a_min < a_max");
  for (double delta : spec.delta) require(delta > 0.0 && delta < 1.0, "every delta must lie in (0, 1)");
  if (what == "coverage" || what == "decompose" || what == "compute-bound") {
    require(!spec.k.empty(), "k list is empty");
    require(!spec.delta.empty(), "delta list is empty");
    for (std::size_t k : spec.k) {
      require(k >= 2, "every k must be at least 2");
      require(spec.n % k == 0, fmt::format("n = {} is not divisible by k = {}", spec.n, k));
    }
  }
  if (what == "coverage" || what == "decompose") {
    require(spec.replications >= 100, "replications must be at least 100");
  }
  if (what == "scaling") {
    require(spec.scaling_grid.size() >= 3, "scaling needs at least 3 grid points");
    for (const auto& [n, m] : spec.scaling_grid) {
      require(m >= 1 && 2 * m < n, fmt::format("scaling point ({}, {}) needs 1 <= m < n / 2", n, m));
    }
  }
}

LearnerPtr make_learner(const ExperimentSpec& spec) {
  const TaskKind kind = task_kind(spec);
  if (spec.learner == "sample_mean") {
    require(kind == TaskKind::scalar, "sample_mean needs a scalar distribution");
    return std::make_shared<SampleMeanLearner>();
  }
  if (spec.learner == "ridge") {
    require(kind == TaskKind::regression, "ridge needs the linear_regression distribution");
    return std::make_shared<RidgeLearner>(spec.ridge_lambda);
  }
  if (spec.learner == "knn") {
    require(kind == TaskKind::classification, "knn needs the two_class distribution");
    return std::make_shared<KnnLearner>(spec.knn_neighbors);
  }
  if (spec.learner == "constant") {
    switch (kind) {
      case TaskKind::scalar:
        require(spec.constant_value >= 0.0 && spec.constant_value <= 1.0, "constant_value must lie in [0, 1]");
        return std::make_shared<ConstantLearner>(ScalarHypothesis{spec.constant_value});
      case TaskKind::regression:
        return std::make_shared<ConstantLearner>(LinearHypothesis{std::vector<double>(spec.dim, spec.constant_value)});
      case TaskKind::classification: {
        // A single stored point labelled constant_value: every prediction is that label.
        const int label = static_cast<int>(std::lround(spec.constant_value));
        require(label >= 0, "constant label must be non-negative");
        auto train = std::make_shared<const std::vector<LabeledPoint>>(
            std::vector<LabeledPoint>{{std::vector<double>(spec.dim, 0.0), label}});
        return std::make_shared<ConstantLearner>(KnnHypothesis{train, 1});
      }
    }
  }
  throw ArgumentError(fmt::format("unknown learner '{}' (sample_mean, ridge, knn, constant)", spec.learner));
}

DistributionPtr make_distribution(const ExperimentSpec& spec) {
  const auto& d = spec.distribution;
  if (d == "bernoulli") return std::make_shared<BernoulliDistribution>(spec.p);
  if (d == "point_mass") return std::make_shared<PointMassDistribution>(spec.value);
  if (d == "uniform") return std::make_shared<UniformDistribution>(spec.low, spec.high);
  if (d == "linear_regression") {
    require(spec.dim >= 1, "dim must be at least 1");
    std::vector<double> weights(spec.dim);
    for (std::size_t i = 0; i < spec.dim; ++i) weights[i] = 1.0 / static_cast<double>(i + 1);
    return std::make_shared<LinearRegressionTask>(weights, spec.noise);
  }
  if (d == "two_class") return std::make_shared<TwoClassTask>(spec.dim, spec.separation, spec.flip);
  (void)task_kind(spec);
  throw ArgumentError("unknown distribution");
}

LossPtr make_loss(const ExperimentSpec& spec) {
  if (task_kind(spec) == TaskKind::classification) return std::make_shared<ZeroOneLoss>();
  return std::make_shared<SquaredLoss>();
}

ProfileCache::ProfileCache(const ExperimentSpec& spec, LearnerPtr learner, LossPtr loss, DistributionPtr dist)
    : spec_(spec), learner_(std::move(learner)), loss_(std::move(loss)), dist_(std::move(dist)) {}

const StabilityProfile& ProfileCache::get(std::size_t n, std::size_t m) {
  const auto key = std::make_pair(n, m);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const QGrid orders = moment_orders_for(spec_.q_grid);
  StabilityProfile profile;
  if (m >= n) {
    profile = trivial_profile(n, m, orders);
  } else {
    StabilityOptions options;
    options.trials = spec_.trials;
    options.seed = spec_.seed;
    options.workers = spec_.workers;
    options.bootstrap = spec_.bootstrap;
    profile = estimate_beta(*learner_, *loss_, *dist_, n, m, orders, options);
  }
  return cache_.emplace(key, std::move(profile)).first->second;
}

std::vector<StabilityProfile> ProfileCache::all() const {
  std::vector<StabilityProfile> out;
  out.reserve(cache_.size());
  for (const auto& [key, profile] : cache_) out.push_back(profile);
  return out;
}

BoundResult bound_for_cell(ProfileCache& cache, const ExperimentSpec& spec, std::size_t k, double delta) {
  const std::size_t m = spec.n / k;
  const StabilityProfile& prof_nm = cache.get(spec.n - m, m);
  const StabilityProfile& prof_n1 = cache.get(spec.n, 1);
  const StabilityProfile& prof_n_m = cache.get(spec.n, m);
  BoundResult out =
      assemble_from_profiles(prof_nm, prof_n1, k, delta, spec.envelope_mode, prof_n_m, spec.a_min, spec.a_max);
  for (const auto* p : {&prof_nm, &prof_n1, &prof_n_m}) {
    if (!p->note.empty()) out.caveats.push_back(p->note);
  }
  return out;
}

std::optional<double> expected_risk_oracle(const ExperimentSpec& spec, std::size_t train_size) {
  if (task_kind(spec) != TaskKind::scalar) return std::nullopt;
  const auto d = make_distribution(spec);
  const auto mu = d->mean();
  const auto var = d->variance();
  if (!mu || !var) return std::nullopt;
  // Instances and hypotheses lie in [0, 1], so the clip at 1 never binds.
  if (spec.learner == "sample_mean") return *var * (1.0 + 1.0 / static_cast<double>(train_size));
  if (spec.learner == "constant") return (spec.constant_value - *mu) * (spec.constant_value - *mu) + *var;
  return std::nullopt;
}

CoverageReport run_coverage(const ExperimentSpec& spec) {
  validate_spec(spec, "coverage");
  const auto learner = make_learner(spec);
  const auto loss = make_loss(spec);
  const auto dist = make_distribution(spec);

  CoverageReport report;
  report.learner = learner->name();
  report.distribution = dist->name();
  report.n = spec.n;

  ProfileCache cache(spec, learner, loss, dist);
  std::vector<std::vector<BoundResult>> bounds(spec.k.size());
  for (std::size_t ki = 0; ki < spec.k.size(); ++ki) {
    for (double delta : spec.delta) bounds[ki].push_back(bound_for_cell(cache, spec, spec.k[ki], delta));
  }

  const Replications reps = replicate(spec, *learner, *loss, *dist, "coverage");
  const std::size_t count = spec.replications;
  const auto risk_mean = expected_risk_oracle(spec, spec.n).value_or(compensated_mean(reps.risk));

  report.pass = true;
  for (std::size_t ki = 0; ki < spec.k.size(); ++ki) {
    const std::size_t k = spec.k[ki];
    const std::size_t m = spec.n / k;
    const auto cv_mean = expected_risk_oracle(spec, spec.n - m).value_or(compensated_mean(reps.cv[ki]));

    std::vector<double> deltas(count);
    std::vector<double> term1(count);
    std::vector<double> term2(count);
    std::vector<double> paired(count);
    for (std::size_t r = 0; r < count; ++r) {
      deltas[r] = std::abs(reps.cv[ki][r] - reps.risk[r]);
      term1[r] = std::abs(cv_mean - reps.cv[ki][r]);
      term2[r] = std::abs(reps.risk[r] - risk_mean);
      paired[r] = reps.cv[ki][r] - reps.reduced[ki][r];
    }
    std::vector<double> sorted = deltas;
    std::sort(sorted.begin(), sorted.end());
    const auto cv_stats = mean_with_stderr(reps.cv[ki]);
    const auto reduced_stats = mean_with_stderr(reps.reduced[ki]);
    const auto paired_stats = mean_with_stderr(paired);

    for (std::size_t di = 0; di < spec.delta.size(); ++di) {
      CoverageCell cell;
      cell.k = k;
      cell.m = m;
      cell.delta = spec.delta[di];
      cell.bound = bounds[ki][di];
      cell.replications = count;
      for (std::size_t r = 0; r < count; ++r) {
        if (deltas[r] <= cell.bound.total) continue;
        if (deltas[r] <= cell.bound.total + 2.0 * reps.risk_se[r]) {
          ++cell.flagged;
        } else {
          ++cell.exceed_count;
        }
      }
      cell.exceed_rate = static_cast<double>(cell.exceed_count) / static_cast<double>(count);
      cell.wilson = wilson_interval(cell.exceed_count, count);
      cell.mean_delta = compensated_mean(deltas);
      cell.median_delta = quantile_sorted(sorted, 0.5);
      cell.q95_delta = quantile_sorted(sorted, 0.95);
      cell.mean_term1 = compensated_mean(term1);
      cell.mean_term2 = compensated_mean(term2);
      cell.term3 = std::abs(risk_mean - cv_mean);
      cell.cv_mean = cv_stats.mean;
      cell.cv_mean_se = cv_stats.se;
      cell.reduced_risk_mean = reduced_stats.mean;
      cell.reduced_risk_se = reduced_stats.se;
      cell.cv_sanity = std::abs(paired_stats.mean) <= 4.0 * paired_stats.se + 1e-12;
      cell.pass = cell.wilson.hi <= cell.delta;
      if (!cell.pass && report.pass) {
        report.pass = false;
        report.failure = fmt::format("k = {}, delta = {}: Wilson upper limit {} > delta", k, cell.delta,
                                     cell.wilson.hi);
      }
      report.cells.push_back(std::move(cell));
    }
  }
  report.profiles = cache.all();
  return report;
}

ExactTerm3 exact_term3(const Learner& learner, const Loss& loss, const Distribution& d, std::size_t n,
                       std::size_t k) {
  const FoldPlan plan(n, k);
  const auto atoms = d.support();
  require(atoms.has_value(), "exact term 3 needs a finite-support distribution");
  require(enumerable(d, n + plan.m()), "support too large to enumerate");
  CompensatedSum risk;
  CompensatedSum cv;
  enumerate_sequences(*atoms, n, [&](const std::vector<Instance>& seq, double w) {
    const Sample s(seq);
    risk.add(w * true_risk(learner.fit(s), d, loss, 0, 0).value);
    cv.add(w * kfcv(learner, s, plan, loss).value);
  });
  ExactTerm3 out;
  out.expected_risk = risk.value();
  out.expected_cv = cv.value();
  out.term3 = std::abs(out.expected_risk - out.expected_cv);
  out.beta2 = beta_exact_enumeration(learner, loss, d, n, plan.m(), {2}).at(2);
  return out;
}

DecompositionReport run_decomposition(const ExperimentSpec& spec) {
  validate_spec(spec, "decompose");
  const auto learner = make_learner(spec);
  const auto loss = make_loss(spec);
  const auto dist = make_distribution(spec);

  DecompositionReport report;
  report.learner = learner->name();
  report.distribution = dist->name();
  report.n = spec.n;

  ProfileCache cache(spec, learner, loss, dist);
  const Replications reps = replicate(spec, *learner, *loss, *dist, "decomposition");
  const std::size_t count = spec.replications;
  const std::uint64_t boot_seed = spec.seed;

  report.pass = true;
  for (std::size_t ki = 0; ki < spec.k.size(); ++ki) {
    const std::size_t k = spec.k[ki];
    const std::size_t m = spec.n / k;
    const bool exact = dist->support().has_value() && enumerable(*dist, spec.n + m);
    std::optional<ExactTerm3> exact3;
    if (exact) exact3 = exact_term3(*learner, *loss, *dist, spec.n, k);

    std::optional<double> risk_oracle = expected_risk_oracle(spec, spec.n);
    std::optional<double> cv_oracle = expected_risk_oracle(spec, spec.n - m);
    if (exact3) {
      risk_oracle = exact3->expected_risk;
      cv_oracle = exact3->expected_cv;
    }
    const double risk_mean = risk_oracle.value_or(compensated_mean(reps.risk));
    const double cv_mean = cv_oracle.value_or(compensated_mean(reps.cv[ki]));

    std::vector<double> term1(count);
    std::vector<double> term2(count);
    std::vector<double> gap(count);
    for (std::size_t r = 0; r < count; ++r) {
      term1[r] = std::abs(cv_mean - reps.cv[ki][r]);
      term2[r] = std::abs(reps.risk[r] - risk_mean);
      gap[r] = reps.risk[r] - reps.cv[ki][r];
    }

    for (double delta : spec.delta) {
      DecompositionCell cell;
      cell.k = k;
      cell.m = m;
      cell.delta = delta;
      cell.mean_cv = cv_mean;
      cell.mean_risk = risk_mean;
      cell.means_exact = risk_oracle.has_value() && cv_oracle.has_value();

      const BoundInputs inp = inputs_from_profiles(cache.get(spec.n - m, m), cache.get(spec.n, 1), k, delta,
                                                   spec.envelope_mode, cache.get(spec.n, m));
      const auto tag = phase_tag(fmt::format("decomposition-bootstrap/{}/{}", k, delta));

      TermCheck t1;
      t1.name = "term1";
      t1.empirical = quantile_of(term1, 1.0 - delta);
      t1.se = quantile_se(term1, 1.0 - delta, boot_seed, tag, spec.workers);
      const auto opt1 = optimize_a(
          [&](double a) { return term1_bound(inp.r1, inp.env1.u, inp.env1.w, a, delta); }, spec.a_min, spec.a_max);
      t1.bound = opt1.value;
      t1.a = opt1.a;
      t1.pass = t1.empirical <= t1.bound + 4.0 * t1.se;

      TermCheck t2;
      t2.name = "term2";
      t2.empirical = quantile_of(term2, 1.0 - delta);
      t2.se = quantile_se(term2, 1.0 - delta, boot_seed, tag ^ 1U, spec.workers);
      const auto opt2 = optimize_a(
          [&](double a) { return term2_bound(inp.r2, inp.env2.u, inp.env2.w, a, delta); }, spec.a_min, spec.a_max);
      t2.bound = opt2.value;
      t2.a = opt2.a;
      t2.pass = t2.empirical <= t2.bound + 4.0 * t2.se;

      TermCheck t3;
      t3.name = "term3";
      if (exact3) {
        t3.empirical = exact3->term3;
        t3.bound = term3_bound(exact3->beta2);
        t3.exact = true;
        t3.pass = t3.empirical <= t3.bound + 1e-12;
      } else {
        const StabilityProfile& prof = cache.get(spec.n, m);
        t3.bound = term3_bound(prof.at(2));
        if (cell.means_exact) {
          t3.empirical = std::abs(risk_mean - cv_mean);
          t3.se = prof.se_at(2);
        } else {
          const auto g = mean_with_stderr(gap);
          t3.empirical = std::abs(g.mean);
          t3.se = std::hypot(g.se, prof.se_at(2));
        }
        t3.pass = t3.empirical <= t3.bound + 4.0 * t3.se;
      }
      cell.terms = {t1, t2, t3};
      cell.pass = t1.pass && t2.pass && t3.pass;
      report.pass = report.pass && cell.pass;
      report.cells.push_back(std::move(cell));
    }
  }
  report.profiles = cache.all();
  return report;
}

namespace {

// Minimises sum ((t - c1 x1 - c2 x2) / t)^2 over c1, c2 >= 0.
std::pair<double, double> relative_nnls(const std::vector<double>& t, const std::vector<double>& x1,
                                        const std::vector<double>& x2) {
  double s11 = 0.0, s12 = 0.0, s22 = 0.0, b1 = 0.0, b2 = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double a1 = x1[i] / t[i];
    const double a2 = x2[i] / t[i];
    s11 += a1 * a1;
    s12 += a1 * a2;
    s22 += a2 * a2;
    b1 += a1;
    b2 += a2;
  }
  auto loss = [&](double c1, double c2) {
    double total = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double r = 1.0 - (c1 * x1[i] + c2 * x2[i]) / t[i];
      total += r * r;
    }
    return total;
  };
  std::vector<std::pair<double, double>> candidates{{b1 / s11, 0.0}, {0.0, b2 / s22}};
  const double det = s11 * s22 - s12 * s12;
  if (det > 0.0) {
    const double c1 = (b1 * s22 - b2 * s12) / det;
    const double c2 = (b2 * s11 - b1 * s12) / det;
    if (c1 >= 0.0 && c2 >= 0.0) candidates.emplace_back(c1, c2);
  }
  auto best = candidates.front();
  for (const auto& c : candidates) {
    if (loss(c.first, c.second) < loss(best.first, best.second)) best = c;
  }
  return best;
}

}  // namespace

RateCheck rate_check(double p, const std::vector<std::size_t>& ns, const std::vector<std::size_t>& ks,
                     const std::vector<double>& deltas, const QGrid& q_grid, EnvelopeMode mode) {
  const QGrid orders = moment_orders_for(q_grid);
  RateCheck out;
  std::vector<double> totals, x1, x2;
  for (std::size_t n : ns) {
    for (std::size_t k : ks) {
      require(n % k == 0, fmt::format("rate grid: n = {} is not divisible by k = {}", n, k));
      const std::size_t m = n / k;
      const auto prof_nm = m < n - m ? sample_mean_bernoulli_beta(p, n - m, m, orders) : trivial_profile(n - m, m, orders);
      const auto prof_n1 = sample_mean_bernoulli_beta(p, n, 1, orders);
      const auto prof_n_m = sample_mean_bernoulli_beta(p, n, m, orders);
      for (double delta : deltas) {
        const auto bound = assemble_from_profiles(prof_nm, prof_n1, k, delta, mode, prof_n_m);
        RateRow row;
        row.n = n;
        row.k = k;
        row.delta = delta;
        row.total = bound.total;
        out.rows.push_back(row);
        const double l = std::log(1.0 / delta);
        totals.push_back(bound.total);
        x1.push_back(std::sqrt(l) / static_cast<double>(n * k));
        x2.push_back(l / static_cast<double>(n));
      }
    }
  }
  const auto [c1, c2] = relative_nnls(totals, x1, x2);
  out.c1 = c1;
  out.c2 = c2;
  out.worst_factor = 1.0;
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    auto& row = out.rows[i];
    row.fitted = c1 * x1[i] + c2 * x2[i];
    row.ratio = row.total / row.fitted;
    const double factor = row.ratio >= 1.0 ? row.ratio : 1.0 / row.ratio;
    out.worst_factor = std::max(out.worst_factor, std::isfinite(factor) ? factor : std::numeric_limits<double>::infinity());
  }
  out.within_factor4 = out.worst_factor <= 4.0;
  return out;
}

ScalingReport run_scaling(const ExperimentSpec& spec) {
  validate_spec(spec, "scaling");
  const auto learner = make_learner(spec);
  const auto loss = make_loss(spec);
  const auto dist = make_distribution(spec);
  ScalingReport report;
  report.learner = learner->name();
  report.distribution = dist->name();

  ProfileCache cache(spec, learner, loss, dist);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& [n, m] : spec.scaling_grid) {
    ScalingRow row;
    row.n = n;
    row.m = m;
    const auto& prof = cache.get(n - m, m);
    row.beta2 = prof.at(2);
    row.beta2_se = prof.se_at(2);
    row.ratio = row.beta2 * static_cast<double>(n) / std::sqrt(static_cast<double>(m));
    row.doubled_beta2 = cache.get(2 * n - m, m).at(2);
    row.halving = row.beta2 > 0.0 ? row.doubled_beta2 / row.beta2 : 0.0;
    lo = std::min(lo, row.ratio);
    hi = std::max(hi, row.ratio);
    report.rows.push_back(row);
  }
  report.degenerate = !(lo > 0.0);
  report.spread = report.degenerate ? 0.0 : hi / lo;
  report.flagged = !report.degenerate && report.spread > 3.0;
  if (spec.learner == "sample_mean" && spec.distribution == "bernoulli") {
    report.rate = rate_check(spec.p, {40, 80, 160}, {2, 4}, {0.1, 0.01}, spec.q_grid, spec.envelope_mode);
  }
  return report;
}

EfronSteinReport run_efron_stein(const ExperimentSpec& spec, bool with_cgf) {
  validate_spec(spec, "efron-stein-check");
  const auto learner = make_learner(spec);
  const auto loss = make_loss(spec);
  const auto dist = make_distribution(spec);
  const std::size_t n = spec.n;

  EfronSteinReport report;
  report.construction = spec.construction;
  report.n = n;

  std::unique_ptr<DeviationStatistic> stat;
  std::optional<std::pair<std::size_t, std::size_t>> profile_key;
  if (spec.construction == "term1") {
    require(!spec.k.empty(), "term1 needs a fold count");
    report.k = spec.k.front();
    require(n % report.k == 0, fmt::format("n = {} is not divisible by k = {}", n, report.k));
    stat = std::make_unique<CvTermStatistic>(learner, loss, report.k);
    const std::size_t m = n / report.k;
    profile_key = std::make_pair(n - m, m);
    report.multiplier = static_cast<double>(report.k);
  } else if (spec.construction == "term2") {
    stat = std::make_unique<RiskTermStatistic>(learner, loss, dist, spec.oracle_size, spec.seed);
    profile_key = std::make_pair(n, std::size_t{1});
    report.multiplier = static_cast<double>(n);
  } else if (spec.construction == "mean") {
    require(task_kind(spec) == TaskKind::scalar, "the mean construction needs a scalar distribution");
    stat = std::make_unique<MeanStatistic>();
  } else {
    throw ArgumentError(fmt::format("unknown construction '{}' (term1, term2, mean)", spec.construction));
  }

  report.chain = variance_chain_check(*stat, *dist, n, spec.es_trials, spec.inner, spec.seed, spec.workers);
  report.pass = report.chain.pass;

  if (profile_key) {
    const auto [pn, pm] = *profile_key;
    const QGrid orders = moment_orders_for(spec.q_grid);
    if (enumerable(*dist, n) && enumerable(*dist, pn + pm)) {
      report.moments = moment_report_exact(*stat, *dist, n, spec.q_grid);
      report.profile = beta_exact_enumeration(*learner, *loss, *dist, pn, pm, orders);
    } else {
      report.moments = moment_report(*stat, *dist, n, spec.q_grid, spec.es_trials, spec.seed, spec.workers);
      ProfileCache cache(spec, learner, loss, dist);
      report.profile = cache.get(pn, pm);
    }
    report.inequality = check_moment_inequality(report.moments, report.profile, report.multiplier);
    for (const auto& row : report.inequality) report.pass = report.pass && row.holds;
  }

  if (with_cgf) {
    report.cgf = cgf_diagnostic(*stat, *dist, n, spec.lambda_grid, spec.theta, spec.cgf_trials, spec.seed,
                                spec.workers);
  }
  return report;
}

}  // namespace cvcon
