#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cvcon/bounds.hpp"
#include "cvcon/efron_stein.hpp"
#include "cvcon/stability.hpp"
#include "cvcon/subgamma.hpp"

namespace cvcon {

/// Everything an experiment needs. Field names match the config keys.
struct ExperimentSpec {
  std::string learner = "sample_mean";  ///< sample_mean | ridge | knn | constant
  double constant_value = 0.5;
  double ridge_lambda = 1.0;
  int knn_neighbors = 3;

  std::string distribution = "bernoulli";  ///< bernoulli | point_mass | uniform | linear_regression | two_class
  double p = 0.5;
  double value = 0.5;
  double low = 0.0;
  double high = 1.0;
  std::size_t dim = 2;
  double noise = 0.1;
  double separation = 0.5;
  double flip = 0.1;

  std::size_t n = 60;
  std::vector<std::size_t> k{2, 5, 10};
  std::vector<double> delta{0.05};
  QGrid q_grid{1, 2, 3, 4, 6, 8};
  std::size_t trials = 100000;  ///< stability Monte Carlo trials
  std::size_t bootstrap = 200;
  std::size_t replications = 2000;
  std::size_t es_trials = 10000;  ///< Efron-Stein trials
  std::size_t inner = 200;
  std::size_t cgf_trials = 10000;
  std::uint64_t seed = 1;
  std::size_t oracle_size = 100000;
  EnvelopeMode envelope_mode = EnvelopeMode::joint;
  double a_min = kDefaultAMin;
  double a_max = kDefaultAMax;
  std::vector<std::pair<std::size_t, std::size_t>> scaling_grid{{20, 2}, {40, 4}, {80, 8}};
  std::vector<double> lambda_grid{0.1, 0.25, 0.5, 0.75, 1.0};
  double theta = 0.5;
  std::string construction = "term2";  ///< term1 | term2 | mean
  std::string profiles;                 ///< stability bundle read by compute-bound
  std::string output = "out";
  std::string format = "both";  ///< csv | json | both
  unsigned workers = 1;
};

/// Checks the invariants shared by every experiment; `what` selects
/// the extra checks (e.g. "coverage" needs R >= 100).
void validate_spec(const ExperimentSpec& spec, const std::string& what);

LearnerPtr make_learner(const ExperimentSpec& spec);
DistributionPtr make_distribution(const ExperimentSpec& spec);
LossPtr make_loss(const ExperimentSpec& spec);

/// Caches stability profiles by (n, m) so cells sharing one reuse it.
class ProfileCache {
 public:
  ProfileCache(const ExperimentSpec& spec, LearnerPtr learner, LossPtr loss, DistributionPtr dist);
  const StabilityProfile& get(std::size_t n, std::size_t m);
  std::vector<StabilityProfile> all() const;

 private:
  const ExperimentSpec& spec_;
  LearnerPtr learner_;
  LossPtr loss_;
  DistributionPtr dist_;
  std::map<std::pair<std::size_t, std::size_t>, StabilityProfile> cache_;
};

/// Bound inputs and result for one (k, delta) cell from cached profiles.
BoundResult bound_for_cell(ProfileCache& cache, const ExperimentSpec& spec, std::size_t k, double delta);

struct CoverageCell {
  std::size_t k = 0;
  std::size_t m = 0;
  double delta = 0.0;
  BoundResult bound;
  std::size_t exceed_count = 0;
  std::size_t flagged = 0;  ///< exceedances forgiven by the holdout tolerance
  std::size_t replications = 0;
  double exceed_rate = 0.0;
  Interval wilson;
  double mean_delta = 0.0;
  double median_delta = 0.0;
  double q95_delta = 0.0;
  double mean_term1 = 0.0;
  double mean_term2 = 0.0;
  double term3 = 0.0;
  /// Mean CV estimate against E l(A(S_{n-m}), X) estimated from the same
  /// replications.
  double cv_mean = 0.0;
  double cv_mean_se = 0.0;
  double reduced_risk_mean = 0.0;
  double reduced_risk_se = 0.0;
  bool cv_sanity = false;
  bool pass = false;
};

struct CoverageReport {
  std::string learner;
  std::string distribution;
  std::size_t n = 0;
  std::vector<CoverageCell> cells;
  std::vector<StabilityProfile> profiles;
  bool pass = false;
  std::string failure;  ///< first failing cell, if any
};

/// Phase 1 estimates profiles, phase 2 assembles the bound per (k, delta),
/// phase 3 draws R samples (stream (seed, "coverage", r)) and counts
/// Delta_r = |R_CV - R(A(S_n))| above the bound. A cell passes when the
/// Wilson upper limit of the exceed rate is <= delta.
CoverageReport run_coverage(const ExperimentSpec& spec);

struct TermCheck {
  std::string name;
  double empirical = 0.0;  ///< (1 - delta) quantile, or the exact gap for term 3
  double se = 0.0;
  double bound = 0.0;
  double a = 0.0;
  bool exact = false;
  bool pass = false;
};

struct DecompositionCell {
  std::size_t k = 0;
  std::size_t m = 0;
  double delta = 0.0;
  double mean_cv = 0.0;    ///< E R_CV used for term 1
  double mean_risk = 0.0;  ///< E R(A(S_n)) used for term 2
  bool means_exact = false;
  std::vector<TermCheck> terms;
  bool pass = false;
};

struct DecompositionReport {
  std::string learner;
  std::string distribution;
  std::size_t n = 0;
  std::vector<DecompositionCell> cells;
  std::vector<StabilityProfile> profiles;
  bool pass = false;
};

/// Terms I and II: (1 - delta) quantiles over R replications against the
/// single-term bounds at level delta, each with its own optimised a.
/// Term III: |E R - E R_CV| against beta_2(n, m), exactly when the law can
/// be enumerated.
DecompositionReport run_decomposition(const ExperimentSpec& spec);

struct ExactTerm3 {
  double expected_risk = 0.0;  ///< E R(A(S_n))
  double expected_cv = 0.0;    ///< E R_CV
  double term3 = 0.0;
  double beta2 = 0.0;  ///< beta_2(n, m)
};

/// Enumerates every S_n of a finite-support law (|support|^(n+m) <= 1e6).
ExactTerm3 exact_term3(const Learner& learner, const Loss& loss, const Distribution& d, std::size_t n,
                       std::size_t k);

/// E l(A(S_t), X) in closed form when available (sample mean or constant
/// learner under squared loss on a scalar law with known moments).
std::optional<double> expected_risk_oracle(const ExperimentSpec& spec, std::size_t train_size);

struct ScalingRow {
  std::size_t n = 0;
  std::size_t m = 0;
  double beta2 = 0.0;  ///< beta_2(n - m, m)
  double beta2_se = 0.0;
  double ratio = 0.0;  ///< beta2 * n / sqrt(m)
  double doubled_beta2 = 0.0;  ///< beta_2(2n - m, m)
  double halving = 0.0;        ///< doubled_beta2 / beta2
};

struct RateRow {
  std::size_t n = 0;
  std::size_t k = 0;
  double delta = 0.0;
  double total = 0.0;
  double fitted = 0.0;
  double ratio = 0.0;
};

struct RateCheck {
  double c1 = 0.0;
  double c2 = 0.0;
  std::vector<RateRow> rows;
  double worst_factor = 0.0;
  bool within_factor4 = false;
};

struct ScalingReport {
  std::string learner;
  std::string distribution;
  std::vector<ScalingRow> rows;
  double spread = 0.0;  ///< max ratio / min ratio
  bool degenerate = false;
  bool flagged = false;  ///< spread > 3
  std::optional<RateCheck> rate;
};

/// Table of beta_2(n - m, m) n / sqrt(m) over the scaling grid. Diagnostic:
/// the flag never turns into a failing exit code.
ScalingReport run_scaling(const ExperimentSpec& spec);

/// For the sample mean on Bernoulli(p) with exact beta profiles, fits
/// total ~ C1 sqrt(log(1/delta)) / (n k) + C2 log(1/delta) / n with C >= 0
/// and reports the worst multiplicative misfit.
RateCheck rate_check(double p, const std::vector<std::size_t>& ns, const std::vector<std::size_t>& ks,
                     const std::vector<double>& deltas, const QGrid& q_grid, EnvelopeMode mode);

struct EfronSteinReport {
  std::string construction;
  std::size_t n = 0;
  std::size_t k = 0;
  ChainReport chain;
  MomentReport moments;
  StabilityProfile profile;
  double multiplier = 0.0;
  std::vector<MomentInequalityRow> inequality;
  std::optional<CgfReport> cgf;
  bool pass = false;
};

/// Variance chain, moment inequality and (optionally) CGF diagnostic for
/// the configured construction. Uses exact enumeration when the law is
/// small enough, Monte Carlo otherwise.
EfronSteinReport run_efron_stein(const ExperimentSpec& spec, bool with_cgf = true);

}  // namespace cvcon
