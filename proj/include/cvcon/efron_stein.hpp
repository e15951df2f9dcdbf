#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cvcon/numeric.hpp"
#include "cvcon/problem.hpp"
#include "cvcon/stability.hpp"

namespace cvcon {

enum class Construction { cv_term1, risk_term2, custom };

std::string to_string(Construction c);

/// Z, the leave-one-coordinate-out surrogates Z_{-i}, and
/// V_DEL = sum_i (Z - Z_{-i})^2.
struct DeviationDiagnostics {
  double z = 0.0;
  std::vector<double> z_minus;
  double v_del = 0.0;
  Construction construction = Construction::custom;
  std::size_t fits = 0;
};

/// Z = kfcv estimate; Z_{-i} = (1/(k-1)) sum_{j != i} R(A(S^{-{F_i,F_j}}), F_j).
/// Needs k >= 3 so that every double removal leaves a fold to train on.
/// Performs k + k(k-1) fits.
DeviationDiagnostics diagnostics_term1(const Learner& learner, const Loss& loss, const Sample& s,
                                       const FoldPlan& plan);

/// Z = R(A(S_n), P), Z_{-i} = R(A(S_n^{-i}), P). Monte Carlo risks (when no
/// exact risk exists) share one holdout drawn from (seed, "true_risk", 0).
DeviationDiagnostics diagnostics_term2(const Learner& learner, const Loss& loss, const Sample& s,
                                       const Distribution& d, std::size_t oracle_size, std::uint64_t seed);

/// A statistic Z = f(C_1, ..., C_c) of independent coordinates, each a
/// contiguous block of the sample (single items, or whole folds), together
/// with its removal surrogates.
class DeviationStatistic {
 public:
  virtual ~DeviationStatistic() = default;
  virtual Construction construction() const noexcept = 0;
  virtual DeviationDiagnostics evaluate(const Sample& s) const = 0;
  virtual double value(const Sample& s) const = 0;
  /// Number of coordinates for a sample of size n.
  virtual std::size_t coordinates(std::size_t n) const = 0;
  /// Items per coordinate.
  virtual std::size_t block(std::size_t n) const = 0;
};

/// Term I construction over a fixed fold count k.
class CvTermStatistic final : public DeviationStatistic {
 public:
  CvTermStatistic(LearnerPtr learner, LossPtr loss, std::size_t k);
  Construction construction() const noexcept override { return Construction::cv_term1; }
  DeviationDiagnostics evaluate(const Sample& s) const override;
  double value(const Sample& s) const override;
  std::size_t coordinates(std::size_t) const override { return k_; }
  std::size_t block(std::size_t n) const override { return n / k_; }

 private:
  LearnerPtr learner_;
  LossPtr loss_;
  std::size_t k_;
};

/// Term II construction.
class RiskTermStatistic final : public DeviationStatistic {
 public:
  RiskTermStatistic(LearnerPtr learner, LossPtr loss, DistributionPtr dist, std::size_t oracle_size,
                    std::uint64_t seed);
  Construction construction() const noexcept override { return Construction::risk_term2; }
  DeviationDiagnostics evaluate(const Sample& s) const override;
  double value(const Sample& s) const override;
  std::size_t coordinates(std::size_t n) const override { return n; }
  std::size_t block(std::size_t) const override { return 1; }

 private:
  LearnerPtr learner_;
  LossPtr loss_;
  DistributionPtr dist_;
  std::size_t oracle_size_;
  std::uint64_t seed_;
  std::vector<Instance> holdout_;
};

/// Z = mean of scalar items, Z_{-i} = mean of the other n - 1 items.
class MeanStatistic final : public DeviationStatistic {
 public:
  Construction construction() const noexcept override { return Construction::custom; }
  DeviationDiagnostics evaluate(const Sample& s) const override;
  double value(const Sample& s) const override;
  std::size_t coordinates(std::size_t n) const override { return n; }
  std::size_t block(std::size_t) const override { return 1; }
};

struct ChainReport {
  double var_z = 0.0;
  double var_z_se = 0.0;
  double e_v = 0.0;
  double e_v_se = 0.0;
  double e_v_del = 0.0;
  double e_v_del_se = 0.0;
  std::size_t trials = 0;
  std::size_t inner = 0;
  bool pass = false;
};

/// Monte Carlo check of Var[Z] <= E V <= E V_DEL, with
/// V = sum_i (Z - E_{-i} Z)^2 and E_{-i} Z estimated by redrawing
/// coordinate i `inner` times. Passes when each inequality holds within
/// 4 combined standard errors.
ChainReport variance_chain_check(const DeviationStatistic& stat, const Distribution& d, std::size_t n,
                                 std::size_t trials, std::size_t inner, std::uint64_t seed, unsigned workers = 1);

/// ||V_DEL||_{2q} per grid q and E V_DEL.
struct MomentReport {
  QGrid grid;
  std::map<int, double> norms;  ///< q -> ||V_DEL||_{2q}
  std::map<int, double> se;
  double mean_vdel = 0.0;
  double mean_vdel_se = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  bool exact = false;
};

MomentReport moment_report(const DeviationStatistic& stat, const Distribution& d, std::size_t n,
                           const QGrid& grid, std::size_t trials, std::uint64_t seed, unsigned workers = 1);

/// Exact moments by enumerating every sample of a finite-support distribution.
MomentReport moment_report_exact(const DeviationStatistic& stat, const Distribution& d, std::size_t n,
                                 const QGrid& grid);

/// One row of a moment-inequality comparison:
///   ||V_DEL||_{2q} <= multiplier * beta_{4q}^2   (q = 0 encodes E V_DEL vs beta_2^2).
struct MomentInequalityRow {
  int q = 0;
  double lhs = 0.0;
  double lhs_se = 0.0;
  double rhs = 0.0;
  double rhs_se = 0.0;
  bool holds = false;
};

/// Compares a moment report with multiplier * beta^2 from a profile
/// (multiplier k with beta(n-m, m) for Term I, n with beta(n, 1) for Term II).
/// Rows hold when lhs <= rhs + tolerance_se * sqrt(lhs_se^2 + rhs_se^2).
std::vector<MomentInequalityRow> check_moment_inequality(const MomentReport& report, const StabilityProfile& profile,
                                                         double multiplier, double tolerance_se = 4.0);

struct CgfRow {
  double lambda = 0.0;
  double lhs = 0.0;  ///< log E exp(lambda (Z - EZ))
  double lhs_se = 0.0;
  double rhs = 0.0;  ///< lambda theta / (1 - lambda theta) * log E exp(lambda / theta * V_DEL)
  double rhs_se = 0.0;
  double margin = 0.0;  ///< rhs - lhs
  Interval margin_ci;
  bool holds = false;  ///< margin_ci.hi >= 0
};

struct CgfReport {
  double theta = 1.0;
  std::size_t trials = 0;
  std::vector<CgfRow> rows;
  /// Moment generating functions are heavy-tailed to estimate; the report is
  /// a soft check and never gates acceptance on its own.
  bool diagnostic = true;
};

inline const std::vector<double> kDefaultLambdaGrid{0.1, 0.25, 0.5, 0.75, 1.0};

/// Empirical CGFs of Z - E Z (centred at the sample mean, which the bootstrap
/// keeps fixed) and of V_DEL, with 200-resample bootstrap uncertainty.
CgfReport cgf_diagnostic(const DeviationStatistic& stat, const Distribution& d, std::size_t n,
                         const std::vector<double>& lambda_grid, double theta, std::size_t trials,
                         std::uint64_t seed, unsigned workers = 1);

}  // namespace cvcon
