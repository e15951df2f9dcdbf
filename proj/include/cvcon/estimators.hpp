#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cvcon/problem.hpp"

namespace cvcon {

enum class EstimatorKind { resubstitution, deleted, kfcv };

struct RiskEstimate {
  double value = 0.0;
  EstimatorKind kind = EstimatorKind::kfcv;
  std::optional<FoldPlan> plan;
  /// Held-out empirical risk per fold (kfcv) or per left-out item (deleted).
  std::vector<double> per_fold;
  /// Number of calls to Learner::fit made by the estimator.
  std::size_t fits = 0;
};

/// (1/n) sum_i l(h, X_i), duplicates counted with multiplicity.
double empirical_risk(const Hypothesis& h, const Sample& s, const Loss& loss);

RiskEstimate resubstitution(const Learner& learner, const Sample& s, const Loss& loss);

/// Leave-one-out estimate; n fits. Requires n >= 2.
RiskEstimate deleted(const Learner& learner, const Sample& s, const Loss& loss);

/// k-fold estimate (1/k) sum_j R(A(S^{-F_j}), F_j); exactly k fits.
/// Requires k >= 2 and plan.n() == s.size().
RiskEstimate kfcv(const Learner& learner, const Sample& s, const FoldPlan& plan, const Loss& loss);

}  // namespace cvcon
