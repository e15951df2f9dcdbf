#include "cvcon/estimators.hpp"

#include "cvcon/errors.hpp"
#include "cvcon/numeric.hpp"

namespace cvcon {

double empirical_risk(const Hypothesis& h, const Sample& s, const Loss& loss) {
  CompensatedSum acc;
  for (const auto& x : s) acc.add(loss(h, x));
  return acc.value() / static_cast<double>(s.size());
}

RiskEstimate resubstitution(const Learner& learner, const Sample& s, const Loss& loss) {
  RiskEstimate est;
  est.kind = EstimatorKind::resubstitution;
  est.value = empirical_risk(learner.fit(s), s, loss);
  est.fits = 1;
  return est;
}

RiskEstimate deleted(const Learner& learner, const Sample& s, const Loss& loss) {
  require(s.size() >= 2, "the deleted estimate needs n >= 2");
  RiskEstimate est;
  est.kind = EstimatorKind::deleted;
  est.per_fold.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Hypothesis h = learner.fit(remove_indexed(s, i));
    ++est.fits;
    est.per_fold.push_back(loss(h, s[i]));
  }
  est.value = compensated_mean(est.per_fold);
  return est;
}

RiskEstimate kfcv(const Learner& learner, const Sample& s, const FoldPlan& plan, const Loss& loss) {
  require(plan.n() == s.size(), "fold plan does not match the sample size");
  require(plan.k() >= 2, "k-fold cross-validation needs k >= 2");
  RiskEstimate est;
  est.kind = EstimatorKind::kfcv;
  est.plan = plan;
  est.per_fold.reserve(plan.k());
  for (std::size_t j = 1; j <= plan.k(); ++j) {
    const Hypothesis h = learner.fit(remove_folds(s, plan, {j}));
    ++est.fits;
    est.per_fold.push_back(empirical_risk(h, fold_view(s, plan, j), loss));
  }
  est.value = compensated_mean(est.per_fold);
  return est;
}

}  // namespace cvcon
