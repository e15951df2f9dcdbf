#include "cvcon/learners.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "cvcon/errors.hpp"
#include "cvcon/numeric.hpp"
#include "cvcon/rng.hpp"

namespace cvcon {

Hypothesis SampleMeanLearner::fit(const Sample& s) const {
  CompensatedSum acc;
  for (const auto& x : s) {
    const auto* v = std::get_if<double>(&x);
    require(v != nullptr, "sample mean needs scalar instances");
    acc.add(*v);
  }
  return ScalarHypothesis{acc.value() / static_cast<double>(s.size())};
}

RidgeLearner::RidgeLearner(double lambda) : lambda_(lambda) {
  require(lambda > 0.0 && std::isfinite(lambda), "ridge parameter must be positive");
}

std::string RidgeLearner::name() const { return fmt::format("ridge({})", lambda_); }

Hypothesis RidgeLearner::fit(const Sample& s) const {
  const auto* first = std::get_if<RegressionPoint>(&s[0]);
  require(first != nullptr, "ridge needs regression instances");
  const auto dim = static_cast<Eigen::Index>(first->x.size());
  require(dim >= 1, "ridge needs at least one feature");

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  for (const auto& item : s) {
    const auto* p = std::get_if<RegressionPoint>(&item);
    require(p != nullptr && static_cast<Eigen::Index>(p->x.size()) == dim, "inconsistent regression instances");
    const Eigen::Map<const Eigen::VectorXd> x(p->x.data(), dim);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(x);
    rhs += p->y * x;
  }
  gram = gram.selfadjointView<Eigen::Lower>();
  gram.diagonal().array() += lambda_;

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success) throw InternalError("ridge normal equations are singular");
  const Eigen::VectorXd w = ldlt.solve(rhs);
  const double residual = (gram * w - rhs).norm();
  if (!(residual <= 1e-10 * std::max(1.0, rhs.norm()))) {
    throw InternalError(fmt::format("ridge solve residual {} exceeds tolerance", residual));
  }
  return LinearHypothesis{std::vector<double>(w.data(), w.data() + dim)};
}

KnnLearner::KnnLearner(int neighbors) : neighbors_(neighbors) {
  require(neighbors >= 1 && neighbors % 2 == 1, "neighbour count must be an odd positive integer");
}

std::string KnnLearner::name() const { return fmt::format("knn({})", neighbors_); }

Hypothesis KnnLearner::fit(const Sample& s) const {
  auto train = std::make_shared<std::vector<LabeledPoint>>();
  train->reserve(s.size());
  for (const auto& item : s) {
    const auto* p = std::get_if<LabeledPoint>(&item);
    require(p != nullptr, "k-NN needs labeled instances");
    train->push_back(*p);
  }
  return KnnHypothesis{std::move(train), neighbors_};
}

double squared_residual(const Hypothesis& h, const Instance& x) {
  if (const auto* hs = std::get_if<ScalarHypothesis>(&h)) {
    const auto* v = std::get_if<double>(&x);
    require(v != nullptr, "scalar hypothesis needs a scalar instance");
    const double r = hs->value - *v;
    return r * r;
  }
  if (const auto* hl = std::get_if<LinearHypothesis>(&h)) {
    const auto* p = std::get_if<RegressionPoint>(&x);
    require(p != nullptr, "linear hypothesis needs a regression instance");
    const double r = hl->predict(p->x) - p->y;
    return r * r;
  }
  throw ArgumentError("squared loss is undefined for this hypothesis type");
}

double SquaredLoss::operator()(const Hypothesis& h, const Instance& x) const {
  return std::min(1.0, squared_residual(h, x));
}

double ZeroOneLoss::operator()(const Hypothesis& h, const Instance& x) const {
  const auto* p = std::get_if<LabeledPoint>(&x);
  require(p != nullptr, "zero-one loss needs a labeled instance");
  if (const auto* knn = std::get_if<KnnHypothesis>(&h)) return knn->predict(p->x) == p->label ? 0.0 : 1.0;
  throw ArgumentError("zero-one loss needs a classifier hypothesis");
}

namespace {

std::optional<double> analytic_risk(const Hypothesis& h, const Distribution& d, const Loss& loss) {
  if (loss.kind() != LossKind::squared) return std::nullopt;
  const auto* hs = std::get_if<ScalarHypothesis>(&h);
  if (hs == nullptr || hs->value < 0.0 || hs->value > 1.0) return std::nullopt;
  const auto mu = d.mean();
  const auto var = d.variance();
  if (!mu || !var) return std::nullopt;
  return (hs->value - *mu) * (hs->value - *mu) + *var;
}

std::optional<double> support_risk(const Hypothesis& h, const Distribution& d, const Loss& loss) {
  const auto atoms = d.support();
  if (!atoms) return std::nullopt;
  CompensatedSum acc;
  for (const auto& atom : *atoms) acc.add(atom.weight * loss(h, atom.value));
  return acc.value();
}

}  // namespace

bool has_exact_risk(const Hypothesis& h, const Distribution& d, const Loss& loss) {
  return analytic_risk(h, d, loss).has_value() || d.support().has_value();
}

RiskValue true_risk_on(const Hypothesis& h, const Distribution& d, const Loss& loss,
                       std::span<const Instance> holdout) {
  if (auto r = analytic_risk(h, d, loss)) return {*r, 0.0, true};
  if (auto r = support_risk(h, d, loss)) return {*r, 0.0, true};
  require(!holdout.empty(), "true risk needs analytic moments, a finite support, or a holdout");
  std::vector<double> losses;
  losses.reserve(holdout.size());
  for (const auto& x : holdout) losses.push_back(loss(h, x));
  const auto est = mean_with_stderr(losses);
  return {est.mean, est.se, false};
}

RiskValue true_risk(const Hypothesis& h, const Distribution& d, const Loss& loss, std::size_t oracle_size,
                    std::uint64_t seed) {
  if (has_exact_risk(h, d, loss)) return true_risk_on(h, d, loss, {});
  require(oracle_size >= 1, "true risk needs analytic moments, a finite support, or oracle_size >= 1");
  Rng rng = stream(seed, phase_tag("true_risk"), 0);
  const auto holdout = d.draw_items(oracle_size, rng);
  return true_risk_on(h, d, loss, holdout);
}

}  // namespace cvcon
