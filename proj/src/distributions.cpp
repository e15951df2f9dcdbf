#include "cvcon/distributions.hpp"

#include <cmath>

#include <fmt/format.h>

#include "cvcon/errors.hpp"

namespace cvcon {

BernoulliDistribution::BernoulliDistribution(double p) : p_(p) {
  require(p >= 0.0 && p <= 1.0, "Bernoulli parameter outside [0,1]");
}

Instance BernoulliDistribution::draw(Rng& rng) const { return rng.bernoulli(p_) ? 1.0 : 0.0; }

std::string BernoulliDistribution::name() const { return fmt::format("bernoulli({})", p_); }

std::optional<double> BernoulliDistribution::moment_norm(double q) const {
  if (std::isinf(q)) return p_ > 0.0 ? 1.0 : 0.0;
  return std::pow(p_, 1.0 / q);
}

std::optional<std::vector<Distribution::Atom>> BernoulliDistribution::support() const {
  return std::vector<Atom>{{Instance{0.0}, 1.0 - p_}, {Instance{1.0}, p_}};
}

PointMassDistribution::PointMassDistribution(double value) : value_(value) {
  require(value >= 0.0 && value <= 1.0, "point mass outside [0,1]");
}

Instance PointMassDistribution::draw(Rng&) const { return value_; }

std::string PointMassDistribution::name() const { return fmt::format("point_mass({})", value_); }

std::optional<double> PointMassDistribution::moment_norm(double) const { return value_; }

std::optional<std::vector<Distribution::Atom>> PointMassDistribution::support() const {
  return std::vector<Atom>{{Instance{value_}, 1.0}};
}

UniformDistribution::UniformDistribution(double low, double high) : low_(low), high_(high) {
  require(low >= 0.0 && high <= 1.0 && low < high, "uniform bounds must satisfy 0 <= low < high <= 1");
}

Instance UniformDistribution::draw(Rng& rng) const { return low_ + (high_ - low_) * rng.uniform(); }

std::string UniformDistribution::name() const { return fmt::format("uniform({},{})", low_, high_); }

std::optional<double> UniformDistribution::moment_norm(double q) const {
  if (std::isinf(q)) return high_;
  const double integral = (std::pow(high_, q + 1.0) - std::pow(low_, q + 1.0)) / ((q + 1.0) * (high_ - low_));
  return std::pow(integral, 1.0 / q);
}

LinearRegressionTask::LinearRegressionTask(std::vector<double> weights, double noise)
    : weights_(std::move(weights)), noise_(noise) {
  require(!weights_.empty(), "regression task needs at least one feature");
  require(noise >= 0.0 && std::isfinite(noise), "noise level must be finite and non-negative");
}

Instance LinearRegressionTask::draw(Rng& rng) const {
  RegressionPoint point;
  point.x.resize(weights_.size());
  double y = 0.0;
  for (std::size_t c = 0; c < weights_.size(); ++c) {
    point.x[c] = 2.0 * rng.uniform() - 1.0;
    y += weights_[c] * point.x[c];
  }
  point.y = y + noise_ * (2.0 * rng.uniform() - 1.0);
  return point;
}

std::string LinearRegressionTask::name() const {
  return fmt::format("linear(dim={},noise={})", weights_.size(), noise_);
}

TwoClassTask::TwoClassTask(std::size_t dim, double separation, double flip)
    : dim_(dim), separation_(separation), flip_(flip) {
  require(dim >= 1, "two-class task needs at least one feature");
  require(flip >= 0.0 && flip <= 0.5, "label flip probability must lie in [0, 0.5]");
}

Instance TwoClassTask::draw(Rng& rng) const {
  LabeledPoint point;
  const int label = rng.bernoulli(0.5) ? 1 : 0;
  point.x.resize(dim_);
  for (auto& v : point.x) v = rng.uniform() + separation_ * label;
  point.label = rng.bernoulli(flip_) ? 1 - label : label;
  return point;
}

std::string TwoClassTask::name() const {
  return fmt::format("two_class(dim={},sep={},flip={})", dim_, separation_, flip_);
}

}  // namespace cvcon
