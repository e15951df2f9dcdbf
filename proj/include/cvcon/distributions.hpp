#pragma once

#include <vector>

#include "cvcon/problem.hpp"

namespace cvcon {

class BernoulliDistribution final : public Distribution {
 public:
  explicit BernoulliDistribution(double p);
  Instance draw(Rng& rng) const override;
  std::string name() const override;
  std::optional<double> mean() const override { return p_; }
  std::optional<double> variance() const override { return p_ * (1.0 - p_); }
  std::optional<double> moment_norm(double q) const override;
  std::optional<std::vector<Atom>> support() const override;
  double p() const noexcept { return p_; }

 private:
  double p_;
};

class PointMassDistribution final : public Distribution {
 public:
  explicit PointMassDistribution(double value);
  Instance draw(Rng& rng) const override;
  std::string name() const override;
  std::optional<double> mean() const override { return value_; }
  std::optional<double> variance() const override { return 0.0; }
  std::optional<double> moment_norm(double q) const override;
  std::optional<std::vector<Atom>> support() const override;

 private:
  double value_;
};

/// Uniform on [low, high] with 0 <= low < high <= 1.
class UniformDistribution final : public Distribution {
 public:
  UniformDistribution(double low, double high);
  Instance draw(Rng& rng) const override;
  std::string name() const override;
  std::optional<double> mean() const override { return 0.5 * (low_ + high_); }
  std::optional<double> variance() const override { return (high_ - low_) * (high_ - low_) / 12.0; }
  std::optional<double> moment_norm(double q) const override;

 private:
  double low_;
  double high_;
};

/// x ~ U[-1,1]^d, y = <weights, x> + U[-noise, noise].
class LinearRegressionTask final : public Distribution {
 public:
  LinearRegressionTask(std::vector<double> weights, double noise);
  Instance draw(Rng& rng) const override;
  std::string name() const override;

 private:
  std::vector<double> weights_;
  double noise_;
};

/// label ~ Bernoulli(1/2); x = U[0,1]^d + label * separation (every
/// coordinate); the recorded label is flipped with probability `flip`.
class TwoClassTask final : public Distribution {
 public:
  TwoClassTask(std::size_t dim, double separation, double flip);
  Instance draw(Rng& rng) const override;
  std::string name() const override;

 private:
  std::size_t dim_;
  double separation_;
  double flip_;
};

}  // namespace cvcon
