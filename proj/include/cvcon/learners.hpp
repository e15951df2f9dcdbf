#pragma once

#include <atomic>
#include <cstdint>
#include <memory>

#include "cvcon/problem.hpp"

namespace cvcon {

/// A(S) = arithmetic mean of the scalar instances.
class SampleMeanLearner final : public Learner {
 public:
  Hypothesis fit(const Sample& s) const override;
  std::string name() const override { return "sample_mean"; }
};

/// Ridge regression without intercept: (X'X + lambda I) w = X'y, solved
/// densely. The solve is checked against a relative residual of 1e-10.
class RidgeLearner final : public Learner {
 public:
  explicit RidgeLearner(double lambda);
  Hypothesis fit(const Sample& s) const override;
  std::string name() const override;
  double lambda() const noexcept { return lambda_; }

 private:
  double lambda_;
};

/// kappa-nearest-neighbour majority vote (kappa odd).
class KnnLearner final : public Learner {
 public:
  explicit KnnLearner(int neighbors);
  Hypothesis fit(const Sample& s) const override;
  std::string name() const override;

 private:
  int neighbors_;
};

/// Ignores its input: A(S) = h0 for every S.
class ConstantLearner final : public Learner {
 public:
  explicit ConstantLearner(Hypothesis h0) : h0_(std::move(h0)) {}
  Hypothesis fit(const Sample&) const override { return h0_; }
  std::string name() const override { return "constant"; }
  const Hypothesis& hypothesis() const noexcept { return h0_; }

 private:
  Hypothesis h0_;
};

/// Decorator that counts calls to fit(). The counter is the only mutable
/// state and is atomic, so the wrapper may be shared across workers.
class CountingLearner final : public Learner {
 public:
  explicit CountingLearner(LearnerPtr inner) : inner_(std::move(inner)) {}
  Hypothesis fit(const Sample& s) const override {
    fits_.fetch_add(1, std::memory_order_relaxed);
    return inner_->fit(s);
  }
  std::string name() const override { return inner_->name(); }
  std::uint64_t fits() const noexcept { return fits_.load(); }
  void reset() noexcept { fits_.store(0); }

 private:
  LearnerPtr inner_;
  mutable std::atomic<std::uint64_t> fits_{0};
};

/// Squared error, clipped at 1. Scalar hypothesis on scalar instances, or a
/// linear hypothesis on regression points.
class SquaredLoss final : public Loss {
 public:
  double operator()(const Hypothesis& h, const Instance& x) const override;
  LossKind kind() const noexcept override { return LossKind::squared; }
  std::string name() const override { return "squared"; }
};

/// 1 if the classifier's prediction differs from the label, else 0.
class ZeroOneLoss final : public Loss {
 public:
  double operator()(const Hypothesis& h, const Instance& x) const override;
  LossKind kind() const noexcept override { return LossKind::zero_one; }
  std::string name() const override { return "zero_one"; }
};

/// Unclipped squared residual for the variants SquaredLoss accepts.
double squared_residual(const Hypothesis& h, const Instance& x);

/// Risk value with its Monte Carlo standard error (0 when exact).
struct RiskValue {
  double value = 0.0;
  double se = 0.0;
  bool exact = false;
};

/// R(h, P) = E l(h, X).
///   - analytic (h - mu)^2 + sigma^2 for a scalar hypothesis in [0,1] under
///     squared loss when the distribution has a mean and variance;
///   - otherwise an exact weighted sum over a finite support;
///   - otherwise the mean over oracle_size fresh draws from stream
///     (seed, "true_risk", 0).
RiskValue true_risk(const Hypothesis& h, const Distribution& d, const Loss& loss, std::size_t oracle_size,
                    std::uint64_t seed);

/// Same, but the Monte Carlo fallback evaluates on the caller's holdout so
/// several hypotheses can share common random numbers.
RiskValue true_risk_on(const Hypothesis& h, const Distribution& d, const Loss& loss,
                       std::span<const Instance> holdout);

/// True when true_risk needs no Monte Carlo holdout for this triple.
bool has_exact_risk(const Hypothesis& h, const Distribution& d, const Loss& loss);

}  // namespace cvcon
