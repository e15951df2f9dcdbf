#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cvcon/rng.hpp"

namespace cvcon {

// ---------------------------------------------------------------------------
// Instances and samples
// ---------------------------------------------------------------------------

/// Feature vector with a real response.
struct RegressionPoint {
  std::vector<double> x;
  double y = 0.0;
  bool operator==(const RegressionPoint&) const = default;
};

/// Feature vector with a class label.
struct LabeledPoint {
  std::vector<double> x;
  int label = 0;
  bool operator==(const LabeledPoint&) const = default;
};

/// A point of the instance space. Scalars must lie in [0,1].
using Instance = std::variant<double, RegressionPoint, LabeledPoint>;

/// Throws ArgumentError if the instance breaks its variant's invariant.
void validate_instance(const Instance& x);

/// Ordered, non-empty sequence of instances. Immutable after construction;
/// every removal view returns a new Sample and preserves relative order.
class Sample {
 public:
  explicit Sample(std::vector<Instance> items, std::string provenance = {});

  std::size_t size() const noexcept { return items_.size(); }
  const Instance& operator[](std::size_t i) const { return items_[i]; }
  std::span<const Instance> items() const noexcept { return items_; }
  auto begin() const noexcept { return items_.begin(); }
  auto end() const noexcept { return items_.end(); }
  const std::string& provenance() const noexcept { return provenance_; }

  friend bool operator==(const Sample& a, const Sample& b) { return a.items_ == b.items_; }

 private:
  std::vector<Instance> items_;
  std::string provenance_;
};

/// Builds a Sample of scalars; convenient for tests and the sample-mean task.
Sample scalar_sample(std::initializer_list<double> values);
Sample scalar_sample(std::span<const double> values);

/// k-way equal partition of n = k*m indices into contiguous folds. Fold
/// indices are 1-based: fold j covers [(j-1)m, jm).
class FoldPlan {
 public:
  FoldPlan(std::size_t n, std::size_t k);

  std::size_t n() const noexcept { return n_; }
  std::size_t k() const noexcept { return k_; }
  std::size_t m() const noexcept { return m_; }
  std::size_t fold_begin(std::size_t j) const;
  std::size_t fold_end(std::size_t j) const { return fold_begin(j) + m_; }

  bool operator==(const FoldPlan&) const = default;

 private:
  std::size_t n_;
  std::size_t k_;
  std::size_t m_;
};

/// S with item i (0-based) removed. The result must be non-empty.
Sample remove_indexed(const Sample& s, std::size_t i);

/// S with its first m items removed; requires 1 <= m < n.
Sample remove_prefix(const Sample& s, std::size_t m);

/// S with one or two folds removed. The result does not depend on the order
/// in which the fold indices are given; at least one fold must remain.
Sample remove_folds(const Sample& s, const FoldPlan& plan, std::span<const std::size_t> folds);
Sample remove_folds(const Sample& s, const FoldPlan& plan, std::initializer_list<std::size_t> folds);

/// The m items of fold j (1-based), in order.
Sample fold_view(const Sample& s, const FoldPlan& plan, std::size_t j);

/// S with items [first, first + replacement.size()) overwritten.
Sample replace_range(const Sample& s, std::size_t first, std::span<const Instance> replacement);

// ---------------------------------------------------------------------------
// Hypotheses, losses and learners
// ---------------------------------------------------------------------------

struct ScalarHypothesis {
  double value = 0.0;
  bool operator==(const ScalarHypothesis&) const = default;
};

struct LinearHypothesis {
  std::vector<double> coef;
  double predict(std::span<const double> x) const;
  bool operator==(const LinearHypothesis&) const = default;
};

/// Stores its training set; prediction is a majority vote of the nearest
/// neighbours. Distance ties go to the lower training index, vote ties to
/// the smaller label.
struct KnnHypothesis {
  std::shared_ptr<const std::vector<LabeledPoint>> train;
  int neighbors = 1;
  int predict(std::span<const double> x) const;
  bool operator==(const KnnHypothesis& other) const;
};

using Hypothesis = std::variant<ScalarHypothesis, LinearHypothesis, KnnHypothesis>;

enum class LossKind { squared, zero_one, custom };

/// Bounded loss l(h, x) in [0,1].
class Loss {
 public:
  virtual ~Loss() = default;
  virtual double operator()(const Hypothesis& h, const Instance& x) const = 0;
  virtual LossKind kind() const noexcept { return LossKind::custom; }
  virtual std::string name() const = 0;
};

/// Deterministic learning rule: Sample -> Hypothesis.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual Hypothesis fit(const Sample& s) const = 0;
  virtual std::string name() const = 0;
};

/// Source of i.i.d. instances with optional analytic moments.
class Distribution {
 public:
  struct Atom {
    Instance value;
    double weight;
  };

  virtual ~Distribution() = default;
  virtual Instance draw(Rng& rng) const = 0;
  virtual std::string name() const = 0;

  virtual std::optional<double> mean() const { return std::nullopt; }
  virtual std::optional<double> variance() const { return std::nullopt; }
  /// ||X||_q = (E|X|^q)^(1/q) for scalar distributions.
  virtual std::optional<double> moment_norm(double /*q*/) const { return std::nullopt; }
  /// Atoms with probabilities when the support is finite.
  virtual std::optional<std::vector<Atom>> support() const { return std::nullopt; }

  Sample draw_sample(std::size_t n, Rng& rng, std::string provenance = {}) const;
  std::vector<Instance> draw_items(std::size_t n, Rng& rng) const;
};

using LearnerPtr = std::shared_ptr<const Learner>;
using LossPtr = std::shared_ptr<const Loss>;
using DistributionPtr = std::shared_ptr<const Distribution>;

}  // namespace cvcon
