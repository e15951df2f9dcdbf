#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cvcon/numeric.hpp"
#include "cvcon/problem.hpp"

namespace cvcon {

/// Strictly increasing integer moment orders, all >= 1.
using QGrid = std::vector<int>;

QGrid default_q_grid();
void validate_q_grid(const QGrid& grid);

/// Moment orders a stability profile must carry so that envelopes can be fit
/// on `fit_grid`: 2 (for r1, r2 and Term III) and 4q for every grid q.
QGrid moment_orders_for(const QGrid& fit_grid);

/// Empirical q-norm (mean |x|^q)^(1/q); q = +inf gives max |x|. Values are
/// scaled by max |x| first so large q neither overflows nor underflows.
double q_norm(std::span<const double> xs, double q);

/// Weighted variant (sum w_i |x_i|^q)^(1/q) with weights summing to 1.
double weighted_q_norm(std::span<const double> xs, std::span<const double> weights, double q);

struct NormSummary {
  std::map<int, double> norm;
  std::map<int, double> se;      ///< bootstrap standard deviation
  std::map<int, Interval> ci95;  ///< bootstrap percentile interval
};

/// q-norms of `values` at each order plus bootstrap uncertainty. Resample b
/// draws from stream(seed, tag, b).
NormSummary summarize_norms(std::span<const double> values, std::span<const int> orders, std::size_t resamples,
                            std::uint64_t seed, std::uint64_t tag, unsigned workers = 1);

/// Monte Carlo (or exact) estimates of beta_q(n, m) over a grid of orders.
struct StabilityProfile {
  std::size_t n = 0;
  std::size_t m = 0;
  QGrid grid;
  std::map<int, double> beta;
  std::map<int, double> se;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  bool exact = false;
  /// Non-empty when the coefficients are not an estimate (e.g. the trivial
  /// bound used when the reduced training set would be empty).
  std::string note;

  double at(int q) const;
  double se_at(int q) const;
};

struct StabilityOptions {
  std::size_t trials = 100000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::size_t bootstrap = 200;
};

/// Per trial t (stream (seed, "stability/<n>/<m>", t)): draw S_n and an
/// independent F' of size m, record
///   D_t = | R(A(S_n), F') - R(A(S_n^{-[m]}), F') |,
/// then report the q-norm of {D_t} at every grid order.
StabilityProfile estimate_beta(const Learner& learner, const Loss& loss, const Distribution& d, std::size_t n,
                               std::size_t m, const QGrid& grid, const StabilityOptions& options);

/// The raw deviations D_t behind estimate_beta, in trial order.
std::vector<double> stability_deviations(const Learner& learner, const Loss& loss, const Distribution& d,
                                         std::size_t n, std::size_t m, std::size_t trials, std::uint64_t seed,
                                         unsigned workers = 1);

/// Exact beta_q(n, m) by weighted enumeration of all (S_n, F') outcomes of
/// a finite-support distribution. Requires |support|^(n+m) <= 1e6.
StabilityProfile beta_exact_enumeration(const Learner& learner, const Loss& loss, const Distribution& d,
                                        std::size_t n, std::size_t m, const QGrid& grid);

/// Exact beta_q(n, m) for the sample mean under squared loss on
/// Bernoulli(p), summing over the binomial counts of the removed prefix,
/// the retained items and F'. Polynomial in n, so usable at any desk size.
StabilityProfile sample_mean_bernoulli_beta(double p, std::size_t n, std::size_t m, const QGrid& grid);

/// beta_q <= 1 for any loss with values in [0, 1]. Used for beta(m, m),
/// whose reduced training set is empty, so no estimate exists.
StabilityProfile trivial_profile(std::size_t n, std::size_t m, const QGrid& grid);

inline constexpr std::size_t kMaxEnumeration = 1'000'000;

/// |atoms|^length, or kMaxEnumeration + 1 if it would exceed the cap.
std::size_t enumeration_size(std::size_t atoms, std::size_t length);

/// Calls fn(sequence, probability) for every sequence of `length` atoms.
template <class Fn>
void enumerate_sequences(std::span<const Distribution::Atom> atoms, std::size_t length, Fn&& fn) {
  std::vector<std::size_t> digits(length, 0);
  std::vector<Instance> seq;
  seq.reserve(length);
  for (std::size_t i = 0; i < length; ++i) seq.push_back(atoms[0].value);
  while (true) {
    double weight = 1.0;
    for (std::size_t i = 0; i < length; ++i) weight *= atoms[digits[i]].weight;
    if (weight > 0.0) fn(static_cast<const std::vector<Instance>&>(seq), weight);
    std::size_t pos = 0;
    while (pos < length && ++digits[pos] == atoms.size()) {
      digits[pos] = 0;
      seq[pos] = atoms[0].value;
      ++pos;
    }
    if (pos == length) break;
    seq[pos] = atoms[digits[pos]].value;
  }
}

}  // namespace cvcon
