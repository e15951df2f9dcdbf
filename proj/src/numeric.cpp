#include "cvcon/numeric.hpp"

#include <algorithm>
#include <cmath>

#include "cvcon/errors.hpp"

namespace cvcon {

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

double compensated_sum(std::span<const double> xs) noexcept {
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

double compensated_mean(std::span<const double> xs) {
  require(!xs.empty(), "mean of an empty sequence");
  return compensated_sum(xs) / static_cast<double>(xs.size());
}

MeanEstimate mean_with_stderr(std::span<const double> xs) {
  const double mean = compensated_mean(xs);
  if (xs.size() < 2) return {mean, 0.0};
  CompensatedSum ss;
  for (double x : xs) ss.add((x - mean) * (x - mean));
  const auto n = static_cast<double>(xs.size());
  return {mean, std::sqrt(ss.value() / (n - 1.0) / n)};
}

MeanEstimate variance_with_stderr(std::span<const double> xs) {
  require(xs.size() >= 2, "variance needs at least two values");
  const double mean = compensated_mean(xs);
  CompensatedSum m2;
  CompensatedSum m4;
  for (double x : xs) {
    const double d2 = (x - mean) * (x - mean);
    m2.add(d2);
    m4.add(d2 * d2);
  }
  const auto n = static_cast<double>(xs.size());
  const double var = m2.value() / (n - 1.0);
  const double pop2 = m2.value() / n;
  const double pop4 = m4.value() / n;
  return {var, std::sqrt(std::max(0.0, pop4 - pop2 * pop2) / n)};
}

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  require(trials > 0, "Wilson interval needs at least one trial");
  require(successes <= trials, "successes exceed trials");
  const auto n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double quantile_sorted(std::span<const double> sorted, double p) {
  require(!sorted.empty(), "quantile of an empty sequence");
  require(p >= 0.0 && p <= 1.0, "quantile level outside [0,1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double replicate_stddev(std::span<const double> replicates) {
  if (replicates.size() < 2) return 0.0;
  const double mean = compensated_mean(replicates);
  CompensatedSum ss;
  for (double x : replicates) ss.add((x - mean) * (x - mean));
  return std::sqrt(ss.value() / static_cast<double>(replicates.size() - 1));
}

}  // namespace cvcon
