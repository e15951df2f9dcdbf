#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cvcon {

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double compensated_sum(std::span<const double> xs) noexcept;
double compensated_mean(std::span<const double> xs);

struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
};

/// Sample mean with the usual s/sqrt(n) standard error (0 when n == 1).
MeanEstimate mean_with_stderr(std::span<const double> xs);

/// Unbiased sample variance with a large-sample standard error
/// sqrt((m4 - s^4) / n).
MeanEstimate variance_with_stderr(std::span<const double> xs);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

inline constexpr double kZ95 = 1.959963984540054;

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = kZ95);

/// Type-7 (linear interpolation) quantile of an ascending-sorted sequence.
double quantile_sorted(std::span<const double> sorted, double p);

/// Standard deviation (n - 1 denominator) of bootstrap replicates.
double replicate_stddev(std::span<const double> replicates);

}  // namespace cvcon
