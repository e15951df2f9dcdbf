#include "cvcon/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>

#include "cvcon/errors.hpp"
#include "cvcon/estimators.hpp"
#include "cvcon/parallel.hpp"
#include "cvcon/rng.hpp"

namespace cvcon {

QGrid default_q_grid() { return {1, 2, 3, 4, 6, 8}; }

void validate_q_grid(const QGrid& grid) {
  require(!grid.empty(), "q grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(grid[i] >= 1, "q grid values must be >= 1");
    require(i == 0 || grid[i] > grid[i - 1], "q grid must be strictly increasing");
  }
}

QGrid moment_orders_for(const QGrid& fit_grid) {
  validate_q_grid(fit_grid);
  std::set<int> orders{2};
  for (int q : fit_grid) orders.insert(4 * q);
  return {orders.begin(), orders.end()};
}

double q_norm(std::span<const double> xs, double q) {
  require(!xs.empty(), "q-norm of an empty list");
  require(q >= 1.0, "q-norm needs q >= 1");
  double scale = 0.0;
  for (double x : xs) scale = std::max(scale, std::abs(x));
  if (std::isinf(q) || scale == 0.0) return scale;
  CompensatedSum acc;
  for (double x : xs) acc.add(std::pow(std::abs(x) / scale, q));
  return scale * std::pow(acc.value() / static_cast<double>(xs.size()), 1.0 / q);
}

double weighted_q_norm(std::span<const double> xs, std::span<const double> weights, double q) {
  require(!xs.empty() && xs.size() == weights.size(), "weighted q-norm needs matching non-empty inputs");
  require(q >= 1.0, "q-norm needs q >= 1");
  double scale = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (weights[i] > 0.0) scale = std::max(scale, std::abs(xs[i]));
  }
  if (std::isinf(q) || scale == 0.0) return scale;
  CompensatedSum acc;
  for (std::size_t i = 0; i < xs.size(); ++i) acc.add(weights[i] * std::pow(std::abs(xs[i]) / scale, q));
  return scale * std::pow(acc.value(), 1.0 / q);
}

NormSummary summarize_norms(std::span<const double> values, std::span<const int> orders, std::size_t resamples,
                            std::uint64_t seed, std::uint64_t tag, unsigned workers) {
  require(!values.empty(), "no values to summarize");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  NormSummary out;
  for (int q : orders) out.norm[q] = q_norm(sorted, q);

  double scale = 0.0;
  for (double x : sorted) scale = std::max(scale, std::abs(x));
  const std::size_t count = sorted.size();
  const std::size_t width = orders.size();
  if (scale == 0.0 || resamples < 2) {
    for (int q : orders) {
      out.se[q] = 0.0;
      out.ci95[q] = {out.norm[q], out.norm[q]};
    }
    return out;
  }

  std::vector<double> powers(count * width);
  for (std::size_t t = 0; t < count; ++t) {
    const double y = std::abs(sorted[t]) / scale;
    for (std::size_t o = 0; o < width; ++o) powers[t * width + o] = std::pow(y, orders[o]);
  }

  std::vector<double> replicates(resamples * width);
  parallel_for(resamples, workers, [&](std::size_t b) {
    Rng rng = stream(seed, tag, b);
    std::vector<double> sums(width, 0.0);
    for (std::size_t t = 0; t < count; ++t) {
      const std::size_t idx = rng.below(count);
      for (std::size_t o = 0; o < width; ++o) sums[o] += powers[idx * width + o];
    }
    for (std::size_t o = 0; o < width; ++o) {
      replicates[b * width + o] = scale * std::pow(sums[o] / static_cast<double>(count), 1.0 / orders[o]);
    }
  });

  std::vector<double> column(resamples);
  for (std::size_t o = 0; o < width; ++o) {
    for (std::size_t b = 0; b < resamples; ++b) column[b] = replicates[b * width + o];
    out.se[orders[o]] = replicate_stddev(column);
    std::sort(column.begin(), column.end());
    out.ci95[orders[o]] = {quantile_sorted(column, 0.025), quantile_sorted(column, 0.975)};
  }
  return out;
}

double StabilityProfile::at(int q) const {
  const auto it = beta.find(q);
  require(it != beta.end(), fmt::format("stability profile ({}, {}) has no order {}", n, m, q));
  return it->second;
}

double StabilityProfile::se_at(int q) const {
  const auto it = se.find(q);
  return it == se.end() ? 0.0 : it->second;
}

std::vector<double> stability_deviations(const Learner& learner, const Loss& loss, const Distribution& d,
                                         std::size_t n, std::size_t m, std::size_t trials, std::uint64_t seed,
                                         unsigned workers) {
  require(m >= 1 && m < n, "stability needs 1 <= m < n");
  const std::uint64_t tag = phase_tag(fmt::format("stability/{}/{}", n, m));
  std::vector<double> deviations(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    Rng rng = stream(seed, tag, t);
    const Sample s = d.draw_sample(n, rng);
    const Sample holdout = d.draw_sample(m, rng);
    const double full = empirical_risk(learner.fit(s), holdout, loss);
    const double reduced = empirical_risk(learner.fit(remove_prefix(s, m)), holdout, loss);
    deviations[t] = std::abs(full - reduced);
  });
  return deviations;
}

StabilityProfile estimate_beta(const Learner& learner, const Loss& loss, const Distribution& d, std::size_t n,
                               std::size_t m, const QGrid& grid, const StabilityOptions& options) {
  validate_q_grid(grid);
  require(m >= 1 && m < n, "stability needs 1 <= m < n");
  require(options.trials >= 100, "stability estimation needs at least 100 trials");
  const auto deviations = stability_deviations(learner, loss, d, n, m, options.trials, options.seed, options.workers);
  const auto summary = summarize_norms(deviations, grid, options.bootstrap, options.seed,
                                       phase_tag(fmt::format("stability-bootstrap/{}/{}", n, m)), options.workers);
  StabilityProfile profile;
  profile.n = n;
  profile.m = m;
  profile.grid = grid;
  profile.beta = summary.norm;
  profile.se = summary.se;
  profile.trials = options.trials;
  profile.seed = options.seed;
  return profile;
}

StabilityProfile trivial_profile(std::size_t n, std::size_t m, const QGrid& grid) {
  validate_q_grid(grid);
  StabilityProfile profile;
  profile.n = n;
  profile.m = m;
  profile.grid = grid;
  profile.exact = true;
  profile.note = fmt::format("beta({}, {}) trains on an empty sequence; trivial bound 1 used", n, m);
  for (int q : grid) {
    profile.beta[q] = 1.0;
    profile.se[q] = 0.0;
  }
  return profile;
}

std::size_t enumeration_size(std::size_t atoms, std::size_t length) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < length; ++i) {
    if (atoms != 0 && total > kMaxEnumeration / atoms) return kMaxEnumeration + 1;
    total *= atoms;
  }
  return total;
}

StabilityProfile beta_exact_enumeration(const Learner& learner, const Loss& loss, const Distribution& d,
                                        std::size_t n, std::size_t m, const QGrid& grid) {
  validate_q_grid(grid);
  require(m >= 1 && m < n, "stability needs 1 <= m < n");
  const auto atoms = d.support();
  require(atoms.has_value(), "exact enumeration needs a finite-support distribution");
  require(enumeration_size(atoms->size(), n + m) <= kMaxEnumeration, "support too large to enumerate");

  std::vector<double> deviations;
  std::vector<double> weights;
  enumerate_sequences(*atoms, n + m, [&](const std::vector<Instance>& seq, double w) {
    const Sample s(std::vector<Instance>(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(n)));
    const Sample holdout(std::vector<Instance>(seq.begin() + static_cast<std::ptrdiff_t>(n), seq.end()));
    const double full = empirical_risk(learner.fit(s), holdout, loss);
    const double reduced = empirical_risk(learner.fit(remove_prefix(s, m)), holdout, loss);
    deviations.push_back(std::abs(full - reduced));
    weights.push_back(w);
  });

  StabilityProfile profile;
  profile.n = n;
  profile.m = m;
  profile.grid = grid;
  profile.trials = deviations.size();
  profile.exact = true;
  for (int q : grid) {
    profile.beta[q] = weighted_q_norm(deviations, weights, q);
    profile.se[q] = 0.0;
  }
  return profile;
}

namespace {

std::vector<double> binomial_pmf(std::size_t trials, double p) {
  std::vector<double> pmf(trials + 1);
  for (std::size_t j = 0; j <= trials; ++j) {
    const double log_choose = std::lgamma(static_cast<double>(trials) + 1.0) -
                              std::lgamma(static_cast<double>(j) + 1.0) -
                              std::lgamma(static_cast<double>(trials - j) + 1.0);
    if ((p == 0.0 && j > 0) || (p == 1.0 && j < trials)) {
      pmf[j] = 0.0;
      continue;
    }
    const double lp = j == 0 ? 0.0 : static_cast<double>(j) * std::log(p);
    const double lq = j == trials ? 0.0 : static_cast<double>(trials - j) * std::log1p(-p);
    pmf[j] = std::exp(log_choose + lp + lq);
  }
  return pmf;
}

}  // namespace

StabilityProfile sample_mean_bernoulli_beta(double p, std::size_t n, std::size_t m, const QGrid& grid) {
  validate_q_grid(grid);
  require(m >= 1 && m < n, "stability needs 1 <= m < n");
  require(p >= 0.0 && p <= 1.0, "Bernoulli parameter outside [0,1]");
  const auto removed = binomial_pmf(m, p);
  const auto kept = binomial_pmf(n - m, p);
  const auto fresh = binomial_pmf(m, p);
  const auto nd = static_cast<double>(n);
  const auto md = static_cast<double>(m);

  std::vector<double> deviations;
  std::vector<double> weights;
  deviations.reserve((m + 1) * (n - m + 1) * (m + 1));
  for (std::size_t a = 0; a <= m; ++a) {
    for (std::size_t b = 0; b <= n - m; ++b) {
      const double full = static_cast<double>(a + b) / nd;
      const double reduced = static_cast<double>(b) / static_cast<double>(n - m);
      for (std::size_t c = 0; c <= m; ++c) {
        // For x in {0,1}: mean over F' of (x - h)^2 = (c/m)(1 - 2h) + h^2.
        const double frac = static_cast<double>(c) / md;
        const double r_full = frac * (1.0 - 2.0 * full) + full * full;
        const double r_reduced = frac * (1.0 - 2.0 * reduced) + reduced * reduced;
        deviations.push_back(std::abs(r_full - r_reduced));
        weights.push_back(removed[a] * kept[b] * fresh[c]);
      }
    }
  }

  StabilityProfile profile;
  profile.n = n;
  profile.m = m;
  profile.grid = grid;
  profile.trials = 0;
  profile.exact = true;
  for (int q : grid) {
    profile.beta[q] = weighted_q_norm(deviations, weights, q);
    profile.se[q] = 0.0;
  }
  return profile;
}

}  // namespace cvcon
