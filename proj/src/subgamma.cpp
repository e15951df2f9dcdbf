#include "cvcon/subgamma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>

#include "cvcon/errors.hpp"

namespace cvcon {

std::string to_string(EnvelopeMode mode) {
  switch (mode) {
    case EnvelopeMode::sqrt_only:
      return "sqrt_only";
    case EnvelopeMode::linear_only:
      return "linear_only";
    case EnvelopeMode::joint:
      return "joint";
  }
  return "joint";
}

EnvelopeMode parse_envelope_mode(const std::string& text) {
  if (text == "sqrt_only") return EnvelopeMode::sqrt_only;
  if (text == "linear_only") return EnvelopeMode::linear_only;
  if (text == "joint") return EnvelopeMode::joint;
  throw ArgumentError(fmt::format("unknown envelope mode '{}' (sqrt_only, linear_only, joint)", text));
}

double envelope_value(double u, double w, int q) {
  const auto qd = static_cast<double>(q);
  return std::max(std::sqrt(qd * u), qd * w);
}

namespace {

// Smallest u >= value^2 / q with sqrt(q u) >= value in floating point.
double cover_sqrt(double value, int q) {
  const auto qd = static_cast<double>(q);
  double u = value * value / qd;
  while (std::sqrt(qd * u) < value) u = std::nextafter(u, std::numeric_limits<double>::infinity());
  return u;
}

// Smallest w >= value / q with q w >= value in floating point.
double cover_linear(double value, int q) {
  const auto qd = static_cast<double>(q);
  double w = value / qd;
  while (qd * w < value) w = std::nextafter(w, std::numeric_limits<double>::infinity());
  return w;
}

// Least u making (u, w) an envelope of `values`.
double required_u(const std::map<int, double>& values, double w) {
  double u = 0.0;
  for (const auto& [q, value] : values) {
    if (static_cast<double>(q) * w < value) u = std::max(u, cover_sqrt(value, q));
  }
  return u;
}

}  // namespace

MomentEnvelope fit_envelope(const std::map<int, double>& values, EnvelopeMode mode) {
  require(!values.empty(), "cannot fit an envelope to an empty map");
  MomentEnvelope e;
  e.mode = mode;
  for (const auto& [q, value] : values) {
    require(q >= 1, "envelope orders must be >= 1");
    require(std::isfinite(value) && value >= 0.0, fmt::format("envelope value at q = {} must be finite and >= 0", q));
    e.grid.push_back(q);
  }

  switch (mode) {
    case EnvelopeMode::sqrt_only:
      for (const auto& [q, value] : values) e.u = std::max(e.u, cover_sqrt(value, q));
      break;
    case EnvelopeMode::linear_only:
      for (const auto& [q, value] : values) e.w = std::max(e.w, cover_linear(value, q));
      break;
    case EnvelopeMode::joint: {
      // u(w) is a step function that only changes at w = values[q] / q, so
      // the optimum of u(w) + w^2 sits at 0 or at one of those breakpoints.
      std::set<double> candidates{0.0};
      for (const auto& [q, value] : values) candidates.insert(cover_linear(value, q));
      double best = std::numeric_limits<double>::infinity();
      for (double w : candidates) {
        const double u = required_u(values, w);
        const double objective = u + w * w;
        if (objective < best) {
          best = objective;
          e.u = u;
          e.w = w;
        }
      }
      break;
    }
  }

  for (const auto& [q, value] : values) {
    if (value > envelope_value(e.u, e.w, q)) {
      throw InternalError(fmt::format("fitted envelope misses q = {}", q));
    }
  }
  e.caveat = fmt::format("envelope checked on q in [{}, {}] only; larger q is extrapolated", e.grid.front(),
                         e.grid.back());
  return e;
}

SubGammaParams envelope_to_tail(double u, double w) {
  require(u >= 0.0 && w >= 0.0, "envelope constants must be >= 0");
  return {4.0 * (1.1 * u + 0.73 * 0.73 * w * w), 1.46 * w};
}

SubGammaParams envelope_to_tail(const MomentEnvelope& e) { return envelope_to_tail(e.u, e.w); }

double tail_to_moment_factorial(const SubGammaParams& p, int q) {
  require(q >= 1, "moment order must be >= 1");
  require(p.v >= 0.0 && p.c >= 0.0, "sub-gamma parameters must be >= 0");
  const auto qd = static_cast<double>(q);
  const double a = 8.0 * p.v;
  const double b = 4.0 * p.c;
  const double neg_inf = -std::numeric_limits<double>::infinity();
  const double log_first = a > 0.0 ? std::lgamma(qd + 1.0) + qd * std::log(a) : neg_inf;
  const double log_second = b > 0.0 ? std::lgamma(2.0 * qd + 1.0) + 2.0 * qd * std::log(b) : neg_inf;
  const double peak = std::max(log_first, log_second);
  if (peak == neg_inf) return 0.0;
  const double log_total = peak + std::log(std::exp(log_first - peak) + std::exp(log_second - peak));
  return std::exp(log_total / (2.0 * qd));
}

double tail_to_moment_bound(const SubGammaParams& p, int q) {
  const double factorial = tail_to_moment_factorial(p, q);
  const auto qd = static_cast<double>(q);
  const double simple = std::max(std::sqrt(16.8 * qd * p.v), 9.6 * qd * p.c);
  return std::min(factorial, simple);
}

TailQuantile tail_quantile(const SubGammaParams& p, double t) {
  require(t > 0.0, "tail level t must be positive");
  require(p.v >= 0.0 && p.c >= 0.0, "sub-gamma parameters must be >= 0");
  return {std::sqrt(2.0 * p.v * t) + p.c * t, std::exp(-t)};
}

double cgf_bound(const SubGammaParams& p, double lambda) {
  require(p.v >= 0.0 && p.c >= 0.0, "sub-gamma parameters must be >= 0");
  require(lambda >= 0.0, "lambda must be non-negative");
  require(p.c * lambda < 1.0, fmt::format("lambda = {} must be below 1/c", lambda));
  return 0.5 * lambda * lambda * p.v / (1.0 - p.c * lambda);
}

}  // namespace cvcon
