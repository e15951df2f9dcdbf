#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>

#include "cvcon/errors.hpp"
#include "cvcon/rng.hpp"
#include "cvcon/subgamma.hpp"

using namespace cvcon;

namespace {

// Brute-force minimum of u + w^2 over a fine w grid.
double scan_objective(const std::map<int, double>& values) {
  double wmax = 0.0;
  for (const auto& [q, value] : values) wmax = std::max(wmax, value / q);
  double best = std::numeric_limits<double>::infinity();
  const int steps = 20000;
  for (int i = 0; i <= steps; ++i) {
    const double w = wmax * i / steps;
    double u = 0.0;
    for (const auto& [q, value] : values) {
      if (q * w < value) u = std::max(u, value * value / q);
    }
    best = std::min(best, u + w * w);
  }
  return best;
}

std::map<int, double> random_values(Rng& rng) {
  std::map<int, double> values;
  for (int q : {1, 2, 3, 4, 6, 8}) {
    const double base = rng.uniform();
    values[q] = rng.bernoulli(0.5) ? base * std::sqrt(static_cast<double>(q)) : base * q;
  }
  return values;
}

}  // namespace

TEST_CASE("envelope to tail constants") {
  const auto p = envelope_to_tail(1.0, 1.0);
  CHECK(p.v == doctest::Approx(6.5316));
  CHECK(p.c == doctest::Approx(1.46));
  const auto q = envelope_to_tail(4.0, 0.0);
  CHECK(q.v == doctest::Approx(17.6));
  CHECK(q.c == 0.0);
  CHECK_THROWS_AS(envelope_to_tail(-1.0, 0.0), ArgumentError);
}

TEST_CASE("envelope fits by hand") {
  const std::map<int, double> flat{{1, 1.0}, {2, 1.0}};
  const auto s = fit_envelope(flat, EnvelopeMode::sqrt_only);
  CHECK(s.u == doctest::Approx(1.0));
  CHECK(s.w == 0.0);
  const auto l = fit_envelope(flat, EnvelopeMode::linear_only);
  CHECK(l.u == 0.0);
  CHECK(l.w == doctest::Approx(1.0));
  // objective ties at 1 between w = 0 and w = 1: the smaller w wins
  const auto j = fit_envelope(flat, EnvelopeMode::joint);
  CHECK(j.w == 0.0);
  CHECK(j.u == doctest::Approx(1.0));

  const auto steep = fit_envelope({{1, 0.1}, {4, 4.0}}, EnvelopeMode::joint);
  CHECK(steep.u == 0.0);
  CHECK(steep.w == doctest::Approx(1.0));
  CHECK(steep.grid == QGrid{1, 4});
  CHECK_FALSE(steep.caveat.empty());

  CHECK_THROWS_AS(fit_envelope({}, EnvelopeMode::joint), ArgumentError);
  CHECK_THROWS_AS(fit_envelope({{1, -1.0}}, EnvelopeMode::joint), ArgumentError);
  CHECK_THROWS_AS(fit_envelope({{1, std::nan("")}}, EnvelopeMode::joint), ArgumentError);
  CHECK(parse_envelope_mode("linear_only") == EnvelopeMode::linear_only);
  CHECK(to_string(EnvelopeMode::joint) == "joint");
  CHECK_THROWS_AS(parse_envelope_mode("both"), ArgumentError);
}

TEST_CASE("property: fitted envelopes cover the values and the joint fit is optimal") {
  Rng rng = stream(8, phase_tag("test/envelope"), 0);
  for (int t = 0; t < 300; ++t) {
    const auto values = random_values(rng);
    double best_single = std::numeric_limits<double>::infinity();
    for (auto mode : {EnvelopeMode::sqrt_only, EnvelopeMode::linear_only, EnvelopeMode::joint}) {
      const auto e = fit_envelope(values, mode);
      for (const auto& [q, value] : values) CHECK(value <= envelope_value(e.u, e.w, q));
      if (mode != EnvelopeMode::joint) best_single = std::min(best_single, e.u + e.w * e.w);
      if (mode == EnvelopeMode::joint) {
        const double objective = e.u + e.w * e.w;
        CHECK(objective <= best_single * (1.0 + 1e-12));
        CHECK(objective <= scan_objective(values) * (1.0 + 1e-9) + 1e-15);
      }
    }
  }
}

TEST_CASE("tail to moment forms") {
  // v = 1, c = 0, q = 1: sqrt(8) against sqrt(16.8)
  CHECK(tail_to_moment_bound({1.0, 0.0}, 1) == doctest::Approx(std::sqrt(8.0)));
  // v = 1, c = 1, q = 2: (2! 8^2 + 4! 4^4)^(1/4) against max(sqrt(33.6), 19.2)
  const double factorial = std::pow(2.0 * 64.0 + 24.0 * 256.0, 0.25);
  CHECK(tail_to_moment_factorial({1.0, 1.0}, 2) == doctest::Approx(factorial));
  CHECK(tail_to_moment_bound({1.0, 1.0}, 2) == doctest::Approx(factorial));
  // c only: q = 3, (6! 4^6)^(1/6) against 28.8
  CHECK(tail_to_moment_factorial({0.0, 1.0}, 3) == doctest::Approx(std::pow(720.0 * 4096.0, 1.0 / 6.0)));
  CHECK(tail_to_moment_bound({0.0, 0.0}, 5) == 0.0);
  // large orders stay finite
  CHECK(std::isfinite(tail_to_moment_factorial({2.0, 3.0}, 200)));
}

TEST_CASE("property: the moment round trip dominates the envelope") {
  Rng rng = stream(9, phase_tag("test/round-trip"), 0);
  for (int t = 0; t < 200; ++t) {
    const double u = rng.uniform() * 2.0;
    const double w = rng.uniform() * 2.0;
    const auto p = envelope_to_tail(u, w);
    for (int q : {1, 2, 3, 4, 6, 8, 16}) CHECK(envelope_value(u, w, q) <= tail_to_moment_bound(p, q));
  }
}

TEST_CASE("tail quantile and cgf bound") {
  const auto tq = tail_quantile({2.0, 0.5}, 3.0);
  CHECK(tq.threshold == doctest::Approx(std::sqrt(12.0) + 1.5));
  CHECK(tq.probability == doctest::Approx(std::exp(-3.0)));
  CHECK_THROWS_AS(tail_quantile({1.0, 1.0}, 0.0), ArgumentError);
  CHECK(cgf_bound({2.0, 0.5}, 1.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(cgf_bound({1.0, 1.0}, 1.0), ArgumentError);
  CHECK_THROWS_AS(cgf_bound({1.0, 1.0}, -0.1), ArgumentError);
}

TEST_CASE("property: Exp(1) - 1 is sub-gamma with v = c = 1") {
  const SubGammaParams p{1.0, 1.0};
  for (double lambda = 0.05; lambda < 1.0; lambda += 0.05) {
    CHECK(-lambda - std::log1p(-lambda) <= cgf_bound(p, lambda) + 1e-15);
  }
  for (double t : {0.5, 1.0, 2.0, 4.0}) {
    // P(X - 1 > s) = e^{-(1 + s)}
    const double s = tail_quantile(p, t).threshold;
    CHECK(std::exp(-(1.0 + s)) <= tail_quantile(p, t).probability);
  }
}
