#include "cvcon/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "cvcon/errors.hpp"

namespace cvcon {

namespace {

void check_a_delta(double a, double delta) {
  require(std::isfinite(a) && a > 0.0, "free parameter a must be positive");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
}

double lemma_form(double r, double u, double w, double a, double delta) {
  check_a_delta(a, delta);
  require(r >= 0.0 && u >= 0.0 && w >= 0.0, "stability coefficients must be >= 0");
  const double l = std::log(2.0 / delta);
  const double aw = a * w;
  return (4.0 / 3.0) * (1.46 * aw + 1.0 / a) * l + 2.0 * std::sqrt((r + 2.2 * a * a * u + 1.07 * aw * aw) * l);
}

double pi_coefficient(double r, double u, double w, double a) {
  return 2.0 * std::sqrt(r + 2.2 * a * a * u + 1.07 * a * a * w * w);
}

}  // namespace

double lemma1_bound(double ev_del, double v, double c, double a, double delta) {
  check_a_delta(a, delta);
  require(ev_del >= 0.0 && v >= 0.0 && c >= 0.0, "lemma inputs must be >= 0");
  const double l = std::log(2.0 / delta);
  return (4.0 / 3.0) * (a * c + 1.0 / a) * l + 2.0 * std::sqrt((ev_del + a * a * v / 2.0) * l);
}

double term1_bound(double r1, double u1, double w1, double a, double delta) {
  return lemma_form(r1, u1, w1, a, delta);
}

double term2_bound(double r2, double u2, double w2, double a, double delta) {
  return lemma_form(r2, u2, w2, a, delta);
}

double term3_bound(double beta2_nm) {
  require(beta2_nm >= 0.0, "beta_2(n, m) must be >= 0");
  return beta2_nm;
}

void validate(const BoundInputs& inp) {
  require(inp.k >= 1 && inp.m >= 1 && inp.n == inp.k * inp.m, "bound inputs need n = k m with k, m >= 1");
  require(inp.delta > 0.0 && inp.delta < 1.0, "delta must lie in (0, 1)");
  for (double x : {inp.beta2_nm, inp.r1, inp.r2, inp.env1.u, inp.env1.w, inp.env2.u, inp.env2.w}) {
    require(std::isfinite(x) && x >= 0.0, "stability coefficients must be finite and >= 0");
  }
  require(inp.a_min > 0.0 && inp.a_min < inp.a_max, "a search interval needs 0 < a_min < a_max");
  if (inp.a) require(*inp.a > 0.0, "free parameter a must be positive");
}

double theorem4_total(const BoundInputs& inp, double a) {
  check_a_delta(a, inp.delta);
  const double l = std::log(4.0 / inp.delta);
  const double pi1 = pi_coefficient(inp.r1, inp.env1.u, inp.env1.w, a);
  const double pi2 = pi_coefficient(inp.r2, inp.env2.u, inp.env2.w, a);
  return 2.0 * (a * inp.env1.w + a * inp.env2.w + 2.0 / a) * l + inp.beta2_nm + (pi1 + pi2) * std::sqrt(l);
}

double heuristic_a(double w1, double w2, double a_min, double a_max) {
  constexpr double kEps = 1e-12;
  const double a = 1.0 / std::sqrt(std::max(w1 + w2, kEps));
  return std::clamp(a, a_min, a_max);
}

OptimizeResult optimize_a(const std::function<double(double)>& bound_fn, double a_min, double a_max) {
  require(std::isfinite(a_min) && std::isfinite(a_max) && a_min > 0.0 && a_min < a_max,
          "a search interval needs 0 < a_min < a_max");
  constexpr int kIterations = 80;
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  auto f = [&](double x) { return bound_fn(std::exp(x)); };

  double lo = std::log(a_min);
  double hi = std::log(a_max);
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < kIterations; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = f(x2);
    }
  }
  OptimizeResult best{std::exp(x1), f1};
  if (f2 < best.value) best = {std::exp(x2), f2};
  for (double a : {a_min, a_max}) {
    const double value = bound_fn(a);
    if (value < best.value) best = {a, value};
  }
  return best;
}

BoundResult theorem4_bound(const BoundInputs& inp) {
  validate(inp);
  BoundResult out;
  out.inputs = inp;
  out.a_heur = heuristic_a(inp.env1.w, inp.env2.w, inp.a_min, inp.a_max);
  if (inp.a) {
    out.a_used = *inp.a;
  } else {
    const auto opt = optimize_a([&](double a) { return theorem4_total(inp, a); }, inp.a_min, inp.a_max);
    out.a_used = opt.a;
    const double span = std::log(inp.a_max) - std::log(inp.a_min);
    if (std::log(inp.a_max) - std::log(opt.a) < 1e-6 * span) {
      out.caveats.emplace_back("degenerate: unbounded a (optimum clamped at a_max)");
    } else if (std::log(opt.a) - std::log(inp.a_min) < 1e-6 * span) {
      out.caveats.emplace_back("optimum clamped at a_min");
    }
  }

  const double a = out.a_used;
  const double l = std::log(4.0 / inp.delta);
  out.pi1 = pi_coefficient(inp.r1, inp.env1.u, inp.env1.w, a);
  out.pi2 = pi_coefficient(inp.r2, inp.env2.u, inp.env2.w, a);
  out.term1 = 2.0 * (a * inp.env1.w + 1.0 / a) * l + out.pi1 * std::sqrt(l);
  out.term2 = 2.0 * (a * inp.env2.w + 1.0 / a) * l + out.pi2 * std::sqrt(l);
  out.term3 = term3_bound(inp.beta2_nm);
  out.total = theorem4_total(inp, a);
  if (std::abs(out.total - (out.term1 + out.term2 + out.term3)) > 1e-12 * std::max(1.0, out.total)) {
    throw InternalError("bound terms do not add up to the total");
  }

  const auto p1 = envelope_to_tail(inp.env1);
  const auto p2 = envelope_to_tail(inp.env2);
  out.v1 = p1.v;
  out.c1 = p1.c;
  out.v2 = p2.v;
  out.c2 = p2.c;

  out.composition_total = term1_bound(inp.r1, inp.env1.u, inp.env1.w, a, inp.delta / 2.0) +
                          term2_bound(inp.r2, inp.env2.u, inp.env2.w, a, inp.delta / 2.0) + out.term3;
  out.composition_gap = (out.total - out.composition_total) / out.total;
  if (std::abs(out.composition_gap) > 0.005) {
    out.caveats.push_back(fmt::format("per-lemma composition is {:.4g} ({:.2f}% below the consolidated total)",
                                      out.composition_total, 100.0 * out.composition_gap));
  }
  if (!inp.env1.caveat.empty()) out.caveats.push_back("env1: " + inp.env1.caveat);
  if (!inp.env2.caveat.empty()) out.caveats.push_back("env2: " + inp.env2.caveat);
  return out;
}

namespace {

std::set<int> fit_orders(const StabilityProfile& p) {
  std::set<int> out;
  for (const auto& [order, value] : p.beta) {
    if (order % 4 == 0) out.insert(order / 4);
  }
  return out;
}

}  // namespace

BoundInputs inputs_from_profiles(const StabilityProfile& prof_nm, const StabilityProfile& prof_n1, std::size_t k,
                                 double delta, EnvelopeMode mode, const std::optional<StabilityProfile>& prof_n_m,
                                 std::vector<std::string>* caveats) {
  require(k >= 2, "k must be at least 2");
  const std::size_t n = prof_n1.n;
  require(prof_n1.m == 1, "the second profile must be beta(n, 1)");
  require(n % k == 0, fmt::format("n = {} is not divisible by k = {}", n, k));
  const std::size_t m = n / k;
  require(prof_nm.n == n - m && prof_nm.m == m,
          fmt::format("the first profile must be beta({}, {}), got beta({}, {})", n - m, m, prof_nm.n, prof_nm.m));

  const auto orders_nm = fit_orders(prof_nm);
  const auto orders_n1 = fit_orders(prof_n1);
  require(!orders_nm.empty(), "profiles carry no order 4q");
  require(orders_nm == orders_n1, "the two profiles cover different 4q orders");
  require(prof_nm.beta.count(2) && prof_n1.beta.count(2), "profiles need order 2");

  const auto kd = static_cast<double>(k);
  const auto nd = static_cast<double>(n);
  std::map<int, double> values1;
  std::map<int, double> values2;
  for (int q : orders_nm) {
    const double b1 = prof_nm.at(4 * q);
    const double b2 = prof_n1.at(4 * q);
    values1[q] = kd * b1 * b1;
    values2[q] = nd * b2 * b2;
  }

  BoundInputs inp;
  inp.n = n;
  inp.m = m;
  inp.k = k;
  inp.delta = delta;
  inp.env1 = fit_envelope(values1, mode);
  inp.env2 = fit_envelope(values2, mode);
  inp.r1 = kd * prof_nm.at(2) * prof_nm.at(2);
  inp.r2 = nd * prof_n1.at(2) * prof_n1.at(2);
  if (prof_n_m) {
    require(prof_n_m->n == n && prof_n_m->m == m, fmt::format("the third profile must be beta({}, {})", n, m));
    inp.beta2_nm = prof_n_m->at(2);
  } else {
    inp.beta2_nm = prof_nm.at(2);
    if (caveats) caveats->emplace_back("beta_2(n, m) not supplied; beta_2(n - m, m) used for term 3");
  }
  return inp;
}

BoundResult assemble_from_profiles(const StabilityProfile& prof_nm, const StabilityProfile& prof_n1, std::size_t k,
                                   double delta, EnvelopeMode mode, const std::optional<StabilityProfile>& prof_n_m,
                                   double a_min, double a_max) {
  std::vector<std::string> caveats;
  BoundInputs inp = inputs_from_profiles(prof_nm, prof_n1, k, delta, mode, prof_n_m, &caveats);
  inp.a_min = a_min;
  inp.a_max = a_max;
  BoundResult out = theorem4_bound(inp);
  out.caveats.insert(out.caveats.end(), caveats.begin(), caveats.end());
  return out;
}

}  // namespace cvcon
