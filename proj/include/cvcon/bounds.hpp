#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cvcon/stability.hpp"
#include "cvcon/subgamma.hpp"

namespace cvcon {

inline constexpr double kDefaultAMin = 1e-3;
inline constexpr double kDefaultAMax = 1e6;

/// (4/3)(a c + 1/a) log(2/delta) + 2 sqrt((E V_DEL + a^2 v / 2) log(2/delta)).
double lemma1_bound(double ev_del, double v, double c, double a, double delta);

/// (4/3)(1.46 a w1 + 1/a) log(2/delta)
///   + 2 sqrt((r1 + 2.2 a^2 u1 + 1.07 (a w1)^2) log(2/delta)).
double term1_bound(double r1, double u1, double w1, double a, double delta);

/// Same form as term1_bound with (r2, u2, w2).
double term2_bound(double r2, double u2, double w2, double a, double delta);

/// Identity on beta_2(n, m) >= 0.
double term3_bound(double beta2_nm);

struct BoundInputs {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t k = 0;
  double delta = 0.05;
  double beta2_nm = 0.0;  ///< beta_2(n, m)
  double r1 = 0.0;        ///< k beta_2^2(n - m, m)
  double r2 = 0.0;        ///< n beta_2^2(n, 1)
  MomentEnvelope env1;    ///< for k beta_{4q}^2(n - m, m)
  MomentEnvelope env2;    ///< for n beta_{4q}^2(n, 1)
  std::optional<double> a;  ///< optimised over [a_min, a_max] when absent
  double a_min = kDefaultAMin;
  double a_max = kDefaultAMax;
};

void validate(const BoundInputs& inp);

struct BoundResult {
  double total = 0.0;
  double term1 = 0.0;  ///< 2(a w1 + 1/a) L + pi1 sqrt(L), L = log(4/delta)
  double term2 = 0.0;  ///< 2(a w2 + 1/a) L + pi2 sqrt(L)
  double term3 = 0.0;  ///< beta_2(n, m)
  double pi1 = 0.0;
  double pi2 = 0.0;
  double a_used = 0.0;
  double a_heur = 0.0;
  double v1 = 0.0;
  double c1 = 0.0;
  double v2 = 0.0;
  double c2 = 0.0;
  /// term1_bound(delta/2) + term2_bound(delta/2) + term3_bound at a_used.
  double composition_total = 0.0;
  /// (total - composition_total) / total.
  double composition_gap = 0.0;
  std::vector<std::string> caveats;
  BoundInputs inputs;
};

/// 2(a w1 + a w2 + 2/a) log(4/delta) + beta_2(n, m) + (pi1 + pi2) sqrt(log(4/delta)),
/// pi_i = 2 sqrt(r_i + 2.2 a^2 u_i + 1.07 a^2 w_i^2), at a fixed a.
double theorem4_total(const BoundInputs& inp, double a);

/// Evaluates the bound at inp.a, or at the optimised a when inp.a is empty.
BoundResult theorem4_bound(const BoundInputs& inp);

struct OptimizeResult {
  double a = 0.0;
  double value = 0.0;
};

/// Golden-section search over log a on [a_min, a_max] (80 iterations); the
/// end points are compared too. Assumes bound_fn is unimodal.
OptimizeResult optimize_a(const std::function<double(double)>& bound_fn, double a_min, double a_max);

/// 1 / sqrt(max(w1 + w2, eps)) clamped into [a_min, a_max].
double heuristic_a(double w1, double w2, double a_min = kDefaultAMin, double a_max = kDefaultAMax);

/// Builds bound inputs from stability profiles:
///   env1 from q -> k beta_{4q}^2(n - m, m), r1 = k beta_2^2(n - m, m)
///   env2 from q -> n beta_{4q}^2(n, 1),     r2 = n beta_2^2(n, 1)
/// The fitted q grid is {q : 4q in both profile grids}. beta_2(n, m) comes
/// from prof_n_m when given, else beta_2(n - m, m) is used with a caveat.
BoundResult assemble_from_profiles(const StabilityProfile& prof_nm, const StabilityProfile& prof_n1, std::size_t k,
                                   double delta, EnvelopeMode mode,
                                   const std::optional<StabilityProfile>& prof_n_m = std::nullopt,
                                   double a_min = kDefaultAMin, double a_max = kDefaultAMax);

/// The inputs assemble_from_profiles would hand to theorem4_bound.
BoundInputs inputs_from_profiles(const StabilityProfile& prof_nm, const StabilityProfile& prof_n1, std::size_t k,
                                 double delta, EnvelopeMode mode,
                                 const std::optional<StabilityProfile>& prof_n_m = std::nullopt,
                                 std::vector<std::string>* caveats = nullptr);

}  // namespace cvcon
