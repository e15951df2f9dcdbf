#pragma once

#include <map>
#include <string>

#include "cvcon/stability.hpp"

namespace cvcon {

enum class EnvelopeMode { sqrt_only, linear_only, joint };

std::string to_string(EnvelopeMode mode);
EnvelopeMode parse_envelope_mode(const std::string& text);

/// Constants (u, w) with values[q] <= sqrt(q u) v q w on every grid q.
struct MomentEnvelope {
  double u = 0.0;
  double w = 0.0;
  QGrid grid;
  EnvelopeMode mode = EnvelopeMode::joint;
  /// Set whenever the envelope is used beyond the grid it was checked on.
  std::string caveat;
};

/// Variance factor v and scale c of a right-tail sub-gamma variable.
struct SubGammaParams {
  double v = 0.0;
  double c = 0.0;
};

/// sqrt(q u) v q w.
double envelope_value(double u, double w, int q);

/// Fits an envelope to values indexed by q.
///   sqrt_only:   u = max values[q]^2 / q, w = 0
///   linear_only: u = 0, w = max values[q] / q
///   joint:       minimises u + w^2 over all envelopes on the grid, ties
///                going to the smaller w
/// The envelope constraint is re-checked on every grid point.
MomentEnvelope fit_envelope(const std::map<int, double>& values, EnvelopeMode mode);

/// v = 4 (1.1 u + 0.73^2 w^2), c = 1.46 w.
SubGammaParams envelope_to_tail(const MomentEnvelope& e);
SubGammaParams envelope_to_tail(double u, double w);

/// min( (q! A^q + (2q)! B^(2q))^(1/(2q)) with A = 8 v, B = 4 c,
///      sqrt(16.8 q v) v 9.6 q c ).
double tail_to_moment_bound(const SubGammaParams& p, int q);

/// The factorial form (q! A^q + (2q)! B^(2q))^(1/(2q)), in log space.
double tail_to_moment_factorial(const SubGammaParams& p, int q);

struct TailQuantile {
  double threshold = 0.0;  ///< sqrt(2 v t) + c t
  double probability = 0.0;  ///< e^-t
};

TailQuantile tail_quantile(const SubGammaParams& p, double t);

/// lambda^2 v / (2 (1 - c lambda)) for 0 < lambda < 1/c.
double cgf_bound(const SubGammaParams& p, double lambda);

}  // namespace cvcon
