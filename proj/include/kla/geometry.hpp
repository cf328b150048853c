#pragma once

// Phase-space norms used by the contraction analysis. The twisted norm's
// cross term is chosen so that the position-velocity cross terms cancel in
// the one-step contraction estimate.

#include <cmath>
#include <stdexcept>

#include "kla/target_models.hpp"

namespace kla {

// ||(x, v)||_tw^2 = alpha |x|^2 + beta <x, v> + |v|^2 with
// alpha = (beta / h) sinh(gamma h / 2) and beta = gamma / 4.
// Positive definite for all h > 0 since alpha >= gamma^2 / 8 > beta^2 / 4.
struct TwistedNorm {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double h = 0.0;

  static TwistedNorm make(double gamma, double h) {
    if (!(gamma > 0.0) || !(h > 0.0))
      throw std::invalid_argument("TwistedNorm: need gamma > 0 and h > 0");
    TwistedNorm t;
    t.gamma = gamma;
    t.h = h;
    t.beta = 0.25 * gamma;
    t.alpha = (t.beta / h) * std::sinh(0.5 * gamma * h);
    return t;
  }

  // Squared form; rooted once by the callers to avoid cancellation in the
  // cross term.
  double squared(const Vec& dx, const Vec& dv) const {
    return alpha * dx.squaredNorm() + beta * dx.dot(dv) + dv.squaredNorm();
  }

  double operator()(const PhaseState& z) const { return std::sqrt(squared(z.x, z.v)); }

  double distance(const PhaseState& a, const PhaseState& b) const {
    return std::sqrt(squared(a.x - b.x, a.v - b.v));
  }
};

// ||(x, v)||^2 = gamma^2 |x|^2 + |v|^2.
inline double untwisted_norm_squared(double gamma, const Vec& dx, const Vec& dv) {
  return gamma * gamma * dx.squaredNorm() + dv.squaredNorm();
}

inline double untwisted_norm(double gamma, const PhaseState& z) {
  if (!(gamma > 0.0)) throw std::invalid_argument("untwisted_norm: need gamma > 0");
  return std::sqrt(untwisted_norm_squared(gamma, z.x, z.v));
}

inline double untwisted_distance(double gamma, const PhaseState& a, const PhaseState& b) {
  return std::sqrt(untwisted_norm_squared(gamma, a.x - b.x, a.v - b.v));
}

}  // namespace kla
