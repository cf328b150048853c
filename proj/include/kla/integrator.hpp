#pragma once

// OABAO splitting of the kinetic Langevin diffusion: Ornstein-Uhlenbeck
// half-steps around the deterministic leapfrog core theta_h, the unadjusted
// transition (UKLA) and its Metropolis adjustment with velocity flip (MAKLA).
//
// All transitions are pure functions of (state, noise, uniform); randomness is
// injected by the caller so couplings can share it.

#include <cmath>
#include <stdexcept>

#include "kla/target_models.hpp"

namespace kla {

struct KernelParams {
  double h = 0.0;               // step size
  double gamma = 0.0;           // friction
  double ou_decay = 1.0;        // e^{-gamma h / 2}
  double ou_noise_scale = 0.0;  // sqrt(1 - e^{-gamma h})
  bool assumption_checked = false;
  bool assumption_ok = false;

  static KernelParams make(double h, double gamma) {
    if (!(h > 0.0) || !(gamma > 0.0))
      throw std::invalid_argument("KernelParams: need h > 0 and gamma > 0");
    KernelParams p;
    p.h = h;
    p.gamma = gamma;
    p.ou_decay = std::exp(-0.5 * gamma * h);
    p.ou_noise_scale = std::sqrt(1.0 - std::exp(-gamma * h));
    return p;
  }

  // Records the hyperparameter conditions sqrt(L)/gamma <= 1/10, gamma h <= 1.
  static KernelParams make(double h, double gamma, const ModelConstants& c) {
    KernelParams p = make(h, gamma);
    p.assumption_checked = true;
    p.assumption_ok = std::sqrt(c.L) / gamma <= 0.1 && gamma * h <= 1.0;
    return p;
  }
};

// v' = e^{-gamma h/2} v + (1 - e^{-gamma h})^{1/2} b; the position is fixed.
inline PhaseState ou_half_step(const PhaseState& z, const KernelParams& p, const Vec& noise) {
  if (noise.size() != z.v.size()) throw std::invalid_argument("ou_half_step: noise dimension");
  return {z.x, p.ou_decay * z.v + p.ou_noise_scale * noise};
}

// Deterministic leapfrog core: drift half-step, potential kick, drift
// half-step. Volume-preserving and reversible.
inline PhaseState theta_h(const TargetModel& m, const PhaseState& z, double h) {
  check_state(m, z);
  Vec xstar = z.x + (0.5 * h) * z.v;
  Vec g(xstar.size());
  m.gradient(xstar, g);
  Vec vp = z.v - h * g;
  xstar += (0.5 * h) * vp;
  return {std::move(xstar), std::move(vp)};
}

// Energy error of the leapfrog core, H(theta_h(z)) - H(z).
inline double energy_error(const TargetModel& m, const PhaseState& z, double h) {
  const PhaseState after = theta_h(m, z, h);
  return 0.5 * (after.v.squaredNorm() - z.v.squaredNorm()) + m.value(after.x) - m.value(z.x);
}

struct StepOutcome {
  PhaseState next;
  PhaseState proposal;  // post-theta_h state, before the second O half-step
  double delta_H = 0.0;
  bool accepted = false;
};

// Accept probability exp(-max(delta_H, 0)).
inline bool mh_accept(double delta_H, double u) {
  return delta_H <= 0.0 || u <= std::exp(-delta_H);
}

// Unadjusted transition O_{h/2}(xi2) . theta_h . O_{h/2}(xi1).
inline PhaseState ukla_step(const TargetModel& m, const PhaseState& z, const KernelParams& p,
                            const Vec& xi1, const Vec& xi2) {
  PhaseState cur = ou_half_step(z, p, xi1);
  cur = theta_h(m, cur, p.h);
  cur.v = p.ou_decay * cur.v + p.ou_noise_scale * xi2;
  return cur;
}

// Metropolis-adjusted transition: the theta_h proposal from the post-first-O
// state is accepted with probability exp(-max(delta_H, 0)); on rejection the
// velocity of that state is flipped. A non-finite energy error indicates a
// diverged trajectory and is a hard error.
inline StepOutcome makla_step(const TargetModel& m, const PhaseState& z, const KernelParams& p,
                              const Vec& xi1, const Vec& xi2, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("makla_step: u outside [0, 1]");
  const PhaseState z1 = ou_half_step(z, p, xi1);
  StepOutcome out;
  out.proposal = theta_h(m, z1, p.h);
  out.delta_H = 0.5 * (out.proposal.v.squaredNorm() - z1.v.squaredNorm()) +
                m.value(out.proposal.x) - m.value(z1.x);
  if (!std::isfinite(out.delta_H))
    throw std::runtime_error("makla_step: non-finite energy error (diverged trajectory)");
  out.accepted = mh_accept(out.delta_H, u);
  const PhaseState& z2 = out.accepted ? out.proposal : z1;
  out.next.x = z2.x;
  out.next.v = p.ou_decay * (out.accepted ? z2.v : -z2.v) + p.ou_noise_scale * xi2;
  return out;
}

// Allocation-free cores for hot loops. Semantics match the pure functions
// above; the unit tests pin the two paths against each other.

struct StepScratch {
  Vec grad, xpp, vp;
  explicit StepScratch(Eigen::Index d = 0) : grad(d), xpp(d), vp(d) {}
  void resize(Eigen::Index d) {
    grad.resize(d);
    xpp.resize(d);
    vp.resize(d);
  }
};

struct AdvanceResult {
  double delta_H = 0.0;
  bool accepted = false;
};

inline AdvanceResult makla_advance(const TargetModel& m, const KernelParams& p, Vec& x, Vec& v,
                                   const Vec& xi1, const Vec& xi2, double u, StepScratch& s) {
  v = p.ou_decay * v + p.ou_noise_scale * xi1;  // v is now the post-first-O velocity
  const double u0 = m.value(x);
  s.xpp = x + (0.5 * p.h) * v;
  m.gradient(s.xpp, s.grad);
  s.vp = v - p.h * s.grad;
  s.xpp += (0.5 * p.h) * s.vp;
  AdvanceResult r;
  r.delta_H = 0.5 * (s.vp.squaredNorm() - v.squaredNorm()) + m.value(s.xpp) - u0;
  if (!std::isfinite(r.delta_H))
    throw std::runtime_error("makla_advance: non-finite energy error (diverged trajectory)");
  r.accepted = mh_accept(r.delta_H, u);
  if (r.accepted) {
    x.swap(s.xpp);
    v.swap(s.vp);
  } else {
    v = -v;
  }
  v = p.ou_decay * v + p.ou_noise_scale * xi2;
  return r;
}

inline void ukla_advance(const TargetModel& m, const KernelParams& p, Vec& x, Vec& v,
                         const Vec& xi1, const Vec& xi2, Vec& grad) {
  v = p.ou_decay * v + p.ou_noise_scale * xi1;
  x += (0.5 * p.h) * v;
  m.gradient(x, grad);
  v -= p.h * grad;
  x += (0.5 * p.h) * v;
  v = p.ou_decay * v + p.ou_noise_scale * xi2;
}

}  // namespace kla
