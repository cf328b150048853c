#pragma once

// Couplings of the adjusted kernel: the synchronous contractive coupling, the
// implicit one-shot map on noise space with its Jacobian, the gamma-coupling
// regularizing step, and the epoch-structured coupled run.

#include <Eigen/LU>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "kla/geometry.hpp"
#include "kla/integrator.hpp"
#include "kla/planner.hpp"
#include "kla/rng.hpp"
#include "kla/target_models.hpp"

namespace kla {

struct CoupledPair {
  PhaseState z;        // chain started from the test distribution
  PhaseState z_tilde;  // comparison chain
  bool met = false;
  std::int64_t steps_taken = 0;
  std::array<std::int64_t, 2> rejections = {0, 0};
  bool exited_domain = false;

  static CoupledPair start(PhaseState a, PhaseState b) {
    CoupledPair p;
    p.z = std::move(a);
    p.z_tilde = std::move(b);
    return p;
  }
};

struct CoupledScratch {
  StepScratch s1, s2;
  Vec xi1, xi2;
  explicit CoupledScratch(Eigen::Index d = 0) : s1(d), s2(d), xi1(d), xi2(d) {}
};

// Both chains advance by the adjusted transition with identical Gaussian noise
// and the same Metropolis uniform (faithful synchronous coupling). Once met,
// the pair is advanced once and mirrored so it stays bitwise identical.
inline std::array<AdvanceResult, 2> synchronous_coupled_step(const TargetModel& m,
                                                             CoupledPair& pair,
                                                             const KernelParams& p, const Vec& xi1,
                                                             const Vec& xi2, double u,
                                                             CoupledScratch& ws) {
  const AdvanceResult r1 = makla_advance(m, p, pair.z.x, pair.z.v, xi1, xi2, u, ws.s1);
  AdvanceResult r2 = r1;
  if (pair.met) {
    pair.z_tilde = pair.z;
    if (!r1.accepted) {
      ++pair.rejections[0];
      ++pair.rejections[1];
    }
  } else {
    r2 = makla_advance(m, p, pair.z_tilde.x, pair.z_tilde.v, xi1, xi2, u, ws.s2);
    if (!r1.accepted) ++pair.rejections[0];
    if (!r2.accepted) ++pair.rejections[1];
  }
  ++pair.steps_taken;
  return {r1, r2};
}

struct OneShotOptions {
  double tol = 1e-12;  // max-norm tolerance of the fixed-point iteration
  int max_iter = 100;
};

struct OneShotResult {
  Vec a1_tilde, a2_tilde;  // noise pair driving the second chain onto the first
  bool converged = false;
  int iterations = 0;
  double accept_ratio = 0.0;      // phi(Phi(a)) |det M| / phi(a)
  double log_det = 0.0;           // log |det M|
  double trace_m_minus_i = 0.0;   // tr(M - I)
  double position_residual = 0.0; // max-norm mismatch of the rebuilt endpoint
  bool met = false;
};

// Solves the implicit noise-transport equation: (a1~, a2~) such that one
// unadjusted step from z_tilde with (a1~, a2~) lands exactly on the step from
// z with (a1, a2). The post-first-O velocity of the second chain solves a
// fixed-point equation with contraction factor L h^2 / 4; the second noise
// then follows explicitly from velocity matching.
inline OneShotResult one_shot_map(const TargetModel& m, const PhaseState& z,
                                  const PhaseState& z_tilde, const KernelParams& p,
                                  const Vec& a1, const Vec& a2,
                                  const OneShotOptions& opts = {}) {
  check_state(m, z);
  check_state(m, z_tilde);
  if (a1.size() != z.x.size() || a2.size() != z.x.size())
    throw std::invalid_argument("one_shot_map: noise dimension");
  const double h = p.h;
  const Eigen::Index d = z.x.size();

  // forward pass of the first chain
  Vec v_o = p.ou_decay * z.v + p.ou_noise_scale * a1;
  Vec xstar = z.x + (0.5 * h) * v_o;
  Vec g(d);
  m.gradient(xstar, g);
  Vec vp = v_o - h * g;
  Vec xpp = xstar + (0.5 * h) * vp;            // shared endpoint position
  Vec vpp = p.ou_decay * vp + p.ou_noise_scale * a2;  // shared endpoint velocity

  OneShotResult out;
  // fixed point for the post-first-O velocity of the second chain
  Vec w = v_o + (z.x - z_tilde.x) / h;
  Vec xts(d), gt(d);
  for (int it = 1; it <= opts.max_iter; ++it) {
    xts = z_tilde.x + (0.5 * h) * w;
    m.gradient(xts, gt);
    Vec w_next = (xpp - z_tilde.x + (0.5 * h * h) * gt) / h;
    const double delta = (w_next - w).lpNorm<Eigen::Infinity>();
    w.swap(w_next);
    out.iterations = it;
    if (delta < opts.tol) {
      out.converged = true;
      break;
    }
  }
  xts = z_tilde.x + (0.5 * h) * w;
  m.gradient(xts, gt);
  Vec vtp = w - h * gt;
  out.position_residual = (xts + (0.5 * h) * vtp - xpp).lpNorm<Eigen::Infinity>();
  out.a1_tilde = (w - p.ou_decay * z_tilde.v) / p.ou_noise_scale;
  out.a2_tilde = (vpp - p.ou_decay * vtp) / p.ou_noise_scale;
  // the transported noise drives the second chain onto the first chain's
  // endpoint up to the fixed-point tolerance
  out.met = out.converged && out.position_residual <= 1e-10;

  // Jacobian block M = (I - (h^2/4) hess U(x~*))^{-1} (I - (h^2/4) hess U(x*));
  // the remaining blocks of the noise-space Jacobian are I and 0.
  const double cfac = 0.25 * h * h;
  Mat hs(d, d), hts(d, d);
  m.hessian(xstar, hs);
  m.hessian(xts, hts);
  const Mat lhs = Mat::Identity(d, d) - cfac * hts;
  const Mat rhs = Mat::Identity(d, d) - cfac * hs;
  Eigen::PartialPivLU<Mat> lu(lhs);
  const Mat mblock = lu.solve(rhs);
  out.trace_m_minus_i = mblock.trace() - static_cast<double>(d);
  const double log_det_lhs = std::log(std::abs(lu.determinant()));
  const double log_det_rhs = std::log(std::abs(rhs.partialPivLu().determinant()));
  out.log_det = log_det_rhs - log_det_lhs;

  const double log_ratio = 0.5 * (a1.squaredNorm() + a2.squaredNorm() -
                                  out.a1_tilde.squaredNorm() - out.a2_tilde.squaredNorm()) +
                           out.log_det;
  out.accept_ratio = std::exp(log_ratio);
  return out;
}

// Density ratio of the transported noise against the standard normal,
// including the Jacobian correction; returns (ratio, log |det M|).
inline std::pair<double, double> one_shot_accept_ratio(const TargetModel& m, const PhaseState& z,
                                                       const PhaseState& z_tilde,
                                                       const KernelParams& p, const Vec& a1,
                                                       const Vec& a2) {
  const OneShotResult r = one_shot_map(m, z, z_tilde, p, a1, a2);
  if (!r.converged)
    throw std::runtime_error("one_shot_accept_ratio: fixed point did not converge");
  return {r.accept_ratio, r.log_det};
}

struct OneShotStepOutcome {
  bool transported = false;  // second chain used the mapped noise
  bool met_now = false;
  bool converged = true;
  int residual_draws = 0;
  double accept_ratio = 1.0;
  AdvanceResult adv1, adv2;
};

// Gamma-coupling of the two transition noises: accept the transported noise
// with probability min(1, ratio); otherwise draw the second chain's noise
// from the residual distribution by rejection sampling. Either way the
// marginal law of the second chain's noise is exactly standard normal. The
// chains meet when the transported noise is used and the shared uniform
// accepts both Metropolis tests.
inline OneShotStepOutcome one_shot_coupled_step(const TargetModel& m, CoupledPair& pair,
                                                const KernelParams& p, RngStream& rng,
                                                CoupledScratch& ws,
                                                const OneShotOptions& opts = {},
                                                int residual_cap = 50000) {
  OneShotStepOutcome out;
  rng.fill_normal(ws.xi1);
  rng.fill_normal(ws.xi2);
  const double u = rng.uniform();
  if (pair.met) {
    const auto adv = synchronous_coupled_step(m, pair, p, ws.xi1, ws.xi2, u, ws);
    out.adv1 = adv[0];
    out.adv2 = adv[1];
    out.met_now = false;
    return out;
  }

  const OneShotResult os = one_shot_map(m, pair.z, pair.z_tilde, p, ws.xi1, ws.xi2, opts);
  out.converged = os.converged;
  out.accept_ratio = os.accept_ratio;

  Vec b1, b2;
  if (os.converged && rng.uniform() <= std::min(1.0, os.accept_ratio)) {
    out.transported = true;
    b1 = os.a1_tilde;
    b2 = os.a2_tilde;
  } else if (!os.converged) {
    // No valid transport map: fall back to independent noise, which keeps the
    // marginal law intact but cannot induce meeting.
    b1 = rng.normal_vec(ws.xi1.size());
    b2 = rng.normal_vec(ws.xi2.size());
  } else {
    // Residual distribution: propose standard normal y, accept with
    // probability max(0, 1 - q(y)/phi(y)) where q is the density of the
    // transported noise. q/phi at y is the accept ratio of the role-swapped
    // map evaluated at y.
    bool accepted = false;
    for (int it = 0; it < residual_cap; ++it) {
      Vec y1 = rng.normal_vec(ws.xi1.size());
      Vec y2 = rng.normal_vec(ws.xi2.size());
      const OneShotResult sw = one_shot_map(m, pair.z_tilde, pair.z, p, y1, y2, opts);
      ++out.residual_draws;
      const double coin = rng.uniform();
      if (!sw.converged || coin >= std::min(1.0, sw.accept_ratio)) {
        b1 = std::move(y1);
        b2 = std::move(y2);
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw std::runtime_error(
          "one_shot_coupled_step: residual sampler exceeded its iteration cap; the transported "
          "noise density is indistinguishable from the standard normal (the chains should have "
          "met)");
  }

  const AdvanceResult r1 = makla_advance(m, p, pair.z.x, pair.z.v, ws.xi1, ws.xi2, u, ws.s1);
  const AdvanceResult r2 = makla_advance(m, p, pair.z_tilde.x, pair.z_tilde.v, b1, b2, u, ws.s2);
  out.adv1 = r1;
  out.adv2 = r2;
  if (!r1.accepted) ++pair.rejections[0];
  if (!r2.accepted) ++pair.rejections[1];
  ++pair.steps_taken;

  if (out.transported && r1.accepted && r2.accepted) {
    // The transported proposal coincides with the first chain's proposal up to
    // the fixed-point tolerance; the meeting is made exact.
    pair.z_tilde = pair.z;
    pair.met = true;
    out.met_now = true;
  }
  return out;
}

// Monte Carlo estimate of the Gaussian-overlap bound
//   (1/2) sqrt(E[ |Phi(xi)-xi|^2 + 2 tr(DPhi(xi)-I) - 2 log|det DPhi(xi)| ])
// over standard normal xi (identity covariance), with standard error.
struct TvOverlapEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::int64_t samples = 0;
};

inline TvOverlapEstimate tv_overlap_estimate(const TargetModel& m, const PhaseState& z,
                                             const PhaseState& z_tilde, const KernelParams& p,
                                             std::int64_t n_samples, RngStream& rng) {
  if (n_samples < 1) throw std::invalid_argument("tv_overlap_estimate: need n_samples >= 1");
  const Eigen::Index d = z.x.size();
  double sum = 0.0, sum_sq = 0.0;
  Vec a1(d), a2(d);
  for (std::int64_t i = 0; i < n_samples; ++i) {
    rng.fill_normal(a1);
    rng.fill_normal(a2);
    const OneShotResult os = one_shot_map(m, z, z_tilde, p, a1, a2);
    if (!os.converged)
      throw std::runtime_error("tv_overlap_estimate: one-shot map did not converge");
    const double term = (os.a1_tilde - a1).squaredNorm() + (os.a2_tilde - a2).squaredNorm() +
                        2.0 * os.trace_m_minus_i - 2.0 * os.log_det;
    sum += term;
    sum_sq += term * term;
  }
  const double n = static_cast<double>(n_samples);
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean) / std::max(1.0, n - 1.0);
  TvOverlapEstimate out;
  out.samples = n_samples;
  out.estimate = 0.5 * std::sqrt(std::max(0.0, mean));
  // delta method: d/dmean of sqrt(mean)/2 = 1/(4 sqrt(mean))
  out.stderr_ = mean > 0.0 ? 0.25 / std::sqrt(mean) * std::sqrt(var) : 0.0;
  return out;
}

struct EpochOutcome {
  bool met = false;          // pair met at this epoch's regularizing step
  bool exited = false;       // either chain left the domain during the epoch
  std::int64_t rejections = 0;
};

// Per-step view of a coupled run, consumed by the optional trace observer.
struct StepTraceInfo {
  std::int64_t step = 0;
  bool met = false;
  bool in_domain = true;
  bool rejected = false;
  double delta_H = 0.0;  // energy error of the first chain's proposal
  double twisted_distance = 0.0;
};

using StepObserver = std::function<void(const StepTraceInfo&)>;

struct EpochReport {
  std::vector<EpochOutcome> epochs;
  bool met = false;
  int met_epoch = -1;            // 1-based epoch of the meeting
  std::int64_t met_step = -1;    // global step index of the meeting
  bool exited = false;
  std::int64_t first_exit_step = -1;
  std::int64_t total_steps = 0;
};

// One epoch is epoch-1 synchronous contractive steps followed by one
// regularizing one-shot step; runs k epochs or until the pair meets. The
// adjusted chains are advanced throughout, so rejections can occur; domain
// exits are recorded, not fatal.
inline EpochReport epoch_coupled_run(const TargetModel& m, CoupledPair& pair,
                                     const EpochPlan& plan, const KernelParams& p,
                                     RngStream& rng, bool stop_on_met = true,
                                     const StepObserver& observer = {}) {
  EpochReport report;
  if (pair.met) {
    report.met = true;
    report.met_epoch = 0;
    return report;
  }
  CoupledScratch ws(pair.z.x.size());
  Vec grad(pair.z.x.size());
  const TwistedNorm tw = TwistedNorm::make(p.gamma, p.h);
  const auto in_domain = [&](const PhaseState& s) {
    return energy_like_fast(m, s.x, s.v, grad) <= plan.r_u;
  };
  bool step_in_domain = true;
  const auto record_exit = [&](EpochOutcome& e) {
    step_in_domain = in_domain(pair.z) && in_domain(pair.z_tilde);
    if (!step_in_domain) {
      e.exited = true;
      if (!pair.exited_domain) {
        pair.exited_domain = true;
        report.exited = true;
        report.first_exit_step = pair.steps_taken;
      }
    }
  };
  const auto observe = [&](const AdvanceResult& r1, const AdvanceResult& r2) {
    if (!observer) return;
    StepTraceInfo info;
    info.step = pair.steps_taken;
    info.met = pair.met;
    info.in_domain = step_in_domain;
    info.rejected = !r1.accepted || !r2.accepted;
    info.delta_H = r1.delta_H;
    info.twisted_distance = tw.distance(pair.z, pair.z_tilde);
    observer(info);
  };

  for (int ep = 1; ep <= plan.k; ++ep) {
    EpochOutcome outcome;
    if (pair.exited_domain) outcome.exited = true;
    const std::array<std::int64_t, 2> rej_before = pair.rejections;
    for (std::int64_t s = 0; s + 1 < plan.epoch; ++s) {
      rng.fill_normal(ws.xi1);
      rng.fill_normal(ws.xi2);
      const double u = rng.uniform();
      const auto adv = synchronous_coupled_step(m, pair, p, ws.xi1, ws.xi2, u, ws);
      record_exit(outcome);
      observe(adv[0], adv[1]);
    }
    const bool was_met = pair.met;
    const OneShotStepOutcome osc = one_shot_coupled_step(m, pair, p, rng, ws);
    record_exit(outcome);
    observe(osc.adv1, osc.adv2);
    outcome.met = pair.met;
    outcome.rejections =
        (pair.rejections[0] - rej_before[0]) + (pair.rejections[1] - rej_before[1]);
    report.epochs.push_back(outcome);
    report.total_steps = pair.steps_taken;
    if (!was_met && osc.met_now) {
      report.met = true;
      report.met_epoch = ep;
      report.met_step = pair.steps_taken;
      if (stop_on_met) break;
    }
  }
  report.total_steps = pair.steps_taken;
  return report;
}

}  // namespace kla
