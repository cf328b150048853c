#pragma once

// Derived constants of the mixing guarantee for one experiment: contraction
// rate, regularization constant, localization radius, epoch length, horizon,
// Lyapunov rate, plus the numeric certificates (exit bound, rejection budget,
// admissible step size by bisection).

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "kla/integrator.hpp"
#include "kla/target_models.hpp"

namespace kla {

inline constexpr double kOneOverThreeE = 1.0 / (3.0 * M_E);

struct AssumptionReport {
  // sqrt(L) / gamma <= 1/10
  double friction_ratio = 0.0;
  bool friction_ok = false;
  // gamma h <= 1
  double gamma_h = 0.0;
  bool step_ok = false;
  // (1 + 25 C h^2)^2 max(gamma h, 1) <= 4 with C = 4L
  double exit_step_value = 0.0;
  bool exit_step_ok = false;
  // L h^2 <= 1
  double stability_value = 0.0;
  bool stability_ok = false;
  // 400 L horizon h^2 <= 1, evaluated only when a horizon is supplied
  bool has_horizon = false;
  double horizon_value = 0.0;
  bool horizon_ok = true;

  bool core_ok() const { return friction_ok && step_ok && exit_step_ok && stability_ok; }
  bool all_ok() const { return core_ok() && horizon_ok; }
};

inline AssumptionReport check_assumptions(const ModelConstants& c, const KernelParams& p,
                                          std::optional<double> horizon = std::nullopt) {
  AssumptionReport r;
  r.friction_ratio = std::sqrt(c.L) / p.gamma;
  r.friction_ok = r.friction_ratio <= 0.1;
  r.gamma_h = p.gamma * p.h;
  r.step_ok = r.gamma_h <= 1.0;
  const double c_dh = 4.0 * c.L;
  const double one_plus = 1.0 + 25.0 * c_dh * p.h * p.h;
  r.exit_step_value = one_plus * one_plus * std::max(r.gamma_h, 1.0);
  r.exit_step_ok = r.exit_step_value <= 4.0;
  r.stability_value = c.L * p.h * p.h;
  r.stability_ok = r.stability_value <= 1.0;
  if (horizon) {
    r.has_horizon = true;
    r.horizon_value = 400.0 * c.L * (*horizon) * p.h * p.h;
    r.horizon_ok = r.horizon_value <= 1.0;
  }
  return r;
}

// Log of the Lyapunov integral of e^{H/8} under the start distribution.
// Product Gaussian N(0, A^{-1}) x N(0, I_d): each of the 2d standardized
// coordinates contributes -log(7/8)/2.
inline double log_nu_product_gaussian(int d) { return d * std::log(8.0 / 7.0); }

inline double log_nu_dirac(const TargetModel& m, const PhaseState& z) {
  return hamiltonian(m, z) / 8.0;
}

// Contraction rate per step of the synchronously coupled unadjusted kernel.
inline double contraction_rate_c(const ModelConstants& c, double gamma) {
  return std::min(c.K / gamma, gamma) / (34.0 * std::sqrt(M_E));
}

inline double contraction_rate(const ModelConstants& c, const KernelParams& p) {
  return contraction_rate_c(c, p.gamma) * p.h;
}

// Regularization constant of the one-shot coupling in the twisted metric.
inline double regularization_constant(const ModelConstants& c, const KernelParams& p) {
  const double gh = p.gamma * p.h;
  return 14.0 * (std::pow(gh, -1.5) + c.L_H * std::sqrt(static_cast<double>(c.d)) * p.h * p.h / p.gamma);
}

// Twisted-diameter bound of the localization domain {E <= r_u}.
inline double domain_diameter(const ModelConstants& c, double gamma, double r_u) {
  return 3.0 * std::sqrt(c.L) * gamma / c.K * std::sqrt(r_u);
}

inline std::int64_t epoch_length(double rho, double c_reg, double r) {
  const double raw = std::log(3.0 * M_E * c_reg * r) / rho;
  if (!(raw >= 0.0) || raw > 9.0e18) throw std::runtime_error("epoch_length: out of range");
  return static_cast<std::int64_t>(std::ceil(raw)) + 1;
}

inline int num_epochs(double eps) { return static_cast<int>(std::ceil(std::log(2.0 / eps))); }

// Drift rate of the Lyapunov function e^{H/8} over one adjusted step inside
// the domain; C_dh = 4L and the energy-error order is h^2.
inline double lyapunov_rate(const ModelConstants& c, const KernelParams& p, int d, double r_u) {
  const double c_dh25 = 25.0 * 4.0 * c.L * p.h * p.h;
  return 0.125 * (2.0 * (1.0 + c_dh25) * p.gamma * p.h * d + c_dh25 * r_u);
}

struct EpochPlan {
  double h = 0.0;
  double gamma = 0.0;
  double eps = 0.0;
  double log_nu_lyap = 0.0;  // log nu(e^{H/8}) of the start distribution
  double rho = 0.0;          // per-step contraction rate
  double c_reg = 0.0;        // one-shot regularization constant
  double r_u = 0.0;          // energy-level radius of the localization domain
  double r = 0.0;            // twisted diameter bound of the domain
  std::int64_t epoch = 0;    // steps per epoch (contractive steps + one regularizing step)
  int k = 0;                 // number of epochs
  std::int64_t horizon = 0;  // epoch * k
  double lambda = 0.0;       // Lyapunov drift rate
};

// Solves the radius fixed point: r_u enters its own lower bound through
// horizon -> epoch -> diameter. Floored at 2 and at the exit-probability rule.
inline EpochPlan build_plan(const ModelConstants& c, const KernelParams& p, double eps,
                            double log_nu) {
  if (!(eps > 0.0 && eps <= 0.5)) throw std::invalid_argument("build_plan: need eps in (0, 1/2]");
  const AssumptionReport ar = check_assumptions(c, p);
  if (!ar.core_ok()) throw std::invalid_argument("build_plan: hyperparameter assumptions fail");

  EpochPlan plan;
  plan.h = p.h;
  plan.gamma = p.gamma;
  plan.eps = eps;
  plan.log_nu_lyap = log_nu;
  plan.rho = contraction_rate(c, p);
  plan.c_reg = regularization_constant(c, p);
  plan.k = num_epochs(eps);

  const double log_start_mass =
      std::max(log_nu, 0.5 * c.d * std::log(2.0 * c.kappa()));  // covers both nu and mu starts
  const double log_term = std::log(4.0 / eps) + log_start_mass;

  double r_u = 2.0;
  bool converged = false;
  for (int it = 0; it < 1000; ++it) {
    plan.r = domain_diameter(c, p.gamma, r_u);
    plan.epoch = epoch_length(plan.rho, plan.c_reg, plan.r);
    plan.horizon = plan.epoch * static_cast<std::int64_t>(plan.k);
    const double rhs =
        32.0 * (p.gamma * p.h * static_cast<double>(plan.horizon) * c.d + log_term);
    const double next = std::max(2.0, rhs);
    const double rel = std::abs(next - r_u) / std::max(1.0, std::abs(next));
    r_u = next;
    if (rel < 1e-9) {
      converged = true;
      break;
    }
  }
  if (!converged) throw std::runtime_error("build_plan: radius fixed point did not converge");
  plan.r_u = r_u;
  plan.r = domain_diameter(c, p.gamma, r_u);
  plan.epoch = epoch_length(plan.rho, plan.c_reg, plan.r);
  plan.horizon = plan.epoch * static_cast<std::int64_t>(plan.k);
  plan.lambda = lyapunov_rate(c, p, c.d, plan.r_u);
  return plan;
}

struct CertificateReport {
  // log of the exit-probability bound and the target log(eps / 4)
  double exit_log_bound = 0.0;
  double exit_log_target = 0.0;
  bool exit_degenerate = false;  // 50 C_dh horizon h^2 >= 1 makes the bound vacuous
  bool exit_ok = false;
  // epoch-level rejection budget vs 1 / (3e)
  double rejection_budget = 0.0;
  bool rejection_ok = false;
  // 400 L horizon h^2 <= 1
  double horizon_value = 0.0;
  bool horizon_ok = false;
  bool assumptions_ok = false;

  bool all_ok() const { return exit_ok && rejection_ok && horizon_ok && assumptions_ok; }
};

inline CertificateReport certificates(const ModelConstants& c, const KernelParams& p,
                                      const EpochPlan& plan) {
  CertificateReport r;
  const double c_dh = 4.0 * c.L;
  const double h2 = p.h * p.h;
  const double horizon = static_cast<double>(plan.horizon);
  const double ghd = p.gamma * p.h * c.d;

  const double log_start_mass =
      std::max(plan.log_nu_lyap, 0.5 * c.d * std::log(2.0 * c.kappa()));
  r.exit_log_bound = 0.25 * (1.0 + 25.0 * c_dh * h2) * p.gamma * p.h * horizon * c.d -
                     (1.0 - 50.0 * c_dh * horizon * h2) / 16.0 * plan.r_u + log_start_mass;
  r.exit_log_target = std::log(plan.eps / 4.0);
  r.exit_degenerate = 50.0 * c_dh * horizon * h2 >= 1.0;
  r.exit_ok = !r.exit_degenerate && r.exit_log_bound <= r.exit_log_target;

  const double h3 = h2 * p.h;
  r.rejection_budget =
      static_cast<double>(plan.epoch) * h3 *
      (8.0 * c.L_H * (std::pow(plan.r_u, 1.5) + 3.0 * std::pow(ghd, 1.5)) +
       std::pow(c.L, 1.5) * (plan.r_u + ghd));
  r.rejection_ok = r.rejection_budget <= kOneOverThreeE;

  r.horizon_value = 400.0 * c.L * horizon * h2;
  r.horizon_ok = r.horizon_value <= 1.0;
  r.assumptions_ok = check_assumptions(c, p, horizon).all_ok();
  return r;
}

inline bool step_size_admissible(const ModelConstants& c, double gamma, double eps,
                                 double log_nu, double h) {
  KernelParams p;
  try {
    p = KernelParams::make(h, gamma, c);
  } catch (const std::exception&) {
    return false;
  }
  if (!check_assumptions(c, p).core_ok()) return false;
  try {
    const EpochPlan plan = build_plan(c, p, eps, log_nu);
    return certificates(c, p, plan).all_ok();
  } catch (const std::exception&) {
    return false;
  }
}

// Numeric replacement for the asymptotic admissible-step-size formula: the
// largest h in [1e-8, min(1/gamma, 1/sqrt(L))] for which every certificate
// holds, found by bisection.
inline std::optional<double> admissible_step_size(const ModelConstants& c, double gamma,
                                                  double eps, double log_nu) {
  double lo = 1e-8;
  double hi = std::min(1.0 / gamma, 1.0 / std::sqrt(c.L));
  if (!step_size_admissible(c, gamma, eps, log_nu, lo)) return std::nullopt;
  if (step_size_admissible(c, gamma, eps, log_nu, hi)) return hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (step_size_admissible(c, gamma, eps, log_nu, mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

// gamma = 10 sqrt(L) is the smallest friction satisfying the hyperparameter
// assumption and minimizes the mixing bound.
inline double default_gamma(const ModelConstants& c) { return 10.0 * std::sqrt(c.L); }

}  // namespace kla
