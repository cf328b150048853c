#pragma once

// Independent oracles used by the test suites. These never call the
// implementation paths they are checked against.

#include <Eigen/Dense>

#include <cmath>
#include <functional>

#include "kla/target_models.hpp"

namespace kla::testing {

// Central finite differences of U.
inline Vec fd_gradient(const TargetModel& m, const Vec& x, double eps = 1e-6) {
  Vec g(x.size());
  Vec xp = x, xm = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + eps;
    xm[i] = x[i] - eps;
    g[i] = (m.value(xp) - m.value(xm)) / (2.0 * eps);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return g;
}

// Central finite differences of grad U.
inline Mat fd_hessian(const TargetModel& m, const Vec& x, double eps = 1e-5) {
  const Eigen::Index d = x.size();
  Mat H(d, d);
  Vec xp = x, xm = x, gp(d), gm(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    xp[i] = x[i] + eps;
    xm[i] = x[i] - eps;
    m.gradient(xp, gp);
    m.gradient(xm, gm);
    H.col(i) = (gp - gm) / (2.0 * eps);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return 0.5 * (H + H.transpose());
}

// Central finite-difference Jacobian of a generic map R^n -> R^n.
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double eps = 1e-6) {
  const Eigen::Index n = x.size();
  Mat J(n, n);
  Vec xp = x, xm = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    xp[i] = x[i] + eps;
    xm[i] = x[i] - eps;
    J.col(i) = (f(xp) - f(xm)) / (2.0 * eps);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return J;
}

// Exact stationary covariance of one coordinate of the unadjusted chain on a
// quadratic potential with curvature a: solves the 3x3 linear fixed point of
// the covariance recursion of the O-leapfrog-O composition.
struct ScalarCovariance {
  double var_x = 0.0;
  double cov_xv = 0.0;
  double var_v = 0.0;
};

inline ScalarCovariance ukla_stationary_covariance(double a, double h, double gamma) {
  const double u = 1.0 - 0.5 * a * h * h;
  const double w = h * (1.0 - 0.25 * a * h * h);
  const double c = -a * h;
  const double eps = std::exp(-0.5 * gamma * h);
  const double e2 = std::exp(-gamma * h);
  const double eta2 = 1.0 - e2;

  // unknowns (p, s, q) = (Var x, Cov(x, v), Var v) before the first O substep
  Eigen::Matrix3d A;
  Eigen::Vector3d b;
  A << 1.0 - u * u, -2.0 * u * w * eps, -w * w * e2,
      -eps * u * c, 1.0 - eps * (u * u + w * c) * eps, -eps * u * w * e2,
      -e2 * c * c, -e2 * 2.0 * u * c * eps, 1.0 - e2 * u * u * e2;
  b << w * w * eta2, eps * u * w * eta2, e2 * u * u * eta2 + eta2;
  const Eigen::Vector3d sol = A.partialPivLu().solve(b);
  return {sol[0], sol[1], sol[2]};
}

// Dense linear solve for the one-shot transport map when the potential is
// quadratic with constant Hessian A_h: the position-matching equation is
// linear in the second chain's post-first-O velocity.
struct LinearOneShot {
  Vec a1_tilde, a2_tilde;
};

inline LinearOneShot one_shot_linear_oracle(const Mat& hess, const PhaseState& z,
                                            const PhaseState& zt, double h, double gamma,
                                            const Vec& a1, const Vec& a2) {
  const Eigen::Index d = z.x.size();
  const double decay = std::exp(-0.5 * gamma * h);
  const double scale = std::sqrt(1.0 - std::exp(-gamma * h));
  // first chain, plain substep composition
  const Vec v_o = decay * z.v + scale * a1;
  const Vec xstar = z.x + 0.5 * h * v_o;
  const Vec vp = v_o - h * (hess * xstar);
  const Vec xpp = xstar + 0.5 * h * vp;
  const Vec vpp = decay * vp + scale * a2;
  // solve (h I - (h^3/4) A) w = xpp - xt + (h^2/2) A xt
  const Mat lhs = h * Mat::Identity(d, d) - (h * h * h / 4.0) * hess;
  const Vec rhs = xpp - zt.x + (0.5 * h * h) * (hess * zt.x);
  const Vec w = lhs.partialPivLu().solve(rhs);
  const Vec vtp = w - h * (hess * (zt.x + 0.5 * h * w));
  LinearOneShot out;
  out.a1_tilde = (w - decay * zt.v) / scale;
  out.a2_tilde = (vpp - decay * vtp) / scale;
  return out;
}

}  // namespace kla::testing
