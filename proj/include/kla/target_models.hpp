#pragma once

// Potential-energy interface, built-in target distributions, and the
// Hamiltonian / energy-like functionals on phase space.

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

#include "kla/rng.hpp"

namespace kla {

// A point z = (x, v) in 2d-dimensional phase space.
struct PhaseState {
  Vec x;
  Vec v;

  PhaseState() = default;
  PhaseState(Vec x_, Vec v_) : x(std::move(x_)), v(std::move(v_)) {}
  static PhaseState zero(Eigen::Index d) { return {Vec::Zero(d), Vec::Zero(d)}; }
  Eigen::Index dim() const { return x.size(); }
};

// Velocity flip involution S(x, v) = (x, -v).
inline PhaseState velocity_flip(PhaseState z) {
  z.v = -z.v;
  return z;
}

enum class ModelKind { IsotropicGaussian, DiagonalGaussian, PerturbedExample };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::IsotropicGaussian: return "iso_gauss";
    case ModelKind::DiagonalGaussian: return "diag_gauss";
    case ModelKind::PerturbedExample: return "perturbed";
  }
  return "unknown";
}

// Declared smoothness/convexity constants of a potential.
struct ModelConstants {
  double K = 1.0;    // strong convexity
  double L = 1.0;    // gradient Lipschitz
  double L_H = 0.0;  // Hessian Lipschitz
  int d = 1;

  double kappa() const { return L / K; }
};

// Potential energy U with exact gradient and Hessian access. Immutable after
// construction; safe to share across concurrent replicas.
class TargetModel {
 public:
  virtual ~TargetModel() = default;

  virtual ModelKind kind() const = 0;
  virtual double value(const Vec& x) const = 0;
  virtual void gradient(const Vec& x, Vec& g) const = 0;
  virtual void hessian(const Vec& x, Mat& H) const = 0;

  const ModelConstants& constants() const { return constants_; }
  int dim() const { return constants_.d; }
  bool gaussian_kind() const { return kind() != ModelKind::PerturbedExample; }
  // The perturbed example has grad U(0) != 0; it is kept for lower-bound
  // illustrations only and is exempt from the minimum-at-origin checks.
  bool illustration_only() const { return kind() == ModelKind::PerturbedExample; }

 protected:
  explicit TargetModel(ModelConstants c) : constants_(c) {}

 private:
  ModelConstants constants_;
};

class IsotropicGaussian final : public TargetModel {
 public:
  IsotropicGaussian(double L, int d) : TargetModel({L, L, 0.0, d}), L_(L) {
    if (L <= 0.0 || d <= 0) throw std::invalid_argument("iso_gauss: need L > 0, d > 0");
  }
  ModelKind kind() const override { return ModelKind::IsotropicGaussian; }
  double value(const Vec& x) const override { return 0.5 * L_ * x.squaredNorm(); }
  void gradient(const Vec& x, Vec& g) const override { g = L_ * x; }
  void hessian(const Vec& x, Mat& H) const override {
    H = Mat::Identity(x.size(), x.size()) * L_;
  }

 private:
  double L_;
};

class DiagonalGaussian final : public TargetModel {
 public:
  explicit DiagonalGaussian(Vec a)
      : TargetModel({a.size() > 0 ? a.minCoeff() : 0.0, a.size() > 0 ? a.maxCoeff() : 0.0,
                     0.0, static_cast<int>(a.size())}),
        a_(std::move(a)) {
    if (a_.size() == 0 || a_.minCoeff() <= 0.0)
      throw std::invalid_argument("diag_gauss: need positive diagonal entries");
  }
  ModelKind kind() const override { return ModelKind::DiagonalGaussian; }
  double value(const Vec& x) const override { return 0.5 * x.dot(a_.cwiseProduct(x)); }
  void gradient(const Vec& x, Vec& g) const override { g = a_.cwiseProduct(x); }
  void hessian(const Vec& x, Mat& H) const override {
    H = a_.asDiagonal();
    (void)x;
  }
  const Vec& diagonal() const { return a_; }

 private:
  Vec a_;
};

// U(x) = (1/2) x . diag(2, 1, ..., 1) x - sin(x_1).
// Hessian entry (1,1) is 2 + sin(x_1) in [1, 3], so K = 1, L = 3; the only
// nonzero third derivative is cos(x_1), so L_H = 1.
class PerturbedExample final : public TargetModel {
 public:
  explicit PerturbedExample(int d) : TargetModel({1.0, 3.0, 1.0, d}) {
    if (d <= 0) throw std::invalid_argument("perturbed: need d > 0");
  }
  ModelKind kind() const override { return ModelKind::PerturbedExample; }
  double value(const Vec& x) const override {
    return 0.5 * x.squaredNorm() + 0.5 * x[0] * x[0] - std::sin(x[0]);
  }
  void gradient(const Vec& x, Vec& g) const override {
    g = x;
    g[0] += x[0] - std::cos(x[0]);
  }
  void hessian(const Vec& x, Mat& H) const override {
    H = Mat::Identity(x.size(), x.size());
    H(0, 0) = 2.0 + std::sin(x[0]);
  }
};

inline std::unique_ptr<TargetModel> iso_gaussian(double L, int d) {
  return std::make_unique<IsotropicGaussian>(L, d);
}
inline std::unique_ptr<TargetModel> diag_gaussian(Vec a) {
  return std::make_unique<DiagonalGaussian>(std::move(a));
}
inline std::unique_ptr<TargetModel> perturbed_example(int d) {
  return std::make_unique<PerturbedExample>(d);
}

inline void check_position(const TargetModel& m, const Vec& x) {
  if (x.size() != m.dim())
    throw std::invalid_argument("position dimension " + std::to_string(x.size()) +
                                " does not match model dimension " + std::to_string(m.dim()));
  if (!x.allFinite()) throw std::invalid_argument("non-finite position");
}

inline void check_state(const TargetModel& m, const PhaseState& z) {
  check_position(m, z.x);
  if (z.v.size() != z.x.size())
    throw std::invalid_argument("velocity dimension does not match position dimension");
  if (!z.v.allFinite()) throw std::invalid_argument("non-finite velocity");
}

// U(x) and grad U(x), exact closed forms for all built-ins.
inline std::pair<double, Vec> potential(const TargetModel& m, const Vec& x) {
  check_position(m, x);
  Vec g(x.size());
  m.gradient(x, g);
  return {m.value(x), std::move(g)};
}

inline Mat hessian(const TargetModel& m, const Vec& x) {
  check_position(m, x);
  Mat H(x.size(), x.size());
  m.hessian(x, H);
  return H;
}

// H(z) = |v|^2 / 2 + U(x).
inline double hamiltonian(const TargetModel& m, const PhaseState& z) {
  check_state(m, z);
  return 0.5 * z.v.squaredNorm() + m.value(z.x);
}

// Energy-like function |v|^2 + L^{-1} |grad U(x)|^2; its level sets define the
// localization domain of the coupled runs.
inline double energy_like(const TargetModel& m, const PhaseState& z) {
  check_state(m, z);
  Vec g(z.x.size());
  m.gradient(z.x, g);
  return z.v.squaredNorm() + g.squaredNorm() / m.constants().L;
}

// energy_like without validation, using a caller-provided gradient buffer.
inline double energy_like_fast(const TargetModel& m, const Vec& x, const Vec& v, Vec& grad) {
  m.gradient(x, grad);
  return v.squaredNorm() + grad.squaredNorm() / m.constants().L;
}

}  // namespace kla
