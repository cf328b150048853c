#include <catch_amalgamated.hpp>

#include "kla/rng.hpp"
#include "kla/target_models.hpp"
#include "test_oracles.hpp"

using namespace kla;
using Catch::Approx;

namespace {
PhaseState unit_x_state(int d, int coord = 0) {
  PhaseState z = PhaseState::zero(d);
  z.x[coord] = 1.0;
  return z;
}
}  // namespace

TEST_CASE("potential values and gradients of the built-ins", "[models]") {
  const auto iso = iso_gaussian(4.0, 3);
  const auto [u, g] = potential(*iso, unit_x_state(3).x);
  CHECK(u == Approx(2.0));
  CHECK(g[0] == Approx(4.0));
  CHECK(g[1] == 0.0);

  const auto pert = perturbed_example(4);
  const auto [u0, g0] = potential(*pert, Vec::Zero(4));
  CHECK(u0 == 0.0);
  CHECK(g0[0] == Approx(-1.0));
  CHECK(g0[1] == 0.0);

  const auto diag = diag_gaussian(Vec::LinSpaced(3, 1.0, 3.0));
  const auto [ud, gd] = potential(*diag, Vec::Zero(3));
  CHECK(ud == 0.0);
  CHECK(gd.norm() == 0.0);
}

TEST_CASE("constants of the built-ins", "[models]") {
  const auto diag = diag_gaussian((Vec(3) << 2.0, 0.5, 4.0).finished());
  CHECK(diag->constants().K == Approx(0.5));
  CHECK(diag->constants().L == Approx(4.0));
  CHECK(diag->constants().L_H == 0.0);
  CHECK(diag->constants().kappa() == Approx(8.0));

  const auto pert = perturbed_example(2);
  CHECK(pert->constants().K == 1.0);
  CHECK(pert->constants().L == 3.0);
  CHECK(pert->constants().L_H == 1.0);
  CHECK(pert->illustration_only());

  const auto iso = iso_gaussian(4.0, 2);
  CHECK(iso->constants().K == 4.0);
  CHECK(iso->constants().kappa() == 1.0);
  CHECK_FALSE(iso->illustration_only());
}

TEST_CASE("hessians of the built-ins", "[models]") {
  const auto iso = iso_gaussian(2.5, 3);
  CHECK((hessian(*iso, Vec::Zero(3)) - 2.5 * Mat::Identity(3, 3)).norm() == 0.0);

  const auto pert = perturbed_example(3);
  const Mat hp = hessian(*pert, Vec::Zero(3));
  CHECK(hp(0, 0) == Approx(2.0));
  CHECK(hp(1, 1) == 1.0);
  CHECK(hp(0, 1) == 0.0);

  const Vec a = (Vec(2) << 3.0, 7.0).finished();
  const auto diag = diag_gaussian(a);
  const Mat hd = hessian(*diag, Vec::Ones(2));
  CHECK(hd(0, 0) == 3.0);
  CHECK(hd(1, 1) == 7.0);
}

TEST_CASE("hamiltonian and energy-like function", "[models]") {
  const auto iso4 = iso_gaussian(4.0, 2);
  CHECK(hamiltonian(*iso4, unit_x_state(2)) == Approx(2.0));
  CHECK(hamiltonian(*iso4, PhaseState::zero(2)) == 0.0);

  const auto iso1 = iso_gaussian(1.0, 3);
  PhaseState kinetic = PhaseState::zero(3);
  kinetic.v << 1.0, 2.0, -1.0;
  CHECK(hamiltonian(*iso1, kinetic) == Approx(3.0));

  CHECK(energy_like(*iso4, unit_x_state(2)) == Approx(4.0));
  CHECK(energy_like(*iso4, PhaseState::zero(2)) == 0.0);
  PhaseState mixed{(Vec(3) << 1.0, 0.0, 2.0).finished(), (Vec(3) << 0.0, 3.0, 0.0).finished()};
  CHECK(energy_like(*iso1, mixed) == Approx(mixed.v.squaredNorm() + mixed.x.squaredNorm()));
}

TEST_CASE("gradient and hessian match finite differences", "[models]") {
  RngStream rng(11, 0);
  std::vector<std::unique_ptr<TargetModel>> models;
  models.push_back(iso_gaussian(2.0, 7));
  models.push_back(diag_gaussian(Vec::LinSpaced(7, 0.5, 4.0)));
  models.push_back(perturbed_example(7));
  for (const auto& m : models) {
    Vec g(7);
    for (int trial = 0; trial < 100; ++trial) {
      const Vec x = 2.0 * rng.normal_vec(7);
      m->gradient(x, g);
      const Vec fd = testing::fd_gradient(*m, x);
      REQUIRE((g - fd).norm() <= 1e-6 * std::max(1.0, g.norm()));
    }
    for (int trial = 0; trial < 20; ++trial) {
      const Vec x = 2.0 * rng.normal_vec(7);
      const Mat fd = testing::fd_hessian(*m, x);
      REQUIRE((hessian(*m, x) - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
    }
  }
}

TEST_CASE("co-coercivity and strong convexity", "[models]") {
  RngStream rng(13, 0);
  std::vector<std::unique_ptr<TargetModel>> models;
  models.push_back(iso_gaussian(3.0, 5));
  models.push_back(diag_gaussian(Vec::LinSpaced(5, 1.0, 6.0)));
  models.push_back(perturbed_example(5));
  for (const auto& m : models) {
    const auto& c = m->constants();
    Vec g1(5), g2(5);
    for (int trial = 0; trial < 1000; ++trial) {
      const Vec x1 = 3.0 * rng.normal_vec(5);
      const Vec x2 = 3.0 * rng.normal_vec(5);
      m->gradient(x1, g1);
      m->gradient(x2, g2);
      const double gap = (g1 - g2).squaredNorm();
      const double inner = (g1 - g2).dot(x1 - x2);
      REQUIRE(gap <= c.L * inner * (1.0 + 1e-12) + 1e-12);
      REQUIRE(inner >= c.K * (x1 - x2).squaredNorm() * (1.0 - 1e-12) - 1e-12);
    }
  }
}

TEST_CASE("input validation", "[models]") {
  const auto iso = iso_gaussian(1.0, 3);
  CHECK_THROWS_AS(potential(*iso, Vec::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(hessian(*iso, Vec::Zero(4)), std::invalid_argument);
  Vec bad = Vec::Zero(3);
  bad[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(potential(*iso, bad), std::invalid_argument);
  PhaseState mismatched{Vec::Zero(3), Vec::Zero(2)};
  CHECK_THROWS_AS(hamiltonian(*iso, mismatched), std::invalid_argument);
  CHECK_THROWS_AS(iso_gaussian(-1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(diag_gaussian(Vec::Zero(2)), std::invalid_argument);
}
