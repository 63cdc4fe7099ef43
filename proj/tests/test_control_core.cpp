#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "olqr/lowerbound.hpp"
#include "olqr/riccati.hpp"
#include "olqr/simulate.hpp"
#include "olqr/system.hpp"
#include "support.hpp"

using namespace olqr;

namespace {

LqrSystem scalar_system(double a, double b, double sigma = 1.0) {
  Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  return LqrSystem(a * one, b * one, one, one, sigma);
}

}  // namespace

TEST_CASE("system validation rejects malformed inputs") {
  const Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  Eigen::MatrixXd indef(2, 2);
  indef << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(LqrSystem(I2, I2, asym, I2, 1.0), InvalidBound);
  CHECK_THROWS_AS(LqrSystem(I2, I2, indef, I2, 1.0), InvalidBound);
  CHECK_THROWS_AS(LqrSystem(I2, I2, I2, I2, 0.0), InvalidBound);
  CHECK_THROWS_AS(LqrSystem(I2, I2, I2, I2, -1.0), InvalidBound);
  CHECK_THROWS_AS(LqrSystem(Eigen::MatrixXd::Zero(2, 3), I2, I2, I2, 1.0),
                  DimensionMismatch);
  CHECK_THROWS_AS(LqrSystem(I2, Eigen::MatrixXd::Zero(3, 2), I2, I2, 1.0),
                  DimensionMismatch);
  CHECK_NOTHROW(LqrSystem(I2 * 0.5, I2, I2, I2, 1e-300));  // deterministic mode
}

TEST_CASE("uncontrolled scalar value matches the geometric series") {
  // a = 1/sqrt(5), b = 0: p solves p = 1 + a^2 p, so p = 1.25 exactly.
  const LqrSystem sys = scalar_system(1.0 / std::sqrt(5.0), 0.0);
  const RiccatiSolution sol = solve_dare(sys, 1e-12);
  CHECK(std::abs(sol.P(0, 0) - 1.25) <= 1e-10);
  CHECK(sol.residual <= 1e-12);
  CHECK(sol.iterations >= 1);
}

TEST_CASE("weakly actuated scalar matches the quadratic-root values") {
  // Frozen from the closed form p = 2 / (c + sqrt(c^2 + 4 b^2)),
  // c = 1 - a^2 - b^2, and k = -a b p / (1 + b^2 p).
  const double a = 1.0 / std::sqrt(5.0);
  const double b = 0.05;
  const LqrSystem sys = scalar_system(a, b);
  const RiccatiSolution sol = solve_dare(sys, 1e-13);
  CHECK(std::abs(sol.P(0, 0) - 1.2490279908404296) <= 1e-10);
  const Controller K = optimal_controller(sys, sol);
  CHECK(std::abs(K.K(0, 0) - -0.027842175790969797) <= 1e-10);
}

TEST_CASE("zero dynamics gives P = Q") {
  RngStream rng(7, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const int d = 1 + static_cast<int>(rng.uniform_below(4));
    const int k = 1 + static_cast<int>(rng.uniform_below(4));
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) Q(i, i) = 0.5 + rng.uniform();
    Eigen::MatrixXd B(d, k);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < k; ++j) B(i, j) = rng.normal();
    const LqrSystem sys(Eigen::MatrixXd::Zero(d, d), B, Q,
                        Eigen::MatrixXd::Identity(k, k), 1.0);
    const RiccatiSolution sol = solve_dare(sys);
    CHECK((sol.P - Q).cwiseAbs().maxCoeff() <= 1e-12);
    // One step closes the recursion when A = 0.
    CHECK(sol.iterations == 1);
  }
}

TEST_CASE("value iteration leaves a small fixed-point defect") {
  RngStream rng(11, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const LqrSystem sys = testsupport::random_system(rng, 5);
    const RiccatiSolution sol = solve_dare(sys, 1e-10);
    // Defect of the Riccati map at the returned P.
    const Eigen::MatrixXd PB = sol.P * sys.B;
    const Eigen::MatrixXd G = sys.R + sys.B.transpose() * PB;
    const Eigen::MatrixXd BtPA = PB.transpose() * sys.A;
    const Eigen::MatrixXd defect = sys.Q + sys.A.transpose() * sol.P * sys.A -
                                   BtPA.transpose() * G.llt().solve(BtPA) -
                                   sol.P;
    CHECK(operator_norm(defect) <= 1e-9);
    // P is symmetric positive semidefinite and dominates Q.
    CHECK((sol.P - sol.P.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sol.P - sys.Q,
                                                      Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-9);
  }
}

TEST_CASE("closed form and solver agree across the scalar grid") {
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      const double a = -0.9 + 1.8 * i / 19.0;
      const double b = -1.0 + 2.0 * j / 19.0;
      const double p = scalar_riccati(a, b);
      const LqrSystem sys = scalar_system(a, b);
      const RiccatiSolution sol = solve_dare(sys, 1e-13);
      CHECK(std::abs(sol.P(0, 0) - p) <= 1e-10);
    }
  }
}

TEST_CASE("optimal gain is a local minimizer of the steady-state cost") {
  RngStream rng(23, 0);
  const LqrSystem sys = testsupport::random_system(rng, 4);
  const Controller K_star = optimal_controller(sys, 1e-12);
  const double j_star = infinite_horizon_cost(sys, K_star);
  int checked = 0;
  while (checked < 50) {
    Eigen::MatrixXd delta(K_star.K.rows(), K_star.K.cols());
    for (int i = 0; i < delta.rows(); ++i)
      for (int j = 0; j < delta.cols(); ++j) delta(i, j) = rng.normal();
    delta *= (0.1 * rng.uniform()) / std::max(1e-12, operator_norm(delta));
    const Controller perturbed{K_star.K + delta};
    try {
      const double j = infinite_horizon_cost(sys, perturbed);
      CHECK(j >= j_star - 1e-9);
      ++checked;
    } catch (const UnstableController&) {
      // perturbation lost stability; draw another
    }
  }
}

TEST_CASE("certificate from a cost bound") {
  // J = 2 sigma^2 with alpha0 = 1 certifies kappa = sqrt(2), gamma = 1/4.
  const StabilityCertificate cert = certificate_from_cost(2.0, 1.0, 1.0);
  CHECK(cert.kappa == Catch::Approx(std::sqrt(2.0)).margin(1e-15));
  CHECK(cert.gamma == Catch::Approx(0.25).margin(1e-15));
  CHECK_THROWS_AS(certificate_from_cost(0.5, 1.0, 1.0), InvalidBound);
  CHECK_THROWS_AS(certificate_from_cost(1.0, -1.0, 1.0), InvalidBound);
  // Boundary: J = alpha0 sigma^2 certifies kappa = 1, gamma = 1/2.
  const StabilityCertificate edge = certificate_from_cost(4.0, 1.0, 2.0);
  CHECK(edge.kappa == 1.0);
  CHECK(edge.gamma == 0.5);
}

TEST_CASE("cost certificate implies geometric decay of the closed loop") {
  RngStream rng(31, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const LqrSystem sys = testsupport::random_system(rng, 4);
    const Controller K = optimal_controller(sys, 1e-12);
    const double j = infinite_horizon_cost(sys, K);
    const StabilityCertificate cert = certificate_from_cost(j, 1.0, sys.sigma);
    const Eigen::MatrixXd M = sys.A + sys.B * K.K;
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(M.rows(), M.cols());
    for (int s = 1; s <= 50; ++s) {
      power = M * power;
      CHECK(operator_norm(power) <=
            cert.kappa * std::pow(1.0 - cert.gamma, s) + 1e-9);
    }
    CHECK(operator_norm(K.K) <= cert.kappa + 1e-9);
  }
}

TEST_CASE("unstable closed loop is rejected") {
  const LqrSystem sys = scalar_system(1.5, 1.0);
  CHECK_THROWS_AS(infinite_horizon_cost(sys, {Eigen::MatrixXd::Zero(1, 1)}),
                  UnstableController);
  // Marginally stable loop is also rejected.
  CHECK_THROWS_AS(
      infinite_horizon_cost(sys, {Eigen::MatrixXd::Constant(1, 1, -0.5)}),
      UnstableController);
}

TEST_CASE("spectral radius on a rotation-scaled matrix") {
  Eigen::MatrixXd M(2, 2);
  const double r = 0.85, th = 0.7;
  M << r * std::cos(th), -r * std::sin(th), r * std::sin(th), r * std::cos(th);
  CHECK(spectral_radius(M) == Catch::Approx(0.85).epsilon(1e-10));
  CHECK_THROWS_AS(spectral_radius(Eigen::MatrixXd::Zero(1, 2)),
                  DimensionMismatch);
}

TEST_CASE("time-averaged rollout cost approaches the steady-state cost") {
  RngStream rng(41, 0);
  const LqrSystem sys = testsupport::random_system(rng, 3);
  const Controller K = optimal_controller(sys, 1e-12);
  const double j = infinite_horizon_cost(sys, K);
  LinearPolicy policy(K.K);
  RngStream noise(41, 1);
  const Trajectory traj = rollout(sys, policy, 1000000, noise);
  const double avg = traj.total_cost() / static_cast<double>(traj.horizon());
  CHECK(std::abs(avg - j) <= 0.02 * j);
}

TEST_CASE("deterministic mode has zero steady-state cost and exact zero states") {
  const LqrSystem sys = scalar_system(0.5, 1.0, 1e-300);
  const Controller K = optimal_controller(sys);
  CHECK(infinite_horizon_cost(sys, K) == 0.0);
  LinearPolicy policy(K.K);
  RngStream noise(1, 2);
  const Trajectory traj = rollout(sys, policy, 100, noise);
  for (const auto& x : traj.states) CHECK(x.norm() == 0.0);
}
