#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "olqr/errors.hpp"
#include "olqr/system.hpp"

namespace olqr {

struct RiccatiSolution {
  Eigen::MatrixXd P;  // d x d, symmetric positive definite value matrix
  double residual = 0.0;
  int iterations = 0;
};

inline double spectral_radius(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw DimensionMismatch("spectral radius needs a square matrix");
  return M.eigenvalues().cwiseAbs().maxCoeff();
}

inline double operator_norm(const Eigen::MatrixXd& M) {
  return M.jacobiSvd().singularValues()(0);
}

// Fixed-point solver for P = Q + A^T P A - A^T P B (R + B^T P B)^{-1} B^T P A
// starting from P = Q. The iterate is re-symmetrized each step; the residual
// is the operator norm of the last update.
inline RiccatiSolution solve_dare(const LqrSystem& sys, double tol = 1e-10,
                                  int max_iter = 100000) {
  const Eigen::MatrixXd& A = sys.A;
  const Eigen::MatrixXd& B = sys.B;
  Eigen::MatrixXd P = sys.Q;
  double residual = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::MatrixXd PB = P * B;
    const Eigen::MatrixXd G = sys.R + B.transpose() * PB;
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (G + G.transpose()));
    if (llt.info() != Eigen::Success)
      throw SingularInnerMatrix("R + B^T P B is not positive definite");
    const Eigen::MatrixXd BtPA = PB.transpose() * A;  // B^T P A
    Eigen::MatrixXd next = sys.Q + A.transpose() * P * A -
                           BtPA.transpose() * llt.solve(BtPA);
    next = 0.5 * (next + next.transpose()).eval();
    if (!next.allFinite())
      throw NonConvergence("value iteration diverged (non-finite iterate)");
    residual = operator_norm(next - P);
    P = std::move(next);
    if (residual <= tol) return {std::move(P), residual, it};
  }
  throw NonConvergence("value iteration did not reach tolerance " +
                       std::to_string(tol) + " in " +
                       std::to_string(max_iter) + " iterations");
}

// Gain K = -(R + B^T P B)^{-1} B^T P A for a solved value matrix P.
inline Controller optimal_controller(const LqrSystem& sys,
                                     const RiccatiSolution& sol) {
  const Eigen::MatrixXd PB = sol.P * sys.B;
  const Eigen::MatrixXd G = sys.R + sys.B.transpose() * PB;
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (G + G.transpose()));
  if (llt.info() != Eigen::Success)
    throw SingularInnerMatrix("R + B^T P B is not positive definite");
  return {-llt.solve(PB.transpose() * sys.A)};
}

inline Controller optimal_controller(const LqrSystem& sys, double tol = 1e-10,
                                     int max_iter = 100000) {
  return optimal_controller(sys, solve_dare(sys, tol, max_iter));
}

// Fixed point of P = S + M^T P M for a stable M, by plain iteration from S.
// Divergence guard: the running trace must stop growing materially; 1000
// consecutive iterations with a non-shrinking, above-tolerance increment are
// treated as divergence.
inline Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& M,
                                      const Eigen::MatrixXd& S,
                                      double tol = 1e-12,
                                      int max_iter = 500000) {
  if (M.rows() != M.cols() || S.rows() != S.cols() || M.rows() != S.rows())
    throw DimensionMismatch("Lyapunov solve needs square matrices of equal size");
  Eigen::MatrixXd P = S;
  Eigen::MatrixXd term = S;  // M^T^n S M^n
  double prev_increment = std::numeric_limits<double>::infinity();
  int growth_run = 0;
  for (int it = 1; it <= max_iter; ++it) {
    term = (M.transpose() * term * M).eval();
    term = 0.5 * (term + term.transpose()).eval();
    P += term;
    const double increment = term.cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
    if (!std::isfinite(increment))
      throw UnstableController("Lyapunov iteration diverged");
    if (increment <= tol * scale) return 0.5 * (P + P.transpose());
    growth_run = (increment >= prev_increment) ? growth_run + 1 : 0;
    if (growth_run >= 1000)
      throw UnstableController("Lyapunov iteration trace kept growing");
    prev_increment = increment;
  }
  throw NonConvergence("Lyapunov iteration did not reach tolerance");
}

// Value matrix of a fixed linear policy: P_K = Q + K^T R K + M^T P_K M with
// M = A + B K. Throws UnstableController when the closed loop's spectral
// radius is not safely below one.
inline Eigen::MatrixXd controller_value_matrix(const LqrSystem& sys,
                                               const Controller& ctrl,
                                               double tol = 1e-12,
                                               int max_iter = 500000) {
  if (ctrl.K.rows() != sys.input_dim() || ctrl.K.cols() != sys.state_dim())
    throw DimensionMismatch("controller gain must be k x d");
  const Eigen::MatrixXd M = sys.A + sys.B * ctrl.K;
  if (spectral_radius(M) >= 1.0 - 1e-9)
    throw UnstableController("closed loop spectral radius >= 1 - 1e-9");
  const Eigen::MatrixXd S = sys.Q + ctrl.K.transpose() * sys.R * ctrl.K;
  return solve_lyapunov(M, S, tol, max_iter);
}

// Steady-state average cost J(K, W) = tr(P_K W) under noise covariance W.
inline double infinite_horizon_cost(const LqrSystem& sys, const Controller& ctrl,
                                    const Eigen::MatrixXd& noise_cov,
                                    double tol = 1e-12, int max_iter = 500000) {
  if (noise_cov.rows() != sys.state_dim() || noise_cov.cols() != sys.state_dim())
    throw DimensionMismatch("noise covariance must be d x d");
  return (controller_value_matrix(sys, ctrl, tol, max_iter) * noise_cov).trace();
}

// Default noise covariance sigma^2 I (exactly zero in deterministic mode).
inline double infinite_horizon_cost(const LqrSystem& sys, const Controller& ctrl,
                                    double tol = 1e-12, int max_iter = 500000) {
  const double var = sys.deterministic() ? 0.0 : sys.sigma * sys.sigma;
  return infinite_horizon_cost(
      sys, ctrl, var * Eigen::MatrixXd::Identity(sys.state_dim(), sys.state_dim()),
      tol, max_iter);
}

// Contraction certificate implied by a steady-state cost bound: a policy with
// J(K) <= J_bound under N(0, sigma^2 I) noise and state cost at least
// alpha0 I is strongly stable with kappa = sqrt(J_bound / (alpha0 sigma^2))
// and gamma = alpha0 sigma^2 / (2 J_bound).
inline StabilityCertificate certificate_from_cost(double J_bound, double alpha0,
                                                  double sigma) {
  if (!(alpha0 > 0.0) || !(sigma > 0.0))
    throw InvalidBound("alpha0 and sigma must be positive");
  const double floor = alpha0 * sigma * sigma;
  if (J_bound < floor)
    throw InvalidBound("cost bound below alpha0 sigma^2");
  return {std::sqrt(J_bound / floor), floor / (2.0 * J_bound)};
}

}  // namespace olqr
