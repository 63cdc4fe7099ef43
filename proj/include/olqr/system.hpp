#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "olqr/errors.hpp"

namespace olqr {

// Relative tolerance for the symmetry check on cost matrices.
inline constexpr double kSymmetryTol = 1e-12;

// Noise scales at or below this value select deterministic mode: process
// noise is exactly zero instead of denormal-sized.
inline constexpr double kDeterministicSigma = 1e-300;

namespace detail {

inline void require_symmetric_pd(const Eigen::MatrixXd& M, const char* name) {
  if (M.rows() != M.cols() || M.rows() == 0)
    throw DimensionMismatch(std::string(name) + " must be square and nonempty");
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale)
    throw InvalidBound(std::string(name) + " is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()),
                                                    Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw InvalidBound(std::string(name) + " is not positive definite");
}

}  // namespace detail

// Discrete-time linear system x_{t+1} = A x_t + B u_t + w_t with
// w_t ~ N(0, sigma^2 I) and stage cost x^T Q x + u^T R u.
struct LqrSystem {
  Eigen::MatrixXd A;  // d x d
  Eigen::MatrixXd B;  // d x k
  Eigen::MatrixXd Q;  // d x d, symmetric positive definite
  Eigen::MatrixXd R;  // k x k, symmetric positive definite
  double sigma = 1.0;

  LqrSystem() = default;

  LqrSystem(Eigen::MatrixXd A_in, Eigen::MatrixXd B_in, Eigen::MatrixXd Q_in,
            Eigen::MatrixXd R_in, double sigma_in)
      : A(std::move(A_in)),
        B(std::move(B_in)),
        Q(std::move(Q_in)),
        R(std::move(R_in)),
        sigma(sigma_in) {
    if (A.rows() != A.cols() || A.rows() == 0)
      throw DimensionMismatch("A must be square and nonempty");
    if (B.rows() != A.rows() || B.cols() == 0)
      throw DimensionMismatch("B must be d x k with k >= 1");
    if (Q.rows() != A.rows()) throw DimensionMismatch("Q must match A");
    if (R.rows() != B.cols()) throw DimensionMismatch("R must match B's columns");
    detail::require_symmetric_pd(Q, "Q");
    detail::require_symmetric_pd(R, "R");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      throw InvalidBound("sigma must be positive and finite");
  }

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }
  bool deterministic() const { return sigma <= kDeterministicSigma; }
};

// Linear state-feedback policy u = K x.
struct Controller {
  Eigen::MatrixXd K;  // k x d
};

// Witness that the closed loop contracts: ||(A + B K)^s|| <= kappa (1-gamma)^s
// and ||K|| <= kappa.
struct StabilityCertificate {
  double kappa = 1.0;  // >= 1
  double gamma = 1.0;  // in (0, 1]
};

}  // namespace olqr
