#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "olqr/errors.hpp"

namespace olqr {

// Regularized least squares for y ~ Theta z with Theta in R^{d x m}:
// Theta_hat = argmin sum_s ||y_s - Theta z_s||^2 + lambda ||Theta||_F^2.
// Keeps only the Gram matrix V = lambda I + sum z z^T and the cross moment
// S = sum y z^T; each estimate is a fresh linear solve against V.
class RlsEstimator {
 public:
  RlsEstimator(int output_dim, int regressor_dim, double lambda)
      : lambda_(lambda),
        V_(lambda * Eigen::MatrixXd::Identity(regressor_dim, regressor_dim)),
        S_(Eigen::MatrixXd::Zero(output_dim, regressor_dim)) {
    if (output_dim < 1 || regressor_dim < 1)
      throw DimensionMismatch("estimator dimensions must be positive");
    if (!(lambda > 0.0)) throw InvalidBound("lambda must be positive");
  }

  int output_dim() const { return static_cast<int>(S_.rows()); }
  int regressor_dim() const { return static_cast<int>(V_.rows()); }
  double lambda() const { return lambda_; }
  long long samples() const { return samples_; }
  const Eigen::MatrixXd& gram() const { return V_; }
  const Eigen::MatrixXd& cross_moment() const { return S_; }

  void update(const Eigen::VectorXd& z, const Eigen::VectorXd& y) {
    if (z.size() != regressor_dim() || y.size() != output_dim())
      throw DimensionMismatch("sample dimensions do not match estimator");
    V_ += z * z.transpose();  // exactly symmetric: IEEE multiply is commutative
    S_ += y * z.transpose();
    ++samples_;
  }

  // Theta_hat = S V^{-1}, solved via Cholesky of the (positive definite) Gram
  // matrix rather than an explicit inverse.
  // Pivoted factorization: the Gram matrix is positive definite in exact
  // arithmetic but can be numerically rank-deficient after a state blow-up.
  Eigen::MatrixXd estimate() const {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(V_);
    if (ldlt.info() != Eigen::Success)
      throw SingularInnerMatrix("Gram matrix factorization failed");
    return ldlt.solve(S_.transpose()).transpose();
  }

  // log(det(V_t) / det(V_1)) with V_1 = lambda I, via Cholesky.
  double log_det_ratio() const {
    const Eigen::LLT<Eigen::MatrixXd> llt(V_);
    if (llt.info() != Eigen::Success)
      throw SingularInnerMatrix("Gram matrix is not positive definite");
    double log_det = 0.0;
    for (int i = 0; i < regressor_dim(); ++i)
      log_det += 2.0 * std::log(llt.matrixL()(i, i));
    return log_det - regressor_dim() * std::log(lambda_);
  }

  // Radius of the self-normalized confidence set: with probability at least
  // 1 - delta, tr(Delta^T V_t Delta) <= 4 sigma^2 d log((d/delta)
  // det(V_t)/det(V_1)) + 2 lambda theta_frob_sq for all t, where d is the
  // output dimension and theta_frob_sq bounds ||Theta_*||_F^2 (the caller
  // supplies it, e.g. d vartheta^2 or k vartheta^2).
  double confidence_bound(double delta, double sigma,
                          double theta_frob_sq) const {
    if (!(delta > 0.0) || !(delta < 1.0))
      throw InvalidBound("delta must be in (0, 1)");
    const double d = static_cast<double>(output_dim());
    return 4.0 * sigma * sigma * d * (std::log(d / delta) + log_det_ratio()) +
           2.0 * lambda_ * theta_frob_sq;
  }

  // Smallest eigenvalue of the excitation part V - lambda I.
  double gram_min_eigenvalue() const {
    const Eigen::MatrixXd G =
        V_ - lambda_ * Eigen::MatrixXd::Identity(regressor_dim(), regressor_dim());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

 private:
  double lambda_;
  long long samples_ = 0;
  Eigen::MatrixXd V_;
  Eigen::MatrixXd S_;
};

}  // namespace olqr
