#include <algorithm>
#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "olqr/estimation.hpp"
#include "olqr/rng.hpp"

using namespace olqr;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, RngStream& rng) {
  Eigen::MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = rng.normal();
  return M;
}

// Direct batch ridge solution from stored samples.
Eigen::MatrixXd batch_ridge(const std::vector<Eigen::VectorXd>& zs,
                            const std::vector<Eigen::VectorXd>& ys,
                            double lambda, int d, int m) {
  Eigen::MatrixXd V = lambda * Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d, m);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    V += zs[i] * zs[i].transpose();
    S += ys[i] * zs[i].transpose();
  }
  return V.ldlt().solve(S.transpose()).transpose();
}

}  // namespace

TEST_CASE("construction validates dimensions and regularizer") {
  CHECK_THROWS_AS(RlsEstimator(0, 2, 1.0), DimensionMismatch);
  CHECK_THROWS_AS(RlsEstimator(2, 0, 1.0), DimensionMismatch);
  CHECK_THROWS_AS(RlsEstimator(2, 2, 0.0), InvalidBound);
  const RlsEstimator est(2, 3, 0.5);
  CHECK(est.samples() == 0);
  CHECK(est.gram() == 0.5 * Eigen::MatrixXd::Identity(3, 3));
  CHECK(est.estimate() == Eigen::MatrixXd::Zero(2, 3));
  CHECK(est.gram_min_eigenvalue() == Catch::Approx(0.0).margin(1e-12));
  CHECK(est.log_det_ratio() == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("recursive and batch solutions coincide") {
  RngStream rng(101, 0);
  for (int run = 0; run < 50; ++run) {
    const int d = 1 + static_cast<int>(rng.uniform_below(3));
    const int m = 1 + static_cast<int>(rng.uniform_below(3));
    const double lambda = 0.25 + rng.uniform();
    RlsEstimator est(d, m, lambda);
    std::vector<Eigen::VectorXd> zs, ys;
    const Eigen::MatrixXd theta = random_matrix(d, m, rng);
    const int n = 20 + static_cast<int>(rng.uniform_below(200));
    for (int t = 0; t < n; ++t) {
      Eigen::VectorXd z = random_matrix(m, 1, rng);
      Eigen::VectorXd y = theta * z + 0.1 * random_matrix(d, 1, rng);
      est.update(z, y);
      zs.push_back(std::move(z));
      ys.push_back(std::move(y));
    }
    const Eigen::MatrixXd direct = batch_ridge(zs, ys, lambda, d, m);
    CHECK((est.estimate() - direct).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(est.samples() == n);
  }
}

TEST_CASE("gram matrix stays symmetric, dominated below by the regularizer") {
  RngStream rng(102, 0);
  RlsEstimator est(2, 4, 2.0);
  for (int t = 0; t < 100; ++t) {
    est.update(random_matrix(4, 1, rng), random_matrix(2, 1, rng));
    const Eigen::MatrixXd& V = est.gram();
    CHECK((V - V.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        V - 2.0 * Eigen::MatrixXd::Identity(4, 4), Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    CHECK(est.gram_min_eigenvalue() >= -1e-10);
  }
}

TEST_CASE("determinant ratio is nondecreasing in the data") {
  RngStream rng(103, 0);
  RlsEstimator est(1, 3, 1.0);
  double last = est.log_det_ratio();
  for (int t = 0; t < 50; ++t) {
    est.update(random_matrix(3, 1, rng), random_matrix(1, 1, rng));
    const double now = est.log_det_ratio();
    CHECK(now >= last - 1e-12);
    last = now;
  }
}

TEST_CASE("estimation error decays like one over root t") {
  // Identification of a stable 3x3 dynamics matrix from its autonomous
  // trajectory; median operator-norm error should at least drop by 0.6x
  // between t = 1000 and t = 4000 (exact rate would give 0.5x).
  RngStream sys_rng(104, 0);
  Eigen::MatrixXd A = random_matrix(3, 3, sys_rng);
  A *= 0.85 / std::max(1e-12, A.cwiseAbs().rowwise().sum().maxCoeff());
  std::vector<double> err_early, err_late;
  for (int seed = 0; seed < 60; ++seed) {
    RngStream rng(104, 1000 + static_cast<std::uint64_t>(seed));
    RlsEstimator est(3, 3, 1.0);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
    for (int t = 1; t <= 4000; ++t) {
      Eigen::VectorXd xn = A * x + random_matrix(3, 1, rng);
      est.update(x, xn);
      x = xn;
      if (t == 1000)
        err_early.push_back((est.estimate() - A).jacobiSvd().singularValues()(0));
    }
    err_late.push_back((est.estimate() - A).jacobiSvd().singularValues()(0));
  }
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  CHECK(median(err_late) <= 0.6 * median(err_early));
}

TEST_CASE("confidence bound covers the truth at the nominal rate") {
  // 2000 independent runs on a 2x2 identification task at delta = 0.1; the
  // bound tr(Delta^T V Delta) <= radius must hold in at least 90% of runs
  // (it is conservative, so coverage is typically much higher).
  const double delta = 0.1, sigma = 1.0, lambda = 1.0;
  Eigen::MatrixXd theta(2, 2);
  theta << 0.4, -0.3, 0.2, 0.5;
  const double theta_frob_sq = theta.squaredNorm();
  int covered = 0;
  const int runs = 2000;
  for (int run = 0; run < runs; ++run) {
    RngStream rng(105, static_cast<std::uint64_t>(run));
    RlsEstimator est(2, 2, lambda);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
    for (int t = 1; t <= 500; ++t) {
      Eigen::VectorXd xn = theta * x + sigma * random_matrix(2, 1, rng);
      est.update(x, xn);
      x = xn;
    }
    const Eigen::MatrixXd diff = est.estimate() - theta;
    const double lhs = (diff.transpose() * est.gram() * diff).trace();
    if (lhs <= est.confidence_bound(delta, sigma, theta_frob_sq)) ++covered;
  }
  CHECK(covered >= static_cast<int>((1.0 - delta) * runs));
}

TEST_CASE("confidence bound rejects bad delta and grows with data") {
  RngStream rng(106, 0);
  RlsEstimator est(2, 2, 1.0);
  CHECK_THROWS_AS(est.confidence_bound(0.0, 1.0, 1.0), InvalidBound);
  CHECK_THROWS_AS(est.confidence_bound(1.0, 1.0, 1.0), InvalidBound);
  const double before = est.confidence_bound(0.1, 1.0, 1.0);
  for (int t = 0; t < 10; ++t)
    est.update(random_matrix(2, 1, rng), random_matrix(2, 1, rng));
  CHECK(est.confidence_bound(0.1, 1.0, 1.0) >= before);
}

TEST_CASE("update rejects mismatched sample dimensions") {
  RlsEstimator est(2, 3, 1.0);
  CHECK_THROWS_AS(est.update(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)),
                  DimensionMismatch);
  CHECK_THROWS_AS(est.update(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)),
                  DimensionMismatch);
}
