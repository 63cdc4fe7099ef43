#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "olqr/errors.hpp"
#include "olqr/riccati.hpp"
#include "olqr/rng.hpp"
#include "olqr/system.hpp"

namespace olqr {

struct CalibrationPoint {
  double eps = 0.0;
  double cost_ratio = 0.0;  // max over samples of (J(K') - J*) / eps^2
  double gain_ratio = 0.0;  // max over samples of ||K' - K*|| / eps
  bool usable = true;       // false once a perturbed synthesis failed
};

struct CalibrationResult {
  double C0 = 0.0;
  double eps0 = 0.0;
  std::vector<CalibrationPoint> points;
};

namespace detail {

inline Eigen::MatrixXd random_direction(int rows, int cols, RngStream& rng) {
  for (;;) {
    Eigen::MatrixXd M(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) M(i, j) = rng.normal();
    const double norm = operator_norm(M);
    if (norm >= 1e-12) return M / norm;
  }
}

}  // namespace detail

// Empirical estimate of the local perturbation constants: for each epsilon
// on the grid, sample perturbations of operator norm epsilon applied to both
// system matrices, synthesize the certainty-equivalent gain, and measure the
// worst excess cost over eps^2 and gain error over eps on the true system.
// C0 is read off the smallest epsilon; eps0 is the largest grid epsilon up
// to which both ratios stay within 20% of C0 (the quadratic regime).
inline CalibrationResult calibrate_perturbation_constants(
    const LqrSystem& sys, const std::vector<double>& eps_grid, int n_samples,
    RngStream& rng) {
  if (eps_grid.empty() || n_samples < 1)
    throw ConfigError("calibration needs a grid and samples");
  for (std::size_t i = 1; i < eps_grid.size(); ++i)
    if (!(eps_grid[i] > eps_grid[i - 1]))
      throw ConfigError("epsilon grid must be strictly increasing");
  const RiccatiSolution star = solve_dare(sys, 1e-12);
  const Eigen::MatrixXd K_star = optimal_controller(sys, star).K;
  const double j_star = infinite_horizon_cost(sys, {K_star});

  CalibrationResult result;
  for (double eps : eps_grid) {
    CalibrationPoint point;
    point.eps = eps;
    for (int s = 0; s < n_samples; ++s) {
      const Eigen::MatrixXd dA =
          eps * detail::random_direction(sys.state_dim(), sys.state_dim(), rng);
      const Eigen::MatrixXd dB =
          eps * detail::random_direction(sys.state_dim(), sys.input_dim(), rng);
      try {
        const LqrSystem perturbed(sys.A + dA, sys.B + dB, sys.Q, sys.R,
                                  sys.sigma);
        const Eigen::MatrixXd K = optimal_controller(perturbed).K;
        const double j = infinite_horizon_cost(sys, {K});
        point.cost_ratio =
            std::max(point.cost_ratio, (j - j_star) / (eps * eps));
        point.gain_ratio =
            std::max(point.gain_ratio, operator_norm(K - K_star) / eps);
      } catch (const Error&) {
        point.usable = false;
        break;
      }
    }
    result.points.push_back(point);
  }
  const CalibrationPoint& first = result.points.front();
  if (!first.usable)
    throw NonConvergence("smallest epsilon already breaks gain synthesis");
  result.C0 = std::max(first.cost_ratio, first.gain_ratio);
  result.eps0 = first.eps;
  for (const CalibrationPoint& p : result.points) {
    if (!p.usable || p.cost_ratio > 1.2 * result.C0 ||
        p.gain_ratio > 1.2 * result.C0)
      break;
    result.eps0 = p.eps;
  }
  return result;
}

inline std::vector<double> default_eps_grid() {
  // Log-spaced from 1e-3 to ~1, 13 points.
  std::vector<double> grid;
  for (int i = 0; i <= 12; ++i) grid.push_back(std::pow(10.0, -3.0 + 0.25 * i));
  return grid;
}

}  // namespace olqr
