#pragma once

#include <Eigen/Dense>

#include "olqr/riccati.hpp"
#include "olqr/rng.hpp"
#include "olqr/system.hpp"

namespace testsupport {

// Random system with scaled spectral radius and unit costs, rejected until
// the optimal gain synthesizes. Dimensions are drawn in [1, max_dim].
inline olqr::LqrSystem random_system(olqr::RngStream& rng, int max_dim,
                                     double rho_lo = 0.3, double rho_hi = 0.95) {
  for (;;) {
    const int d = 1 + static_cast<int>(rng.uniform_below(
                          static_cast<std::uint64_t>(max_dim)));
    const int k = 1 + static_cast<int>(rng.uniform_below(
                          static_cast<std::uint64_t>(max_dim)));
    Eigen::MatrixXd A(d, d), B(d, k);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) A(i, j) = rng.normal();
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < k; ++j) B(i, j) = rng.normal();
    const double rho = olqr::spectral_radius(A);
    if (rho < 1e-9) continue;
    A *= (rho_lo + (rho_hi - rho_lo) * rng.uniform()) / rho;
    olqr::LqrSystem sys(A, B, Eigen::MatrixXd::Identity(d, d),
                        Eigen::MatrixXd::Identity(k, k), 1.0);
    try {
      olqr::solve_dare(sys);
      return sys;
    } catch (const olqr::Error&) {
      continue;
    }
  }
}

}  // namespace testsupport
