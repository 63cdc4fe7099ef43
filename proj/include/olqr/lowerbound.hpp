#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "olqr/errors.hpp"
#include "olqr/parallel.hpp"
#include "olqr/riccati.hpp"
#include "olqr/simulate.hpp"
#include "olqr/streams.hpp"
#include "olqr/system.hpp"

namespace olqr {

// Positive root of b^2 p^2 + (1 - a^2 - b^2) p - 1 = 0, the scalar
// steady-state Riccati value for x' = a x + b u + w with unit costs.
// Evaluated in the cancellation-free form 2 / (c + sqrt(c^2 + 4 b^2)).
inline double scalar_riccati(double a, double b) {
  const double c = 1.0 - a * a - b * b;
  if (b == 0.0) {
    if (std::abs(a) >= 1.0)
      throw NoPositiveRoot("uncontrolled scalar system with |a| >= 1");
    return 1.0 / (1.0 - a * a);
  }
  return 2.0 / (c + std::sqrt(c * c + 4.0 * b * b));
}

inline double scalar_optimal_gain(double a, double b) {
  const double p = scalar_riccati(a, b);
  return -a * b * p / (1.0 + b * b * p);
}

// One member of the hard family: a = 1/sqrt(5) known to the learner,
// b = chi sqrt(epsilon) hidden, unit costs. The interesting scaling couples
// epsilon to the horizon as epsilon = T^{-1/2} / 4.
struct LowerBoundInstance {
  double a = 1.0 / std::sqrt(5.0);
  double epsilon = 0.0;  // <= 1/400 where the bracket guarantees hold
  int chi = 1;           // +1 or -1
  double b = 0.0;        // chi sqrt(epsilon)
  double sigma = 1.0;
  long long T = 0;
  double p_star = 0.0;
  double k_star = 0.0;

  LqrSystem system() const {
    Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
    Eigen::MatrixXd A = one * a;
    Eigen::MatrixXd B = one * b;
    return LqrSystem(A, B, one, one, sigma);
  }
  double optimal_cost() const { return sigma * sigma * p_star; }
};

// Builds an instance with epsilon = T^{-1/2} / 4 and verifies the value and
// gain brackets 1 <= p* <= 5/4 and 0.99 sqrt(eps/5) <= |k*| <= sqrt(eps/3).
// Horizons below 12000 push epsilon above 1/400, outside the regime where
// the brackets are guaranteed; they are allowed but reported via `warning`.
inline LowerBoundInstance make_instance(long long T, double sigma, int chi,
                                        std::string* warning = nullptr) {
  if (T < 1) throw InvalidBound("horizon must be at least 1");
  if (chi != 1 && chi != -1) throw InvariantViolation("chi must be +1 or -1");
  if (!(sigma > 0.0)) throw InvalidBound("sigma must be positive");
  LowerBoundInstance inst;
  inst.T = T;
  inst.sigma = sigma;
  inst.chi = chi;
  inst.epsilon = 0.25 / std::sqrt(static_cast<double>(T));
  inst.b = chi * std::sqrt(inst.epsilon);
  inst.p_star = scalar_riccati(inst.a, inst.b);
  inst.k_star = scalar_optimal_gain(inst.a, inst.b);
  if (T < 12000 && warning != nullptr)
    *warning = "T < 12000: epsilon exceeds 1/400, outside the guaranteed regime";
  if (!(inst.p_star >= 1.0 && inst.p_star <= 1.25))
    throw InvariantViolation("value bracket 1 <= p* <= 5/4 failed");
  const double mag = std::abs(inst.k_star);
  if (!(mag >= 0.99 * std::sqrt(inst.epsilon / 5.0) &&
        mag <= std::sqrt(inst.epsilon / 3.0)))
    throw InvariantViolation("gain magnitude bracket failed");
  if (inst.k_star * chi >= 0.0)
    throw InvariantViolation("optimal gain must oppose the sign of b");
  return inst;
}

// Pathwise regret identity: over a trajectory of the instance,
//   sum (x_t^2 + u_t^2 - sigma^2 p*)                     (lhs)
// and
//   sum (1 + b^2 p*) (u_t - k* x_t)^2 - x_{T+1}^2 p*     (rhs)
// differ only by the mean-zero terms p*(w_t^2 - sigma^2) and
// 2 p* w_t (a x_t + b u_t), so their expectations coincide.
struct RegretIdentity {
  double lhs = 0.0;
  double rhs = 0.0;
};

inline RegretIdentity regret_identity_check(const Trajectory& traj,
                                            const LowerBoundInstance& inst) {
  if (traj.states.empty() || traj.states.front().size() != 1)
    throw DimensionMismatch("identity check needs a scalar trajectory");
  RegretIdentity id;
  const double var_cost = inst.sigma * inst.sigma * inst.p_star;
  const double gain_weight = 1.0 + inst.b * inst.b * inst.p_star;
  const long long T = traj.horizon();
  for (long long t = 0; t < T; ++t) {
    const double x = traj.states[static_cast<std::size_t>(t)](0);
    const double u = traj.actions[static_cast<std::size_t>(t)](0);
    id.lhs += x * x + u * u - var_cost;
    const double miss = u - inst.k_star * x;
    id.rhs += gain_weight * miss * miss;
  }
  const double x_final = traj.states.back()(0);
  id.rhs -= x_final * x_final * inst.p_star;
  return id;
}

// Builds a fresh policy for one (T, seed) trial. The instance is passed for
// test plumbing (an oracle needs k*); honest learners must read only `a`,
// `sigma` and `T` from it, never `b`.
using LowerBoundPolicyFactory = std::function<std::unique_ptr<Policy>(
    const LowerBoundInstance&, std::uint64_t base_seed, long long T,
    long long seed)>;

struct LowerBoundCell {
  long long T = 0;
  long long n_seeds = 0;
  long long n_failed = 0;  // runs excluded by the overflow guard
  double mean_regret = 0.0;
  double stderr_regret = 0.0;
};

struct LowerBoundResult {
  std::vector<LowerBoundCell> cells;                // one per horizon
  std::vector<std::vector<double>> regrets;         // [T index][seed], NaN = failed
};

// Runs the hidden-sign experiment: per (T, seed), chi is drawn from a
// reserved stream, the learner runs on the resulting instance, and regret is
// measured against sigma^2 p*. Trials are independent, so results do not
// depend on the worker count.
inline LowerBoundResult lower_bound_experiment(
    const LowerBoundPolicyFactory& factory, const std::vector<long long>& T_grid,
    long long n_seeds, double sigma, std::uint64_t base_seed, int workers = 1) {
  if (T_grid.empty() || n_seeds < 1)
    throw ConfigError("need at least one horizon and one seed");
  LowerBoundResult result;
  result.regrets.assign(T_grid.size(),
                        std::vector<double>(static_cast<std::size_t>(n_seeds),
                                            std::numeric_limits<double>::quiet_NaN()));
  const std::size_t total = T_grid.size() * static_cast<std::size_t>(n_seeds);
  parallel_for_index(total, workers, [&](std::size_t idx) {
    const std::size_t ti = idx / static_cast<std::size_t>(n_seeds);
    const long long seed = static_cast<long long>(idx % static_cast<std::size_t>(n_seeds));
    const long long T = T_grid[ti];
    RngStream sign = make_stream(base_seed, T, seed, Purpose::sign_draw);
    const LowerBoundInstance inst = make_instance(T, sigma, sign.rademacher());
    auto policy = factory(inst, base_seed, T, seed);
    RngStream noise = make_stream(base_seed, T, seed, Purpose::process_noise);
    const LqrSystem sys = inst.system();
    try {
      double cum_cost = 0.0;
      Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
      for (long long t = 1; t <= T; ++t) {
        if (x.norm() > kStateNormGuard)
          throw NumericOverflow("state norm exceeded guard");
        const Eigen::VectorXd u = policy->action(t, x);
        const Eigen::VectorXd xn = step(sys, x, u, noise);
        policy->observe(t, x, u, xn);
        cum_cost += instantaneous_cost(sys, x, u);
        x = xn;
      }
      result.regrets[ti][static_cast<std::size_t>(seed)] =
          cum_cost - static_cast<double>(T) * inst.optimal_cost();
    } catch (const NumericOverflow&) {
      // leave NaN; counted below
    }
  });
  for (std::size_t ti = 0; ti < T_grid.size(); ++ti) {
    LowerBoundCell cell;
    cell.T = T_grid[ti];
    double sum = 0.0, sum_sq = 0.0;
    long long n_ok = 0;
    for (double r : result.regrets[ti]) {
      if (std::isnan(r)) {
        ++cell.n_failed;
        continue;
      }
      sum += r;
      sum_sq += r * r;
      ++n_ok;
    }
    cell.n_seeds = n_ok;
    if (n_ok > 0) cell.mean_regret = sum / static_cast<double>(n_ok);
    if (n_ok > 1) {
      const double var =
          (sum_sq - sum * sum / static_cast<double>(n_ok)) /
          static_cast<double>(n_ok - 1);
      cell.stderr_regret = std::sqrt(std::max(0.0, var) / static_cast<double>(n_ok));
    }
    result.cells.push_back(cell);
  }
  return result;
}

}  // namespace olqr
