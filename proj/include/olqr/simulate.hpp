#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "olqr/errors.hpp"
#include "olqr/rng.hpp"
#include "olqr/system.hpp"

namespace olqr {

// States above this norm abort a rollout with NumericOverflow; well before
// cost accumulation hits infinity.
inline constexpr double kStateNormGuard = 1e150;

struct AbortInfo {
  long long time = 0;       // first step played under the fallback policy
  std::string reason;       // "state_norm", "gain_norm", "dare_failure", ...
};

// Decision rule driven by the simulator. Time is 1-based: action(t, x_t) is
// asked first, then observe(t, x_t, u_t, x_{t+1}) reports the transition.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual Eigen::VectorXd action(long long t, const Eigen::VectorXd& x) = 0;
  virtual void observe(long long /*t*/, const Eigen::VectorXd& /*x*/,
                       const Eigen::VectorXd& /*u*/,
                       const Eigen::VectorXd& /*x_next*/) {}
  // Set when the policy has permanently fallen back to its safe controller.
  virtual std::optional<AbortInfo> abort_info() const { return std::nullopt; }
};

// Plays u = K x forever.
class LinearPolicy : public Policy {
 public:
  explicit LinearPolicy(Eigen::MatrixXd K) : K_(std::move(K)) {}
  Eigen::VectorXd action(long long, const Eigen::VectorXd& x) override {
    return K_ * x;
  }
  const Eigen::MatrixXd& gain() const { return K_; }

 private:
  Eigen::MatrixXd K_;
};

inline double instantaneous_cost(const LqrSystem& sys, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& u) {
  return x.dot(sys.Q * x) + u.dot(sys.R * u);
}

// One transition x' = A x + B u + w. Draws exactly d normals from `noise`
// (also in deterministic mode, where they are discarded), so the stream
// position depends only on the number of steps taken.
inline Eigen::VectorXd step(const LqrSystem& sys, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& u, RngStream& noise) {
  const int d = sys.state_dim();
  Eigen::VectorXd w = noise.normal_vector(d);
  if (sys.deterministic())
    w.setZero();
  else
    w *= sys.sigma;
  return sys.A * x + sys.B * u + w;
}

struct Trajectory {
  std::vector<Eigen::VectorXd> states;   // x_1 .. x_{T+1}
  std::vector<Eigen::VectorXd> actions;  // u_1 .. u_T
  std::vector<double> costs;             // c_1 .. c_T
  std::optional<AbortInfo> abort;

  long long horizon() const { return static_cast<long long>(actions.size()); }
  double total_cost() const {
    double s = 0.0;
    for (double c : costs) s += c;
    return s;
  }
};

// Runs the policy for T steps from x1 (origin by default) and records the
// full trajectory. Throws NumericOverflow once the state norm crosses the
// guard; the partial trajectory is lost, callers treat the run as failed.
inline Trajectory rollout(const LqrSystem& sys, Policy& policy, long long T,
                          RngStream& noise,
                          std::optional<Eigen::VectorXd> x1 = std::nullopt) {
  if (T < 1) throw InvalidBound("horizon must be at least 1");
  Trajectory traj;
  traj.states.reserve(static_cast<std::size_t>(T) + 1);
  traj.actions.reserve(static_cast<std::size_t>(T));
  traj.costs.reserve(static_cast<std::size_t>(T));
  Eigen::VectorXd x =
      x1 ? std::move(*x1) : Eigen::VectorXd::Zero(sys.state_dim()).eval();
  if (x.size() != sys.state_dim())
    throw DimensionMismatch("initial state has wrong dimension");
  traj.states.push_back(x);
  for (long long t = 1; t <= T; ++t) {
    if (x.norm() > kStateNormGuard)
      throw NumericOverflow("state norm exceeded guard at t=" + std::to_string(t));
    Eigen::VectorXd u = policy.action(t, x);
    if (u.size() != sys.input_dim())
      throw DimensionMismatch("policy action has wrong dimension");
    Eigen::VectorXd x_next = step(sys, x, u, noise);
    policy.observe(t, x, u, x_next);
    traj.costs.push_back(instantaneous_cost(sys, x, u));
    traj.actions.push_back(std::move(u));
    traj.states.push_back(x_next);
    x = std::move(x_next);
  }
  traj.abort = policy.abort_info();
  return traj;
}

}  // namespace olqr
