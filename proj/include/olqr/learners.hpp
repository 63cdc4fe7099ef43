#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "olqr/errors.hpp"
#include "olqr/estimation.hpp"
#include "olqr/riccati.hpp"
#include "olqr/rng.hpp"
#include "olqr/simulate.hpp"
#include "olqr/system.hpp"

namespace olqr {

enum class Mode { theoretical, practical };

// Problem constants handed to a learner. alpha0/alpha1 bound the cost
// matrices (alpha0 I <= Q, R <= alpha1 I), vartheta bounds ||A*|| and ||B*||,
// nu bounds the optimal steady-state cost, nu0 the initial policy's cost,
// and (C0, eps0) are the local perturbation constants: estimation error eps
// <= eps0 implies a certainty-equivalent gain within C0 eps of optimal and
// excess cost at most C0 eps^2.
struct LearnerConfig {
  double alpha0 = 1.0;
  double alpha1 = 1.0;
  double vartheta = 1.0;
  double nu = 1.0;
  double nu0 = 1.0;
  double C0 = 1.0;
  double eps0 = 1.0;
  double sigma = 1.0;
  long long T = 0;
  Mode mode = Mode::practical;
  double practical_scale = 1e-3;
};

// Checks the config's constants against the true system (test plumbing: in a
// real deployment the truth is unknown). Bound violations throw InvalidBound;
// soft inconsistencies come back as warnings.
inline std::vector<std::string> validate_config(const LearnerConfig& cfg,
                                                const LqrSystem& sys) {
  if (!(cfg.alpha0 > 0.0) || !(cfg.alpha1 > 0.0) || !(cfg.sigma > 0.0) ||
      !(cfg.eps0 > 0.0) || !(cfg.C0 > 0.0) || !(cfg.nu > 0.0) ||
      !(cfg.nu0 > 0.0) || !(cfg.vartheta > 0.0))
    throw InvalidBound("learner constants must be positive");
  if (operator_norm(sys.Q) > cfg.alpha1 * (1.0 + 1e-9) ||
      operator_norm(sys.R) > cfg.alpha1 * (1.0 + 1e-9))
    throw InvalidBound("alpha1 does not dominate the cost matrices");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eq(sys.Q, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> er(sys.R, Eigen::EigenvaluesOnly);
  if (eq.eigenvalues().minCoeff() < cfg.alpha0 * (1.0 - 1e-9) ||
      er.eigenvalues().minCoeff() < cfg.alpha0 * (1.0 - 1e-9))
    throw InvalidBound("alpha0 is not a lower bound on the cost matrices");
  std::vector<std::string> warnings;
  if (cfg.nu0 < cfg.nu)
    warnings.push_back("nu0 < nu: initial policy claimed cheaper than optimal");
  if (cfg.sigma != sys.sigma)
    warnings.push_back("config sigma differs from system sigma");
  return warnings;
}

// Schedule and thresholds derived from the problem constants. Theoretical
// mode evaluates the formulas as stated; practical mode multiplies x_b,
// lambda and tau0 by practical_scale (tau0's formula reads the scaled
// lambda), preserving all functional forms and the x4 phase schedule.
struct DerivedParams {
  double kappa0 = 1.0;
  double kappa = 1.0;
  double gamma = 1.0;  // always 1 / (2 kappa^2)
  double x_b = 0.0;    // abort threshold on ||x_t||^2
  double lambda = 0.0; // ridge regularizer
  double mu0 = 0.0;    // warm-up break scale (algorithm B only)
  long long tau0 = 0;  // first phase start; warm-up is t = 1 .. tau0 - 1
  long long n_T = 0;   // last phase index
  std::vector<long long> phase_starts;  // tau_0 .. tau_{n_T}, then T + 1
};

namespace detail {

inline long long ceil_to_ll(double v) {
  const double c = std::ceil(v);
  if (!(c >= 1.0) || c > 9.0e18) throw InvalidBound("schedule length out of range");
  return static_cast<long long>(c);
}

inline void fill_schedule(DerivedParams& p, long long T) {
  if (p.tau0 >= T) throw HorizonTooShort("tau0 >= T leaves no learning phase");
  // n_T = floor(log4(T / tau0)); phase i starts at tau0 4^i.
  p.n_T = 0;
  for (long long tau = p.tau0; tau <= T / 4; tau *= 4) ++p.n_T;
  p.phase_starts.clear();
  long long tau = p.tau0;
  for (long long i = 0; i <= p.n_T; ++i) {
    p.phase_starts.push_back(tau);
    tau *= 4;
  }
  p.phase_starts.push_back(T + 1);
}

inline void derive_common(const LearnerConfig& cfg, DerivedParams& p) {
  const double var = cfg.alpha0 * cfg.sigma * cfg.sigma;
  p.kappa0 = std::sqrt(cfg.nu0 / var);
  p.kappa = std::sqrt((cfg.nu + cfg.eps0 * cfg.eps0 * cfg.C0) / var);
  p.gamma = 1.0 / (2.0 * p.kappa * p.kappa);
}

}  // namespace detail

// Schedule for the known-input-matrix learner:
//   x_b = lambda = 135 d kappa^2 sigma^2 max{kappa0^6, 4 kappa^6} log(3T)
//   tau0 = ceil(80 d lambda (1 + vartheta^2) / (sigma^2 eps0^2)).
inline DerivedParams derive_params_alg_a(const LearnerConfig& cfg, int d) {
  if (cfg.T < 2) throw HorizonTooShort("horizon must be at least 2");
  DerivedParams p;
  detail::derive_common(cfg, p);
  const double s2 = cfg.sigma * cfg.sigma;
  const double scale = cfg.mode == Mode::practical ? cfg.practical_scale : 1.0;
  p.x_b = 135.0 * d * p.kappa * p.kappa * s2 *
          std::max(std::pow(p.kappa0, 6), 4.0 * std::pow(p.kappa, 6)) *
          std::log(3.0 * static_cast<double>(cfg.T)) * scale;
  p.lambda = p.x_b;
  double tau0 = 80.0 * d * p.lambda * (1.0 + cfg.vartheta * cfg.vartheta) /
                (s2 * cfg.eps0 * cfg.eps0) * scale;
  p.tau0 = detail::ceil_to_ll(tau0);
  detail::fill_schedule(p, cfg.T);
  return p;
}

// Schedule for the known-dynamics-matrix learner:
//   x_b = 135 d kappa^2 sigma^2 max{(1+vartheta)^2 kappa0^6, 4 kappa^6} log(4T)
//   lambda = kappa^2 x_b
//   tau0 = ceil(80 k lambda (1 + vartheta^2) / (sigma^2 eps0^2))
//   mu0 = 4 kappa C0 eps0.
inline DerivedParams derive_params_alg_b(const LearnerConfig& cfg, int d, int k) {
  if (cfg.T < 2) throw HorizonTooShort("horizon must be at least 2");
  DerivedParams p;
  detail::derive_common(cfg, p);
  const double s2 = cfg.sigma * cfg.sigma;
  const double scale = cfg.mode == Mode::practical ? cfg.practical_scale : 1.0;
  const double thp1 = 1.0 + cfg.vartheta;
  p.x_b = 135.0 * d * p.kappa * p.kappa * s2 *
          std::max(thp1 * thp1 * std::pow(p.kappa0, 6),
                   4.0 * std::pow(p.kappa, 6)) *
          std::log(4.0 * static_cast<double>(cfg.T)) * scale;
  p.lambda = p.kappa * p.kappa * p.x_b;
  double tau0 = 80.0 * k * p.lambda * (1.0 + cfg.vartheta * cfg.vartheta) /
                (s2 * cfg.eps0 * cfg.eps0) * scale;
  p.tau0 = detail::ceil_to_ll(tau0);
  p.mu0 = 4.0 * p.kappa * cfg.C0 * cfg.eps0;
  detail::fill_schedule(p, cfg.T);
  return p;
}

// Test hook: rewrites the phase-start estimate before gain synthesis.
using EstimateHook =
    std::function<Eigen::MatrixXd(long long phase, Eigen::MatrixXd estimate)>;

// Phased certainty-equivalence learner for unknown dynamics matrix, known
// input matrix. Warm-up plays the stabilizing K0; phase i (starting at
// tau0 4^i) re-estimates the dynamics from all data so far and plays the
// certainty-equivalent gain. Tripping the state-norm or gain-norm guard, or
// a failed gain synthesis, aborts permanently to K0 and freezes the
// estimator.
class AlgorithmAPolicy : public Policy {
 public:
  AlgorithmAPolicy(Eigen::MatrixXd B_star, Eigen::MatrixXd Q, Eigen::MatrixXd R,
                   double sigma, Eigen::MatrixXd K0, DerivedParams params)
      : B_star_(std::move(B_star)),
        Q_(std::move(Q)),
        R_(std::move(R)),
        sigma_(sigma),
        K0_(std::move(K0)),
        params_(std::move(params)),
        estimator_(static_cast<int>(Q_.rows()), static_cast<int>(Q_.rows()),
                   params_.lambda),
        current_K_(K0_) {}

  Eigen::VectorXd action(long long t, const Eigen::VectorXd& x) override {
    if (!aborted_) {
      if (next_phase_ <= params_.n_T &&
          t == params_.phase_starts[static_cast<std::size_t>(next_phase_)])
        begin_phase(next_phase_++, t);
      if (!aborted_ && next_phase_ > 0) {
        if (x.squaredNorm() > params_.x_b)
          abort_now(t, "state_norm");
        else if (current_K_norm_ > params_.kappa)
          abort_now(t, "gain_norm");
      }
    }
    if (aborted_) return K0_ * x;
    return current_K_ * x;
  }

  void observe(long long, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
               const Eigen::VectorXd& x_next) override {
    if (aborted_) return;  // estimator frozen from the abort step on
    estimator_.update(x, x_next - B_star_ * u);
  }

  std::optional<AbortInfo> abort_info() const override { return abort_; }
  const RlsEstimator& estimator() const { return estimator_; }
  const DerivedParams& params() const { return params_; }
  const std::vector<Eigen::MatrixXd>& phase_gains() const { return gains_; }
  void set_estimate_hook(EstimateHook hook) { hook_ = std::move(hook); }

 private:
  void begin_phase(long long phase, long long t) {
    try {
      Eigen::MatrixXd A_hat = estimator_.estimate();
      if (hook_) A_hat = hook_(phase, std::move(A_hat));
      const LqrSystem hat(std::move(A_hat), B_star_, Q_, R_, sigma_);
      current_K_ = optimal_controller(hat).K;
    } catch (const Error&) {
      abort_now(t, "dare_failure");
      return;
    }
    current_K_norm_ = operator_norm(current_K_);
    gains_.push_back(current_K_);
  }

  void abort_now(long long t, const char* reason) {
    aborted_ = true;
    abort_ = AbortInfo{t, reason};
  }

  Eigen::MatrixXd B_star_, Q_, R_;
  double sigma_;
  Eigen::MatrixXd K0_;
  DerivedParams params_;
  RlsEstimator estimator_;
  Eigen::MatrixXd current_K_;
  double current_K_norm_ = 0.0;
  long long next_phase_ = 0;
  bool aborted_ = false;
  std::optional<AbortInfo> abort_;
  std::vector<Eigen::MatrixXd> gains_;
  EstimateHook hook_;
};

// Phased learner for unknown input matrix, known dynamics matrix. Warm-up
// plays K0 x + eta with eta ~ N(0, sigma^2 I) from a dedicated stream; at
// each phase start it synthesizes a certainty-equivalent gain and leaves
// warm-up once the gain's smallest singular value squared reaches
// (3/2) mu_i, mu_i = mu0 2^{-i} (tie counts as reached). The main loop then
// mirrors the phased learner above.
class AlgorithmBPolicy : public Policy {
 public:
  AlgorithmBPolicy(Eigen::MatrixXd A_star, Eigen::MatrixXd Q, Eigen::MatrixXd R,
                   double sigma, Eigen::MatrixXd K0, DerivedParams params,
                   RngStream eta_stream)
      : A_star_(std::move(A_star)),
        Q_(std::move(Q)),
        R_(std::move(R)),
        sigma_(sigma),
        K0_(std::move(K0)),
        params_(std::move(params)),
        eta_(eta_stream),
        estimator_(static_cast<int>(A_star_.rows()),
                   static_cast<int>(K0_.rows()), params_.lambda),
        current_K_(K0_),
        n_s_(params_.n_T + 1) {}

  Eigen::VectorXd action(long long t, const Eigen::VectorXd& x) override {
    if (!aborted_) {
      if (next_phase_ <= params_.n_T &&
          t == params_.phase_starts[static_cast<std::size_t>(next_phase_)])
        begin_phase(next_phase_++, t);
      if (!aborted_ && !warming_up_) {
        if (x.squaredNorm() > params_.x_b)
          abort_now(t, "state_norm");
        else if (current_K_norm_ > params_.kappa)
          abort_now(t, "gain_norm");
      }
    }
    if (aborted_) return K0_ * x;
    if (warming_up_)
      return K0_ * x +
             (deterministic() ? Eigen::VectorXd::Zero(K0_.rows()).eval()
                              : (sigma_ * eta_.normal_vector(
                                              static_cast<int>(K0_.rows())))
                                    .eval());
    return current_K_ * x;
  }

  void observe(long long, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
               const Eigen::VectorXd& x_next) override {
    if (aborted_) return;
    estimator_.update(u, x_next - A_star_ * x);
  }

  std::optional<AbortInfo> abort_info() const override { return abort_; }
  const RlsEstimator& estimator() const { return estimator_; }
  const DerivedParams& params() const { return params_; }
  const std::vector<Eigen::MatrixXd>& phase_gains() const { return gains_; }
  // Phase index at which warm-up ended; n_T + 1 when it never did.
  long long warmup_done_at() const { return n_s_; }
  bool warming_up() const { return warming_up_; }
  void set_estimate_hook(EstimateHook hook) { hook_ = std::move(hook); }

 private:
  bool deterministic() const { return sigma_ <= kDeterministicSigma; }

  void begin_phase(long long phase, long long t) {
    Eigen::MatrixXd K;
    bool synthesized = true;
    try {
      Eigen::MatrixXd B_hat = estimator_.estimate();
      if (hook_) B_hat = hook_(phase, std::move(B_hat));
      const LqrSystem hat(A_star_, std::move(B_hat), Q_, R_, sigma_);
      K = optimal_controller(hat).K;
    } catch (const Error&) {
      synthesized = false;
    }
    if (warming_up_) {
      // An unsynthesizable gain cannot pass the break test; keep warming up.
      if (!synthesized) return;
      const double min_sv = K.jacobiSvd().singularValues().minCoeff();
      const double mu_i = params_.mu0 * std::pow(2.0, -static_cast<double>(phase));
      gains_.push_back(K);
      if (min_sv * min_sv >= 1.5 * mu_i) {
        n_s_ = phase;
        warming_up_ = false;
        current_K_ = std::move(K);
        current_K_norm_ = operator_norm(current_K_);
      }
      return;
    }
    if (!synthesized) {
      abort_now(t, "dare_failure");
      return;
    }
    current_K_ = std::move(K);
    current_K_norm_ = operator_norm(current_K_);
    gains_.push_back(current_K_);
  }

  void abort_now(long long t, const char* reason) {
    aborted_ = true;
    abort_ = AbortInfo{t, reason};
  }

  Eigen::MatrixXd A_star_, Q_, R_;
  double sigma_;
  Eigen::MatrixXd K0_;
  DerivedParams params_;
  RngStream eta_;
  RlsEstimator estimator_;
  Eigen::MatrixXd current_K_;
  double current_K_norm_ = 0.0;
  long long next_phase_ = 0;
  long long n_s_;
  bool warming_up_ = true;
  bool aborted_ = false;
  std::optional<AbortInfo> abort_;
  std::vector<Eigen::MatrixXd> gains_;
  EstimateHook hook_;
};

// Certainty-equivalence baseline with decaying exploration: plays
// K_hat x + xi_t with xi_t ~ N(0, sigma_t^2 I), sigma_t = c t^{-1/4}, and
// refits both system matrices jointly from ridge regression at every
// doubling epoch (t = 64, 128, 256, ...). Epochs start only once the
// estimator has a batch of samples: gains synthesized from near-empty data
// destabilize the loop often enough to dominate mean regret. A failed refit
// keeps the previous gain.
class CePolicy : public Policy {
 public:
  CePolicy(Eigen::MatrixXd Q, Eigen::MatrixXd R, double sigma,
           Eigen::MatrixXd K0, double explore_scale, double ridge,
           RngStream xi_stream)
      : Q_(std::move(Q)),
        R_(std::move(R)),
        sigma_(sigma),
        explore_scale_(explore_scale),
        xi_(xi_stream),
        estimator_(static_cast<int>(Q_.rows()),
                   static_cast<int>(Q_.rows() + K0.rows()), ridge),
        K_(std::move(K0)) {}

  Eigen::VectorXd action(long long t, const Eigen::VectorXd& x) override {
    if (t == next_epoch_) {
      refit();
      next_epoch_ *= 2;
    }
    const int k = static_cast<int>(K_.rows());
    Eigen::VectorXd u = K_ * x;
    if (!(sigma_ <= kDeterministicSigma)) {
      const double s_t =
          explore_scale_ * std::pow(static_cast<double>(t), -0.25);
      u += s_t * xi_.normal_vector(k);
    }
    return u;
  }

  void observe(long long, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
               const Eigen::VectorXd& x_next) override {
    Eigen::VectorXd z(x.size() + u.size());
    z << x, u;
    estimator_.update(z, x_next);
  }

  const RlsEstimator& estimator() const { return estimator_; }
  const Eigen::MatrixXd& gain() const { return K_; }
  long long failed_refits() const { return failed_refits_; }

 private:
  void refit() {
    const int d = static_cast<int>(Q_.rows());
    const int k = static_cast<int>(estimator_.regressor_dim()) - d;
    try {
      const Eigen::MatrixXd theta = estimator_.estimate();
      const LqrSystem hat(theta.leftCols(d), theta.rightCols(k), Q_, R_,
                          sigma_);
      K_ = optimal_controller(hat).K;
    } catch (const Error&) {
      ++failed_refits_;  // keep the previous gain
    }
  }

  Eigen::MatrixXd Q_, R_;
  double sigma_;
  double explore_scale_;
  RngStream xi_;
  RlsEstimator estimator_;
  Eigen::MatrixXd K_;
  long long next_epoch_ = 64;
  long long failed_refits_ = 0;
};

// ---------------------------------------------------------------------------
// Diagnostics: the concentration events the analysis conditions on.
// ---------------------------------------------------------------------------

enum class AlgKind { a, b };

struct GoodEventReport {
  // Estimation event: self-normalized error within the anytime bound,
  // checked at every phase start (where the learner reads the estimator).
  bool estimation = true;
  double estimation_slack = std::numeric_limits<double>::infinity();
  // State excitation: Gram matrices of the states dominate t sigma^2 / 40.
  bool state_excitation = true;
  double state_excitation_slack = std::numeric_limits<double>::infinity();
  // Process-noise sup-norm bound.
  bool noise_bound = true;
  double noise_slack = std::numeric_limits<double>::infinity();
  // Action-side analogues (warm-up randomization); only set for AlgKind::b.
  bool action_excitation = true;
  double action_excitation_slack = std::numeric_limits<double>::infinity();
  bool action_noise_bound = true;
  double action_noise_slack = std::numeric_limits<double>::infinity();

  bool all() const {
    return estimation && state_excitation && noise_bound && action_excitation &&
           action_noise_bound;
  }
};

struct GoodEventInputs {
  AlgKind kind = AlgKind::a;
  const Trajectory* trajectory = nullptr;
  const LqrSystem* truth = nullptr;
  Eigen::MatrixXd K0;
  LearnerConfig config;
  DerivedParams params;
  // AlgKind::b: key of the warm-up noise stream, replayed to reconstruct the
  // virtual actions K0 x_t + eta_t for every t (they are defined for the
  // whole horizon even though the learner only plays them during warm-up).
  std::uint64_t eta_seed = 0;
  std::uint64_t eta_stream_id = 0;
};

// Offline evaluation of the events the regret analysis conditions on, from a
// recorded trajectory and the ground-truth system. Test-only: experiments
// must not branch on this.
inline GoodEventReport good_event_monitor(const GoodEventInputs& in) {
  if (in.trajectory == nullptr || in.truth == nullptr)
    throw InvalidBound("monitor needs a trajectory and the true system");
  const Trajectory& traj = *in.trajectory;
  const LqrSystem& sys = *in.truth;
  const long long T = traj.horizon();
  const int d = sys.state_dim();
  const int k = sys.input_dim();
  const double sigma = sys.sigma;
  const double log_arg = (in.kind == AlgKind::a ? 3.0 : 4.0);
  GoodEventReport report;

  // Process-noise bound: w_t recovered from the transition.
  double max_w = 0.0;
  for (long long t = 0; t < T; ++t) {
    const Eigen::VectorXd w = traj.states[static_cast<std::size_t>(t) + 1] -
                              sys.A * traj.states[static_cast<std::size_t>(t)] -
                              sys.B * traj.actions[static_cast<std::size_t>(t)];
    max_w = std::max(max_w, w.norm());
  }
  const double w_bound =
      sigma * std::sqrt(15.0 * d * std::log(log_arg * static_cast<double>(T)));
  report.noise_slack = w_bound - max_w;
  report.noise_bound = report.noise_slack >= 0.0;

  // Replayed ridge regression, evaluated at each phase start tau_i. The
  // anytime bound uses delta = T^{-2} / 3 (resp. / 4) folded in as
  // log(3T^3 ...) with d <= T (resp. 4T^3).
  const double theta_frob_sq =
      (in.kind == AlgKind::a ? d : k) * in.config.vartheta * in.config.vartheta;
  RlsEstimator replay(d, in.kind == AlgKind::a ? d : k, in.params.lambda);
  const Eigen::MatrixXd target =
      (in.kind == AlgKind::a ? sys.A : sys.B);
  long long t_next = 1;
  auto feed_until = [&](long long t_end) {
    for (; t_next < t_end; ++t_next) {
      const auto& x = traj.states[static_cast<std::size_t>(t_next) - 1];
      const auto& u = traj.actions[static_cast<std::size_t>(t_next) - 1];
      const auto& xn = traj.states[static_cast<std::size_t>(t_next)];
      if (in.kind == AlgKind::a)
        replay.update(x, xn - sys.B * u);
      else
        replay.update(u, xn - sys.A * x);
    }
  };
  for (long long i = 0; i <= in.params.n_T; ++i) {
    const long long tau = in.params.phase_starts[static_cast<std::size_t>(i)];
    if (tau > T + 1) break;
    feed_until(tau);
    const Eigen::MatrixXd delta = replay.estimate() - target;
    const double lhs = (delta.transpose() * replay.gram() * delta).trace();
    const double rhs = 4.0 * sigma * sigma * d *
                           (std::log(log_arg * std::pow(static_cast<double>(T), 3)) +
                            replay.log_det_ratio()) +
                       2.0 * in.params.lambda * theta_frob_sq;
    report.estimation_slack = std::min(report.estimation_slack, rhs - lhs);
  }
  report.estimation = report.estimation_slack >= 0.0;

  // State excitation. The known-input learner needs prefix Grams at every
  // phase start; the known-dynamics learner needs per-phase window Grams.
  const double floor_rate = sigma * sigma / 40.0;
  if (in.kind == AlgKind::a) {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
    long long t_done = 0;
    for (long long i = 0; i <= in.params.n_T; ++i) {
      const long long tau = in.params.phase_starts[static_cast<std::size_t>(i)];
      for (; t_done < tau - 1 && t_done < T; ++t_done) {
        const auto& x = traj.states[static_cast<std::size_t>(t_done)];
        gram += x * x.transpose();
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram,
                                                        Eigen::EigenvaluesOnly);
      const double slack = es.eigenvalues().minCoeff() -
                           static_cast<double>(tau - 1) * floor_rate;
      report.state_excitation_slack =
          std::min(report.state_excitation_slack, slack);
    }
  } else {
    for (long long i = 1; i <= in.params.n_T; ++i) {
      const long long lo = in.params.phase_starts[static_cast<std::size_t>(i) - 1];
      const long long hi = in.params.phase_starts[static_cast<std::size_t>(i)];
      Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
      for (long long t = lo; t < hi && t <= T; ++t) {
        const auto& x = traj.states[static_cast<std::size_t>(t) - 1];
        gram += x * x.transpose();
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram,
                                                        Eigen::EigenvaluesOnly);
      const double slack = es.eigenvalues().minCoeff() -
                           static_cast<double>(hi - lo) * floor_rate;
      report.state_excitation_slack =
          std::min(report.state_excitation_slack, slack);
    }
  }
  report.state_excitation = report.state_excitation_slack >= 0.0;

  if (in.kind == AlgKind::b) {
    // Virtual actions K0 x_t + eta_t for the full horizon, eta replayed from
    // its dedicated stream.
    RngStream eta(in.eta_seed, in.eta_stream_id);
    double max_eta = 0.0;
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(k, k);
    long long t_done = 0;
    for (long long i = 0; i <= in.params.n_T; ++i) {
      const long long tau = in.params.phase_starts[static_cast<std::size_t>(i)];
      for (; t_done < tau - 1 && t_done < T; ++t_done) {
        const Eigen::VectorXd eta_t = sigma * eta.normal_vector(k);
        max_eta = std::max(max_eta, eta_t.norm());
        const Eigen::VectorXd v =
            in.K0 * traj.states[static_cast<std::size_t>(t_done)] + eta_t;
        gram += v * v.transpose();
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram,
                                                        Eigen::EigenvaluesOnly);
      const double slack = es.eigenvalues().minCoeff() -
                           static_cast<double>(tau - 1) * floor_rate;
      report.action_excitation_slack =
          std::min(report.action_excitation_slack, slack);
    }
    report.action_excitation = report.action_excitation_slack >= 0.0;
    // The noise-bound event covers the whole horizon, not just warm-up.
    for (; t_done < T; ++t_done)
      max_eta = std::max(max_eta, (sigma * eta.normal_vector(k)).norm());
    const double eta_bound =
        sigma *
        std::sqrt(15.0 * d * std::log(4.0 * static_cast<double>(T)));
    report.action_noise_slack = eta_bound - max_eta;
    report.action_noise_bound = report.action_noise_slack >= 0.0;
  }
  return report;
}

}  // namespace olqr
