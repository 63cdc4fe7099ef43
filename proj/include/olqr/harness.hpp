#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "olqr/errors.hpp"
#include "olqr/fits.hpp"
#include "olqr/learners.hpp"
#include "olqr/parallel.hpp"
#include "olqr/riccati.hpp"
#include "olqr/simulate.hpp"
#include "olqr/streams.hpp"
#include "olqr/system.hpp"

namespace olqr {

// Fixed two-state benchmark: open-loop stable (zero gain works as the safe
// initial policy) but with a clearly suboptimal open loop, and an optimal
// gain with two well-separated nonzero singular values.
inline LqrSystem make_benchmark2x2() {
  Eigen::MatrixXd A(2, 2), B(2, 2);
  A << 0.60, 0.20,
       0.00, 0.50;
  B << 1.00, 0.00,
       0.10, 0.80;
  return LqrSystem(A, B, Eigen::MatrixXd::Identity(2, 2),
                   Eigen::MatrixXd::Identity(2, 2), 1.0);
}

// Rejection sampling: spectral radius scaled into (0.4, 0.9), unit costs,
// accepted once the optimal gain exists and the zero gain's steady-state
// cost is within a factor 20 of optimal.
inline LqrSystem make_random_system(int d, int k, std::uint64_t gen_seed) {
  if (d < 1 || k < 1) throw ConfigError("system dimensions must be positive");
  RngStream g(gen_seed, make_stream_id(0, 0, Purpose::generator));
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Eigen::MatrixXd A(d, d), B(d, k);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) A(i, j) = g.normal();
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < k; ++j) B(i, j) = g.normal();
    const double rho = spectral_radius(A);
    if (rho < 1e-6) continue;
    A *= (0.4 + 0.5 * g.uniform()) / rho;
    LqrSystem sys(A, B, Eigen::MatrixXd::Identity(d, d),
                  Eigen::MatrixXd::Identity(k, k), 1.0);
    try {
      const RiccatiSolution sol = solve_dare(sys);
      const double j_star = sys.sigma * sys.sigma * sol.P.trace();
      const Controller zero{Eigen::MatrixXd::Zero(k, d)};
      const double j_zero = infinite_horizon_cost(sys, zero);
      if (j_zero / j_star <= 20.0) return sys;
    } catch (const Error&) {
      continue;
    }
  }
  throw NonConvergence("random system generation kept rejecting");
}

struct SystemSpec {
  std::string kind = "benchmark2x2";  // benchmark2x2 | random | explicit
  // kind == explicit:
  Eigen::MatrixXd A, B, Q, R;
  double sigma = 1.0;
  // kind == random:
  int d = 2, k = 2;
  std::uint64_t gen_seed = 0;
};

inline LqrSystem build_system(const SystemSpec& spec) {
  if (spec.kind == "benchmark2x2") return make_benchmark2x2();
  if (spec.kind == "random")
    return make_random_system(spec.d, spec.k, spec.gen_seed);
  if (spec.kind == "explicit")
    return LqrSystem(spec.A, spec.B, spec.Q, spec.R, spec.sigma);
  throw ConfigError("unknown system kind: " + spec.kind);
}

struct LearnerSpec {
  std::string kind;  // alg_a | alg_b | ce_eps_greedy | oracle | fixed_k
  std::string name;  // CSV label; defaults to kind
  LearnerConfig constants;      // alg_a / alg_b (T and sigma set per trial)
  Eigen::MatrixXd K0;           // safe initial gain; empty = zero
  Eigen::MatrixXd fixed_gain;   // fixed_k only
  double explore_scale = 1.0;   // ce_eps_greedy: sigma_t = c t^{-1/4}
  double ridge = 1.0;           // ce_eps_greedy regularizer

  std::string label() const { return name.empty() ? kind : name; }
};

struct ExperimentConfig {
  SystemSpec system;
  std::vector<LearnerSpec> learners;
  std::vector<long long> T_grid;
  long long n_seeds = 1;
  std::uint64_t base_seed = 0;
  std::vector<long long> checkpoints;  // empty: powers of two, plus T
  int workers = 1;
};

struct CheckpointRow {
  std::string learner;
  long long T = 0;
  long long seed = 0;
  long long checkpoint = 0;
  double cum_cost = 0.0;
  double cum_regret = 0.0;
  bool aborted = false;  // abort happened at or before this checkpoint
};

struct TrialSummary {
  std::string learner;
  long long T = 0;
  long long seed = 0;
  bool failed = false;   // overflow guard tripped; excluded from curves
  bool aborted = false;
  long long abort_time = -1;
  std::string abort_reason;
  long long warmup_done_at = -1;  // alg_b only
  double final_regret = 0.0;
};

struct RunCell {
  std::string learner;
  long long T = 0;
  long long n_ok = 0;
  long long n_aborted = 0;
  long long n_failed = 0;
  double mean_regret = 0.0;
  double stderr_regret = 0.0;
};

struct RunResult {
  LqrSystem system;
  double j_star = 0.0;
  Eigen::MatrixXd k_star;
  std::vector<CheckpointRow> rows;      // deterministic order
  std::vector<TrialSummary> trials;
  std::vector<RunCell> cells;           // per (learner, T)
  // regrets[learner][T index][seed]; NaN marks a failed trial
  std::vector<std::vector<std::vector<double>>> regrets;
};

inline std::vector<long long> default_checkpoints(long long T) {
  std::vector<long long> cps;
  for (long long c = 1; c < T && c <= (1ll << 62); c *= 2) cps.push_back(c);
  cps.push_back(T);
  return cps;
}

namespace detail {

inline std::unique_ptr<Policy> build_policy(const LearnerSpec& spec,
                                            const LqrSystem& sys,
                                            const Eigen::MatrixXd& k_star,
                                            std::uint64_t base_seed, long long T,
                                            long long seed) {
  const int d = sys.state_dim();
  const int k = sys.input_dim();
  Eigen::MatrixXd K0 =
      spec.K0.size() > 0 ? spec.K0 : Eigen::MatrixXd::Zero(k, d).eval();
  if (K0.rows() != k || K0.cols() != d)
    throw ConfigError("initial gain must map states to inputs");
  if (spec.kind == "oracle") return std::make_unique<LinearPolicy>(k_star);
  if (spec.kind == "fixed_k") {
    if (spec.fixed_gain.rows() != k || spec.fixed_gain.cols() != d)
      throw ConfigError("fixed_k learner needs a gain mapping states to inputs");
    return std::make_unique<LinearPolicy>(spec.fixed_gain);
  }
  if (spec.kind == "ce_eps_greedy")
    return std::make_unique<CePolicy>(
        sys.Q, sys.R, sys.sigma, K0, spec.explore_scale, spec.ridge,
        make_stream(base_seed, T, seed, Purpose::action_noise));
  LearnerConfig cfg = spec.constants;
  cfg.T = T;
  cfg.sigma = sys.sigma;
  if (spec.kind == "alg_a")
    return std::make_unique<AlgorithmAPolicy>(sys.B, sys.Q, sys.R, sys.sigma,
                                              K0, derive_params_alg_a(cfg, d));
  if (spec.kind == "alg_b")
    return std::make_unique<AlgorithmBPolicy>(
        sys.A, sys.Q, sys.R, sys.sigma, K0, derive_params_alg_b(cfg, d, k),
        make_stream(base_seed, T, seed, Purpose::action_noise));
  throw ConfigError("unknown learner kind: " + spec.kind);
}

}  // namespace detail

// Runs every (learner, horizon, seed) trial and collects checkpointed
// regret curves. Trials only touch their own output slot, so the result is
// byte-identical for any worker count. The optimal steady-state cost is
// computed once per system as sigma^2 tr(P*).
inline RunResult run_experiment(const ExperimentConfig& config) {
  if (config.learners.empty() || config.T_grid.empty() || config.n_seeds < 1)
    throw ConfigError("experiment needs learners, horizons and seeds");
  for (std::size_t i = 0; i < config.T_grid.size(); ++i) {
    if (config.T_grid[i] < 1)
      throw ConfigError("horizons must be positive");
    if (i > 0 && config.T_grid[i] <= config.T_grid[i - 1])
      throw ConfigError("T_grid must be strictly increasing");
  }
  for (long long c : config.checkpoints)
    if (c > config.T_grid.back())
      throw ConfigError("checkpoint beyond the largest horizon");
  RunResult result;
  result.system = build_system(config.system);
  const LqrSystem& sys = result.system;
  const RiccatiSolution star = solve_dare(sys, 1e-12);
  result.k_star = optimal_controller(sys, star).K;
  const double var = sys.deterministic() ? 0.0 : sys.sigma * sys.sigma;
  result.j_star = var * star.P.trace();

  const std::size_t n_learners = config.learners.size();
  const std::size_t n_T = config.T_grid.size();
  const std::size_t n_seeds = static_cast<std::size_t>(config.n_seeds);
  struct TrialSlot {
    std::vector<CheckpointRow> rows;
    TrialSummary summary;
  };
  std::vector<TrialSlot> slots(n_learners * n_T * n_seeds);

  parallel_for_index(slots.size(), config.workers, [&](std::size_t idx) {
    const std::size_t li = idx / (n_T * n_seeds);
    const std::size_t ti = (idx / n_seeds) % n_T;
    const long long seed = static_cast<long long>(idx % n_seeds);
    const LearnerSpec& spec = config.learners[li];
    const long long T = config.T_grid[ti];
    TrialSlot& slot = slots[idx];
    slot.summary.learner = spec.label();
    slot.summary.T = T;
    slot.summary.seed = seed;

    std::vector<long long> cps;
    if (config.checkpoints.empty()) {
      cps = default_checkpoints(T);
    } else {
      for (long long c : config.checkpoints)
        if (c >= 1 && c <= T) cps.push_back(c);
      std::sort(cps.begin(), cps.end());
      cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
      if (cps.empty() || cps.back() != T) cps.push_back(T);
    }

    auto policy = detail::build_policy(spec, sys, result.k_star,
                                       config.base_seed, T, seed);
    RngStream noise =
        make_stream(config.base_seed, T, seed, Purpose::process_noise);
    try {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.state_dim());
      double cum_cost = 0.0;
      std::size_t next_cp = 0;
      for (long long t = 1; t <= T; ++t) {
        if (x.norm() > kStateNormGuard)
          throw NumericOverflow("state norm exceeded guard");
        const Eigen::VectorXd u = policy->action(t, x);
        const Eigen::VectorXd xn = step(sys, x, u, noise);
        policy->observe(t, x, u, xn);
        cum_cost += instantaneous_cost(sys, x, u);
        x = xn;
        while (next_cp < cps.size() && cps[next_cp] == t) {
          const auto abort = policy->abort_info();
          CheckpointRow row;
          row.learner = spec.label();
          row.T = T;
          row.seed = seed;
          row.checkpoint = t;
          row.cum_cost = cum_cost;
          row.cum_regret = cum_cost - static_cast<double>(t) * result.j_star;
          row.aborted = abort.has_value() && abort->time <= t;
          slot.rows.push_back(std::move(row));
          ++next_cp;
        }
      }
      slot.summary.final_regret =
          cum_cost - static_cast<double>(T) * result.j_star;
    } catch (const NumericOverflow&) {
      slot.summary.failed = true;
      slot.rows.clear();
    }
    if (const auto abort = policy->abort_info()) {
      slot.summary.aborted = true;
      slot.summary.abort_time = abort->time;
      slot.summary.abort_reason = abort->reason;
    }
    if (const auto* alg_b = dynamic_cast<const AlgorithmBPolicy*>(policy.get()))
      slot.summary.warmup_done_at = alg_b->warmup_done_at();
  });

  result.regrets.assign(
      n_learners,
      std::vector<std::vector<double>>(
          n_T, std::vector<double>(n_seeds,
                                   std::numeric_limits<double>::quiet_NaN())));
  for (std::size_t li = 0; li < n_learners; ++li) {
    for (std::size_t ti = 0; ti < n_T; ++ti) {
      RunCell cell;
      cell.learner = config.learners[li].label();
      cell.T = config.T_grid[ti];
      double sum = 0.0, sum_sq = 0.0;
      for (std::size_t s = 0; s < n_seeds; ++s) {
        TrialSlot& slot = slots[(li * n_T + ti) * n_seeds + s];
        result.trials.push_back(slot.summary);
        if (slot.summary.failed) {
          ++cell.n_failed;
          continue;
        }
        result.regrets[li][ti][s] = slot.summary.final_regret;
        sum += slot.summary.final_regret;
        sum_sq += slot.summary.final_regret * slot.summary.final_regret;
        ++cell.n_ok;
        if (slot.summary.aborted) ++cell.n_aborted;
        for (auto& row : slot.rows) result.rows.push_back(std::move(row));
      }
      if (cell.n_ok > 0) cell.mean_regret = sum / static_cast<double>(cell.n_ok);
      if (cell.n_ok > 1) {
        const double v = (sum_sq - sum * sum / static_cast<double>(cell.n_ok)) /
                         static_cast<double>(cell.n_ok - 1);
        cell.stderr_regret =
            std::sqrt(std::max(0.0, v) / static_cast<double>(cell.n_ok));
      }
      result.cells.push_back(cell);
    }
  }
  std::sort(result.rows.begin(), result.rows.end(),
            [](const CheckpointRow& a, const CheckpointRow& b) {
              return std::tie(a.learner, a.T, a.seed, a.checkpoint) <
                     std::tie(b.learner, b.T, b.seed, b.checkpoint);
            });
  return result;
}

// ---------------------------------------------------------------------------
// Curve CSV: header `learner,T,seed,checkpoint,cum_cost,cum_regret,aborted`,
// doubles at full precision, so identical results give identical bytes.
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_curves_csv(std::ostream& out,
                             const std::vector<CheckpointRow>& rows) {
  out << "learner,T,seed,checkpoint,cum_cost,cum_regret,aborted\n";
  for (const auto& r : rows) {
    out << r.learner << ',' << r.T << ',' << r.seed << ',' << r.checkpoint
        << ',' << format_double(r.cum_cost) << ',' << format_double(r.cum_regret)
        << ',' << (r.aborted ? 1 : 0) << '\n';
  }
}

inline void write_curves_csv(const std::string& path,
                             const std::vector<CheckpointRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  write_curves_csv(out, rows);
}

inline std::vector<CheckpointRow> read_curves_csv(std::istream& in) {
  std::vector<CheckpointRow> rows;
  std::string line;
  if (!std::getline(in, line) ||
      line != "learner,T,seed,checkpoint,cum_cost,cum_regret,aborted")
    throw ConfigError("unrecognized curve CSV header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    CheckpointRow row;
    auto next = [&]() {
      if (!std::getline(ss, field, ','))
        throw ConfigError("short row in curve CSV");
      return field;
    };
    row.learner = next();
    row.T = std::stoll(next());
    row.seed = std::stoll(next());
    row.checkpoint = std::stoll(next());
    row.cum_cost = std::stod(next());
    row.cum_regret = std::stod(next());
    row.aborted = std::stoi(next()) != 0;
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<CheckpointRow> read_curves_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open: " + path);
  return read_curves_csv(in);
}

}  // namespace olqr
