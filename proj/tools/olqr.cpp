// Command-line front end: Riccati solves, single rollouts, regret experiments,
// the hidden-sign scaling experiment, curve fitting and perturbation
// calibration. Configs are JSON mirroring the library structs; outputs are
// CSV (curves, trajectories) and JSON (summaries, fits).
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "olqr/olqr.hpp"

using nlohmann::json;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw olqr::ConfigError("cannot open config file: " + path);
  json j;
  in >> j;
  return j;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    throw olqr::ConfigError(name + " must be a 2D array");
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().size();
  Eigen::MatrixXd M(static_cast<int>(rows), static_cast<int>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw olqr::ConfigError(name + " must be rectangular");
    for (std::size_t c = 0; c < cols; ++c)
      M(static_cast<int>(i), static_cast<int>(c)) = j[i][c].get<double>();
  }
  return M;
}

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (int c = 0; c < M.cols(); ++c) row.push_back(M(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

olqr::Mode mode_from_string(const std::string& s) {
  if (s == "theoretical") return olqr::Mode::theoretical;
  if (s == "practical") return olqr::Mode::practical;
  throw olqr::ConfigError("mode must be 'theoretical' or 'practical'");
}

olqr::LearnerConfig constants_from_json(const json& j) {
  olqr::LearnerConfig cfg;
  cfg.alpha0 = j.value("alpha0", cfg.alpha0);
  cfg.alpha1 = j.value("alpha1", cfg.alpha1);
  cfg.vartheta = j.value("vartheta", cfg.vartheta);
  cfg.nu = j.value("nu", cfg.nu);
  cfg.nu0 = j.value("nu0", cfg.nu0);
  cfg.C0 = j.value("C0", cfg.C0);
  cfg.eps0 = j.value("eps0", cfg.eps0);
  cfg.practical_scale = j.value("practical_scale", cfg.practical_scale);
  if (j.contains("mode")) cfg.mode = mode_from_string(j.at("mode").get<std::string>());
  return cfg;
}

olqr::LearnerSpec learner_from_json(const json& j) {
  olqr::LearnerSpec spec;
  spec.kind = j.at("kind").get<std::string>();
  spec.name = j.value("name", std::string());
  if (j.contains("constants")) spec.constants = constants_from_json(j.at("constants"));
  if (j.contains("K0")) spec.K0 = matrix_from_json(j.at("K0"), "K0");
  if (j.contains("gain")) spec.fixed_gain = matrix_from_json(j.at("gain"), "gain");
  spec.explore_scale = j.value("explore_scale", spec.explore_scale);
  spec.ridge = j.value("ridge", spec.ridge);
  return spec;
}

olqr::SystemSpec system_from_json(const json& j) {
  olqr::SystemSpec spec;
  spec.kind = j.value("kind", spec.kind);
  if (spec.kind == "explicit") {
    spec.A = matrix_from_json(j.at("A"), "A");
    spec.B = matrix_from_json(j.at("B"), "B");
    spec.Q = matrix_from_json(j.at("Q"), "Q");
    spec.R = matrix_from_json(j.at("R"), "R");
    spec.sigma = j.value("sigma", 1.0);
  } else if (spec.kind == "random") {
    spec.d = j.value("d", spec.d);
    spec.k = j.value("k", spec.k);
    spec.gen_seed = j.value("gen_seed", spec.gen_seed);
  }
  return spec;
}

olqr::ExperimentConfig experiment_from_json(const json& j) {
  olqr::ExperimentConfig cfg;
  cfg.system = system_from_json(j.at("system"));
  for (const auto& lj : j.at("learners")) cfg.learners.push_back(learner_from_json(lj));
  cfg.T_grid = j.at("T_grid").get<std::vector<long long>>();
  cfg.n_seeds = j.value("n_seeds", cfg.n_seeds);
  cfg.base_seed = j.value("base_seed", cfg.base_seed);
  if (j.contains("checkpoints"))
    cfg.checkpoints = j.at("checkpoints").get<std::vector<long long>>();
  cfg.workers = j.value("workers", cfg.workers);
  return cfg;
}

json system_to_json(const olqr::LqrSystem& sys) {
  return json{{"A", matrix_to_json(sys.A)}, {"B", matrix_to_json(sys.B)},
              {"Q", matrix_to_json(sys.Q)}, {"R", matrix_to_json(sys.R)},
              {"sigma", sys.sigma}};
}

json params_to_json(const olqr::DerivedParams& p) {
  return json{{"kappa0", p.kappa0}, {"kappa", p.kappa},   {"gamma", p.gamma},
              {"x_b", p.x_b},       {"lambda", p.lambda}, {"mu0", p.mu0},
              {"tau0", p.tau0},     {"n_T", p.n_T},
              {"phase_starts", p.phase_starts}};
}

json model_fit_to_json(const olqr::ModelFit& m) {
  return json{{"coefficient", m.coefficient},
              {"intercept", m.intercept},
              {"r_squared", m.r_squared}};
}

json exponent_fit_to_json(const olqr::ExponentFit& f) {
  return json{{"beta", f.beta},       {"intercept", f.intercept},
              {"ci_low", f.ci_low},   {"ci_high", f.ci_high},
              {"shift", f.shift},     {"n_boot", f.n_boot}};
}

// Mean regret per horizon, skipping failed (NaN) trials.
std::vector<double> regret_means(const std::vector<std::vector<double>>& regrets) {
  std::vector<double> means;
  for (const auto& row : regrets) {
    double sum = 0.0;
    long long n = 0;
    for (double r : row) {
      if (std::isnan(r)) continue;
      sum += r;
      ++n;
    }
    if (n == 0) throw olqr::InvalidBound("a horizon lost all its trials");
    means.push_back(sum / static_cast<double>(n));
  }
  return means;
}

void ensure_out_dir(const std::string& out) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw olqr::ConfigError("cannot create output directory: " + out);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw olqr::ConfigError("cannot open for writing: " + path);
  out << content;
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<int> workers;
  bool dump_trajectory = false;
};

void apply_mode_override(olqr::LearnerSpec& spec, const CommonFlags& flags) {
  if (flags.mode) spec.constants.mode = mode_from_string(*flags.mode);
}

// ---------------------------------------------------------------------------
// dare: solve the steady-state equation and print P, K, J.
// ---------------------------------------------------------------------------

int cmd_dare(const CommonFlags& flags) {
  const json cfg = load_json(flags.config_path);
  const olqr::LqrSystem sys = olqr::build_system(system_from_json(cfg.at("system")));
  const double tol = cfg.value("tolerance", 1e-10);
  const long long max_iter = cfg.value("max_iterations", 100000ll);
  const auto sol = olqr::solve_dare(sys, tol, max_iter);
  const auto ctrl = olqr::optimal_controller(sys, sol);
  const double var = sys.deterministic() ? 0.0 : sys.sigma * sys.sigma;
  json out{{"P", matrix_to_json(sol.P)},
           {"K", matrix_to_json(ctrl.K)},
           {"j_star", var * sol.P.trace()},
           {"residual", sol.residual},
           {"iterations", sol.iterations},
           {"closed_loop_radius", olqr::spectral_radius(sys.A + sys.B * ctrl.K)}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// simulate: one rollout of one learner, optional trajectory dump.
// ---------------------------------------------------------------------------

void write_trajectory_csv(const std::string& path, const olqr::Trajectory& traj,
                          const olqr::LqrSystem& sys) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw olqr::ConfigError("cannot open for writing: " + path);
  out << "t";
  for (int i = 0; i < sys.state_dim(); ++i) out << ",x" << i;
  for (int i = 0; i < sys.input_dim(); ++i) out << ",u" << i;
  out << ",cost\n";
  for (long long t = 1; t <= traj.horizon(); ++t) {
    out << t;
    const auto& x = traj.states[static_cast<std::size_t>(t) - 1];
    const auto& u = traj.actions[static_cast<std::size_t>(t) - 1];
    for (int i = 0; i < x.size(); ++i) out << ',' << olqr::format_double(x(i));
    for (int i = 0; i < u.size(); ++i) out << ',' << olqr::format_double(u(i));
    out << ',' << olqr::format_double(traj.costs[static_cast<std::size_t>(t) - 1])
        << '\n';
  }
}

int cmd_simulate(const CommonFlags& flags) {
  const json cfg = load_json(flags.config_path);
  const olqr::LqrSystem sys = olqr::build_system(system_from_json(cfg.at("system")));
  olqr::LearnerSpec spec = learner_from_json(cfg.at("learner"));
  apply_mode_override(spec, flags);
  const long long T = cfg.at("T").get<long long>();
  const std::uint64_t base_seed = flags.seed.value_or(cfg.value("base_seed", 0ull));

  const auto star = olqr::solve_dare(sys, 1e-12);
  const auto k_star = olqr::optimal_controller(sys, star).K;
  const double var = sys.deterministic() ? 0.0 : sys.sigma * sys.sigma;
  const double j_star = var * star.P.trace();

  auto policy = olqr::detail::build_policy(spec, sys, k_star, base_seed, T, 0);
  auto noise = olqr::make_stream(base_seed, T, 0, olqr::Purpose::process_noise);
  const auto traj = olqr::rollout(sys, *policy, T, noise);

  json out{{"learner", spec.label()},
           {"T", T},
           {"base_seed", base_seed},
           {"j_star", j_star},
           {"total_cost", traj.total_cost()},
           {"regret", traj.total_cost() - static_cast<double>(T) * j_star},
           {"x_final", vector_to_json(traj.states.back())},
           {"aborted", traj.abort.has_value()}};
  if (traj.abort) {
    out["abort_time"] = traj.abort->time;
    out["abort_reason"] = traj.abort->reason;
  }
  if (const auto* alg_b = dynamic_cast<const olqr::AlgorithmBPolicy*>(policy.get()))
    out["warmup_done_at"] = alg_b->warmup_done_at();
  if (flags.dump_trajectory) {
    ensure_out_dir(flags.out_dir);
    const std::string path = flags.out_dir + "/trajectory.csv";
    write_trajectory_csv(path, traj, sys);
    out["trajectory"] = path;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// run: a full regret experiment from a config file.
// ---------------------------------------------------------------------------

int cmd_run(const CommonFlags& flags) {
  const json cfg = load_json(flags.config_path);
  olqr::ExperimentConfig config = experiment_from_json(cfg);
  if (flags.seed) config.base_seed = *flags.seed;
  if (flags.workers) config.workers = *flags.workers;
  for (auto& spec : config.learners) apply_mode_override(spec, flags);

  const auto result = olqr::run_experiment(config);

  ensure_out_dir(flags.out_dir);
  const std::string curves_path = flags.out_dir + "/curves.csv";
  olqr::write_curves_csv(curves_path, result.rows);

  json summary{{"j_star", result.j_star},
               {"k_star", matrix_to_json(result.k_star)},
               {"system", system_to_json(result.system)},
               {"base_seed", config.base_seed},
               {"T_grid", config.T_grid},
               {"n_seeds", config.n_seeds},
               {"note", "benchmark systems and horizon grids are artifact "
                        "choices of this repository"}};
  json cells = json::array();
  for (const auto& c : result.cells)
    cells.push_back(json{{"learner", c.learner},
                         {"T", c.T},
                         {"n_ok", c.n_ok},
                         {"n_aborted", c.n_aborted},
                         {"n_failed", c.n_failed},
                         {"mean_regret", c.mean_regret},
                         {"stderr_regret", c.stderr_regret}});
  summary["cells"] = std::move(cells);
  json trials = json::array();
  for (const auto& t : result.trials) {
    json row{{"learner", t.learner}, {"T", t.T},
             {"seed", t.seed},       {"failed", t.failed},
             {"aborted", t.aborted}, {"final_regret", t.final_regret}};
    if (t.aborted) {
      row["abort_time"] = t.abort_time;
      row["abort_reason"] = t.abort_reason;
    }
    if (t.warmup_done_at >= 0) row["warmup_done_at"] = t.warmup_done_at;
    trials.push_back(std::move(row));
  }
  summary["trials"] = std::move(trials);

  // Schedule metadata for the phased learners, per horizon.
  json derived = json::object();
  for (const auto& spec : config.learners) {
    if (spec.kind != "alg_a" && spec.kind != "alg_b") continue;
    json per_T = json::object();
    for (long long T : config.T_grid) {
      olqr::LearnerConfig c = spec.constants;
      c.T = T;
      c.sigma = result.system.sigma;
      const auto p = spec.kind == "alg_a"
                         ? olqr::derive_params_alg_a(c, result.system.state_dim())
                         : olqr::derive_params_alg_b(c, result.system.state_dim(),
                                                     result.system.input_dim());
      per_T[std::to_string(T)] = params_to_json(p);
    }
    derived[spec.label()] = std::move(per_T);
  }
  summary["derived_params"] = std::move(derived);

  // Exponent and model fits per learner once the grid supports them.
  if (config.T_grid.size() >= 3) {
    json fits = json::object();
    for (std::size_t li = 0; li < config.learners.size(); ++li) {
      auto boot = olqr::make_stream(config.base_seed, 0,
                                    static_cast<long long>(li),
                                    olqr::Purpose::bootstrap);
      json f;
      try {
        f = exponent_fit_to_json(
            olqr::fit_exponent(config.T_grid, result.regrets[li], boot, 1000));
        const auto means = regret_means(result.regrets[li]);
        f["log_squared_model"] =
            model_fit_to_json(olqr::fit_log_squared(config.T_grid, means));
        f["sqrt_model"] = model_fit_to_json(olqr::fit_sqrt(config.T_grid, means));
      } catch (const olqr::Error& e) {
        f = json{{"error", e.what()}};
      }
      fits[config.learners[li].label()] = std::move(f);
    }
    summary["fits"] = std::move(fits);
  }

  const std::string summary_path = flags.out_dir + "/summary.json";
  write_text_file(summary_path, summary.dump(2) + "\n");
  std::cout << json{{"curves", curves_path}, {"summary", summary_path}}.dump(2)
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// lower-bound: the hidden-sign scalar experiment.
// ---------------------------------------------------------------------------

olqr::LowerBoundPolicyFactory lower_bound_factory(const olqr::LearnerSpec& spec) {
  // Honest learners read only the public side of the instance (a, sigma, T);
  // the hidden input coefficient never reaches them.
  if (spec.kind == "oracle") {
    return [](const olqr::LowerBoundInstance& inst, std::uint64_t, long long,
              long long) -> std::unique_ptr<olqr::Policy> {
      Eigen::MatrixXd K(1, 1);
      K << inst.k_star;
      return std::make_unique<olqr::LinearPolicy>(K);
    };
  }
  if (spec.kind == "fixed_k") {
    if (spec.fixed_gain.rows() != 1 || spec.fixed_gain.cols() != 1)
      throw olqr::ConfigError("fixed_k on the scalar family needs a 1x1 gain");
    const Eigen::MatrixXd K = spec.fixed_gain;
    return [K](const olqr::LowerBoundInstance&, std::uint64_t, long long,
               long long) -> std::unique_ptr<olqr::Policy> {
      return std::make_unique<olqr::LinearPolicy>(K);
    };
  }
  if (spec.kind == "ce_eps_greedy") {
    const double explore = spec.explore_scale;
    const double ridge = spec.ridge;
    return [explore, ridge](const olqr::LowerBoundInstance& inst,
                            std::uint64_t base_seed, long long T,
                            long long seed) -> std::unique_ptr<olqr::Policy> {
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(1, 1);
      return std::make_unique<olqr::CePolicy>(
          eye, eye, inst.sigma, Eigen::MatrixXd::Zero(1, 1), explore, ridge,
          olqr::make_stream(base_seed, T, seed, olqr::Purpose::action_noise));
    };
  }
  if (spec.kind == "alg_b") {
    const olqr::LearnerConfig constants = spec.constants;
    return [constants](const olqr::LowerBoundInstance& inst,
                       std::uint64_t base_seed, long long T,
                       long long seed) -> std::unique_ptr<olqr::Policy> {
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(1, 1);
      Eigen::MatrixXd A(1, 1);
      A << inst.a;
      olqr::LearnerConfig cfg = constants;
      cfg.T = T;
      cfg.sigma = inst.sigma;
      return std::make_unique<olqr::AlgorithmBPolicy>(
          A, eye, eye, inst.sigma, Eigen::MatrixXd::Zero(1, 1),
          olqr::derive_params_alg_b(cfg, 1, 1),
          olqr::make_stream(base_seed, T, seed, olqr::Purpose::action_noise));
    };
  }
  throw olqr::ConfigError("unsupported learner for the scalar family: " +
                          spec.kind);
}

int cmd_lower_bound(const CommonFlags& flags) {
  const json cfg = load_json(flags.config_path);
  olqr::LearnerSpec spec = learner_from_json(cfg.at("learner"));
  apply_mode_override(spec, flags);
  const auto T_grid = cfg.at("T_grid").get<std::vector<long long>>();
  const long long n_seeds = cfg.value("n_seeds", 1ll);
  const double sigma = cfg.value("sigma", 1.0);
  const std::uint64_t base_seed = flags.seed.value_or(cfg.value("base_seed", 0ull));
  const int workers = flags.workers.value_or(cfg.value("workers", 1));

  const auto result = olqr::lower_bound_experiment(
      lower_bound_factory(spec), T_grid, n_seeds, sigma, base_seed, workers);

  ensure_out_dir(flags.out_dir);
  const std::string csv_path = flags.out_dir + "/lower_bound.csv";
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw olqr::ConfigError("cannot open for writing: " + csv_path);
    out << "T,seed,regret,failed\n";
    for (std::size_t ti = 0; ti < T_grid.size(); ++ti)
      for (long long s = 0; s < n_seeds; ++s) {
        const double r = result.regrets[ti][static_cast<std::size_t>(s)];
        out << T_grid[ti] << ',' << s << ',' << olqr::format_double(r) << ','
            << (std::isnan(r) ? 1 : 0) << '\n';
      }
  }

  json summary{{"learner", spec.label()},
               {"sigma", sigma},
               {"base_seed", base_seed},
               {"T_grid", T_grid},
               {"n_seeds", n_seeds}};
  json cells = json::array();
  for (const auto& c : result.cells)
    cells.push_back(json{{"T", c.T},
                         {"n_seeds", c.n_seeds},
                         {"n_failed", c.n_failed},
                         {"mean_regret", c.mean_regret},
                         {"stderr_regret", c.stderr_regret}});
  summary["cells"] = std::move(cells);
  if (T_grid.size() >= 3) {
    auto boot = olqr::make_stream(base_seed, 0, 0, olqr::Purpose::bootstrap);
    try {
      summary["fit"] = exponent_fit_to_json(
          olqr::fit_exponent(T_grid, result.regrets, boot, 1000));
    } catch (const olqr::Error& e) {
      summary["fit"] = json{{"error", e.what()}};
    }
  }
  const std::string summary_path = flags.out_dir + "/lower_bound_summary.json";
  write_text_file(summary_path, summary.dump(2) + "\n");
  std::cout << json{{"curves", csv_path}, {"summary", summary_path}}.dump(2)
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fit: exponent and model fits from a previously written curve CSV.
// ---------------------------------------------------------------------------

int cmd_fit(const std::string& curves_path, const std::string& learner_filter,
            const CommonFlags& flags) {
  const auto rows = olqr::read_curves_csv(curves_path);
  // Final-checkpoint regrets per learner: rows with checkpoint == T.
  std::map<std::string, std::map<long long, std::map<long long, double>>> final_regret;
  std::set<long long> seeds_seen;
  for (const auto& row : rows) {
    if (row.checkpoint != row.T) continue;
    final_regret[row.learner][row.T][row.seed] = row.cum_regret;
    seeds_seen.insert(row.seed);
  }
  if (final_regret.empty())
    throw olqr::ConfigError("no final-checkpoint rows in " + curves_path);
  const std::size_t n_seeds = static_cast<std::size_t>(*seeds_seen.rbegin()) + 1;

  json out = json::object();
  for (const auto& [learner, by_T] : final_regret) {
    if (!learner_filter.empty() && learner != learner_filter) continue;
    std::vector<long long> T_grid;
    std::vector<std::vector<double>> regrets;
    for (const auto& [T, by_seed] : by_T) {
      T_grid.push_back(T);
      std::vector<double> row(n_seeds, std::numeric_limits<double>::quiet_NaN());
      for (const auto& [seed, r] : by_seed)
        row[static_cast<std::size_t>(seed)] = r;
      regrets.push_back(std::move(row));
    }
    json f{{"T_grid", T_grid}};
    if (T_grid.size() < 3) {
      f["error"] = "fewer than 3 horizons; no fit";
    } else {
      auto boot = olqr::make_stream(flags.seed.value_or(0), 0, 0,
                                    olqr::Purpose::bootstrap);
      f.update(exponent_fit_to_json(
          olqr::fit_exponent(T_grid, regrets, boot, 1000)));
      const auto means = regret_means(regrets);
      f["means"] = means;
      f["log_squared_model"] =
          model_fit_to_json(olqr::fit_log_squared(T_grid, means));
      f["sqrt_model"] = model_fit_to_json(olqr::fit_sqrt(T_grid, means));
    }
    out[learner] = std::move(f);
  }
  if (out.empty())
    throw olqr::ConfigError("no curves matched learner filter: " + learner_filter);
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// calibrate: perturbation constants (C0, eps0) for a system.
// ---------------------------------------------------------------------------

int cmd_calibrate(const CommonFlags& flags) {
  const json cfg = load_json(flags.config_path);
  const olqr::LqrSystem sys = olqr::build_system(system_from_json(cfg.at("system")));
  std::vector<double> grid = olqr::default_eps_grid();
  if (cfg.contains("eps_grid")) grid = cfg.at("eps_grid").get<std::vector<double>>();
  const int n_samples = cfg.value("n_samples", 25);
  const std::uint64_t base_seed = flags.seed.value_or(cfg.value("base_seed", 0ull));
  olqr::RngStream rng(base_seed,
                      olqr::make_stream_id(0, 0, olqr::Purpose::calibration));
  const auto cal = olqr::calibrate_perturbation_constants(sys, grid, n_samples, rng);
  json points = json::array();
  for (const auto& p : cal.points)
    points.push_back(json{{"eps", p.eps},
                          {"cost_ratio", p.cost_ratio},
                          {"gain_ratio", p.gain_ratio},
                          {"usable", p.usable}});
  json out{{"C0", cal.C0}, {"eps0", cal.eps0}, {"points", std::move(points)}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online control experiments for linear quadratic systems"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string curves_path, learner_filter;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", flags.config_path, "JSON config file");
    if (needs_config) opt->required();
    sub->add_option("--out", flags.out_dir, "output directory");
    sub->add_option("--seed", flags.seed, "override the base seed");
    sub->add_option("--workers", flags.workers, "worker thread count");
    sub->add_option("--mode", flags.mode,
                    "override learner mode: theoretical | practical");
  };

  auto* dare = app.add_subcommand("dare", "solve the steady-state equation");
  add_common(dare, true);
  auto* simulate = app.add_subcommand("simulate", "run one rollout");
  add_common(simulate, true);
  simulate->add_flag("--dump-trajectory", flags.dump_trajectory,
                     "write the full trajectory CSV");
  auto* run = app.add_subcommand("run", "run a regret experiment");
  add_common(run, true);
  auto* lower = app.add_subcommand("lower-bound", "run the hidden-sign experiment");
  add_common(lower, true);
  auto* fit = app.add_subcommand("fit", "fit regret curves from a CSV");
  fit->add_option("--curves", curves_path, "curve CSV produced by `run`")
      ->required();
  fit->add_option("--learner", learner_filter, "restrict to one learner label");
  fit->add_option("--seed", flags.seed, "bootstrap resampling seed");
  auto* calibrate = app.add_subcommand("calibrate",
                                       "estimate perturbation constants");
  add_common(calibrate, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (dare->parsed()) return cmd_dare(flags);
    if (simulate->parsed()) return cmd_simulate(flags);
    if (run->parsed()) return cmd_run(flags);
    if (lower->parsed()) return cmd_lower_bound(flags);
    if (fit->parsed()) return cmd_fit(curves_path, learner_filter, flags);
    if (calibrate->parsed()) return cmd_calibrate(flags);
  } catch (const olqr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const olqr::DimensionMismatch& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const olqr::HorizonTooShort& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const olqr::InvalidBound& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const olqr::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
