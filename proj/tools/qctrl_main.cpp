// qctrl: three-level population-transfer toolbox.
// Subcommands: simulate | stirap | oct | rl | sweep. All experiment inputs
// are dimensionless (T*gamma, T*Omega_max); T is normalized to 1 internally.

#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "qctrl/harness.hpp"
#include "qctrl/rl.hpp"
#include "qctrl/serialize.hpp"
#include "qctrl/stirap.hpp"

namespace fs = std::filesystem;
using qctrl::io::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  double t_gamma = 5.0;
  double t_omega_max = 20.0;
};

qctrl::harness::ExperimentConfig effective_config(const CommonArgs& args,
                                                  qctrl::harness::Mode mode) {
  qctrl::harness::ExperimentConfig config;
  if (!args.config_path.empty()) {
    config = qctrl::harness::load_config(args.config_path);
  } else {
    config.mode = mode;
    if (mode == qctrl::harness::Mode::Sweep) config.grid = qctrl::harness::default_sweep_grid();
  }
  if (args.seed) {
    config.seed = *args.seed;
    config.seed_set = true;
  }
  if (!args.out.empty()) config.out = args.out;
  return config;
}

void write_json(const std::string& path, const json& j) {
  qctrl::io::write_text_file(path, j.dump(2) + "\n");
}

json population_rows(const std::vector<qctrl::dynamics::DensityMatrix>& trajectory,
                     double horizon) {
  using namespace qctrl::dynamics;
  json rows = json::array();
  const int n = static_cast<int>(trajectory.size()) - 1;
  for (int j = 0; j < static_cast<int>(trajectory.size()); ++j) {
    const auto& rho = trajectory[j];
    rows.push_back(json{{"t", horizon * j / std::max(1, n)},
                        {"p_g", rho(kG, kG).real()},
                        {"p_e", rho(kE, kE).real()},
                        {"p_r", rho(kR, kR).real()},
                        {"p_s", rho(kS, kS).real()}});
  }
  return rows;
}

int run_simulate(const CommonArgs& args, const std::string& schedule_path, int substeps) {
  const auto params =
      qctrl::dynamics::params_from_dimensionless(args.t_gamma, args.t_omega_max);
  const auto schedule = qctrl::io::schedule_from_json(
      json::parse(qctrl::io::read_text_file(schedule_path)));
  const auto trajectory = qctrl::dynamics::evolve(
      qctrl::dynamics::pure_state(qctrl::dynamics::kG), schedule, params, substeps);
  const double f = qctrl::dynamics::fidelity(trajectory.back());

  json out;
  out["t_gamma"] = args.t_gamma;
  out["t_omega_max"] = args.t_omega_max;
  out["fidelity"] = f;
  out["populations"] = population_rows(trajectory, schedule.horizon);
  out["trajectory"] = qctrl::io::trajectory_to_json(trajectory);
  write_json(args.out, out);
  std::cout << "fidelity " << qctrl::io::format_double(f) << "\n";
  return 0;
}

int run_stirap(const CommonArgs& args, double tau, double width, int segments) {
  const auto params =
      qctrl::dynamics::params_from_dimensionless(args.t_gamma, args.t_omega_max);
  qctrl::stirap::StirapShape shape;
  shape.omega_peak = params.omega_max;
  shape.tau = tau * params.t_final;
  shape.width = width * params.t_final;

  const auto schedule = qctrl::stirap::gaussian_schedule(shape, params, segments);
  const auto smooth = qctrl::stirap::analytic_schedule(shape, params);
  const double f = qctrl::dynamics::fidelity(qctrl::dynamics::evolve_final(
      qctrl::dynamics::pure_state(qctrl::dynamics::kG), schedule, params));

  double min_margin = qctrl::stirap::kInfiniteMargin;
  const int samples = 501;
  for (int i = 0; i < samples; ++i) {
    const double t =
        params.t_final * (0.25 + 0.5 * static_cast<double>(i) / (samples - 1));
    min_margin =
        std::min(min_margin, qctrl::stirap::local_adiabaticity_margin(smooth, params, t));
  }

  json out;
  out["schedule"] = qctrl::io::schedule_to_json(schedule);
  out["diagnostics"] = {
      {"theta_initial", qctrl::stirap::mixing_angle_theta(smooth, 0.0)},
      {"theta_final", qctrl::stirap::mixing_angle_theta(smooth, params.t_final)},
      {"global_product", qctrl::stirap::global_adiabaticity_product(shape)},
      {"min_margin", min_margin},
      {"fidelity", f},
  };
  write_json(args.out, out);
  std::cout << "stirap fidelity " << qctrl::io::format_double(f) << "\n";
  return 0;
}

int run_oct(const CommonArgs& args, const qctrl::harness::ExperimentConfig& config) {
  const auto params =
      qctrl::dynamics::params_from_dimensionless(args.t_gamma, args.t_omega_max);
  const auto result =
      qctrl::oct::multistart(params, config.method, config.restarts, config.seed,
                             config.budget, config.segments);
  const auto schedule = qctrl::oct::alpha_to_schedule(result.best_alpha, params);
  const auto trajectory = qctrl::dynamics::evolve(
      qctrl::dynamics::pure_state(qctrl::dynamics::kG), schedule, params);

  json out;
  out["result"] = qctrl::io::result_to_json(result);
  out["schedule"] = qctrl::io::schedule_to_json(schedule);
  out["populations"] = population_rows(trajectory, schedule.horizon);
  write_json(args.out, out);
  std::cout << "best cost " << qctrl::io::format_double(result.best_cost) << " (restart "
            << result.restart_index << ", " << result.evaluations << " evaluations)\n";
  return 0;
}

int run_rl(const CommonArgs& args, const qctrl::harness::ExperimentConfig& config,
           int steps, std::optional<double> stop_at) {
  const auto params =
      qctrl::dynamics::params_from_dimensionless(args.t_gamma, args.t_omega_max);
  auto trainer = qctrl::rl::preset_config(config.preset);
  trainer.n_steps = steps;
  trainer.max_episodes = config.episodes;
  trainer.seed = config.seed;
  trainer.stop_at_best_reward = stop_at;

  const auto result = qctrl::rl::train(trainer, params);

  fs::create_directories(args.out);
  qctrl::io::write_text_file((fs::path(args.out) / "learning_curve.csv").string(),
                             qctrl::io::learning_curve_csv(result.curve));

  json eval;
  eval["preset"] = config.preset;
  eval["episodes_run"] = static_cast<int>(result.curve.size());
  eval["best_reward"] = result.best.reward;
  eval["best_episode"] = result.best.episode;
  eval["best_agent"] = result.best.agent;
  if (result.best.episode >= 0) {
    const auto schedule = result.best.to_schedule(params, trainer.n_steps);
    write_json((fs::path(args.out) / "best_schedule.json").string(),
               qctrl::io::schedule_to_json(schedule));
    const auto initial = qctrl::dynamics::pure_state(qctrl::dynamics::kG);
    auto lossless = params;
    lossless.gamma = 0.0;
    eval["replay_fidelity"] = qctrl::dynamics::fidelity(
        qctrl::dynamics::evolve_final(initial, schedule, params));
    eval["replay_fidelity_gamma0"] = qctrl::dynamics::fidelity(
        qctrl::dynamics::evolve_final(initial, schedule, lossless));
  }
  write_json((fs::path(args.out) / "evaluation.json").string(), eval);
  std::cout << "best reward " << qctrl::io::format_double(result.best.reward) << " after "
            << result.curve.size() << " episodes\n";
  return 0;
}

int run_sweep_cmd(const qctrl::harness::ExperimentConfig& config) {
  const auto records = qctrl::harness::run_sweep(config);

  fs::create_directories(config.out);
  qctrl::io::write_text_file((fs::path(config.out) / "sweep.csv").string(),
                             qctrl::harness::sweep_csv(records));
  json rows = json::array();
  for (const auto& rec : records) {
    json row{{"t_gamma", rec.t_gamma},
             {"t_omega_max", rec.t_omega_max},
             {"method", qctrl::oct::method_name(rec.method)},
             {"inefficiency", rec.inefficiency},
             {"fidelity", rec.fidelity},
             {"restart_chosen", rec.restart_chosen},
             {"seed", rec.seed},
             {"ok", rec.ok}};
    if (!rec.ok) row["error"] = rec.error;
    rows.push_back(std::move(row));
  }
  write_json((fs::path(config.out) / "sweep.json").string(), rows);
  std::cout << records.size() << " grid points written\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"three-level population transfer: STIRAP, optimal control, REINFORCE"};
  app.require_subcommand(1);

  CommonArgs args;
  int segments = qctrl::oct::kDefaultSegments;
  int substeps = qctrl::dynamics::kDefaultSubsteps;
  int steps = 30;
  int restarts = 4;
  int episodes = 2000;
  long budget = qctrl::oct::kDefaultBudget;
  double tau = 0.1;
  double width = 1.0 / 6.0;
  std::string method = "lbfgsb";
  std::string preset = "reinforce-sgd";
  std::string schedule_path;
  std::optional<double> stop_at;

  // A seed is mandatory for the seeded modes (oct, rl, sweep) but may come
  // from either the flag or the config file; the merged config enforces it.
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", args.config_path, "JSON config file");
    cmd->add_option("--seed", args.seed, "master RNG seed");
    cmd->add_option("--out", args.out, "output path")->required();
    cmd->add_option("--t-gamma", args.t_gamma, "dimensionless decay rate T*gamma");
    cmd->add_option("--t-omega-max", args.t_omega_max,
                    "dimensionless amplitude bound T*Omega_max");
  };

  auto* simulate = app.add_subcommand("simulate", "evolve a schedule JSON");
  add_common(simulate);
  simulate->add_option("--schedule", schedule_path, "PulseSchedule JSON file")->required();
  simulate->add_option("--substeps", substeps, "sub-segments for non-constant kinds");

  auto* stirap = app.add_subcommand("stirap", "reference Gaussian STIRAP schedule");
  add_common(stirap);
  stirap->add_option("--tau", tau, "pulse half-delay, units of T");
  stirap->add_option("--width", width, "Gaussian 1/e half-width, units of T");
  stirap->add_option("--segments", segments, "schedule segments");

  auto* oct = app.add_subcommand("oct", "multi-start optimal control");
  add_common(oct);
  oct->add_option("--segments", segments, "piecewise-constant segments per control");
  oct->add_option("--method", method, "nelder-mead | powell | lbfgsb");
  oct->add_option("--restarts", restarts, "number of random initial guesses");
  oct->add_option("--budget", budget, "cost-evaluation budget per restart");

  auto* rl = app.add_subcommand("rl", "REINFORCE training");
  add_common(rl);
  rl->add_option("--preset", preset, "reinforce-sgd | reinforce-adam");
  rl->add_option("--steps", steps, "MDP steps per episode");
  rl->add_option("--episodes", episodes, "training episodes (batch updates)");
  rl->add_option("--stop-at-best", stop_at, "optional early-stop best-reward threshold");

  auto* sweep = app.add_subcommand("sweep", "inefficiency sweep over (T*gamma, T*Omega_max)");
  add_common(sweep);
  sweep->add_option("--segments", segments, "piecewise-constant segments per control");
  sweep->add_option("--method", method, "nelder-mead | powell | lbfgsb");
  sweep->add_option("--restarts", restarts, "restarts per grid point");
  sweep->add_option("--budget", budget, "cost-evaluation budget per restart");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_simulate(args, schedule_path, substeps);
    if (stirap->parsed()) return run_stirap(args, tau, width, segments);

    qctrl::harness::Mode mode = qctrl::harness::Mode::Sweep;
    if (oct->parsed()) mode = qctrl::harness::Mode::Oct;
    if (rl->parsed()) mode = qctrl::harness::Mode::Rl;
    auto config = effective_config(args, mode);
    if (oct->parsed() || sweep->parsed()) {
      if (oct->count("--segments") || sweep->count("--segments")) config.segments = segments;
      if (oct->count("--method") || sweep->count("--method"))
        config.method = qctrl::oct::method_from_name(method);
      if (oct->count("--restarts") || sweep->count("--restarts")) config.restarts = restarts;
      if (oct->count("--budget") || sweep->count("--budget")) config.budget = budget;
    }
    if (rl->parsed()) {
      if (rl->count("--preset")) config.preset = preset;
      if (rl->count("--episodes")) config.episodes = episodes;
    }
    config.validate();

    if (oct->parsed()) return run_oct(args, config);
    if (rl->parsed()) return run_rl(args, config, steps, stop_at);
    return run_sweep_cmd(config);
  } catch (const std::exception& e) {
    json err;
    err["error"] = {{"type", "runtime"}, {"message", e.what()}};
    std::cout << err.dump() << "\n";
    return 1;
  }
}
