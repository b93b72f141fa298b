#include "qctrl/harness.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "qctrl/parallel.hpp"
#include "qctrl/rng.hpp"
#include "qctrl/serialize.hpp"

namespace qctrl::harness {

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::Simulate: return "simulate";
    case Mode::Stirap: return "stirap";
    case Mode::Oct: return "oct";
    case Mode::Rl: return "rl";
    case Mode::Sweep: return "sweep";
  }
  return "sweep";
}

Mode mode_from_name(std::string_view name) {
  if (name == "simulate") return Mode::Simulate;
  if (name == "stirap") return Mode::Stirap;
  if (name == "oct") return Mode::Oct;
  if (name == "rl") return Mode::Rl;
  if (name == "sweep") return Mode::Sweep;
  throw std::invalid_argument("unknown mode: " + std::string(name));
}

void ExperimentConfig::validate() const {
  if (!seed_set) throw std::invalid_argument("config: seed is required (no unseeded runs)");
  for (const auto& point : grid) {
    if (!(point.t_gamma >= 0.0))
      throw std::invalid_argument("config: t_gamma must be >= 0");
    if (!(point.t_omega_max > 0.0))
      throw std::invalid_argument("config: t_omega_max must be > 0");
  }
  if (segments < 1) throw std::invalid_argument("config: segments must be >= 1");
  if (restarts < 1) throw std::invalid_argument("config: restarts must be >= 1");
  if (episodes < 0) throw std::invalid_argument("config: episodes must be >= 0");
  if (budget < 1) throw std::invalid_argument("config: budget must be >= 1");
  if (preset != "reinforce-sgd" && preset != "reinforce-adam")
    throw std::invalid_argument("config: unknown preset: " + preset);
}

std::vector<GridPoint> default_sweep_grid() {
  std::vector<GridPoint> grid;
  for (double tg : {0.0, 1.0, 5.0, 10.0})
    for (double tom : {5.0, 7.4, 10.0, 13.8, 20.0, 40.0, 70.0, 100.0})
      grid.push_back({tg, tom});
  return grid;
}

namespace {

// Reference points on the T*gamma = 5 line; kept in every
// sweep that touches the T*gamma = 5 line.
constexpr double kReferenceOmegas[] = {7.4, 13.8, 100.0};

bool contains_point(const std::vector<GridPoint>& grid, double tg, double tom) {
  for (const auto& p : grid)
    if (p.t_gamma == tg && p.t_omega_max == tom) return true;
  return false;
}

}  // namespace

std::vector<SweepRecord> run_sweep(const ExperimentConfig& config) {
  config.validate();
  if (config.grid.empty()) throw std::invalid_argument("run_sweep: empty grid");

  std::vector<GridPoint> grid = config.grid;
  bool has_gamma5 = false;
  for (const auto& p : grid) has_gamma5 = has_gamma5 || p.t_gamma == 5.0;
  if (has_gamma5)
    for (double tom : kReferenceOmegas)
      if (!contains_point(grid, 5.0, tom)) grid.push_back({5.0, tom});

  std::vector<SweepRecord> records(grid.size());
  parallel_for_indexed(static_cast<int>(grid.size()), [&](int i) {
    SweepRecord& rec = records[i];
    rec.t_gamma = grid[i].t_gamma;
    rec.t_omega_max = grid[i].t_omega_max;
    rec.method = config.method;
    rec.seed = config.seed ^ hash_params(grid[i].t_gamma, grid[i].t_omega_max);
    const auto start = std::chrono::steady_clock::now();
    try {
      const auto params =
          dynamics::params_from_dimensionless(grid[i].t_gamma, grid[i].t_omega_max);
      const auto result = oct::multistart(params, config.method, config.restarts,
                                          rec.seed, config.budget, config.segments);
      rec.fidelity = result.fidelity;
      rec.inefficiency = result.best_cost;
      rec.restart_chosen = result.restart_index;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
      rec.inefficiency = std::nan("");
      rec.fidelity = std::nan("");
    }
    rec.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  return records;
}

std::string sweep_csv(const std::vector<SweepRecord>& records) {
  std::ostringstream out;
  out << "t_gamma,t_omega_max,inefficiency,fidelity,seed\n";
  for (const auto& rec : records) {
    out << io::format_double(rec.t_gamma) << ',' << io::format_double(rec.t_omega_max)
        << ',' << io::format_double(rec.inefficiency) << ','
        << io::format_double(rec.fidelity) << ',' << rec.seed << '\n';
  }
  return out.str();
}

PulseSchedule scale_schedule(const PulseSchedule& schedule, double alpha_scale) {
  if (!(alpha_scale > 0.0))
    throw std::invalid_argument("scale_schedule: alpha_scale must be > 0");
  PulseSchedule scaled = schedule;
  scaled.horizon = schedule.horizon * alpha_scale;
  if (schedule.kind == dynamics::ScheduleKind::Analytic) {
    auto p = schedule.analytic_p;
    auto s = schedule.analytic_s;
    scaled.analytic_p = [p, alpha_scale](double t) { return p(t / alpha_scale) / alpha_scale; };
    scaled.analytic_s = [s, alpha_scale](double t) { return s(t / alpha_scale) / alpha_scale; };
  } else {
    for (double& v : scaled.values_p) v /= alpha_scale;
    for (double& v : scaled.values_s) v /= alpha_scale;
  }
  return scaled;
}

SystemParams scale_params(const SystemParams& params, double alpha_scale) {
  if (!(alpha_scale > 0.0))
    throw std::invalid_argument("scale_params: alpha_scale must be > 0");
  SystemParams scaled = params;
  scaled.t_final = params.t_final * alpha_scale;
  scaled.gamma = params.gamma / alpha_scale;
  scaled.omega_max = params.omega_max / alpha_scale;
  scaled.delta_p = params.delta_p / alpha_scale;
  scaled.delta_3 = params.delta_3 / alpha_scale;
  return scaled;
}

std::pair<double, double> verify_scaling(const SystemParams& params,
                                         const PulseSchedule& schedule,
                                         double alpha_scale) {
  if (!(alpha_scale > 0.0))
    throw std::invalid_argument("verify_scaling: alpha_scale must be > 0");
  const auto initial = dynamics::pure_state(dynamics::kG);
  const double f_original =
      dynamics::fidelity(dynamics::evolve_final(initial, schedule, params));
  const double f_scaled = dynamics::fidelity(dynamics::evolve_final(
      initial, scale_schedule(schedule, alpha_scale), scale_params(params, alpha_scale)));
  return {f_original, f_scaled};
}

namespace {

int line_of_byte(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  const std::string text = io::read_text_file(path);
  io::json j;
  try {
    j = io::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("config parse error in " + path + " near line " +
                             std::to_string(line_of_byte(text, e.byte)) + ": " + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("config must be a JSON object");

  static const char* known[] = {"mode",    "grid",   "segments", "method", "restarts",
                                "preset",  "episodes", "seed",   "out",    "budget"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw std::runtime_error("config: unknown key: " + key);
  }

  ExperimentConfig config;
  try {
    if (j.contains("mode")) config.mode = mode_from_name(j.at("mode").get<std::string>());
    if (j.contains("grid")) {
      for (const auto& entry : j.at("grid")) {
        if (!entry.is_array() || entry.size() != 2)
          throw std::invalid_argument("grid entries must be [t_gamma, t_omega_max] pairs");
        config.grid.push_back({entry.at(0).get<double>(), entry.at(1).get<double>()});
      }
    } else if (config.mode == Mode::Sweep) {
      config.grid = default_sweep_grid();
    }
    if (j.contains("segments")) config.segments = j.at("segments").get<int>();
    if (j.contains("method"))
      config.method = oct::method_from_name(j.at("method").get<std::string>());
    if (j.contains("restarts")) config.restarts = j.at("restarts").get<int>();
    if (j.contains("preset")) config.preset = j.at("preset").get<std::string>();
    if (j.contains("episodes")) config.episodes = j.at("episodes").get<int>();
    if (j.contains("budget")) config.budget = j.at("budget").get<long>();
    if (j.contains("seed")) {
      config.seed = j.at("seed").get<std::uint64_t>();
      config.seed_set = true;
    }
    if (j.contains("out")) config.out = j.at("out").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("config field error in " + path + ": " + e.what());
  }
  config.validate();
  return config;
}

}  // namespace qctrl::harness
