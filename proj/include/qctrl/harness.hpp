#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qctrl/oct.hpp"

namespace qctrl::harness {

using dynamics::PulseSchedule;
using dynamics::SystemParams;

enum class Mode { Simulate, Stirap, Oct, Rl, Sweep };

std::string mode_name(Mode mode);
Mode mode_from_name(std::string_view name);

struct GridPoint {
  double t_gamma = 0.0;
  double t_omega_max = 0.0;
};

/// Declarative experiment description; every run is seeded.
struct ExperimentConfig {
  Mode mode = Mode::Sweep;
  std::vector<GridPoint> grid;
  int segments = oct::kDefaultSegments;
  oct::Method method = oct::Method::Lbfgsb;
  int restarts = 4;
  std::string preset = "reinforce-sgd";
  int episodes = 2000;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  long budget = oct::kDefaultBudget;

  void validate() const;
};

/// Default sweep grid covering the usual reporting range.
std::vector<GridPoint> default_sweep_grid();

struct SweepRecord {
  double t_gamma = 0.0;
  double t_omega_max = 0.0;
  oct::Method method = oct::Method::Lbfgsb;
  double inefficiency = 1.0;
  double fidelity = 0.0;
  int restart_chosen = 0;
  double wall_time = 0.0;  // seconds; logged only, never serialized
  std::uint64_t seed = 0;  // per-point derived seed
  bool ok = true;
  std::string error;
};

/// One multistart optimization per grid point. Each point's seed derives
/// from (config.seed, t_gamma, t_omega_max), so results do not depend on
/// grid order or worker count. Failures are flagged and the sweep continues.
std::vector<SweepRecord> run_sweep(const ExperimentConfig& config);

/// CSV with header t_gamma,t_omega_max,inefficiency,fidelity,seed.
std::string sweep_csv(const std::vector<SweepRecord>& records);

/// The schedule carried to the rescaled frame T' = alpha T, gamma' = gamma/alpha,
/// omega' = omega/alpha (time-stretched, amplitude-shrunk).
PulseSchedule scale_schedule(const PulseSchedule& schedule, double alpha_scale);
SystemParams scale_params(const SystemParams& params, double alpha_scale);

/// Evolves |g><g| under the schedule in both the original and the rescaled
/// frame; returns (f_original, f_scaled). The two agree up to round-off.
std::pair<double, double> verify_scaling(const SystemParams& params,
                                         const PulseSchedule& schedule,
                                         double alpha_scale);

/// Reads a JSON config file. Unknown keys are rejected; a missing seed is an
/// error; parse failures report the line of the offending byte.
ExperimentConfig load_config(const std::string& path);

}  // namespace qctrl::harness
