#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qctrl/dynamics.hpp"

namespace qctrl::oct {

using dynamics::PulseSchedule;
using dynamics::SystemParams;

/// Decision vector of the piecewise-constant control problem: the first
/// n_per_control entries are the pump segment values, the rest the Stokes
/// ones. All entries live in [0, omega_max].
struct ParamVector {
  std::vector<double> alpha;
  int n_per_control = 0;

  static ParamVector zeros(int n_per_control);
  void validate(double omega_max) const;
};

inline constexpr int kDefaultSegments = 30;

enum class Method { NelderMead, Powell, Lbfgsb };

std::string method_name(Method method);
Method method_from_name(std::string_view name);

struct OptimizationResult {
  ParamVector best_alpha;
  double best_cost = 1.0;
  double fidelity = 0.0;
  Method method = Method::Lbfgsb;
  int restart_index = 0;
  long evaluations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
};

// Termination thresholds; tighter than plotting precision so reported
// figures do not depend on them.
inline constexpr double kCostChangeTol = 1e-10;
inline constexpr double kProjGradTol = 1e-8;
inline constexpr long kDefaultBudget = 200000;

PulseSchedule alpha_to_schedule(const ParamVector& alpha,
                                const SystemParams& params);

/// Inverse of alpha_to_schedule on piecewise-constant schedules.
ParamVector schedule_to_alpha(const PulseSchedule& schedule);

/// J = 1 - Tr{|r><r| rho(T)} for rho(0) = |g><g| driven by alpha.
double cost(const ParamVector& alpha, const SystemParams& params);

/// Finite-difference gradient of the cost, step max(1e-6, 1e-6 |alpha_i|);
/// central in the interior, one-sided where the step would leave the box.
std::vector<double> numeric_gradient(const ParamVector& alpha,
                                     const SystemParams& params);

/// Bounded minimization from a given start. Terminates on cost change
/// < 1e-10, projected gradient < 1e-8 (L-BFGS-B) or the evaluation budget.
OptimizationResult minimize(const ParamVector& initial,
                            const SystemParams& params, Method method,
                            long budget = kDefaultBudget);

/// Best of n_restarts seeded minimizations from uniform random starts in
/// [0, omega_max]^{2N}. Restarts may run in parallel; the reduction is
/// ordered by restart index, so the result only depends on the seed.
OptimizationResult multistart(const SystemParams& params, Method method,
                              int n_restarts, std::uint64_t seed,
                              long budget = kDefaultBudget,
                              int n_per_control = kDefaultSegments);

/// Amplitude-weighted mean time of one control; the counter-intuitive
/// ordering test is mean_time(stokes) < mean_time(pump).
double amplitude_weighted_mean_time(const std::vector<double>& values,
                                    double horizon);

}  // namespace qctrl::oct
