#pragma once

#include <string>

#include <json.hpp>

#include "qctrl/dynamics.hpp"
#include "qctrl/oct.hpp"
#include "qctrl/rl.hpp"

namespace qctrl::io {

using json = nlohmann::ordered_json;

// Density matrices serialize as nested arrays of [re, im] pairs; schedules as
// {kind, n_segments, horizon, values_p, values_s}. Analytic schedules carry
// callables and are rejected (sample them onto a grid first).

json density_to_json(const dynamics::DensityMatrix& rho);
dynamics::DensityMatrix density_from_json(const json& j);

json trajectory_to_json(const std::vector<dynamics::DensityMatrix>& trajectory);
std::vector<dynamics::DensityMatrix> trajectory_from_json(const json& j);

json schedule_to_json(const dynamics::PulseSchedule& schedule);
dynamics::PulseSchedule schedule_from_json(const json& j);

json param_vector_to_json(const oct::ParamVector& alpha);
oct::ParamVector param_vector_from_json(const json& j);

json result_to_json(const oct::OptimizationResult& result);
oct::OptimizationResult result_from_json(const json& j);

/// Learning-curve rows as CSV: "episode,mean_reward,best_reward".
std::string learning_curve_csv(const std::vector<rl::LearningCurvePoint>& curve);

/// Shortest round-trip decimal representation (the JSON one), reused by the
/// CSV writers so text outputs are byte-deterministic.
std::string format_double(double x);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

}  // namespace qctrl::io
