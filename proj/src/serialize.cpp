#include "qctrl/serialize.hpp"

#include <fstream>
#include <sstream>

namespace qctrl::io {

namespace {

std::string kind_name(dynamics::ScheduleKind kind) {
  switch (kind) {
    case dynamics::ScheduleKind::PiecewiseConstant: return "piecewise-constant";
    case dynamics::ScheduleKind::PiecewiseLinear: return "piecewise-linear";
    case dynamics::ScheduleKind::Analytic: return "analytic";
  }
  return "piecewise-constant";
}

}  // namespace

json density_to_json(const dynamics::DensityMatrix& rho) {
  json rows = json::array();
  for (int i = 0; i < 4; ++i) {
    json row = json::array();
    for (int j = 0; j < 4; ++j)
      row.push_back(json::array({rho(i, j).real(), rho(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

dynamics::DensityMatrix density_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4)
    throw std::invalid_argument("density matrix JSON must be a 4x4 array");
  dynamics::DensityMatrix rho;
  for (int i = 0; i < 4; ++i) {
    const json& row = j.at(i);
    if (!row.is_array() || row.size() != 4)
      throw std::invalid_argument("density matrix JSON must be a 4x4 array");
    for (int k = 0; k < 4; ++k) {
      const json& entry = row.at(k);
      if (!entry.is_array() || entry.size() != 2)
        throw std::invalid_argument("density matrix entries must be [re, im] pairs");
      rho(i, k) = Complex(entry.at(0).get<double>(), entry.at(1).get<double>());
    }
  }
  return rho;
}

json trajectory_to_json(const std::vector<dynamics::DensityMatrix>& trajectory) {
  json out = json::array();
  for (const auto& rho : trajectory) out.push_back(density_to_json(rho));
  return out;
}

std::vector<dynamics::DensityMatrix> trajectory_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("trajectory JSON must be an array");
  std::vector<dynamics::DensityMatrix> out;
  out.reserve(j.size());
  for (const auto& entry : j) out.push_back(density_from_json(entry));
  return out;
}

json schedule_to_json(const dynamics::PulseSchedule& schedule) {
  if (schedule.kind == dynamics::ScheduleKind::Analytic)
    throw std::invalid_argument(
        "schedule_to_json: analytic schedules carry callables; sample them first");
  json j;
  j["kind"] = kind_name(schedule.kind);
  j["n_segments"] = schedule.n_segments;
  j["horizon"] = schedule.horizon;
  j["values_p"] = schedule.values_p;
  j["values_s"] = schedule.values_s;
  return j;
}

dynamics::PulseSchedule schedule_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const double horizon = j.at("horizon").get<double>();
  auto vp = j.at("values_p").get<std::vector<double>>();
  auto vs = j.at("values_s").get<std::vector<double>>();
  dynamics::PulseSchedule schedule;
  if (kind == "piecewise-constant")
    schedule = dynamics::PulseSchedule::piecewise_constant(std::move(vp), std::move(vs), horizon);
  else if (kind == "piecewise-linear")
    schedule = dynamics::PulseSchedule::piecewise_linear(std::move(vp), std::move(vs), horizon);
  else
    throw std::invalid_argument("schedule_from_json: unsupported kind: " + kind);
  if (j.at("n_segments").get<int>() != schedule.n_segments)
    throw std::invalid_argument("schedule_from_json: n_segments does not match values length");
  return schedule;
}

json param_vector_to_json(const oct::ParamVector& alpha) {
  json j;
  j["alpha"] = alpha.alpha;
  j["n_per_control"] = alpha.n_per_control;
  return j;
}

oct::ParamVector param_vector_from_json(const json& j) {
  oct::ParamVector a;
  a.alpha = j.at("alpha").get<std::vector<double>>();
  a.n_per_control = j.at("n_per_control").get<int>();
  return a;
}

json result_to_json(const oct::OptimizationResult& result) {
  json j;
  j["best_alpha"] = param_vector_to_json(result.best_alpha);
  j["best_cost"] = result.best_cost;
  j["fidelity"] = result.fidelity;
  j["method"] = oct::method_name(result.method);
  j["restart_index"] = result.restart_index;
  j["evaluations"] = result.evaluations;
  j["converged"] = result.converged;
  j["seed"] = result.seed;
  return j;
}

oct::OptimizationResult result_from_json(const json& j) {
  oct::OptimizationResult r;
  r.best_alpha = param_vector_from_json(j.at("best_alpha"));
  r.best_cost = j.at("best_cost").get<double>();
  r.fidelity = j.at("fidelity").get<double>();
  r.method = oct::method_from_name(j.at("method").get<std::string>());
  r.restart_index = j.at("restart_index").get<int>();
  r.evaluations = j.at("evaluations").get<long>();
  r.converged = j.at("converged").get<bool>();
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

std::string learning_curve_csv(const std::vector<rl::LearningCurvePoint>& curve) {
  std::ostringstream out;
  out << "episode,mean_reward,best_reward\n";
  for (const auto& point : curve)
    out << point.episode << ',' << format_double(point.mean_reward) << ','
        << format_double(point.best_reward) << '\n';
  return out.str();
}

std::string format_double(double x) { return json(x).dump(); }

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << contents;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace qctrl::io
