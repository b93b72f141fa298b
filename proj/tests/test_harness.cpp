#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <random>

#include "qctrl/harness.hpp"
#include "qctrl/rng.hpp"
#include "qctrl/serialize.hpp"
#include "qctrl/stirap.hpp"

using namespace qctrl;
using namespace qctrl::dynamics;
using namespace qctrl::harness;

namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "qctrl_harness_tests";
  fs::create_directories(dir);
  return dir / name;
}

ExperimentConfig tiny_sweep_config() {
  ExperimentConfig config;
  config.mode = Mode::Sweep;
  config.grid = {{1.0, 10.0}, {0.0, 15.0}};
  config.segments = 6;
  config.restarts = 2;
  config.budget = 900;
  config.seed = 77;
  config.seed_set = true;
  return config;
}

}  // namespace

TEST_CASE("load_config: happy path and every rejection") {
  const auto good = temp_file("good.json");
  io::write_text_file(good.string(), R"({
    "mode": "sweep",
    "grid": [[5.0, 7.4], [5.0, 100.0]],
    "segments": 12,
    "method": "powell",
    "restarts": 2,
    "seed": 99,
    "out": "results"
  })");
  const auto config = load_config(good.string());
  CHECK(config.mode == Mode::Sweep);
  CHECK(config.grid.size() == 2);
  CHECK(config.grid[1].t_omega_max == 100.0);
  CHECK(config.method == oct::Method::Powell);
  CHECK(config.seed == 99);
  CHECK(config.out == "results");

  const auto unknown = temp_file("unknown.json");
  io::write_text_file(unknown.string(), R"({"seed": 1, "grid": [[5, 7]], "shots": 3})");
  CHECK_THROWS_WITH_AS(load_config(unknown.string()),
                       doctest::Contains("unknown key: shots"), std::runtime_error);

  const auto unseeded = temp_file("unseeded.json");
  io::write_text_file(unseeded.string(), R"({"grid": [[5, 7]]})");
  CHECK_THROWS_AS(load_config(unseeded.string()), std::invalid_argument);

  const auto negative = temp_file("negative.json");
  io::write_text_file(negative.string(), R"({"seed": 1, "grid": [[-2, 7]]})");
  CHECK_THROWS_AS(load_config(negative.string()), std::invalid_argument);

  const auto malformed = temp_file("malformed.json");
  io::write_text_file(malformed.string(), "{\n  \"seed\": 1,\n  \"grid\": [[5, 7]\n}");
  CHECK_THROWS_WITH_AS(load_config(malformed.string()), doctest::Contains("line"),
                       std::runtime_error);

  CHECK_THROWS_AS(load_config("/nonexistent/path.json"), std::runtime_error);
}

TEST_CASE("serialization round-trips are byte-identical") {
  std::mt19937_64 rng(314);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  oct::OptimizationResult result;
  result.best_alpha.n_per_control = 5;
  for (int i = 0; i < 10; ++i) result.best_alpha.alpha.push_back(20.0 * u(rng));
  result.best_cost = u(rng);
  result.fidelity = 1.0 - result.best_cost;
  result.method = oct::Method::NelderMead;
  result.restart_index = 3;
  result.evaluations = 4242;
  result.converged = true;
  result.seed = 0xdeadbeefull;

  const std::string once = io::result_to_json(result).dump(2);
  const auto reloaded = io::result_from_json(io::json::parse(once));
  CHECK(io::result_to_json(reloaded).dump(2) == once);

  // Density matrices and schedules round-trip exactly as well.
  Matrix4c rho;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) rho(i, j) = Complex(u(rng), u(rng));
  const auto rho_again = io::density_from_json(io::density_to_json(rho));
  CHECK((rho_again - rho).cwiseAbs().maxCoeff() == 0.0);

  auto schedule = PulseSchedule::piecewise_linear({0.0, u(rng), u(rng)},
                                                  {u(rng), u(rng), 0.0}, 1.0);
  const std::string sj = io::schedule_to_json(schedule).dump();
  const auto schedule_again = io::schedule_from_json(io::json::parse(sj));
  CHECK(io::schedule_to_json(schedule_again).dump() == sj);

  auto smooth = PulseSchedule::analytic([](double) { return 1.0; },
                                        [](double) { return 1.0; }, 4, 1.0);
  CHECK_THROWS_AS(io::schedule_to_json(smooth), std::invalid_argument);
}

TEST_CASE("verify_scaling") {
  auto params = params_from_dimensionless(5.0, 20.0);
  stirap::StirapShape shape;
  shape.omega_peak = params.omega_max;
  shape.tau = 0.1;
  shape.width = 1.0 / 6.0;
  const auto schedule = stirap::gaussian_schedule(shape, params, 40);

  const auto [f0, f0_again] = verify_scaling(params, schedule, 1.0);
  CHECK(f0 == f0_again);

  for (double alpha : {0.5, 2.0, 10.0}) {
    const auto [fa, fb] = verify_scaling(params, schedule, alpha);
    CHECK(fa == f0);
    CHECK(std::abs(fa - fb) < 1e-8);
  }

  CHECK_THROWS_AS(verify_scaling(params, schedule, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(verify_scaling(params, schedule, -1.0), std::invalid_argument);

  // Analytic schedules stretch through the callable wrapper.
  const auto smooth = stirap::analytic_schedule(shape, params, 40);
  const auto scaled = scale_schedule(smooth, 2.0);
  CHECK(scaled.horizon == 2.0);
  CHECK(scaled.pump_at(1.0) == doctest::Approx(0.5 * smooth.pump_at(0.5)).epsilon(1e-12));
}

TEST_CASE("run_sweep: rows, reference-point augmentation, failure flags") {
  auto config = tiny_sweep_config();
  const auto records = run_sweep(config);
  REQUIRE(records.size() == 2);
  CHECK(records[0].t_gamma == 1.0);
  CHECK(records[1].t_gamma == 0.0);
  for (const auto& rec : records) {
    CHECK(rec.ok);
    CHECK(rec.inefficiency == doctest::Approx(1.0 - rec.fidelity).epsilon(1e-12));
    CHECK(rec.fidelity >= 0.0);
    CHECK(rec.fidelity <= 1.0);
  }

  // A grid touching T*gamma = 5 always carries the reference points.
  auto with_five = tiny_sweep_config();
  with_five.grid = {{5.0, 20.0}};
  with_five.segments = 4;
  with_five.budget = 250;
  const auto augmented = run_sweep(with_five);
  REQUIRE(augmented.size() == 4);
  CHECK(augmented[1].t_omega_max == 7.4);
  CHECK(augmented[2].t_omega_max == 13.8);
  CHECK(augmented[3].t_omega_max == 100.0);

  auto empty = tiny_sweep_config();
  empty.grid.clear();
  CHECK_THROWS_AS(run_sweep(empty), std::invalid_argument);

  auto unseeded = tiny_sweep_config();
  unseeded.seed_set = false;
  CHECK_THROWS_AS(run_sweep(unseeded), std::invalid_argument);
}

TEST_CASE("sweep output is byte-identical across worker counts") {
  auto config = tiny_sweep_config();

  setenv("QCTRL_WORKERS", "1", 1);
  const auto serial = sweep_csv(run_sweep(config));
  setenv("QCTRL_WORKERS", "4", 1);
  const auto parallel = sweep_csv(run_sweep(config));
  unsetenv("QCTRL_WORKERS");

  CHECK(serial == parallel);
  CHECK(serial.substr(0, serial.find('\n')) ==
        "t_gamma,t_omega_max,inefficiency,fidelity,seed");

  // Per-point seeds key off the parameter values, not the grid position.
  auto reordered = config;
  std::swap(reordered.grid[0], reordered.grid[1]);
  const auto swapped = sweep_csv(run_sweep(reordered));
  CHECK(swapped != serial);  // rows follow grid order
  // ... but each row's content is identical.
  const auto row_of = [](const std::string& csv, int idx) {
    std::size_t pos = 0;
    for (int i = 0; i <= idx; ++i) pos = csv.find('\n', pos) + 1;
    return csv.substr(pos, csv.find('\n', pos) - pos);
  };
  CHECK(row_of(serial, 0) == row_of(swapped, 1));
  CHECK(row_of(serial, 1) == row_of(swapped, 0));
}

TEST_CASE("mode names round-trip") {
  for (Mode m : {Mode::Simulate, Mode::Stirap, Mode::Oct, Mode::Rl, Mode::Sweep})
    CHECK(mode_from_name(mode_name(m)) == m);
  CHECK_THROWS_AS(mode_from_name("train"), std::invalid_argument);
  CHECK(default_sweep_grid().size() == 32);
}
