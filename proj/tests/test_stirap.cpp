#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qctrl/dynamics.hpp"
#include "qctrl/stirap.hpp"

using namespace qctrl;
using namespace qctrl::dynamics;
using namespace qctrl::stirap;

namespace {

constexpr double kPi = std::numbers::pi;

SystemParams reference_params(double omega_max = 100.0, double gamma = 0.0) {
  SystemParams p;
  p.t_final = 1.0;
  p.omega_max = omega_max;
  p.gamma = gamma;
  return p;
}

StirapShape reference_shape(double omega_peak = 100.0) {
  StirapShape shape;
  shape.omega_peak = omega_peak;
  shape.tau = 0.1;
  shape.width = 1.0 / 6.0;
  return shape;
}

Eigen::Matrix3d three_level_block(double omega_p, double omega_s, double delta_p) {
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  h(1, 1) = delta_p;
  h(0, 1) = h(1, 0) = 0.5 * omega_p;
  h(1, 2) = h(2, 1) = 0.5 * omega_s;
  return h;
}

}  // namespace

TEST_CASE("gaussian_schedule: peaks, ordering, degenerate delay") {
  auto p = reference_params();

  // Pump peak lands exactly on a segment midpoint: tau = 0.15, n = 10.
  StirapShape shape = reference_shape();
  shape.tau = 0.15;
  const auto schedule = gaussian_schedule(shape, p, 10);
  CHECK(schedule.values_p[6] == shape.omega_peak);  // midpoint 0.65 = T/2 + tau
  CHECK(schedule.values_s[3] == shape.omega_peak);  // midpoint 0.35 = T/2 - tau

  const auto argmax = [](const std::vector<double>& v) {
    return std::distance(v.begin(), std::max_element(v.begin(), v.end()));
  };
  CHECK(argmax(schedule.values_s) < argmax(schedule.values_p));

  // tau -> 0+ with alpha = 1: the two pulse samplings coincide.
  StirapShape tight = reference_shape();
  tight.tau = 1e-12;
  const auto merged = gaussian_schedule(tight, p, 16);
  for (int j = 0; j < merged.n_segments; ++j)
    CHECK(merged.values_p[j] == doctest::Approx(merged.values_s[j]).epsilon(1e-9));

  StirapShape bad = reference_shape();
  bad.tau = 0.0;
  CHECK_THROWS_AS(gaussian_schedule(bad, p, 10), std::invalid_argument);
  bad.tau = -0.1;
  CHECK_THROWS_AS(gaussian_schedule(bad, p, 10), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_schedule(reference_shape(), p, 1), std::invalid_argument);

  StirapShape too_strong = reference_shape(2.0 * p.omega_max);
  CHECK_THROWS_AS(gaussian_schedule(too_strong, p, 10), std::invalid_argument);
}

TEST_CASE("mixing_angles: limits and the degenerate input") {
  const auto resonant = mixing_angles(0.0, 1.0, 0.0);
  CHECK(resonant.theta == 0.0);
  CHECK(resonant.phi == doctest::Approx(kPi / 4).epsilon(1e-15));
  CHECK(resonant.omega_0 == 1.0);

  CHECK(mixing_angles(1.0, 1.0, 0.0).theta == doctest::Approx(kPi / 4));
  CHECK(mixing_angles(1.0, 1.0, 3.7).theta == doctest::Approx(kPi / 4));
  CHECK(mixing_angles(1.0, 0.0, 0.0).theta == doctest::Approx(kPi / 2));

  CHECK_THROWS_AS(mixing_angles(0.0, 0.0, 1.0), DegenerateInput);
}

TEST_CASE("eigensystem: closed forms against direct diagonalization") {
  // Resonant case with Omega_0 = 2: lambda_pm = pm 1.
  const auto res = eigensystem(std::sqrt(2.0), std::sqrt(2.0), 0.0);
  CHECK(res.lambda_0 == 0.0);
  CHECK(res.lambda_minus == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(res.lambda_plus == doctest::Approx(1.0).epsilon(1e-14));

  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> amp(0.0, 10.0);
  std::uniform_real_distribution<double> det(-8.0, 8.0);
  for (int it = 0; it < 200; ++it) {
    double op = amp(rng), os = amp(rng);
    if (op == 0.0 && os == 0.0) op = 1.0;
    const double dp = det(rng);
    const auto eig = eigensystem(op, os, dp);

    CHECK(eig.lambda_0 == 0.0);
    CHECK(eig.a_0[1] == 0.0);  // dark state: zero e-component, exactly
    CHECK(eig.lambda_minus <= 0.0);
    CHECK(eig.lambda_plus >= 0.0);

    const Eigen::Matrix3d h = three_level_block(op, os, dp);
    CHECK((h * eig.a_0 - eig.lambda_0 * eig.a_0).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((h * eig.a_minus - eig.lambda_minus * eig.a_minus).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((h * eig.a_plus - eig.lambda_plus * eig.a_plus).cwiseAbs().maxCoeff() < 1e-10);

    // Orthonormal frame.
    Eigen::Matrix3d frame;
    frame.col(0) = eig.a_0;
    frame.col(1) = eig.a_minus;
    frame.col(2) = eig.a_plus;
    CHECK((frame.transpose() * frame - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <
          1e-12);

    // Closed-form eigenvalues match numerical diagonalization.
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(h);
    Eigen::Vector3d closed(eig.lambda_minus, eig.lambda_0, eig.lambda_plus);
    std::sort(closed.data(), closed.data() + 3);
    CHECK((solver.eigenvalues() - closed).cwiseAbs().maxCoeff() < 1e-10);
  }

  CHECK_THROWS_AS(eigensystem(0.0, 0.0, 1.0), DegenerateInput);
}

TEST_CASE("local adiabaticity margin: stationary, STIRAP sweep, scaling") {
  auto p = reference_params();

  // Proportional pulses keep theta constant.
  auto proportional = PulseSchedule::analytic(
      [](double t) { return 2.0 * std::exp(-t); }, [](double t) { return 3.0 * std::exp(-t); },
      10, p.t_final);
  CHECK(local_adiabaticity_margin(proportional, p, 0.4) == kInfiniteMargin);

  // Gaussian STIRAP at Omega_max tau = 10: margin > 1 over the overlap window.
  const auto shape = reference_shape();
  const auto smooth = analytic_schedule(shape, p);
  double min_margin = kInfiniteMargin;
  for (int i = 0; i <= 400; ++i) {
    const double t = 0.25 + 0.5 * i / 400.0;
    min_margin = std::min(min_margin, local_adiabaticity_margin(smooth, p, t));
  }
  CHECK(min_margin > 1.0);

  // Scaling (Omega_p, Omega_s, Delta_p, 1/T) by alpha leaves the margin alone.
  const double alpha = 3.0;
  SystemParams p_base = p;
  p_base.delta_p = 2.0;
  SystemParams ps = p_base;
  ps.delta_p = p_base.delta_p * alpha;
  ps.t_final = p.t_final / alpha;
  ps.omega_max = p.omega_max * alpha;
  StirapShape scaled = shape;
  scaled.omega_peak = shape.omega_peak * alpha;
  scaled.tau = shape.tau / alpha;
  scaled.width = shape.width / alpha;
  const auto smooth_scaled = analytic_schedule(scaled, ps);
  const double t_probe = 0.37;
  const double m1 = local_adiabaticity_margin(smooth, p_base, t_probe);
  const double m2 = local_adiabaticity_margin(smooth_scaled, ps, t_probe / alpha);
  CHECK(m1 == doctest::Approx(m2).epsilon(1e-9));

  // Zero drive is a degenerate input.
  auto silent = PulseSchedule::analytic([](double) { return 0.0; },
                                        [](double) { return 0.0; }, 4, p.t_final);
  CHECK_THROWS_AS(local_adiabaticity_margin(silent, p, 0.5), DegenerateInput);
}

TEST_CASE("global adiabaticity product") {
  StirapShape shape;
  shape.omega_peak = 20.0;
  shape.tau = 0.5;
  shape.width = 0.2;
  CHECK(global_adiabaticity_product(shape) == doctest::Approx(10.0).epsilon(1e-15));

  StirapShape doubled = shape;
  doubled.omega_peak *= 2.0;
  CHECK(global_adiabaticity_product(doubled) ==
        doctest::Approx(2.0 * global_adiabaticity_product(shape)).epsilon(1e-15));

  StirapShape degenerate = shape;
  degenerate.tau = 0.0;
  CHECK_THROWS_AS(global_adiabaticity_product(degenerate), std::invalid_argument);
}

TEST_CASE("dark-state boundary angles of the Gaussian pair") {
  auto p = reference_params();
  // T_pulse = T/6 and tau = T/10 >= T_pulse/2 is satisfied by the defaults.
  const auto shape = reference_shape();
  const auto smooth = analytic_schedule(shape, p);
  CHECK(mixing_angle_theta(smooth, 0.0) < 0.01);
  CHECK(mixing_angle_theta(smooth, p.t_final) > kPi / 2 - 0.01);
}

TEST_CASE("adiabatic transfer and its time reverse") {
  auto p = reference_params();
  const auto schedule = gaussian_schedule(reference_shape(), p, 200);
  const double forward = fidelity(evolve_final(pure_state(kG), schedule, p));
  CHECK(forward >= 0.99);

  // Time reversal swaps the pulse order; it carries |r> back to |g>.
  auto reversed = schedule;
  std::reverse(reversed.values_p.begin(), reversed.values_p.end());
  std::reverse(reversed.values_s.begin(), reversed.values_s.end());
  const auto back = evolve_final(pure_state(kR), reversed, p);
  CHECK(back(kG, kG).real() >= 0.99);
  CHECK(std::abs(back(kG, kG).real() - forward) < 5e-3);
}
