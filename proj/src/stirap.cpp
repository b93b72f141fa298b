#include "qctrl/stirap.hpp"

#include <cmath>

namespace qctrl::stirap {

void StirapShape::validate() const {
  if (!(tau > 0.0))
    throw std::invalid_argument("StirapShape: tau must be > 0 (counter-intuitive order)");
  if (!(omega_peak > 0.0)) throw std::invalid_argument("StirapShape: omega_peak must be > 0");
  if (!(width > 0.0)) throw std::invalid_argument("StirapShape: width must be > 0");
  if (!(alpha_scale > 0.0)) throw std::invalid_argument("StirapShape: alpha_scale must be > 0");
}

namespace {

double gaussian(double x) { return std::exp(-x * x); }

std::pair<std::function<double(double)>, std::function<double(double)>>
envelopes(const StirapShape& shape, const SystemParams& params) {
  const double center = 0.5 * params.t_final;
  const double tau = shape.tau;
  const double width = shape.width;
  const double peak = shape.omega_peak;
  const double alpha = shape.alpha_scale;
  auto pump = [=](double t) { return peak * gaussian((t - center - tau) / width); };
  auto stokes = [=](double t) { return alpha * peak * gaussian((t - center + tau) / width); };
  return {pump, stokes};
}

}  // namespace

PulseSchedule gaussian_schedule(const StirapShape& shape,
                                const SystemParams& params, int n_segments) {
  shape.validate();
  params.validate();
  if (n_segments < 2) throw std::invalid_argument("gaussian_schedule: n_segments must be >= 2");
  if (shape.omega_peak > params.omega_max + 1e-12)
    throw std::invalid_argument("gaussian_schedule: omega_peak exceeds omega_max");
  auto [pump, stokes] = envelopes(shape, params);
  const double dt = params.t_final / n_segments;
  std::vector<double> vp(n_segments), vs(n_segments);
  for (int j = 0; j < n_segments; ++j) {
    const double t_mid = (j + 0.5) * dt;
    vp[j] = pump(t_mid);
    vs[j] = stokes(t_mid);
  }
  return PulseSchedule::piecewise_constant(std::move(vp), std::move(vs), params.t_final);
}

PulseSchedule analytic_schedule(const StirapShape& shape,
                                const SystemParams& params, int n_segments) {
  shape.validate();
  params.validate();
  auto [pump, stokes] = envelopes(shape, params);
  return PulseSchedule::analytic(pump, stokes, n_segments, params.t_final);
}

MixingAngles mixing_angles(double omega_p, double omega_s, double delta_p) {
  const double omega_0 = std::hypot(omega_p, omega_s);
  if (omega_0 == 0.0)
    throw DegenerateInput("mixing_angles: Omega_0 = 0, angles undefined");
  MixingAngles m;
  m.omega_0 = omega_0;
  m.theta = std::atan2(omega_p, omega_s);
  m.phi = std::atan2(omega_0, delta_p + std::hypot(delta_p, omega_0));
  return m;
}

Eigensystem eigensystem(double omega_p, double omega_s, double delta_p) {
  const MixingAngles m = mixing_angles(omega_p, omega_s, delta_p);
  const double ct = std::cos(m.theta), st = std::sin(m.theta);
  const double cp = std::cos(m.phi), sp = std::sin(m.phi);
  Eigensystem e;
  e.lambda_0 = 0.0;
  e.lambda_minus = -0.5 * m.omega_0 * std::tan(m.phi);
  e.lambda_plus = 0.5 * m.omega_0 / std::tan(m.phi);
  e.a_0 << ct, 0.0, -st;
  e.a_minus << st * cp, -sp, ct * cp;
  e.a_plus << st * sp, cp, ct * sp;
  return e;
}

double mixing_angle_theta(const PulseSchedule& schedule, double t) {
  return std::atan2(schedule.pump_at(t), schedule.stokes_at(t));
}

double local_adiabaticity_margin(const PulseSchedule& schedule,
                                 const SystemParams& params, double t) {
  const double omega_p = schedule.pump_at(t);
  const double omega_s = schedule.stokes_at(t);
  const double omega_0 = std::hypot(omega_p, omega_s);
  if (omega_0 == 0.0)
    throw DegenerateInput("local_adiabaticity_margin: Omega_0(t) = 0");
  const double h = params.t_final * 1e-4;
  const double theta_dot =
      (mixing_angle_theta(schedule, t + h) - mixing_angle_theta(schedule, t - h)) /
      (2.0 * h);
  // Differencing round-off floor: proportional pulses have theta_dot = 0 up
  // to ~ulp/h, many decades below any genuine STIRAP slope of order 1/T.
  if (std::abs(theta_dot) <= 1e-9 / params.t_final) return kInfiniteMargin;
  const double root = std::hypot(params.delta_p, omega_0);
  const double gap_minus = 0.5 * std::abs(params.delta_p - root);
  const double gap_plus = 0.5 * std::abs(params.delta_p + root);
  return std::min(gap_minus, gap_plus) / std::abs(theta_dot);
}

double global_adiabaticity_product(const StirapShape& shape) {
  shape.validate();
  return shape.omega_peak * shape.tau;
}

}  // namespace qctrl::stirap
