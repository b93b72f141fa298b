#include "qctrl/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace qctrl::dynamics {

namespace {

constexpr Complex kI{0.0, 1.0};

// Kronecker product of two 4x4 complex matrices.
Matrix16c kron4(const Matrix4c& a, const Matrix4c& b) {
  Matrix16c out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out.block<4, 4>(4 * i, 4 * j) = a(i, j) * b;
  return out;
}

int interval_index(double t, double horizon, int n) {
  // Segment j covers [t_{j-1}, t_j); the final instant belongs to the last one.
  int j = static_cast<int>(std::floor(t / horizon * n));
  if (j < 0) j = 0;
  if (j >= n) j = n - 1;
  return j;
}

}  // namespace

void SystemParams::validate() const {
  if (!(gamma >= 0.0)) throw std::invalid_argument("SystemParams: gamma must be >= 0");
  if (!(t_final > 0.0)) throw std::invalid_argument("SystemParams: t_final must be > 0");
  if (!(omega_max > 0.0)) throw std::invalid_argument("SystemParams: omega_max must be > 0");
}

SystemParams params_from_dimensionless(double t_gamma, double t_omega_max) {
  SystemParams p;
  p.t_final = 1.0;
  p.gamma = t_gamma;
  p.omega_max = t_omega_max;
  p.validate();
  return p;
}

DensityMatrix pure_state(int level) {
  if (level < 0 || level > 3) throw std::invalid_argument("pure_state: level out of range");
  DensityMatrix rho = DensityMatrix::Zero();
  rho(level, level) = 1.0;
  return rho;
}

PulseSchedule PulseSchedule::piecewise_constant(std::vector<double> pump,
                                                std::vector<double> stokes,
                                                double horizon) {
  if (pump.size() != stokes.size() || pump.empty())
    throw std::invalid_argument("piecewise_constant: pump/stokes need equal nonzero length");
  if (!(horizon > 0.0)) throw std::invalid_argument("piecewise_constant: horizon must be > 0");
  PulseSchedule s;
  s.kind = ScheduleKind::PiecewiseConstant;
  s.n_segments = static_cast<int>(pump.size());
  s.horizon = horizon;
  s.values_p = std::move(pump);
  s.values_s = std::move(stokes);
  return s;
}

PulseSchedule PulseSchedule::piecewise_linear(std::vector<double> pump_knots,
                                              std::vector<double> stokes_knots,
                                              double horizon) {
  if (pump_knots.size() != stokes_knots.size() || pump_knots.size() < 2)
    throw std::invalid_argument("piecewise_linear: need >= 2 knots per control");
  if (!(horizon > 0.0)) throw std::invalid_argument("piecewise_linear: horizon must be > 0");
  PulseSchedule s;
  s.kind = ScheduleKind::PiecewiseLinear;
  s.n_segments = static_cast<int>(pump_knots.size()) - 1;
  s.horizon = horizon;
  s.values_p = std::move(pump_knots);
  s.values_s = std::move(stokes_knots);
  return s;
}

PulseSchedule PulseSchedule::analytic(std::function<double(double)> pump,
                                      std::function<double(double)> stokes,
                                      int n_segments, double horizon) {
  if (!pump || !stokes) throw std::invalid_argument("analytic: missing envelope callables");
  if (n_segments < 1) throw std::invalid_argument("analytic: n_segments must be >= 1");
  if (!(horizon > 0.0)) throw std::invalid_argument("analytic: horizon must be > 0");
  PulseSchedule s;
  s.kind = ScheduleKind::Analytic;
  s.n_segments = n_segments;
  s.horizon = horizon;
  s.analytic_p = std::move(pump);
  s.analytic_s = std::move(stokes);
  return s;
}

double PulseSchedule::pump_at(double t) const {
  switch (kind) {
    case ScheduleKind::PiecewiseConstant:
      return values_p[interval_index(t, horizon, n_segments)];
    case ScheduleKind::PiecewiseLinear: {
      const int j = interval_index(t, horizon, n_segments);
      const double dt = horizon / n_segments;
      const double frac = (t - j * dt) / dt;
      return values_p[j] + (values_p[j + 1] - values_p[j]) * frac;
    }
    case ScheduleKind::Analytic:
      return analytic_p(t);
  }
  return 0.0;
}

double PulseSchedule::stokes_at(double t) const {
  switch (kind) {
    case ScheduleKind::PiecewiseConstant:
      return values_s[interval_index(t, horizon, n_segments)];
    case ScheduleKind::PiecewiseLinear: {
      const int j = interval_index(t, horizon, n_segments);
      const double dt = horizon / n_segments;
      const double frac = (t - j * dt) / dt;
      return values_s[j] + (values_s[j + 1] - values_s[j]) * frac;
    }
    case ScheduleKind::Analytic:
      return analytic_s(t);
  }
  return 0.0;
}

Matrix4c build_hamiltonian(const SystemParams& params, double omega_p,
                           double omega_s) {
  Matrix4c h = Matrix4c::Zero();
  h(kE, kE) = params.delta_p;
  h(kR, kR) = params.delta_3;
  h(kG, kE) = 0.5 * omega_p;
  h(kE, kG) = 0.5 * omega_p;
  h(kE, kR) = 0.5 * omega_s;
  h(kR, kE) = 0.5 * omega_s;
  return h;
}

Matrix16c build_dissipator(double gamma) {
  if (gamma < 0.0) throw std::invalid_argument("build_dissipator: gamma must be >= 0");
  // Jump operator A = sqrt(gamma) |s><e|.  In column-major vectorization
  // vec(A rho A') = (conj(A) kron A) vec(rho) and the anticommutator part
  // becomes -1/2 (I kron A'A + (A'A)^T kron I).
  Matrix4c jump = Matrix4c::Zero();
  jump(kS, kE) = std::sqrt(gamma);
  const Matrix4c number = jump.adjoint() * jump;  // gamma |e><e|
  const Matrix4c id = Matrix4c::Identity();
  return kron4(jump.conjugate(), jump) -
         0.5 * (kron4(id, number) + kron4(number.transpose(), id));
}

DensityMatrix apply_dissipator(double gamma, const DensityMatrix& rho) {
  if (gamma < 0.0) throw std::invalid_argument("apply_dissipator: gamma must be >= 0");
  DensityMatrix out = DensityMatrix::Zero();
  out(kS, kS) = gamma * rho(kE, kE);
  out.row(kE) -= 0.5 * gamma * rho.row(kE);
  out.col(kE) -= 0.5 * gamma * rho.col(kE);
  return out;
}

Liouvillian assemble_liouvillian(const SystemParams& params, double omega_p,
                                 double omega_s) {
  params.validate();
  const Matrix4c h = build_hamiltonian(params, omega_p, omega_s);
  const Matrix4c id = Matrix4c::Identity();
  // vec(-i[H, rho]) = -i (I kron H - H^T kron I) vec(rho)
  Matrix16c gen = -kI * (kron4(id, h) - kron4(h.transpose(), id));
  gen += build_dissipator(params.gamma);
  return Liouvillian{gen};
}

DensityMatrix propagate_segment(const DensityMatrix& state,
                                const Liouvillian& generator, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("propagate_segment: dt must be > 0");
  const Matrix16c propagator = expm<Matrix16c>(generator.generator * dt);
  const DensityMatrix out = unvectorize(propagator * vectorize(state));
  if (!out.allFinite())
    throw std::runtime_error("propagate_segment: non-finite state (expm overflow)");
  return out;
}

namespace {

void propagate_schedule(DensityMatrix& rho, const PulseSchedule& schedule,
                        const SystemParams& params, int substeps,
                        std::vector<DensityMatrix>* trajectory) {
  if (std::abs(schedule.horizon - params.t_final) >
      1e-12 * std::max(1.0, params.t_final))
    throw std::invalid_argument("evolve: schedule horizon != params.t_final");
  if (substeps < 1) throw std::invalid_argument("evolve: substeps must be >= 1");
  const int n = schedule.n_segments;
  const double dt = schedule.horizon / n;
  const bool constant = schedule.kind == ScheduleKind::PiecewiseConstant;
  for (int j = 0; j < n; ++j) {
    if (constant) {
      const auto gen =
          assemble_liouvillian(params, schedule.values_p[j], schedule.values_s[j]);
      rho = propagate_segment(rho, gen, dt);
    } else {
      const double sub_dt = dt / substeps;
      for (int k = 0; k < substeps; ++k) {
        const double t_mid = j * dt + (k + 0.5) * sub_dt;
        const auto gen = assemble_liouvillian(params, schedule.pump_at(t_mid),
                                              schedule.stokes_at(t_mid));
        rho = propagate_segment(rho, gen, sub_dt);
      }
    }
    if (trajectory) trajectory->push_back(rho);
  }
}

}  // namespace

std::vector<DensityMatrix> evolve(const DensityMatrix& initial,
                                  const PulseSchedule& schedule,
                                  const SystemParams& params, int substeps) {
  std::vector<DensityMatrix> trajectory;
  trajectory.reserve(schedule.n_segments + 1);
  trajectory.push_back(initial);
  DensityMatrix rho = initial;
  propagate_schedule(rho, schedule, params, substeps, &trajectory);
  return trajectory;
}

DensityMatrix evolve_final(const DensityMatrix& initial,
                           const PulseSchedule& schedule,
                           const SystemParams& params, int substeps) {
  DensityMatrix rho = initial;
  propagate_schedule(rho, schedule, params, substeps, nullptr);
  return rho;
}

double fidelity(const DensityMatrix& final_state) {
  const Complex rr = final_state(kR, kR);
  if (std::abs(rr.imag()) > 1e-8)
    throw std::runtime_error("fidelity: rho_rr has a non-negligible imaginary part");
  return std::clamp(rr.real(), 0.0, 1.0);
}

}  // namespace qctrl::dynamics
