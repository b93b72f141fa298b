// Test-only reference implementations, kept independent of the library's
// propagation path: the Hamiltonian and dissipator are written out directly
// and integrated with fixed-step RK4 on the 4x4 density matrix.
#pragma once

#include <complex>
#include <random>

#include <Eigen/Dense>

#include "qctrl/dynamics.hpp"

namespace oracle {

using qctrl::Matrix4c;
using qctrl::dynamics::PulseSchedule;
using qctrl::dynamics::SystemParams;

inline Matrix4c hamiltonian(const SystemParams& p, double omega_p, double omega_s) {
  Matrix4c h = Matrix4c::Zero();
  h(1, 1) = p.delta_p;
  h(2, 2) = p.delta_3;
  h(0, 1) = h(1, 0) = 0.5 * omega_p;
  h(1, 2) = h(2, 1) = 0.5 * omega_s;
  return h;
}

inline Matrix4c master_rhs(const Matrix4c& rho, const Matrix4c& h, double gamma) {
  const std::complex<double> i_unit(0.0, 1.0);
  Matrix4c out = -i_unit * (h * rho - rho * h);
  out(3, 3) += gamma * rho(1, 1);
  out.row(1) -= 0.5 * gamma * rho.row(1);
  out.col(1) -= 0.5 * gamma * rho.col(1);
  return out;
}

// One RK4 step with a time-dependent Hamiltonian h(t).
template <class HFn>
Matrix4c rk4_step(const Matrix4c& rho, double t, double dt, HFn&& h_at, double gamma) {
  const Matrix4c k1 = master_rhs(rho, h_at(t), gamma);
  const Matrix4c k2 = master_rhs(rho + 0.5 * dt * k1, h_at(t + 0.5 * dt), gamma);
  const Matrix4c k3 = master_rhs(rho + 0.5 * dt * k2, h_at(t + 0.5 * dt), gamma);
  const Matrix4c k4 = master_rhs(rho + dt * k3, h_at(t + dt), gamma);
  return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Dense fixed-step integration of a schedule. Piecewise-constant schedules
// are integrated segment by segment so RK4 never straddles a jump.
inline Matrix4c integrate(const Matrix4c& rho0, const PulseSchedule& schedule,
                          const SystemParams& params, long total_steps) {
  Matrix4c rho = rho0;
  if (schedule.kind == qctrl::dynamics::ScheduleKind::PiecewiseConstant) {
    const int n = schedule.n_segments;
    const long per_segment = std::max<long>(1, total_steps / n);
    const double seg_dt = params.t_final / n;
    for (int j = 0; j < n; ++j) {
      const Matrix4c h = hamiltonian(params, schedule.values_p[j], schedule.values_s[j]);
      auto h_at = [&](double) { return h; };
      const double dt = seg_dt / per_segment;
      for (long k = 0; k < per_segment; ++k)
        rho = rk4_step(rho, j * seg_dt + k * dt, dt, h_at, params.gamma);
    }
    return rho;
  }
  auto h_at = [&](double t) {
    return hamiltonian(params, schedule.pump_at(t), schedule.stokes_at(t));
  };
  const double dt = params.t_final / total_steps;
  for (long k = 0; k < total_steps; ++k)
    rho = rk4_step(rho, k * dt, dt, h_at, params.gamma);
  return rho;
}

// Ginibre-random density matrix: positive semidefinite with unit trace.
inline Matrix4c random_density(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix4c a;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a(i, j) = std::complex<double>(normal(rng), normal(rng));
  Matrix4c rho = a * a.adjoint();
  return rho / rho.trace();
}

inline double min_eigenvalue(const Matrix4c& rho) {
  const Matrix4c herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix4c> solver(herm);
  return solver.eigenvalues().minCoeff();
}

}  // namespace oracle
