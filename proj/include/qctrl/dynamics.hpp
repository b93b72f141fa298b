#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "qctrl/linalg.hpp"

namespace qctrl::dynamics {

// Basis ordering is fixed as (g, e, r, s); s is the loss sink.
inline constexpr int kG = 0;
inline constexpr int kE = 1;
inline constexpr int kR = 2;
inline constexpr int kS = 3;

/// Physical configuration of the driven three-level system plus sink.
/// All rates are angular frequencies in units of 1/time, hbar = 1.
struct SystemParams {
  double delta_p = 0.0;    ///< single-photon detuning
  double delta_3 = 0.0;    ///< two-photon detuning (0 in all shipped experiments)
  double gamma = 0.0;      ///< decay rate e -> sink
  double t_final = 1.0;    ///< protocol duration T
  double omega_max = 1.0;  ///< pulse-amplitude bound

  void validate() const;
};

/// Dimensionless experiment specification: T is normalized to 1 internally.
SystemParams params_from_dimensionless(double t_gamma, double t_omega_max);

using DensityMatrix = Matrix4c;

DensityMatrix pure_state(int level);

enum class ScheduleKind { PiecewiseConstant, PiecewiseLinear, Analytic };

/// Two real control envelopes Omega_p(t), Omega_s(t) on [0, horizon].
/// Piecewise kinds live on the uniform grid t_j = j * horizon / n_segments;
/// constant schedules store one value per segment, linear ones store the
/// n_segments + 1 knot values.
struct PulseSchedule {
  ScheduleKind kind = ScheduleKind::PiecewiseConstant;
  int n_segments = 1;
  double horizon = 1.0;
  std::vector<double> values_p;
  std::vector<double> values_s;
  std::function<double(double)> analytic_p;
  std::function<double(double)> analytic_s;

  static PulseSchedule piecewise_constant(std::vector<double> pump,
                                          std::vector<double> stokes,
                                          double horizon);
  static PulseSchedule piecewise_linear(std::vector<double> pump_knots,
                                        std::vector<double> stokes_knots,
                                        double horizon);
  static PulseSchedule analytic(std::function<double(double)> pump,
                                std::function<double(double)> stokes,
                                int n_segments, double horizon);

  double pump_at(double t) const;
  double stokes_at(double t) const;
};

/// Generator of one constant-control segment, acting on vec(rho).
struct Liouvillian {
  Matrix16c generator;
};

/// H = Delta_p |e><e| + Delta_3 |r><r| + Omega_p/2 (|g><e| + h.c.)
///   + Omega_s/2 (|e><r| + h.c.); the sink row/column stays zero.
Matrix4c build_hamiltonian(const SystemParams& params, double omega_p,
                           double omega_s);

/// Superoperator of the decay channel sqrt(gamma)|s><e| in vectorized form.
Matrix16c build_dissipator(double gamma);

/// Entrywise dissipator action: gamma/2 (2|s><e| rho |e><s| - |e><e| rho - rho |e><e|).
DensityMatrix apply_dissipator(double gamma, const DensityMatrix& rho);

/// Full generator of drho/dt = -i[H, rho] + L_gamma rho for fixed controls.
Liouvillian assemble_liouvillian(const SystemParams& params, double omega_p,
                                 double omega_s);

/// Exact propagation of a constant segment: vec(rho') = expm(L dt) vec(rho).
DensityMatrix propagate_segment(const DensityMatrix& state,
                                const Liouvillian& generator, double dt);

inline constexpr int kDefaultSubsteps = 10;

/// Propagates the initial state through the whole schedule and returns the
/// states at the n_segments + 1 segment boundaries (entry 0 is the initial
/// state). Piecewise-linear and analytic schedules are sub-sampled into
/// `substeps` constant slices per segment, held at their midpoint values.
std::vector<DensityMatrix> evolve(const DensityMatrix& initial,
                                  const PulseSchedule& schedule,
                                  const SystemParams& params,
                                  int substeps = kDefaultSubsteps);

/// Same propagation, returning only the final state.
DensityMatrix evolve_final(const DensityMatrix& initial,
                           const PulseSchedule& schedule,
                           const SystemParams& params,
                           int substeps = kDefaultSubsteps);

/// F = Tr{rho |r><r|} = rho_rr, clamped to [0, 1].
/// Throws if the rr element has picked up an imaginary part > 1e-8.
double fidelity(const DensityMatrix& final_state);

}  // namespace qctrl::dynamics
