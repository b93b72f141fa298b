#pragma once

#include <limits>
#include <stdexcept>

#include "qctrl/dynamics.hpp"

namespace qctrl::stirap {

using dynamics::PulseSchedule;
using dynamics::SystemParams;

/// Raised where the mixing angles / eigensystem are undefined (Omega_0 = 0).
struct DegenerateInput : std::domain_error {
  using std::domain_error::domain_error;
};

/// Gaussian pulse pair for the counter-intuitive sequence: the Stokes pulse
/// peaks at T/2 - tau, the pump pulse at T/2 + tau.
struct StirapShape {
  double omega_peak = 1.0;  ///< peak Rabi frequency Omega_max
  double tau = 0.1;         ///< half the pulse delay (> 0)
  double width = 1.0 / 6;   ///< Gaussian 1/e half-width
  double alpha_scale = 1.0; ///< Stokes amplitude scaling

  void validate() const;
};

/// theta, phi and the rms Rabi frequency Omega_0 = sqrt(Op^2 + Os^2).
struct MixingAngles {
  double theta = 0.0;
  double phi = 0.0;
  double omega_0 = 0.0;
};

/// Instantaneous eigensystem of the 3x3 (g, e, r) Hamiltonian block at
/// two-photon resonance; lambda_0 = 0 belongs to the dark state a_0.
struct Eigensystem {
  double lambda_0 = 0.0;
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
  Eigen::Vector3d a_0;
  Eigen::Vector3d a_minus;
  Eigen::Vector3d a_plus;
};

/// Piecewise-constant schedule sampling the Gaussian pair at segment midpoints:
///   Omega_p(t) = Omega_max exp(-((t - T/2 - tau)/width)^2)
///   Omega_s(t) = alpha Omega_max exp(-((t - T/2 + tau)/width)^2)
PulseSchedule gaussian_schedule(const StirapShape& shape,
                                const SystemParams& params, int n_segments);

/// Same envelopes kept as closed-form callables (smooth theta(t) for the
/// adiabaticity diagnostics).
PulseSchedule analytic_schedule(const StirapShape& shape,
                                const SystemParams& params, int n_segments = 100);

/// tan(theta) = Omega_p / Omega_s,
/// tan(phi) = Omega_0 / (Delta_p + sqrt(Delta_p^2 + Omega_0^2)).
MixingAngles mixing_angles(double omega_p, double omega_s, double delta_p);

/// Closed-form eigenvalues lambda_0 = 0, lambda_- = -(Omega_0/2) tan(phi),
/// lambda_+ = (Omega_0/2) cot(phi) and the matching eigenvectors.
Eigensystem eigensystem(double omega_p, double omega_s, double delta_p);

/// Ratio min_pm |Delta_p pm sqrt(Delta_p^2 + Omega_0^2)| / (2 |dtheta/dt|)
/// at time t; > 1 means the local adiabaticity condition holds, +inf when
/// theta is stationary. dtheta/dt is a central difference with step T/1e4.
double local_adiabaticity_margin(const PulseSchedule& schedule,
                                 const SystemParams& params, double t);

/// Dimensionless pulse area Omega_max * tau; >= 10 is the usual global
/// adiabaticity rule of thumb.
double global_adiabaticity_product(const StirapShape& shape);

/// theta(t) of a schedule via the two-argument arctangent (in [0, pi/2]
/// for nonnegative pulses).
double mixing_angle_theta(const PulseSchedule& schedule, double t);

inline constexpr double kInfiniteMargin = std::numeric_limits<double>::infinity();

}  // namespace qctrl::stirap
