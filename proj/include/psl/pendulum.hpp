#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace psl {

inline constexpr double kGravity = 9.81;
inline constexpr double kDefaultDt = 1e-3;

struct SagittalState {
  double x = 0.0;     // [m]
  double xdot = 0.0;  // [m/s]

  bool operator==(const SagittalState&) const = default;
};

struct LateralState {
  double y = 0.0;     // [m]
  double ydot = 0.0;  // [m/s]

  bool operator==(const LateralState&) const = default;
};

/// Sagittal and lateral CoM phase, the continuous part of the walker state.
struct PhaseState {
  SagittalState sagittal;
  LateralState lateral;

  bool operator==(const PhaseState&) const = default;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool operator==(const Vec3&) const = default;
};

/// Linear CoM surface z = a x + b, invariant along the lateral axis.
struct PathSurface {
  double a = 0.0;
  double b = 0.0;

  bool operator==(const PathSurface&) const = default;
};

struct TorqueLimits {
  double lower = -3.0;  // [N m]
  double upper = 3.0;

  bool contains(double tau) const { return tau >= lower && tau <= upper; }
  bool operator==(const TorqueLimits&) const = default;
};

/// Everything that fixes the vector field of one contact phase.
struct StepParameters {
  double omega = 3.13;  // [1/s]
  Vec3 foot;
  PathSurface surface;
  double mass = 1.0;          // [kg]
  double gravity = kGravity;  // [m/s^2]
  TorqueLimits tau_y_limits;
  TorqueLimits tau_x_limits;

  /// Throws ParameterError when an invariant is broken.
  void validate() const;
  bool operator==(const StepParameters&) const = default;
};

struct Torques {
  double tau_y = 0.0;  // pitch, drives the sagittal plane
  double tau_x = 0.0;  // roll, drives the lateral plane

  bool operator==(const Torques&) const = default;
};

struct PhaseDerivative {
  double velocity = 0.0;
  double acceleration = 0.0;
};

enum class IntegrationScheme {
  kRungeKutta4,
  // Acceleration held constant over each step; first order, kept for
  // comparison with the classic phase-plane stepping.
  kConstantAcceleration,
};

struct TrajectorySample {
  double t = 0.0;
  PhaseState state;
  Torques control;
  double z = 0.0;
};

struct Trajectory {
  double dt = kDefaultDt;
  std::vector<TrajectorySample> samples;
};

/// Control held constant over the integration step that starts at sample k.
using ControlSchedule =
    std::function<Torques(std::size_t k, double t, const PhaseState& state)>;

PhaseDerivative sagittal_derivative(const SagittalState& s,
                                    const StepParameters& p, double tau_y);
PhaseDerivative lateral_derivative(const LateralState& s,
                                   const StepParameters& p, double tau_x);

/// Analytic flow of xdd = omega^2 (x - x_foot); t may be negative.
SagittalState closed_form_state(double x0, double xdot0, double x_foot,
                                double omega, double t);

/// Time for the unforced flow to carry x0 onto x_foot. Requires positive
/// orbital energy and motion towards the foot, otherwise DomainError.
double time_to_apex(double x0, double xdot0, double x_foot, double omega);

/// One integration step of both planes under constant torques.
PhaseState integrate_step(const PhaseState& s, const StepParameters& p,
                          const Torques& u, double dt,
                          IntegrationScheme scheme =
                              IntegrationScheme::kRungeKutta4);

Trajectory integrate_trajectory(const PhaseState& s0, const StepParameters& p,
                                const ControlSchedule& schedule, double dt,
                                std::size_t n_steps,
                                IntegrationScheme scheme =
                                    IntegrationScheme::kRungeKutta4);

/// Convenience overload with torques fixed over the whole horizon.
Trajectory integrate_trajectory(const PhaseState& s0, const StepParameters& p,
                                const Torques& u, double dt,
                                std::size_t n_steps,
                                IntegrationScheme scheme =
                                    IntegrationScheme::kRungeKutta4);

double surface_height(const PathSurface& surface, double x);

/// Vertical CoM-to-foot distance when the CoM is above the foot.
double apex_height(const PathSurface& surface, const Vec3& foot);

double omega_from_surface(const PathSurface& surface, const Vec3& foot,
                          double gravity = kGravity);

/// Orbital energy xdot^2 - omega^2 (x - x_foot)^2, conserved without torque.
inline double orbital_energy(const SagittalState& s, double x_foot,
                             double omega) {
  const double dx = s.x - x_foot;
  return s.xdot * s.xdot - omega * omega * dx * dx;
}

}  // namespace psl
