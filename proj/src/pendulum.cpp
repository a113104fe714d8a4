#include "psl/pendulum.hpp"

#include <cmath>

#include <fmt/format.h>

#include "psl/errors.hpp"

namespace psl {

namespace {

void check_torque(double tau, const TorqueLimits& limits, const char* name) {
  if (!limits.contains(tau)) {
    throw BoundsViolation(fmt::format("{}={} outside [{}, {}]", name, tau,
                                      limits.lower, limits.upper));
  }
}

struct PhaseRate {
  double xdot, xddot, ydot, yddot;
};

PhaseRate phase_rate(const PhaseState& s, const StepParameters& p,
                     const Torques& u) {
  const double w2 = p.omega * p.omega;
  const double k = w2 / (p.mass * p.gravity);
  return {s.sagittal.xdot, w2 * (s.sagittal.x - p.foot.x) - k * u.tau_y,
          s.lateral.ydot, w2 * (s.lateral.y - p.foot.y) - k * u.tau_x};
}

PhaseState offset(const PhaseState& s, const PhaseRate& r, double h) {
  return {{s.sagittal.x + h * r.xdot, s.sagittal.xdot + h * r.xddot},
          {s.lateral.y + h * r.ydot, s.lateral.ydot + h * r.yddot}};
}

bool finite(const PhaseState& s) {
  return std::isfinite(s.sagittal.x) && std::isfinite(s.sagittal.xdot) &&
         std::isfinite(s.lateral.y) && std::isfinite(s.lateral.ydot);
}

}  // namespace

void StepParameters::validate() const {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw ParameterError(fmt::format("omega must be positive, got {}", omega));
  }
  if (!(mass > 0.0)) {
    throw ParameterError(fmt::format("mass must be positive, got {}", mass));
  }
  if (!(gravity > 0.0)) {
    throw ParameterError(
        fmt::format("gravity must be positive, got {}", gravity));
  }
  if (tau_y_limits.lower > tau_y_limits.upper ||
      tau_x_limits.lower > tau_x_limits.upper) {
    throw ParameterError("torque lower limit exceeds upper limit");
  }
}

PhaseDerivative sagittal_derivative(const SagittalState& s,
                                    const StepParameters& p, double tau_y) {
  check_torque(tau_y, p.tau_y_limits, "tau_y");
  const double w2 = p.omega * p.omega;
  return {s.xdot, w2 * (s.x - p.foot.x) - w2 / (p.mass * p.gravity) * tau_y};
}

PhaseDerivative lateral_derivative(const LateralState& s,
                                   const StepParameters& p, double tau_x) {
  check_torque(tau_x, p.tau_x_limits, "tau_x");
  const double w2 = p.omega * p.omega;
  return {s.ydot, w2 * (s.y - p.foot.y) - w2 / (p.mass * p.gravity) * tau_x};
}

SagittalState closed_form_state(double x0, double xdot0, double x_foot,
                                double omega, double t) {
  const double c = std::cosh(omega * t);
  const double s = std::sinh(omega * t);
  const double dx0 = x0 - x_foot;
  return {dx0 * c + xdot0 / omega * s + x_foot, omega * dx0 * s + xdot0 * c};
}

double time_to_apex(double x0, double xdot0, double x_foot, double omega) {
  // x~(t) = 0  <=>  tanh(w t) = -w x~0 / xdot0
  const double ratio = -omega * (x0 - x_foot) / xdot0;
  if (!(std::abs(ratio) < 1.0) || !std::isfinite(ratio)) {
    throw DomainError(fmt::format(
        "state ({}, {}) never reaches the apex over foot {}", x0, xdot0,
        x_foot));
  }
  return std::atanh(ratio) / omega;
}

PhaseState integrate_step(const PhaseState& s, const StepParameters& p,
                          const Torques& u, double dt,
                          IntegrationScheme scheme) {
  check_torque(u.tau_y, p.tau_y_limits, "tau_y");
  check_torque(u.tau_x, p.tau_x_limits, "tau_x");
  if (scheme == IntegrationScheme::kConstantAcceleration) {
    const PhaseRate r = phase_rate(s, p, u);
    return {{s.sagittal.x + dt * r.xdot + 0.5 * dt * dt * r.xddot,
             s.sagittal.xdot + dt * r.xddot},
            {s.lateral.y + dt * r.ydot + 0.5 * dt * dt * r.yddot,
             s.lateral.ydot + dt * r.yddot}};
  }
  const PhaseRate k1 = phase_rate(s, p, u);
  const PhaseRate k2 = phase_rate(offset(s, k1, 0.5 * dt), p, u);
  const PhaseRate k3 = phase_rate(offset(s, k2, 0.5 * dt), p, u);
  const PhaseRate k4 = phase_rate(offset(s, k3, dt), p, u);
  const double h = dt / 6.0;
  return {{s.sagittal.x + h * (k1.xdot + 2.0 * k2.xdot + 2.0 * k3.xdot + k4.xdot),
           s.sagittal.xdot +
               h * (k1.xddot + 2.0 * k2.xddot + 2.0 * k3.xddot + k4.xddot)},
          {s.lateral.y + h * (k1.ydot + 2.0 * k2.ydot + 2.0 * k3.ydot + k4.ydot),
           s.lateral.ydot +
               h * (k1.yddot + 2.0 * k2.yddot + 2.0 * k3.yddot + k4.yddot)}};
}

Trajectory integrate_trajectory(const PhaseState& s0, const StepParameters& p,
                                const ControlSchedule& schedule, double dt,
                                std::size_t n_steps,
                                IntegrationScheme scheme) {
  if (!(dt > 0.0)) {
    throw ParameterError(fmt::format("dt must be positive, got {}", dt));
  }
  p.validate();
  Trajectory traj;
  traj.dt = dt;
  traj.samples.reserve(n_steps + 1);

  PhaseState s = s0;
  for (std::size_t k = 0; k <= n_steps; ++k) {
    // Time from the index, not by accumulation, keeps the spacing uniform.
    const double t = static_cast<double>(k) * dt;
    const Torques u = k < n_steps ? schedule(k, t, s) : Torques{};
    traj.samples.push_back(
        {t, s, u, surface_height(p.surface, s.sagittal.x)});
    if (k == n_steps) break;
    s = integrate_step(s, p, u, dt, scheme);
    if (!finite(s)) {
      throw DivergenceError(
          fmt::format("non-finite state after integration step {}", k + 1),
          k + 1);
    }
  }
  return traj;
}

Trajectory integrate_trajectory(const PhaseState& s0, const StepParameters& p,
                                const Torques& u, double dt,
                                std::size_t n_steps,
                                IntegrationScheme scheme) {
  return integrate_trajectory(
      s0, p, [u](std::size_t, double, const PhaseState&) { return u; }, dt,
      n_steps, scheme);
}

double surface_height(const PathSurface& surface, double x) {
  return surface.a * x + surface.b;
}

double apex_height(const PathSurface& surface, const Vec3& foot) {
  return surface.a * foot.x + surface.b - foot.z;
}

double omega_from_surface(const PathSurface& surface, const Vec3& foot,
                          double gravity) {
  const double z_apex = apex_height(surface, foot);
  if (!(z_apex > 0.0)) {
    throw GeometryError(fmt::format(
        "CoM surface lies {} m above the foot; it must be strictly above",
        z_apex));
  }
  return std::sqrt(gravity / z_apex);
}

}  // namespace psl
