#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "psl/errors.hpp"
#include "psl/pendulum.hpp"

namespace psl {
namespace {

StepParameters params(double foot_x, double omega = 3.13) {
  StepParameters p;
  p.omega = omega;
  p.foot = {foot_x, 0.0, 0.0};
  p.surface = {0.0, 1.0};
  return p;
}

TEST(SagittalDerivative, ZeroAtApexWithoutTorque) {
  const auto d = sagittal_derivative({1.2, 0.6}, params(1.2), 0.0);
  EXPECT_DOUBLE_EQ(d.velocity, 0.6);
  EXPECT_DOUBLE_EQ(d.acceleration, 0.0);
}

TEST(SagittalDerivative, BehindFoot) {
  const auto d = sagittal_derivative({1.1, 0.7}, params(1.2), 0.0);
  EXPECT_NEAR(d.acceleration, -0.97969, 1e-5);
}

TEST(SagittalDerivative, TorqueAtTheDefaultLimit) {
  const auto d = sagittal_derivative({1.2, 0.6}, params(1.2), 3.0);
  EXPECT_NEAR(d.acceleration, -2.9959, 1e-4);
}

TEST(SagittalDerivative, TorqueOutsideLimitsThrows) {
  EXPECT_THROW(sagittal_derivative({1.2, 0.6}, params(1.2), 3.5), BoundsViolation);
  EXPECT_THROW(sagittal_derivative({1.2, 0.6}, params(1.2), -3.01), BoundsViolation);
}

TEST(LateralDerivative, EquilibriumAndOddSymmetry) {
  StepParameters p = params(0.0);
  p.foot.y = 0.1;
  EXPECT_DOUBLE_EQ(lateral_derivative({0.1, 0.0}, p, 0.0).acceleration, 0.0);
  const double up = lateral_derivative({0.2, 0.0}, p, 0.0).acceleration;
  const double down = lateral_derivative({0.0, 0.0}, p, 0.0).acceleration;
  EXPECT_NEAR(up, 0.97969, 1e-5);
  EXPECT_DOUBLE_EQ(up, -down);
  EXPECT_THROW(lateral_derivative({0.2, 0.0}, p, 4.0), BoundsViolation);
}

TEST(ClosedForm, IdentityAtZeroTime) {
  const auto s = closed_form_state(1.0, 0.6, 1.2, 3.13, 0.0);
  EXPECT_DOUBLE_EQ(s.x, 1.0);
  EXPECT_DOUBLE_EQ(s.xdot, 0.6);
}

TEST(ClosedForm, StartingOverFoot) {
  const double t = 0.37;
  const auto s = closed_form_state(1.2, 0.6, 1.2, 3.13, t);
  EXPECT_NEAR(s.x, 1.2 + 0.6 / 3.13 * std::sinh(3.13 * t), 1e-14);
}

TEST(ClosedForm, MatchesFineRungeKutta) {
  const auto s = closed_form_state(1.0, 0.6, 1.2, 3.13, 0.1);
  const auto ref = oracle::rk4({1.0, 0.6}, 1.2, 3.13, 0.0, 1.0, kGravity, 1e-5, 10000);
  EXPECT_NEAR(s.x, ref.x, 1e-9);
  EXPECT_NEAR(s.xdot, ref.xd, 1e-9);
}

TEST(ClosedForm, ConservesOrbitalEnergy) {
  oracle::Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const double x0 = rng.uniform(-0.5, 0.5), xd0 = rng.uniform(-1.0, 1.0);
    const double w = rng.uniform(2.0, 4.0), t = rng.uniform(-1.0, 1.0);
    const double e0 = orbital_energy({x0, xd0}, 0.1, w);
    const double e1 = orbital_energy(closed_form_state(x0, xd0, 0.1, w, t), 0.1, w);
    EXPECT_LE(std::abs(e1 - e0), 1e-10 * std::max(1.0, std::abs(e0)));
  }
}

TEST(ClosedForm, SatisfiesTheOde) {
  const double h = 1e-4, w = 3.13, f = 1.2;
  for (double t : {0.05, 0.2, 0.6}) {
    const auto m = closed_form_state(1.0, 0.6, f, w, t - h);
    const auto c = closed_form_state(1.0, 0.6, f, w, t);
    const auto p = closed_form_state(1.0, 0.6, f, w, t + h);
    EXPECT_NEAR((p.x - m.x) / (2 * h), c.xdot, 1e-6);
    EXPECT_NEAR((p.x - 2 * c.x + m.x) / (h * h), w * w * (c.x - f), 1e-5);
  }
}

TEST(ClosedForm, TimeReversal) {
  const auto fwd = closed_form_state(1.0, 0.6, 1.2, 3.13, 0.8);
  const auto back = closed_form_state(fwd.x, fwd.xdot, 1.2, 3.13, -0.8);
  EXPECT_NEAR(back.x, 1.0, 1e-9);
  EXPECT_NEAR(back.xdot, 0.6, 1e-9);
}

TEST(TimeToApex, ReachesTheFoot) {
  const double t = time_to_apex(1.0, 0.8, 1.2, 3.13);
  EXPECT_NEAR(closed_form_state(1.0, 0.8, 1.2, 3.13, t).x, 1.2, 1e-12);
  EXPECT_THROW(time_to_apex(1.0, 0.5, 1.2, 3.13), DomainError);
}

TEST(IntegrateTrajectory, ZeroStepsGivesInitialSample) {
  const PhaseState s0{{1.0, 0.6}, {0.05, 0.0}};
  const auto tr = integrate_trajectory(s0, params(1.2), Torques{}, 1e-3, 0);
  ASSERT_EQ(tr.samples.size(), 1u);
  EXPECT_EQ(tr.samples[0].state, s0);
  EXPECT_DOUBLE_EQ(tr.samples[0].z, 1.0);
}

TEST(IntegrateTrajectory, UniformTimesAndSurfaceHeight) {
  StepParameters p = params(1.2);
  p.surface = {0.1, 0.9};
  const auto tr = integrate_trajectory({{1.0, 0.6}, {}}, p, Torques{}, 1e-3, 50);
  ASSERT_EQ(tr.samples.size(), 51u);
  for (std::size_t k = 0; k < tr.samples.size(); ++k) {
    EXPECT_DOUBLE_EQ(tr.samples[k].t, static_cast<double>(k) * 1e-3);
    EXPECT_DOUBLE_EQ(tr.samples[k].z, 0.1 * tr.samples[k].state.sagittal.x + 0.9);
  }
}

TEST(IntegrateTrajectory, ConservesEnergyAndMatchesClosedForm) {
  const auto tr = integrate_trajectory({{1.0, 0.6}, {}}, params(1.2), Torques{}, 1e-3, 1000);
  const auto& first = tr.samples.front().state.sagittal;
  const auto& last = tr.samples.back().state.sagittal;
  EXPECT_NEAR(orbital_energy(first, 1.2, 3.13), orbital_energy(last, 1.2, 3.13), 1e-8);
  const auto ref = oracle::flow(1.0, 0.6, 1.2, 3.13, 1.0);
  EXPECT_NEAR(last.x, ref.x, 1e-6);
  EXPECT_NEAR(last.xdot, ref.xd, 1e-6);
}

TEST(IntegrateTrajectory, FourthOrderConvergence) {
  const double T = 0.5;
  const auto ref = oracle::flow(1.0, 0.6, 1.2, 3.13, T);
  auto err = [&](double dt) {
    const auto n = static_cast<std::size_t>(std::llround(T / dt));
    const auto tr = integrate_trajectory({{1.0, 0.6}, {}}, params(1.2), Torques{}, dt, n);
    return std::abs(tr.samples.back().state.sagittal.x - ref.x);
  };
  const double ratio = err(0.02) / err(0.01);
  EXPECT_NEAR(ratio, 16.0, 1.5);
}

TEST(IntegrateTrajectory, ConstantAccelerationSchemeIsFirstOrder) {
  const double T = 0.5;
  const auto ref = oracle::flow(1.0, 0.6, 1.2, 3.13, T);
  auto err = [&](double dt) {
    const auto n = static_cast<std::size_t>(std::llround(T / dt));
    const auto tr = integrate_trajectory({{1.0, 0.6}, {}}, params(1.2), Torques{}, dt, n,
                                         IntegrationScheme::kConstantAcceleration);
    return std::abs(tr.samples.back().state.sagittal.x - ref.x);
  };
  EXPECT_NEAR(err(0.002) / err(0.001), 2.0, 0.3);
}

TEST(IntegrateTrajectory, ScheduleSeesEachSample) {
  std::size_t calls = 0;
  const auto tr = integrate_trajectory(
      {{1.0, 0.6}, {}}, params(1.2),
      [&](std::size_t k, double, const PhaseState&) {
        EXPECT_EQ(k, calls++);
        return Torques{k % 2 == 0 ? 1.0 : -1.0, 0.0};
      },
      1e-3, 10);
  EXPECT_EQ(calls, 10u);
  EXPECT_DOUBLE_EQ(tr.samples[0].control.tau_y, 1.0);
  EXPECT_DOUBLE_EQ(tr.samples[1].control.tau_y, -1.0);
}

TEST(IntegrateTrajectory, NonFiniteStateThrowsDivergence) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(integrate_trajectory({{nan, 0.6}, {}}, params(1.2), Torques{}, 1e-3, 5),
               DivergenceError);
  EXPECT_THROW(integrate_trajectory({{1.0, 0.6}, {}}, params(1.2), Torques{}, 0.0, 5),
               ParameterError);
}

TEST(Surface, HeightAndOmega) {
  EXPECT_DOUBLE_EQ(surface_height({0.0, 0.7}, 12.0), 0.7);
  EXPECT_DOUBLE_EQ(surface_height({1.0, 0.0}, 0.3), 0.3);
  EXPECT_NEAR(surface_height({std::tan(10.0 * M_PI / 180.0), 0.0}, 1.0), 0.17633, 1e-5);
  EXPECT_NEAR(omega_from_surface({0.0, 1.0}, {5.0, 0.0, 0.0}), 3.1321, 1e-4);
  EXPECT_NEAR(omega_from_surface({0.0, kGravity}, {0.0, 0.0, 0.0}), 1.0, 1e-15);
  EXPECT_NEAR(omega_from_surface({0.5, 0.5}, {1.0, 0.0, 0.0}), std::sqrt(9.81), 1e-12);
  EXPECT_THROW(omega_from_surface({0.0, 1.0}, {0.0, 0.0, 1.0}), GeometryError);
}

TEST(StepParameters, ValidateRejectsBrokenInvariants) {
  StepParameters p = params(0.0);
  EXPECT_NO_THROW(p.validate());
  p.omega = 0.0;
  EXPECT_THROW(p.validate(), ParameterError);
  p = params(0.0);
  p.mass = -1.0;
  EXPECT_THROW(p.validate(), ParameterError);
  p = params(0.0);
  p.tau_y_limits = {1.0, -1.0};
  EXPECT_THROW(p.validate(), ParameterError);
}

}  // namespace
}  // namespace psl
