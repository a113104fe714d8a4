#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "psl/manifold.hpp"
#include "psl/pendulum.hpp"

namespace psl {

/// Desired sagittal apex: velocity over the foot and CoM height above it.
struct ApexKeyframe {
  double xdot_apex = 0.6;  // [m/s]
  double z_apex = 1.0;     // [m]

  bool operator==(const ApexKeyframe&) const = default;
};

struct TerrainStep {
  Vec3 foot;           // anchor of the stance foot on this step
  double tilt = 0.0;   // [rad]
  PathSurface surface;

  bool operator==(const TerrainStep&) const = default;
};

struct TerrainSpec {
  std::vector<TerrainStep> steps;

  /// Throws ParameterError unless foot x positions strictly increase.
  void validate() const;
  bool operator==(const TerrainSpec&) const = default;
};

struct TerrainOptions {
  std::size_t n_steps = 7;
  double dh_min = 0.1;             // [m]
  double dh_max = 0.3;             // [m]
  double tilt = 0.17453292519943295;  // 10 deg
  std::uint64_t seed = 1;
  double step_length = 0.4;        // sagittal spacing of step centres [m]
  double com_height = 1.0;         // CoM surface height above the foot [m]
  double lateral_offset = 0.1;     // nominal |y_foot| [m]

  bool operator==(const TerrainOptions&) const = default;
};

/// Random stepped terrain: consecutive height changes uniform on
/// (-dh_max, -dh_min) U (dh_min, dh_max). Pure function of the options.
TerrainSpec generate_terrain(const TerrainOptions& options);

/// Apex velocity rule for rough terrain: 0.6 - 0.2 dh, clamped to
/// [0.4, 0.8] m/s, dh being the height change onto the step.
std::vector<ApexKeyframe> keyframes_from_terrain(const TerrainSpec& terrain,
                                                 double nominal_speed = 0.6);

struct PhasePoint {
  double x = 0.0;
  double xdot = 0.0;
};

/// Smooth fit of xdot^2 against x. Nominal manifolds are exact quadratics;
/// anything else falls back to an interpolating cubic spline.
class SquaredSpeedCurve {
 public:
  SquaredSpeedCurve() = default;

  /// Samples must have strictly monotone x and at least three entries.
  static SquaredSpeedCurve fit(std::span<const PhasePoint> samples);

  double operator()(double x) const;
  double derivative(double x) const;
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  bool is_quadratic() const { return knots_.empty(); }
  /// Coefficients (c0, c1, c2) of the quadratic form; zero for splines.
  const std::array<double, 3>& quadratic() const { return quadratic_; }

 private:
  double x_min_ = 0.0;
  double x_max_ = 0.0;
  std::array<double, 3> quadratic_{};
  std::vector<double> knots_;
  std::vector<double> values_;
  std::vector<double> second_;  // spline second derivatives at the knots
};

struct StepManifold {
  ManifoldDescriptor descriptor;
  std::vector<PhasePoint> samples;  // increasing x
  SquaredSpeedCurve curve;

  /// Velocity on the fitted curve; NaN where the fit is negative.
  double xdot_at(double x) const;
};

struct TransitionPoint {
  double x_trans = 0.0;
  double xdot_trans = 0.0;
  double zeta_trans = 0.0;  // arc length from the apex of the first step
};

struct PlannerOptions {
  double dt = kDefaultDt;
  double window = 0.6;  // half-width of the x-window sampled around a foot
  double gravity = kGravity;
  double mass = 1.0;
  TorqueLimits tau_y_limits;
  TorqueLimits tau_x_limits;
};

/// Integrates the unforced pendulum forward and backward from the apex until
/// the state leaves [x_foot - window, x_foot + window].
StepManifold make_step_manifold(const ManifoldDescriptor& descriptor,
                                const PlannerOptions& options = {});

/// Nominal phase-space manifolds, one per terrain step.
std::vector<StepManifold> generate_nominal(
    const TerrainSpec& terrain, std::span<const ApexKeyframe> keyframes,
    const PlannerOptions& options = {});

/// Arc length in the (x, xdot / omega) plane along the fitted curve.
double arc_length(const StepManifold& m, double x_from, double x_to);

/// Smallest crossing of the two fitted curves inside their overlap.
TransitionPoint find_transition(const StepManifold& mq,
                                const StepManifold& mq1);

struct FootBounds {
  double lower = -1.0;
  double upper = 1.0;
};

struct LateralFootResult {
  double y_foot = 0.0;
  double ydot_apex = 0.0;
  int iterations = 0;
  bool clamped = false;
};

/// Secant search for the lateral foot that zeroes the lateral velocity at
/// the sagittal apex, t_apex seconds after the initial state. p.foot.y is
/// the first guess. Throws NonConvergence after n_max iterations.
LateralFootResult lateral_foot_search(const LateralState& init,
                                      const StepParameters& p, double t_apex,
                                      FootBounds bounds, int n_max = 20,
                                      double ydot_tol = 1e-4,
                                      double dt = kDefaultDt);

/// Lateral state after t seconds of unforced flow around y_foot.
LateralState propagate_lateral(const LateralState& init,
                               const StepParameters& p, double t,
                               double dt = kDefaultDt);

struct Kinematics {
  double p = 0.0;
  double v = 0.0;
  double a = 0.0;

  bool operator==(const Kinematics&) const = default;
};

struct CoordinateBoundary {
  Kinematics entry;
  Kinematics exit;
};

/// Fifth-order polynomial per coordinate, t in [0, duration].
struct QuinticSegment {
  std::vector<std::array<double, 6>> coefficients;
  double duration = 0.0;

  Kinematics evaluate(std::size_t coordinate, double t) const;
};

inline constexpr double kDefaultMultiContactFraction = 0.25;

QuinticSegment fit_multicontact(std::span<const CoordinateBoundary> boundary,
                                double duration_fraction, double step_duration);

struct StepControls {
  double omega = 3.13;
  double tau_y = 0.0;

  bool operator==(const StepControls&) const = default;
};

/// Realised next apex after one step under constant controls, switching to
/// the next field where the state meets the next nominal manifold.
ApexKeyframe progression_map(const ApexKeyframe& apex, const StepParameters& current,
                             const StepControls& u, const StepParameters& next,
                             const ManifoldDescriptor& next_manifold,
                             double dt = kDefaultDt);

/// A complete nominal multi-step plan.
struct WalkingPlan {
  TerrainSpec terrain;
  std::vector<ApexKeyframe> keyframes;
  std::vector<StepParameters> steps;
  std::vector<StepManifold> manifolds;
  std::vector<TransitionPoint> transitions;  // steps.size() - 1 entries
  LateralState lateral_start;               // at the apex of step 0
};

/// Lateral search window used by the planner and the walker.
inline constexpr FootBounds kLateralFootBounds{-1.0, 1.0};

WalkingPlan build_plan(const TerrainSpec& terrain,
                       std::span<const ApexKeyframe> keyframes,
                       const PlannerOptions& options = {});

/// StepParameters for one terrain step with omega from its geometry.
StepParameters step_parameters(const TerrainStep& step,
                               const PlannerOptions& options);

struct PlanSample {
  double t = 0.0;
  std::size_t step = 0;
  PhaseState state;
  double xddot = 0.0;
  double yddot = 0.0;
};

/// Time samples of the unforced plan from the first apex to the last,
/// switching fields exactly where the state meets the next manifold.
std::vector<PlanSample> simulate_plan(const WalkingPlan& plan,
                                      double dt = kDefaultDt);

/// Integrates under constant torques until level(state) turns non-negative,
/// locating the crossing inside the last step by bisection. Returns the
/// elapsed time and the state at the crossing. level(start) must be < 0.
struct Crossing {
  double t = 0.0;
  PhaseState state;
};
template <typename Level>
Crossing advance_until(const PhaseState& start, const StepParameters& p,
                       const Torques& u, double dt, Level&& level,
                       std::size_t max_steps = 1000000);

}  // namespace psl

#include "psl/planner_inl.hpp"
