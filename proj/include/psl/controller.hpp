#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "psl/manifold.hpp"
#include "psl/pendulum.hpp"
#include "psl/planner.hpp"

namespace psl {

/// How a successor state between two grid nodes picks up cost-to-go.
enum class SuccessorInterpolation { kLinear, kNearest };

/// Uniform control levels from min to max inclusive.
struct ControlGrid {
  double min = 0.0;
  double max = 0.0;
  std::size_t levels = 13;

  double value(std::size_t k) const;
  bool operator==(const ControlGrid&) const = default;
};

/// Uniform node grid from min to max inclusive; (max - min) must be an
/// integer multiple of res.
struct NodeGrid {
  double min = 0.0;
  double max = 0.0;
  double res = 0.01;

  std::size_t count() const;
  double node(std::size_t i) const { return min + static_cast<double>(i) * res; }
  /// Nearest node index, clamped to the grid.
  std::size_t nearest(double v) const;
  bool operator==(const NodeGrid&) const = default;
};

/// Finite-phase recovery problem over one step. Stages are CoM positions,
/// the state is the sagittal velocity at a stage.
struct DPConfig {
  NodeGrid stages{0.9, 1.5, 0.01};   // [m]
  NodeGrid states{0.03, 1.5, 0.01};  // [m/s]
  ControlGrid omega{2.83, 3.43, 13};  // [1/s]
  ControlGrid tau{-3.0, 3.0, 13};     // [N m]
  double alpha = 100.0;
  double beta = 4e4;
  double gamma1 = 5.0;
  double gamma2 = 5.0;
  double eta = 1.0;
  double omega_ref = 3.13;
  double tau_ref = 0.0;
  double x_foot = 1.2;
  double xdot_apex = 0.6;
  double mass = 1.0;
  double gravity = kGravity;
  /// Terminal target velocity; the nominal manifold at stages.max if unset.
  std::optional<double> xdot_terminal;
  SuccessorInterpolation interpolation = SuccessorInterpolation::kLinear;

  /// Throws ParameterError on empty ranges, bad resolutions or eta.
  void validate() const;
  ManifoldDescriptor manifold() const { return {xdot_apex, x_foot, omega_ref}; }
  double terminal_velocity() const;
  bool operator==(const DPConfig&) const = default;
};

/// Integrand of the stage cost at the stage midpoint times the stage width.
double stage_cost(double sigma, double tau_y, double omega, const DPConfig& cfg,
                  double stage_width);

/// One stage of the discretised dynamics under constant controls.
struct StageTransition {
  double xdot_next = 0.0;  // clamped to the state grid
  double cost = 0.0;       // stage cost plus any escape penalty
  bool escaped = false;    // successor left the grid or never reached it
};

/// Additive cost charged when a successor leaves the state grid.
double dp_penalty(const DPConfig& cfg);

/// Exact successor from stage node `stage` to the next one, using the
/// conserved orbital energy around the torque-shifted foot.
StageTransition dp_step(const DPConfig& cfg, std::size_t stage, double xdot,
                        const StepControls& u, double penalty);

/// Controls and cost-to-go on the stage x state grid, row-major by stage.
/// The last stage row holds the reference controls and terminal cost.
struct PolicyTable {
  DPConfig config;
  std::vector<double> omega;
  std::vector<double> tau;
  std::vector<double> cost;

  std::size_t stage_count() const { return config.stages.count(); }
  std::size_t state_count() const { return config.states.count(); }
  std::size_t index(std::size_t stage, std::size_t state) const {
    return stage * state_count() + state;
  }
  StepControls control(std::size_t stage, std::size_t state) const {
    return {omega[index(stage, state)], tau[index(stage, state)]};
  }
  /// Stage containing x (piecewise constant) and nearest velocity node.
  StepControls lookup(double x, double xdot) const;
};

/// Backward induction with exhaustive search over the control grid. Ties go
/// to the lowest control index (omega major, tau minor).
PolicyTable solve_dp(const DPConfig& cfg);

/// Boundary-layer blend: policy outside |sigma| <= epsilon, otherwise a mix
/// of the entry control and the reference weighted by |sigma| / epsilon.
StepControls saturate_control(double sigma, double epsilon,
                              const StepControls& u_policy,
                              const StepControls& u_epsilon,
                              const StepControls& u_ref);

/// Time derivative of sigma^2 / 2 under torque tau_y.
double lyapunov_rate(const SagittalState& s, double sigma, double tau_y,
                     const ManifoldDescriptor& m, double mass, double gravity);

/// Largest initial |sigma| that a torque of magnitude tau_y can bring into
/// the bundle over [x0, x_trans].
double max_tube_radius(double epsilon, double xdot_apex, double mass,
                       double gravity, double x_trans, double x0, double tau_y);

/// Foot that makes the next step's apex velocity xdot_apex_next when the
/// transition happens at (x_trans, xdot_trans_rep). Throws InfeasibleReplan
/// when xdot_trans_rep < xdot_apex_next.
double replan_foot(double x_trans, double xdot_trans_rep, double xdot_apex_next,
                   double omega);

/// Stateful closed-loop recovery law: DP policy outside the bundle, the
/// boundary-layer blend inside it. The entry control is latched on the first
/// sample inside the bundle.
class RecoveryController {
 public:
  RecoveryController(const PolicyTable& table, double epsilon);

  StepControls operator()(const SagittalState& s);
  double sigma(const SagittalState& s) const;
  bool entered() const { return u_epsilon_.has_value(); }
  const PolicyTable& table() const { return *table_; }

 private:
  const PolicyTable* table_;
  double epsilon_;
  std::optional<StepControls> u_epsilon_;
};

struct RecoverySample {
  double t = 0.0;
  SagittalState state;
  double sigma = 0.0;
  StepControls control;
};

/// Closed-loop run from s0 until x reaches the last stage or xdot <= 0.
std::vector<RecoverySample> simulate_recovery(const PolicyTable& table,
                                              const SagittalState& s0,
                                              double epsilon,
                                              double dt = kDefaultDt);

/// Recoverable-cell flags over stage x state, row-major by stage.
struct RecoverabilityMask {
  NodeGrid stages;
  NodeGrid states;
  double epsilon = 0.0;
  std::vector<std::uint8_t> cells;

  std::size_t stage_count() const { return stages.count(); }
  std::size_t state_count() const { return states.count(); }
  bool at(std::size_t stage, std::size_t state) const {
    return cells[stage * state_count() + state] != 0;
  }
  std::size_t recoverable_count() const;
};

/// A cell is recoverable when the DP closed loop started there reaches
/// |sigma| <= epsilon no later than the last stage.
RecoverabilityMask estimate_recoverability(const PolicyTable& table,
                                           double epsilon,
                                           double dt = kDefaultDt);
RecoverabilityMask estimate_recoverability(const DPConfig& cfg, double epsilon,
                                           double dt = kDefaultDt);

}  // namespace psl
