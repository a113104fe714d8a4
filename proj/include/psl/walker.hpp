#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "psl/automaton.hpp"
#include "psl/controller.hpp"
#include "psl/planner.hpp"

namespace psl {

struct AutomatonConfig {
  GuardKind guard = GuardKind::kManifold;
  ContactModel contact = ContactModel::kInstantaneous;
  double duration_fraction = kDefaultMultiContactFraction;
  double epsilon = 1e-3;
  double dt = kDefaultDt;
  IntegrationScheme scheme = IntegrationScheme::kRungeKutta4;
  /// Recovery problem template: weights, state grid, stage resolution and
  /// control grids centred on omega_ref. Stage range, foot and references are
  /// filled in per disturbance.
  DPConfig dp;
  bool replan_feet = true;

  bool operator==(const AutomatonConfig&) const = default;
};

enum class TriggerKind { kPosition, kProgression };

/// Velocity impulse applied in step `step` once x (or the progression
/// accumulated since the start of that step) reaches `at`.
struct Disturbance {
  std::size_t step = 0;
  TriggerKind trigger = TriggerKind::kPosition;
  double at = 0.0;
  Impulse impulse;

  bool operator==(const Disturbance&) const = default;
};

struct ControllerHooks {
  std::function<PolicyTable(const DPConfig&)> solve;
  std::function<RecoverabilityMask(const PolicyTable&, double epsilon)> recoverability;
};

/// Default hooks: solve_dp and estimate_recoverability at the run's dt.
ControllerHooks default_hooks(double dt = kDefaultDt);

struct TraceRecord {
  double t = 0.0;
  double zeta = 0.0;
  DiscreteMode mode = DiscreteMode::kLeftSupport;
  std::size_t step = 0;
  PhaseState state;
  double z = 0.0;
  double sigma = 0.0;  // against the manifold of `step`
  StepControls control;
  std::vector<std::string> events;
};

/// One guard-triggered step boundary with the sample pair that bracketed it.
struct TransitionRecord {
  std::size_t from_step = 0;
  double t = 0.0;
  Guard guard;
  HybridState prev;
  HybridState curr;
  HybridState at;  // interpolated crossing state used for the switch
};

struct DisturbanceRecord {
  std::size_t step = 0;
  double t = 0.0;
  Impulse impulse;
  DisturbancePattern pattern = DisturbancePattern::kA1;
  double sigma = 0.0;         // right after the impulse
  bool recoverable = false;   // mask lookup at the disturbed state
  bool recovered = false;     // reached the bundle before the step ended
  bool replanned = false;
  bool replan_infeasible = false;
  std::optional<double> new_foot;
  double kappa = 0.0;         // RMS of sigma until the step boundary
  std::vector<ProgressionSample> samples;
};

struct HybridTrace {
  std::vector<TraceRecord> records;
  std::vector<TransitionRecord> transitions;
  std::vector<DisturbanceRecord> disturbances;
  WalkingPlan plan;  // as executed, including re-planned feet
  std::optional<std::string> error;
};

/// Runs the hybrid walking loop from the apex of the first step to the apex
/// of the last one. Library errors end the run early and are recorded in
/// HybridTrace::error together with the partial trace.
HybridTrace run_plan(const WalkingPlan& plan, const AutomatonConfig& config,
                     const std::vector<Disturbance>& disturbances = {},
                     const ControllerHooks& hooks = {});

}  // namespace psl
