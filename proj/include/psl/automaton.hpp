#pragma once

#include <optional>
#include <string_view>

#include "psl/manifold.hpp"
#include "psl/pendulum.hpp"
#include "psl/planner.hpp"

namespace psl {

enum class DiscreteMode { kLeftSupport, kRightSupport, kDualSupport };

std::string_view to_string(DiscreteMode mode);

/// Instantaneous single-to-single switches, or a dual-support phase between.
enum class ContactModel { kInstantaneous, kMultiContact };

struct HybridState {
  double zeta = 0.0;
  DiscreteMode mode = DiscreteMode::kLeftSupport;
  PhaseState state;

  bool operator==(const HybridState&) const = default;
};

enum class GuardKind { kPosition, kVelocity, kProgression, kManifold };

std::string_view to_string(GuardKind kind);

struct Guard {
  GuardKind kind = GuardKind::kManifold;
  double value = 0.0;             // x_g, xdot_g, zeta_g or the sigma level
  ManifoldDescriptor manifold;    // used by kManifold only

  static Guard position(double x) { return {GuardKind::kPosition, x, {}}; }
  static Guard velocity(double xdot) { return {GuardKind::kVelocity, xdot, {}}; }
  static Guard progression(double zeta) {
    return {GuardKind::kProgression, zeta, {}};
  }
  static Guard on_manifold(const ManifoldDescriptor& m, double level) {
    return {GuardKind::kManifold, level, m};
  }

  /// Signed level function; the guard set is its zero crossing.
  double level(const HybridState& s) const;
  bool operator==(const Guard&) const = default;
};

struct GuardCrossing {
  bool crossed = false;
  bool rising = false;    // level went from negative to non-negative
  double fraction = 0.0;  // position of the crossing between the samples
};

GuardCrossing guard_crossed(const Guard& g, const HybridState& prev,
                            const HybridState& curr);

enum class EventClass { kAutonomous, kControlled, kTimed, kDisturbed };
enum class EventKind { kSwitching, kJump };

std::string_view to_string(EventClass c);

struct Impulse {
  double dxdot = 0.0;
  double dydot = 0.0;

  bool operator==(const Impulse&) const = default;
};

struct TransitionEvent {
  EventClass event_class = EventClass::kAutonomous;
  EventKind kind = EventKind::kSwitching;
  DiscreteMode target = DiscreteMode::kLeftSupport;  // switching only
  std::optional<StepControls> control;  // controlled events
  std::optional<PhaseState> state;      // autonomous and timed jumps
  Impulse impulse;                      // disturbed events
};

struct TransitionOutcome {
  HybridState state;
  StepParameters params;
  std::optional<StepControls> control;
};

/// True when the contact graph has an edge from one mode to the other.
bool edge_allowed(DiscreteMode from, DiscreteMode to, ContactModel model);

/// Switching events move to the target mode with `next` as the new field.
/// Jumps keep the mode and modify the state or the controls; pass the
/// current field as `next`. Throws AutomatonError for edges missing from the
/// contact graph.
TransitionOutcome apply_transition(const TransitionEvent& e,
                                   const HybridState& s,
                                   const StepParameters& next,
                                   ContactModel model = ContactModel::kInstantaneous);

/// Adds the impulse to the velocities; positions are untouched.
HybridState inject_disturbance(const HybridState& s, const Impulse& impulse);

enum class DisturbancePattern { kA1, kA2, kA3, kA4 };

std::string_view to_string(DisturbancePattern p);

/// Classifies a velocity impulse by direction, by whether it flips the sign
/// of the orbital energy about m's foot, and by whether forward motion
/// survives. m is normally the upcoming step's manifold.
DisturbancePattern classify_disturbance(const SagittalState& pre,
                                        const SagittalState& post,
                                        const ManifoldDescriptor& m);

}  // namespace psl
