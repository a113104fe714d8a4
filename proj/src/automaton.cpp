#include "psl/automaton.hpp"

#include <fmt/format.h>

#include "psl/errors.hpp"

namespace psl {

std::string_view to_string(DiscreteMode mode) {
  switch (mode) {
    case DiscreteMode::kLeftSupport:
      return "left";
    case DiscreteMode::kRightSupport:
      return "right";
    case DiscreteMode::kDualSupport:
      return "dual";
  }
  return "unknown";
}

std::string_view to_string(GuardKind kind) {
  switch (kind) {
    case GuardKind::kPosition:
      return "position";
    case GuardKind::kVelocity:
      return "velocity";
    case GuardKind::kProgression:
      return "progression";
    case GuardKind::kManifold:
      return "manifold";
  }
  return "unknown";
}

std::string_view to_string(EventClass c) {
  switch (c) {
    case EventClass::kAutonomous:
      return "autonomous";
    case EventClass::kControlled:
      return "controlled";
    case EventClass::kTimed:
      return "timed";
    case EventClass::kDisturbed:
      return "disturbed";
  }
  return "unknown";
}

std::string_view to_string(DisturbancePattern p) {
  switch (p) {
    case DisturbancePattern::kA1:
      return "a1";
    case DisturbancePattern::kA2:
      return "a2";
    case DisturbancePattern::kA3:
      return "a3";
    case DisturbancePattern::kA4:
      return "a4";
  }
  return "unknown";
}

double Guard::level(const HybridState& s) const {
  switch (kind) {
    case GuardKind::kPosition:
      return s.state.sagittal.x - value;
    case GuardKind::kVelocity:
      return s.state.sagittal.xdot - value;
    case GuardKind::kProgression:
      return s.zeta - value;
    case GuardKind::kManifold:
      return sigma_apex(s.state.sagittal, manifold) - value;
  }
  return 0.0;
}

GuardCrossing guard_crossed(const Guard& g, const HybridState& prev,
                            const HybridState& curr) {
  const double a = g.level(prev);
  const double b = g.level(curr);
  GuardCrossing out;
  if (a < 0.0 && b >= 0.0) {
    out.crossed = true;
    out.rising = true;
  } else if (a > 0.0 && b <= 0.0) {
    out.crossed = true;
  }
  if (out.crossed) out.fraction = a / (a - b);
  return out;
}

bool edge_allowed(DiscreteMode from, DiscreteMode to, ContactModel model) {
  if (from == to) return true;
  if (from == DiscreteMode::kDualSupport || to == DiscreteMode::kDualSupport) {
    return true;
  }
  return model == ContactModel::kInstantaneous;
}

TransitionOutcome apply_transition(const TransitionEvent& e,
                                   const HybridState& s,
                                   const StepParameters& next,
                                   ContactModel model) {
  TransitionOutcome out{s, next, e.control};
  if (e.kind == EventKind::kSwitching) {
    if (!edge_allowed(s.mode, e.target, model)) {
      throw AutomatonError(fmt::format("no edge from {} to {} support",
                                       to_string(s.mode), to_string(e.target)));
    }
    out.state.mode = e.target;
    if (e.event_class == EventClass::kControlled && e.control) {
      out.params.omega = e.control->omega;
    }
    if (e.event_class == EventClass::kDisturbed) {
      out.state = inject_disturbance(out.state, e.impulse);
    }
    return out;
  }
  switch (e.event_class) {
    case EventClass::kAutonomous:
    case EventClass::kTimed:
      if (!e.state) {
        throw AutomatonError(
            fmt::format("{} jump carries no state", to_string(e.event_class)));
      }
      out.state.state = *e.state;
      break;
    case EventClass::kControlled:
      if (!e.control) {
        throw AutomatonError("controlled jump carries no control");
      }
      break;
    case EventClass::kDisturbed:
      out.state = inject_disturbance(s, e.impulse);
      break;
  }
  return out;
}

HybridState inject_disturbance(const HybridState& s, const Impulse& impulse) {
  HybridState out = s;
  out.state.sagittal.xdot += impulse.dxdot;
  out.state.lateral.ydot += impulse.dydot;
  return out;
}

DisturbancePattern classify_disturbance(const SagittalState& pre,
                                        const SagittalState& post,
                                        const ManifoldDescriptor& m) {
  if (post.xdot >= pre.xdot) {
    const double before = orbital_energy(pre, m.x_foot, m.omega);
    const double after = orbital_energy(post, m.x_foot, m.omega);
    return (before < 0.0) != (after < 0.0) ? DisturbancePattern::kA2
                                           : DisturbancePattern::kA1;
  }
  return post.xdot > 0.0 ? DisturbancePattern::kA3 : DisturbancePattern::kA4;
}

}  // namespace psl
