#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "psl/automaton.hpp"
#include "psl/errors.hpp"
#include "psl/export.hpp"
#include "psl/walker.hpp"

namespace psl {
namespace {

HybridState at(double x, double xdot, double zeta = 0.0) {
  return {zeta, DiscreteMode::kLeftSupport, {{x, xdot}, {0.05, 0.1}}};
}

TEST(GuardCrossed, PositionInterpolatesLinearly) {
  const auto c = guard_crossed(Guard::position(1.0), at(0.99, 0.6), at(1.01, 0.6));
  EXPECT_TRUE(c.crossed);
  EXPECT_TRUE(c.rising);
  EXPECT_NEAR(c.fraction, 0.5, 1e-12);
}

TEST(GuardCrossed, NoSignChange) {
  EXPECT_FALSE(guard_crossed(Guard::position(1.0), at(0.97, 0.6), at(0.99, 0.6)).crossed);
  EXPECT_FALSE(guard_crossed(Guard::velocity(0.5), at(0.1, 0.7), at(0.2, 0.69)).crossed);
}

TEST(GuardCrossed, FallingCrossingIsReported) {
  const auto c = guard_crossed(Guard::velocity(0.65), at(0.1, 0.7), at(0.2, 0.6));
  EXPECT_TRUE(c.crossed);
  EXPECT_FALSE(c.rising);
  EXPECT_NEAR(c.fraction, 0.5, 1e-12);
}

TEST(GuardCrossed, ProgressionGuardUsesZeta) {
  const auto c = guard_crossed(Guard::progression(0.3), at(0.0, 0.6, 0.2), at(0.0, 0.6, 0.6));
  EXPECT_TRUE(c.crossed);
  EXPECT_NEAR(c.fraction, 0.25, 1e-12);
}

TEST(GuardCrossed, ManifoldGuardRisesThroughMinusEpsilon) {
  const ManifoldDescriptor next{0.6, 0.4, 3.13};
  const double eps = 1e-3;
  const Guard g = Guard::on_manifold(next, -eps);
  // On the current manifold (foot at 0) the next-step sigma grows with x.
  auto state_at = [](double x) { return at(x, std::sqrt(0.36 + 3.13 * 3.13 * x * x)); };
  HybridState prev = state_at(0.0);
  bool found = false;
  for (double x = 1e-3; x < 0.4; x += 1e-3) {
    const HybridState curr = state_at(x);
    const auto c = guard_crossed(g, prev, curr);
    if (c.crossed) {
      EXPECT_TRUE(c.rising);
      const double s0 = sigma_apex(prev.state.sagittal, next);
      const double s1 = sigma_apex(curr.state.sagittal, next);
      EXPECT_LT(s0, -eps);
      EXPECT_GE(s1, -eps);
      found = true;
      break;
    }
    prev = curr;
  }
  EXPECT_TRUE(found);
}

StepParameters params(double foot_x, double omega) {
  StepParameters p;
  p.omega = omega;
  p.foot = {foot_x, -0.1, 0.0};
  p.surface = {0.0, 1.0};
  return p;
}

TEST(ApplyTransition, InstantaneousSwitchKeepsTheState) {
  const HybridState s = at(0.2, 0.8, 0.3);
  const TransitionEvent e{EventClass::kAutonomous, EventKind::kSwitching,
                          DiscreteMode::kRightSupport, std::nullopt, std::nullopt, {}};
  const auto out = apply_transition(e, s, params(0.4, 3.2));
  EXPECT_EQ(out.state.state, s.state);
  EXPECT_EQ(out.state.zeta, s.zeta);
  EXPECT_EQ(out.state.mode, DiscreteMode::kRightSupport);
  EXPECT_DOUBLE_EQ(out.params.omega, 3.2);
  EXPECT_DOUBLE_EQ(out.params.foot.x, 0.4);
}

TEST(ApplyTransition, ControlledSwitchUpdatesOmega) {
  const TransitionEvent e{EventClass::kControlled, EventKind::kSwitching,
                          DiscreteMode::kRightSupport, StepControls{3.3, 1.0}, std::nullopt,
                          {}};
  const auto out = apply_transition(e, at(0.2, 0.8), params(0.4, 3.13));
  EXPECT_DOUBLE_EQ(out.params.omega, 3.3);
  ASSERT_TRUE(out.control);
  EXPECT_DOUBLE_EQ(out.control->tau_y, 1.0);
}

TEST(ApplyTransition, DisturbedJumpAddsTheImpulse) {
  const HybridState s = at(0.2, 0.7);
  const TransitionEvent e{EventClass::kDisturbed, EventKind::kJump, s.mode, std::nullopt,
                          std::nullopt, {0.1, 0.0}};
  const auto out = apply_transition(e, s, params(0.0, 3.13));
  EXPECT_NEAR(out.state.state.sagittal.xdot, 0.8, 1e-15);
  EXPECT_EQ(out.state.state.sagittal.x, s.state.sagittal.x);
  EXPECT_EQ(out.state.state.lateral, s.state.lateral);
  EXPECT_EQ(out.state.mode, s.mode);
}

TEST(ApplyTransition, TimedJumpSetsTheStateUnconditionally) {
  const PhaseState target{{0.5, 0.9}, {0.0, 0.0}};
  const TransitionEvent e{EventClass::kTimed, EventKind::kJump,
                          DiscreteMode::kLeftSupport, std::nullopt, target, {}};
  const auto out = apply_transition(e, at(-3.0, 0.1), params(0.0, 3.13));
  EXPECT_EQ(out.state.state, target);
  const TransitionEvent empty{EventClass::kTimed, EventKind::kJump,
                              DiscreteMode::kLeftSupport, std::nullopt, std::nullopt, {}};
  EXPECT_THROW(apply_transition(empty, at(0, 1), params(0.0, 3.13)), AutomatonError);
}

TEST(ApplyTransition, ContactGraph) {
  const TransitionEvent direct{EventClass::kAutonomous, EventKind::kSwitching,
                               DiscreteMode::kRightSupport, std::nullopt, std::nullopt, {}};
  EXPECT_THROW(apply_transition(direct, at(0, 1), params(0, 3), ContactModel::kMultiContact),
               AutomatonError);
  TransitionEvent to_dual = direct;
  to_dual.target = DiscreteMode::kDualSupport;
  const auto mid =
      apply_transition(to_dual, at(0, 1), params(0, 3), ContactModel::kMultiContact);
  const auto end =
      apply_transition(direct, mid.state, params(0, 3), ContactModel::kMultiContact);
  EXPECT_EQ(end.state.mode, DiscreteMode::kRightSupport);
  EXPECT_TRUE(edge_allowed(DiscreteMode::kLeftSupport, DiscreteMode::kRightSupport,
                           ContactModel::kInstantaneous));
  EXPECT_FALSE(edge_allowed(DiscreteMode::kLeftSupport, DiscreteMode::kRightSupport,
                            ContactModel::kMultiContact));
}

TEST(InjectDisturbance, VelocitiesOnly) {
  const HybridState s = at(0.3, 0.7);
  EXPECT_EQ(inject_disturbance(s, {}), s);
  EXPECT_NEAR(inject_disturbance(s, {-0.2, 0.0}).state.sagittal.xdot, 0.5, 1e-15);
  const HybridState lat = inject_disturbance(s, {0.0, 0.3});
  EXPECT_EQ(lat.state.sagittal, s.state.sagittal);
  EXPECT_NEAR(lat.state.lateral.ydot, 0.4, 1e-15);
  EXPECT_EQ(lat.state.lateral.y, s.state.lateral.y);
}

TEST(ClassifyDisturbance, FourPatterns) {
  // Approaching the next foot at 0.4 with negative orbital energy.
  const ManifoldDescriptor next{0.6, 0.4, 3.13};
  const SagittalState pre{0.1, 0.8};
  ASSERT_LT(orbital_energy(pre, next.x_foot, next.omega), 0.0);
  EXPECT_EQ(classify_disturbance(pre, {0.1, 0.85}, next), DisturbancePattern::kA1);
  EXPECT_EQ(classify_disturbance(pre, {0.1, 1.2}, next), DisturbancePattern::kA2);
  EXPECT_EQ(classify_disturbance(pre, {0.1, 0.5}, next), DisturbancePattern::kA3);
  EXPECT_EQ(classify_disturbance(pre, {0.1, -0.1}, next), DisturbancePattern::kA4);
}

// ---------------------------------------------------------------- walking

WalkingPlan rough_plan(std::size_t n = 7, std::uint64_t seed = 1) {
  TerrainOptions o;
  o.n_steps = n;
  o.seed = seed;
  const auto terrain = generate_terrain(o);
  return build_plan(terrain, keyframes_from_terrain(terrain));
}

std::size_t count_events(const HybridTrace& tr, const std::string& prefix) {
  std::size_t n = 0;
  for (const auto& r : tr.records) {
    for (const auto& e : r.events) n += e.rfind(prefix, 0) == 0;
  }
  return n;
}

TEST(RunPlan, NominalRunStaysInTheBundle) {
  const WalkingPlan plan = rough_plan();
  AutomatonConfig cfg;
  const HybridTrace tr = run_plan(plan, cfg);
  ASSERT_FALSE(tr.error) << *tr.error;
  EXPECT_EQ(tr.transitions.size(), plan.steps.size() - 1);
  EXPECT_EQ(count_events(tr, "transition:"), plan.steps.size() - 1);
  for (const auto& r : tr.records) {
    // Linear interpolation at the switch costs O(dt^2) in sigma.
    EXPECT_LE(std::abs(r.sigma), cfg.epsilon * (1.0 + 1e-3));
  }
  EXPECT_GE(tr.records.back().state.sagittal.x, plan.steps.back().foot.x);
  EXPECT_TRUE(tr.disturbances.empty());
}

TEST(RunPlan, EveryTransitionSitsOnAGuardCrossing) {
  for (GuardKind kind : {GuardKind::kManifold, GuardKind::kPosition, GuardKind::kVelocity,
                         GuardKind::kProgression}) {
    AutomatonConfig cfg;
    cfg.guard = kind;
    const HybridTrace tr = run_plan(rough_plan(), cfg);
    ASSERT_FALSE(tr.error) << to_string(kind) << ": " << *tr.error;
    ASSERT_EQ(tr.transitions.size(), 6u) << to_string(kind);
    for (const auto& t : tr.transitions) {
      EXPECT_EQ(t.guard.kind, kind);
      const auto c = guard_crossed(t.guard, t.prev, t.curr);
      EXPECT_TRUE(c.crossed && c.rising);
      EXPECT_NEAR(t.guard.level(t.at), 0.0, 1e-4);
    }
  }
}

TEST(RunPlan, ZetaIncreasesWithinSteps) {
  const HybridTrace tr = run_plan(rough_plan(), AutomatonConfig{});
  for (std::size_t i = 1; i < tr.records.size(); ++i) {
    const auto& a = tr.records[i - 1];
    const auto& b = tr.records[i];
    EXPECT_GE(b.zeta, a.zeta);
    if (a.step == b.step && b.t > a.t) EXPECT_GT(b.zeta, a.zeta);
  }
}

TEST(RunPlan, InstantaneousModesAlternate) {
  const HybridTrace tr = run_plan(rough_plan(), AutomatonConfig{});
  for (const auto& r : tr.records) {
    EXPECT_EQ(r.mode, r.step % 2 == 0 ? DiscreteMode::kLeftSupport
                                      : DiscreteMode::kRightSupport);
  }
}

TEST(RunPlan, MultiContactPassesThroughDualSupport) {
  AutomatonConfig cfg;
  cfg.contact = ContactModel::kMultiContact;
  const HybridTrace tr = run_plan(rough_plan(), cfg);
  ASSERT_FALSE(tr.error) << *tr.error;
  EXPECT_EQ(tr.transitions.size(), 6u);
  EXPECT_EQ(count_events(tr, "dual_support"), 6u);
  EXPECT_EQ(count_events(tr, "single_support"), 6u);
  for (std::size_t i = 1; i < tr.records.size(); ++i) {
    const auto from = tr.records[i - 1].mode, to = tr.records[i].mode;
    EXPECT_TRUE(edge_allowed(from, to, ContactModel::kMultiContact))
        << to_string(from) << " -> " << to_string(to);
  }
}

TEST(RunPlan, BitwiseDeterministic) {
  const WalkingPlan plan = rough_plan();
  const std::vector<Disturbance> pushes{
      {2, TriggerKind::kPosition, plan.steps[2].foot.x - 0.1, {0.25, 0.05}}};
  const std::string a = trajectory_csv(run_plan(plan, AutomatonConfig{}, pushes));
  const std::string b = trajectory_csv(run_plan(plan, AutomatonConfig{}, pushes));
  EXPECT_EQ(a, b);
}

TEST(RunPlan, RecoverablePushKeepsTheFeet) {
  const WalkingPlan plan = rough_plan();
  const std::vector<Disturbance> pushes{
      {2, TriggerKind::kPosition, plan.steps[2].foot.x - 0.1, {0.1, 0.0}}};
  const HybridTrace tr = run_plan(plan, AutomatonConfig{}, pushes);
  ASSERT_FALSE(tr.error) << *tr.error;
  ASSERT_EQ(tr.disturbances.size(), 1u);
  const auto& d = tr.disturbances[0];
  EXPECT_GT(std::abs(d.sigma), 1e-3);
  EXPECT_TRUE(d.recoverable);
  EXPECT_TRUE(d.recovered);
  EXPECT_FALSE(d.replanned);
  EXPECT_GT(d.kappa, 0.0);
  EXPECT_EQ(count_events(tr, "foot_replan"), 0u);
  for (std::size_t q = 0; q < plan.steps.size(); ++q) {
    EXPECT_EQ(tr.plan.steps[q].foot.x, plan.steps[q].foot.x);
  }
  EXPECT_EQ(tr.transitions.size(), 6u);
}

TEST(RunPlan, TinyPushInsideTheBundleNeedsNoRecovery) {
  const WalkingPlan plan = rough_plan();
  const std::vector<Disturbance> pushes{
      {1, TriggerKind::kProgression, 0.1, {1e-4, 0.0}}};
  const HybridTrace tr = run_plan(plan, AutomatonConfig{}, pushes);
  ASSERT_EQ(tr.disturbances.size(), 1u);
  EXPECT_LE(std::abs(tr.disturbances[0].sigma), 1e-3);
  EXPECT_TRUE(tr.disturbances[0].recovered);
  EXPECT_EQ(count_events(tr, "disturbance:a1"), 1u);
}

TEST(RunPlan, LargePushReplansTheNextFoot) {
  const WalkingPlan plan = rough_plan();
  const std::vector<Disturbance> pushes{
      {2, TriggerKind::kPosition, plan.steps[2].foot.x - 0.1, {0.8, 0.0}}};
  const HybridTrace tr = run_plan(plan, AutomatonConfig{}, pushes);
  ASSERT_FALSE(tr.error) << *tr.error;
  ASSERT_EQ(tr.disturbances.size(), 1u);
  const auto& d = tr.disturbances[0];
  EXPECT_FALSE(d.recoverable);
  EXPECT_TRUE(d.replanned);
  ASSERT_TRUE(d.new_foot);
  EXPECT_EQ(count_events(tr, "foot_replan"), 1u);
  EXPECT_DOUBLE_EQ(tr.plan.steps[3].foot.x, *d.new_foot);
  EXPECT_NE(tr.plan.steps[3].foot.x, plan.steps[3].foot.x);
  // The re-planned step still reaches its apex speed.
  for (const auto& r : tr.records) {
    if (r.step == 3 && std::abs(r.state.sagittal.x - *d.new_foot) < 1e-3) {
      EXPECT_NEAR(r.state.sagittal.xdot, plan.keyframes[3].xdot_apex, 1e-2);
    }
  }
}

TEST(RunPlan, ErrorsAreRecordedWithThePartialTrace) {
  const WalkingPlan plan = rough_plan();
  const std::vector<Disturbance> pushes{
      {1, TriggerKind::kProgression, 0.05, {-2.0, 0.0}}};
  const HybridTrace tr = run_plan(plan, AutomatonConfig{}, pushes);
  ASSERT_TRUE(tr.error);
  EXPECT_FALSE(tr.records.empty());
  EXPECT_EQ(count_events(tr, "error"), 1u);
  EXPECT_EQ(tr.disturbances.at(0).pattern, DisturbancePattern::kA4);
}

TEST(RunPlan, RejectsInconsistentPlans) {
  WalkingPlan plan = rough_plan();
  plan.transitions.pop_back();
  EXPECT_TRUE(run_plan(plan, AutomatonConfig{}).error);
}

}  // namespace
}  // namespace psl
