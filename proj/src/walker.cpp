#include "psl/walker.hpp"

#include <cmath>
#include <memory>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "psl/errors.hpp"

namespace psl {

ControllerHooks default_hooks(double dt) {
  return {[](const DPConfig& cfg) { return solve_dp(cfg); },
          [dt](const PolicyTable& table, double epsilon) {
            return estimate_recoverability(table, epsilon, dt);
          }};
}

namespace {

DiscreteMode support_mode(std::size_t step) {
  return step % 2 == 0 ? DiscreteMode::kLeftSupport : DiscreteMode::kRightSupport;
}

PhaseState lerp(const PhaseState& a, const PhaseState& b, double f) {
  auto mix = [f](double u, double v) { return u + f * (v - u); };
  return {{mix(a.sagittal.x, b.sagittal.x), mix(a.sagittal.xdot, b.sagittal.xdot)},
          {mix(a.lateral.y, b.lateral.y), mix(a.lateral.ydot, b.lateral.ydot)}};
}

double arc_increment(const PhaseState& a, const PhaseState& b, double omega) {
  return std::hypot(b.sagittal.x - a.sagittal.x,
                    (b.sagittal.xdot - a.sagittal.xdot) / omega);
}

bool finite(const PhaseState& s) {
  return std::isfinite(s.sagittal.x) && std::isfinite(s.sagittal.xdot) &&
         std::isfinite(s.lateral.y) && std::isfinite(s.lateral.ydot);
}

class Walker {
 public:
  Walker(const WalkingPlan& plan, const AutomatonConfig& config,
         const std::vector<Disturbance>& disturbances, const ControllerHooks& hooks)
      : config_(config),
        schedule_(disturbances),
        applied_(disturbances.size(), false),
        hooks_(hooks) {
    trace_.plan = plan;
    if (!hooks_.solve) hooks_.solve = default_hooks(config.dt).solve;
    if (!hooks_.recoverability) {
      hooks_.recoverability = default_hooks(config.dt).recoverability;
    }
  }

  HybridTrace run() {
    try {
      validate();
      walk();
    } catch (const Error& e) {
      trace_.error = e.what();
      if (!trace_.records.empty()) trace_.records.back().events.push_back("error");
      spdlog::warn("walk stopped at t={:.4f}: {}", t_, e.what());
    }
    return std::move(trace_);
  }

 private:
  WalkingPlan& plan() { return trace_.plan; }
  std::size_t n_steps() const { return trace_.plan.steps.size(); }

  void validate() const {
    const auto& p = trace_.plan;
    if (p.steps.empty() || p.manifolds.size() != p.steps.size() ||
        p.keyframes.size() != p.steps.size() ||
        p.transitions.size() + 1 != p.steps.size()) {
      throw ParameterError("walking plan is empty or inconsistent");
    }
    if (!(config_.dt > 0.0) || !(config_.epsilon > 0.0)) {
      throw ParameterError("dt and epsilon must be positive");
    }
    if (config_.contact == ContactModel::kMultiContact &&
        !(config_.duration_fraction > 0.0 && config_.duration_fraction < 1.0)) {
      throw ParameterError("multi-contact fraction must lie in (0, 1)");
    }
    for (const auto& d : schedule_) {
      if (d.step >= p.steps.size()) {
        throw ParameterError(fmt::format("disturbance targets missing step {}", d.step));
      }
    }
  }

  const ManifoldDescriptor& manifold(std::size_t q) { return plan().manifolds[q].descriptor; }

  void push(const PhaseState& s, std::size_t step, DiscreteMode mode,
            const StepControls& u, double t) {
    const auto& p = plan().steps[step];
    trace_.records.push_back({t, zeta_, mode, step, s,
                              surface_height(p.surface, s.sagittal.x),
                              sigma_apex(s.sagittal, manifold(step)), u, {}});
  }

  Guard step_guard() {
    const std::size_t q = q_;
    const auto& tr = plan().transitions[q];
    if (replan_pending_) return Guard::position(tr.x_trans);
    switch (config_.guard) {
      case GuardKind::kPosition:
        return Guard::position(tr.x_trans);
      case GuardKind::kVelocity:
        return Guard::velocity(tr.xdot_trans);
      case GuardKind::kProgression:
        return Guard::progression(apex_zeta_ + tr.zeta_trans);
      case GuardKind::kManifold:
        break;
    }
    return Guard::on_manifold(manifold(q + 1), -config_.epsilon);
  }

  StepControls control(const PhaseState& s) {
    if (recovery_) return (*recovery_->law)(s.sagittal);
    return {plan().steps[q_].omega, 0.0};
  }

  void walk() {
    const auto& first = plan().steps.front();
    s_ = {{first.foot.x, plan().keyframes.front().xdot_apex}, plan().lateral_start};
    mode_ = support_mode(0);
    push(s_, 0, mode_, {first.omega, 0.0}, 0.0);

    while (true) {
      const StepParameters& p = plan().steps[q_];
      const bool last = q_ + 1 == n_steps();
      if (last && s_.sagittal.x >= p.foot.x) return;

      const StepControls u = control(s_);
      trace_.records.back().control = u;
      StepParameters field = p;
      field.omega = u.omega;
      const PhaseState next =
          integrate_step(s_, field, {u.tau_y, 0.0}, config_.dt, config_.scheme);
      if (!finite(next)) {
        throw DivergenceError(fmt::format("non-finite state in step {}", q_),
                              trace_.records.size());
      }
      const double zeta_next = zeta_ + arc_increment(s_, next, p.omega);

      if (!last) {
        const Guard g = step_guard();
        const HybridState prev{zeta_, mode_, s_};
        const HybridState curr{zeta_next, mode_, next};
        const GuardCrossing c = guard_crossed(g, prev, curr);
        if (c.crossed && c.rising) {
          switch_step(g, prev, curr, c.fraction, u);
          continue;
        }
        if (next.sagittal.x >= plan().steps[q_ + 1].foot.x) {
          throw PlanningInfeasible(fmt::format(
              "step {} passed the next foot without meeting its guard", q_));
        }
      }

      s_ = next;
      zeta_ = zeta_next;
      ++k_;
      t_ = t_base_ + static_cast<double>(k_) * config_.dt;
      push(s_, q_, mode_, u, t_);
      if (!(s_.sagittal.xdot > 0.0)) {
        throw DomainError(fmt::format("forward velocity lost in step {}", q_));
      }
      track_recovery();
      apply_disturbances();
    }
  }

  void track_recovery() {
    if (!active_) return;
    auto& rec = trace_.disturbances[*active_];
    const double sig = trace_.records.back().sigma;
    rec.samples.push_back({zeta_ - disturbance_zeta_, sig});
    if (!rec.recovered && std::abs(sig) <= config_.epsilon) rec.recovered = true;
  }

  void apply_disturbances() {
    for (std::size_t i = 0; i < schedule_.size(); ++i) {
      const Disturbance& d = schedule_[i];
      if (applied_[i] || d.step != q_) continue;
      const double v =
          d.trigger == TriggerKind::kPosition ? s_.sagittal.x : zeta_ - step_zeta0_;
      if (v < d.at) continue;
      applied_[i] = true;
      disturb(d);
    }
  }

  void disturb(const Disturbance& d) {
    const bool last = q_ + 1 == n_steps();
    const SagittalState pre = s_.sagittal;
    s_ = inject_disturbance({zeta_, mode_, s_}, d.impulse).state;

    DisturbanceRecord rec;
    rec.step = q_;
    rec.t = t_;
    rec.impulse = d.impulse;
    rec.pattern = classify_disturbance(pre, s_.sagittal, manifold(last ? q_ : q_ + 1));
    rec.sigma = sigma_apex(s_.sagittal, manifold(q_));
    push(s_, q_, mode_, control(s_), t_);
    trace_.records.back().events.push_back(
        fmt::format("disturbance:{}", to_string(rec.pattern)));

    if (std::abs(rec.sigma) <= config_.epsilon) {
      rec.recoverable = true;
      rec.recovered = true;
    } else if (!last) {
      rec.recoverable = plan_recovery();
      if (!rec.recoverable && config_.replan_feet) replan_pending_ = true;
    }
    spdlog::info("step {}: impulse {:+.3f} m/s ({}), sigma {:.3e}, recoverable {}",
                 q_, d.impulse.dxdot, to_string(rec.pattern), rec.sigma,
                 rec.recoverable);
    trace_.disturbances.push_back(std::move(rec));
    active_ = trace_.disturbances.size() - 1;
    disturbance_zeta_ = zeta_;
    trace_.disturbances.back().samples.push_back({0.0, trace_.records.back().sigma});
  }

  /// Solves the recovery problem from the current state to the transition
  /// and installs the closed-loop law. Returns the mask verdict.
  bool plan_recovery() {
    const StepParameters& p = plan().steps[q_];
    const double x_end = plan().transitions[q_].x_trans;
    const double x0 = s_.sagittal.x;
    DPConfig cfg = config_.dp;
    if (!(x_end - x0 > 0.5 * cfg.stages.res)) {
      recovery_.reset();
      return false;
    }
    const auto n = static_cast<std::size_t>(std::ceil((x_end - x0) / cfg.stages.res));
    cfg.stages = {x0, x_end, (x_end - x0) / static_cast<double>(n)};
    cfg.omega = {p.omega + (cfg.omega.min - cfg.omega_ref),
                 p.omega + (cfg.omega.max - cfg.omega_ref), cfg.omega.levels};
    cfg.omega_ref = p.omega;
    cfg.x_foot = p.foot.x;
    cfg.xdot_apex = manifold(q_).xdot_apex;
    cfg.mass = p.mass;
    cfg.gravity = p.gravity;
    cfg.xdot_terminal.reset();

    auto rec = std::make_unique<Recovery>();
    rec->table = hooks_.solve(cfg);
    rec->law = std::make_unique<RecoveryController>(rec->table, config_.epsilon);
    const RecoverabilityMask mask = hooks_.recoverability(rec->table, config_.epsilon);
    recovery_ = std::move(rec);
    const double v = s_.sagittal.xdot;
    if (v < cfg.states.min || v > cfg.states.max) return false;
    return mask.at(0, cfg.states.nearest(v));
  }

  void switch_step(const Guard& g, const HybridState& prev,
                   const HybridState& curr, double fraction,
                   const StepControls& u) {
    const std::size_t q = q_;
    HybridState at{prev.zeta + fraction * (curr.zeta - prev.zeta), mode_,
                   lerp(prev.state, curr.state, fraction)};
    const double t_c = t_ + fraction * config_.dt;
    s_ = at.state;
    zeta_ = at.zeta;
    t_ = t_c;
    push(s_, q, mode_, u, t_c);
    auto& events = trace_.records.back().events;
    events.push_back(fmt::format("transition:{}", to_string(g.kind)));
    trace_.transitions.push_back({q, t_c, g, prev, curr, at});
    close_disturbance();

    if (replan_pending_) replan(at.state.sagittal, events);
    place_lateral_foot(at.state);

    const StepParameters& next = plan().steps[q + 1];
    const DiscreteMode target = support_mode(q + 1);
    if (config_.contact == ContactModel::kMultiContact) {
      dual_support(at, u, t_c);
    } else {
      const TransitionEvent e{EventClass::kAutonomous, EventKind::kSwitching, target,
                              std::nullopt, std::nullopt, {}};
      mode_ = apply_transition(e, at, next, config_.contact).state.mode;
    }
    begin_step(q + 1);
  }

  void begin_step(std::size_t q) {
    q_ = q;
    t_base_ = t_;
    k_ = 0;
    step_zeta0_ = zeta_;
    step_t0_ = t_;
    // The plan measures progression from the apex; steps after the first
    // start behind it.
    apex_zeta_ =
        zeta_ + arc_length(plan().manifolds[q], s_.sagittal.x, plan().steps[q].foot.x);
    recovery_.reset();
    replan_pending_ = false;
    trace_.records.back().control = {plan().steps[q].omega, 0.0};
  }

  void close_disturbance() {
    if (!active_) return;
    auto& rec = trace_.disturbances[*active_];
    if (rec.samples.size() >= 2 && rec.samples.back().zeta > 0.0) {
      rec.kappa = sensitivity_norm(rec.samples, 0.0, rec.samples.back().zeta);
    }
    active_.reset();
  }

  void replan(const SagittalState& at, std::vector<std::string>& events) {
    const std::size_t q1 = q_ + 1;
    auto& rec = trace_.disturbances.back();
    StepParameters& next = plan().steps[q1];
    const double v_next = manifold(q1).xdot_apex;
    try {
      const double foot = replan_foot(at.x, at.xdot, v_next, next.omega);
      next.foot.x = foot;
      PlannerOptions opts;
      opts.dt = config_.dt;
      opts.mass = next.mass;
      opts.gravity = next.gravity;
      plan().manifolds[q1] = make_step_manifold({v_next, foot, next.omega}, opts);
      if (q1 + 1 < n_steps()) {
        plan().transitions[q1] =
            find_transition(plan().manifolds[q1], plan().manifolds[q1 + 1]);
      }
      rec.replanned = true;
      rec.new_foot = foot;
      events.push_back("foot_replan");
      spdlog::info("step {}: foot re-planned to x={:.4f}", q1, foot);
    } catch (const InfeasibleReplan& e) {
      rec.replan_infeasible = true;
      events.push_back("replan_infeasible");
      spdlog::warn("step {}: {}", q1, e.what());
    }
  }

  void place_lateral_foot(const PhaseState& at) {
    StepParameters& next = plan().steps[q_ + 1];
    const double t_apex =
        time_to_apex(at.sagittal.x, at.sagittal.xdot, next.foot.x, next.omega);
    next.foot.y = lateral_foot_search(at.lateral, next, t_apex, kLateralFootBounds,
                                      20, 1e-6, config_.dt)
                      .y_foot;
  }

  void dual_support(const HybridState& at, const StepControls& u, double t_c) {
    const std::size_t q1 = q_ + 1;
    const StepParameters& cur = plan().steps[q_];
    const StepParameters& next = plan().steps[q1];
    const double step_duration = t_c - step_t0_;

    TransitionEvent enter{EventClass::kAutonomous, EventKind::kSwitching,
                          DiscreteMode::kDualSupport, std::nullopt, std::nullopt, {}};
    mode_ = apply_transition(enter, at, next, config_.contact).state.mode;
    trace_.records.back().events.push_back("dual_support");

    // Exit state: where the next single-support flow would be after the
    // dual-support interval.
    const double duration = config_.duration_fraction * step_duration;
    const auto n = static_cast<std::size_t>(std::ceil(duration / config_.dt - 1e-9));
    const double h = duration / static_cast<double>(n);
    PhaseState exit = at.state;
    for (std::size_t i = 0; i < n; ++i) exit = integrate_step(exit, next, {}, h);

    StepParameters entry_field = cur;
    entry_field.omega = u.omega;
    const CoordinateBoundary bx{
        {at.state.sagittal.x, at.state.sagittal.xdot,
         sagittal_derivative(at.state.sagittal, entry_field, u.tau_y).acceleration},
        {exit.sagittal.x, exit.sagittal.xdot,
         sagittal_derivative(exit.sagittal, next, 0.0).acceleration}};
    const CoordinateBoundary by{
        {at.state.lateral.y, at.state.lateral.ydot,
         lateral_derivative(at.state.lateral, cur, 0.0).acceleration},
        {exit.lateral.y, exit.lateral.ydot,
         lateral_derivative(exit.lateral, next, 0.0).acceleration}};
    const std::array<CoordinateBoundary, 2> boundary{bx, by};
    const QuinticSegment seg =
        fit_multicontact(boundary, config_.duration_fraction, step_duration);

    PhaseState s = at.state;
    const StepControls nominal{next.omega, 0.0};
    for (std::size_t i = 1; i <= n; ++i) {
      const double tau = static_cast<double>(i) * h;
      PhaseState ps = exit;
      if (i < n) {
        const Kinematics kx = seg.evaluate(0, tau);
        const Kinematics ky = seg.evaluate(1, tau);
        ps = {{kx.p, kx.v}, {ky.p, ky.v}};
      }
      zeta_ += arc_increment(s, ps, next.omega);
      s = ps;
      push(s, q1, mode_, nominal, t_c + tau);
    }
    s_ = exit;
    t_ = t_c + duration;
    const TransitionEvent leave{EventClass::kTimed, EventKind::kSwitching,
                                support_mode(q1), std::nullopt, std::nullopt, {}};
    mode_ = apply_transition(leave, {zeta_, mode_, s_}, next, config_.contact).state.mode;
    trace_.records.back().mode = mode_;
    trace_.records.back().events.push_back("single_support");
  }

  struct Recovery {
    PolicyTable table;
    std::unique_ptr<RecoveryController> law;
  };

  AutomatonConfig config_;
  std::vector<Disturbance> schedule_;
  std::vector<bool> applied_;
  ControllerHooks hooks_;
  HybridTrace trace_;

  std::size_t q_ = 0;
  PhaseState s_;
  DiscreteMode mode_ = DiscreteMode::kLeftSupport;
  double zeta_ = 0.0;
  double t_ = 0.0;
  double t_base_ = 0.0;
  std::size_t k_ = 0;
  double step_zeta0_ = 0.0;
  double apex_zeta_ = 0.0;
  double step_t0_ = 0.0;
  std::unique_ptr<Recovery> recovery_;
  bool replan_pending_ = false;
  std::optional<std::size_t> active_;
  double disturbance_zeta_ = 0.0;
};

}  // namespace

HybridTrace run_plan(const WalkingPlan& plan, const AutomatonConfig& config,
                     const std::vector<Disturbance>& disturbances,
                     const ControllerHooks& hooks) {
  return Walker(plan, config, disturbances, hooks).run();
}

}  // namespace psl
