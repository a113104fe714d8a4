#include "psl/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "psl/errors.hpp"

namespace psl {

double ControlGrid::value(std::size_t k) const {
  if (levels <= 1) return min;
  if (k + 1 == levels) return max;
  return min + (max - min) * static_cast<double>(k) /
                   static_cast<double>(levels - 1);
}

std::size_t NodeGrid::count() const {
  return static_cast<std::size_t>(std::llround((max - min) / res)) + 1;
}

std::size_t NodeGrid::nearest(double v) const {
  const double pos = std::round((v - min) / res);
  if (!(pos > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(pos), count() - 1);
}

namespace {

void validate_grid(const NodeGrid& g, const char* name) {
  if (!(g.res > 0.0) || !std::isfinite(g.res)) {
    throw ParameterError(fmt::format("{} resolution must be positive", name));
  }
  if (!(g.max > g.min)) {
    throw ParameterError(fmt::format("{} range [{}, {}] is empty", name, g.min, g.max));
  }
  const double steps = (g.max - g.min) / g.res;
  if (std::abs(steps - std::round(steps)) > 1e-6) {
    throw ParameterError(fmt::format(
        "{} range [{}, {}] is not a whole number of {} steps", name, g.min,
        g.max, g.res));
  }
}

double sq(double v) { return v * v; }

}  // namespace

void DPConfig::validate() const {
  validate_grid(stages, "stage");
  validate_grid(states, "state");
  if (omega.levels < 1 || tau.levels < 1 || omega.min > omega.max ||
      tau.min > tau.max) {
    throw ParameterError("control grids must be nonempty");
  }
  if (!(omega.min > 0.0)) {
    throw ParameterError("omega levels must be positive");
  }
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw ParameterError(fmt::format("discount {} outside [0, 1]", eta));
  }
  if (alpha < 0.0 || beta < 0.0 || gamma1 < 0.0 || gamma2 < 0.0) {
    throw ParameterError("cost weights must be non-negative");
  }
  if (!(mass > 0.0) || !(gravity > 0.0) || !(omega_ref > 0.0)) {
    throw ParameterError("mass, gravity and omega_ref must be positive");
  }
}

double DPConfig::terminal_velocity() const {
  if (xdot_terminal) return *xdot_terminal;
  return std::sqrt(sq(xdot_apex) + sq(omega_ref * (stages.max - x_foot)));
}

double stage_cost(double sigma, double tau_y, double omega, const DPConfig& cfg,
                  double stage_width) {
  return stage_width * (cfg.beta * sigma * sigma + cfg.gamma1 * tau_y * tau_y +
                        cfg.gamma2 * sq(omega - cfg.omega_ref));
}

StageTransition dp_step(const DPConfig& cfg, std::size_t stage, double xdot,
                        const StepControls& u, double penalty) {
  const double x0 = cfg.stages.node(stage);
  const double x1 = cfg.stages.node(stage + 1);
  const double xm = 0.5 * (x0 + x1);
  const double w2 = u.omega * u.omega;
  const double foot = cfg.x_foot + u.tau_y / (cfg.mass * cfg.gravity);
  // xdot^2 - w^2 (x - foot)^2 is conserved under constant controls.
  const double energy = xdot * xdot - w2 * sq(x0 - foot);
  auto speed2 = [&](double x) { return energy + w2 * sq(x - foot); };

  const double closest = std::clamp(foot, x0, x1);
  const bool reaches = speed2(closest) > 0.0 && speed2(x1) > 0.0;
  const ManifoldDescriptor m = cfg.manifold();

  StageTransition out;
  double sigma;
  if (reaches) {
    sigma = sigma_apex({xm, std::sqrt(speed2(xm))}, m);
    const double next = std::sqrt(speed2(x1));
    out.xdot_next = std::clamp(next, cfg.states.min, cfg.states.max);
    out.escaped = next < cfg.states.min || next > cfg.states.max;
  } else {
    sigma = sigma_apex({x0, xdot}, m);
    out.xdot_next = cfg.states.min;
    out.escaped = true;
  }
  out.cost = stage_cost(sigma, u.tau_y, u.omega, cfg, x1 - x0);
  if (out.escaped) out.cost += penalty;
  return out;
}

double dp_penalty(const DPConfig& cfg) {
  const std::size_t n_stage = cfg.stages.count();
  const std::size_t n_state = cfg.states.count();
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < n_stage; ++i) {
    for (std::size_t j = 0; j < n_state; ++j) {
      for (std::size_t a = 0; a < cfg.omega.levels; ++a) {
        for (std::size_t b = 0; b < cfg.tau.levels; ++b) {
          const StepControls u{cfg.omega.value(a), cfg.tau.value(b)};
          worst = std::max(worst, dp_step(cfg, i, cfg.states.node(j), u, 0.0).cost);
        }
      }
    }
  }
  return 10.0 * worst;
}

StepControls PolicyTable::lookup(double x, double xdot) const {
  const auto& g = config.stages;
  const double pos = std::floor((x - g.min) / g.res + 1e-9);
  std::size_t stage = 0;
  if (pos > 0.0) {
    stage = std::min(static_cast<std::size_t>(pos), stage_count() - 1);
  }
  return control(stage, config.states.nearest(xdot));
}

PolicyTable solve_dp(const DPConfig& cfg) {
  cfg.validate();
  const std::size_t n_stage = cfg.stages.count();
  const std::size_t n_state = cfg.states.count();
  const double penalty = dp_penalty(cfg);

  PolicyTable table;
  table.config = cfg;
  table.omega.assign(n_stage * n_state, cfg.omega_ref);
  table.tau.assign(n_stage * n_state, cfg.tau_ref);
  table.cost.assign(n_stage * n_state, 0.0);

  const double target = cfg.terminal_velocity();
  for (std::size_t j = 0; j < n_state; ++j) {
    table.cost[table.index(n_stage - 1, j)] =
        cfg.alpha * sq(cfg.states.node(j) - target);
  }

  std::vector<StepControls> controls;
  for (std::size_t a = 0; a < cfg.omega.levels; ++a) {
    for (std::size_t b = 0; b < cfg.tau.levels; ++b) {
      controls.push_back({cfg.omega.value(a), cfg.tau.value(b)});
    }
  }

  for (std::size_t i = n_stage - 1; i-- > 0;) {
    const double* next = &table.cost[table.index(i + 1, 0)];
    auto cost_to_go = [&](double v) {
      const double pos = (v - cfg.states.min) / cfg.states.res;
      if (cfg.interpolation == SuccessorInterpolation::kNearest) {
        return next[cfg.states.nearest(v)];
      }
      if (!(pos > 0.0)) return next[0];
      if (pos >= static_cast<double>(n_state - 1)) return next[n_state - 1];
      const auto k = static_cast<std::size_t>(pos);
      const double w = pos - static_cast<double>(k);
      return (1.0 - w) * next[k] + w * next[k + 1];
    };
    for (std::size_t j = 0; j < n_state; ++j) {
      const double v = cfg.states.node(j);
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_k = 0;
      for (std::size_t k = 0; k < controls.size(); ++k) {
        const StageTransition tr = dp_step(cfg, i, v, controls[k], penalty);
        const double total = tr.cost + cfg.eta * cost_to_go(tr.xdot_next);
        if (total < best) {
          best = total;
          best_k = k;
        }
      }
      const std::size_t idx = table.index(i, j);
      table.cost[idx] = best;
      table.omega[idx] = controls[best_k].omega;
      table.tau[idx] = controls[best_k].tau_y;
    }
  }
  return table;
}

StepControls saturate_control(double sigma, double epsilon,
                              const StepControls& u_policy,
                              const StepControls& u_epsilon,
                              const StepControls& u_ref) {
  if (!(epsilon > 0.0)) {
    throw ParameterError("bundle half-width must be positive");
  }
  const double mag = std::abs(sigma);
  if (mag > epsilon) return u_policy;
  const double w = mag / epsilon;
  const double r = (epsilon - mag) / epsilon;
  return {w * u_epsilon.omega + r * u_ref.omega,
          w * u_epsilon.tau_y + r * u_ref.tau_y};
}

double lyapunov_rate(const SagittalState& s, double sigma, double tau_y,
                     const ManifoldDescriptor& m, double mass, double gravity) {
  return -2.0 * m.xdot_apex * m.xdot_apex * sigma * s.xdot * tau_y /
         (mass * gravity);
}

double max_tube_radius(double epsilon, double xdot_apex, double mass,
                       double gravity, double x_trans, double x0,
                       double tau_y) {
  const double mu = 2.0 * std::sqrt(2.0) * xdot_apex * xdot_apex / (mass * gravity);
  return epsilon + std::sqrt(2.0) / 2.0 * mu * (x_trans - x0) * tau_y;
}

double replan_foot(double x_trans, double xdot_trans_rep, double xdot_apex_next,
                   double omega) {
  if (!(omega > 0.0)) {
    throw ParameterError("omega must be positive");
  }
  const double radicand = xdot_trans_rep * xdot_trans_rep - xdot_apex_next * xdot_apex_next;
  if (radicand < 0.0 || xdot_trans_rep <= 0.0) {
    throw InfeasibleReplan(fmt::format(
        "transition velocity {} cannot reach apex velocity {}", xdot_trans_rep,
        xdot_apex_next));
  }
  return x_trans + std::sqrt(radicand) / omega;
}

RecoveryController::RecoveryController(const PolicyTable& table, double epsilon)
    : table_(&table), epsilon_(epsilon) {
  if (!(epsilon > 0.0)) {
    throw ParameterError("bundle half-width must be positive");
  }
}

double RecoveryController::sigma(const SagittalState& s) const {
  return sigma_apex(s, table_->config.manifold());
}

StepControls RecoveryController::operator()(const SagittalState& s) {
  const double sig = sigma(s);
  const StepControls u = table_->lookup(s.x, s.xdot);
  if (std::abs(sig) > epsilon_) return u;
  if (!u_epsilon_) u_epsilon_ = u;
  const auto& cfg = table_->config;
  return saturate_control(sig, epsilon_, u, *u_epsilon_,
                          {cfg.omega_ref, cfg.tau_ref});
}

namespace {

StepParameters recovery_field(const DPConfig& cfg, const StepControls& u) {
  StepParameters p;
  p.omega = u.omega;
  p.foot.x = cfg.x_foot;
  p.mass = cfg.mass;
  p.gravity = cfg.gravity;
  p.tau_y_limits = {std::min(cfg.tau.min, cfg.tau_ref),
                    std::max(cfg.tau.max, cfg.tau_ref)};
  return p;
}

}  // namespace

std::vector<RecoverySample> simulate_recovery(const PolicyTable& table,
                                              const SagittalState& s0,
                                              double epsilon, double dt) {
  const auto& cfg = table.config;
  RecoveryController law(table, epsilon);
  std::vector<RecoverySample> out;
  SagittalState s = s0;
  double t = 0.0;
  constexpr std::size_t kMaxSteps = 10000000;
  for (std::size_t k = 0; k < kMaxSteps; ++k) {
    const StepControls u = law(s);
    out.push_back({t, s, law.sigma(s), u});
    if (s.x >= cfg.stages.max || s.xdot <= 0.0) break;
    const PhaseState next =
        integrate_step({s, {}}, recovery_field(cfg, u), {u.tau_y, 0.0}, dt);
    s = next.sagittal;
    t = static_cast<double>(k + 1) * dt;
  }
  return out;
}

std::size_t RecoverabilityMask::recoverable_count() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), 1));
}

RecoverabilityMask estimate_recoverability(const PolicyTable& table,
                                           double epsilon, double dt) {
  if (!(epsilon > 0.0)) {
    throw ParameterError("bundle half-width must be positive");
  }
  const auto& cfg = table.config;
  const ManifoldDescriptor m = cfg.manifold();
  RecoverabilityMask mask;
  mask.stages = cfg.stages;
  mask.states = cfg.states;
  mask.epsilon = epsilon;
  const std::size_t n_stage = cfg.stages.count();
  const std::size_t n_state = cfg.states.count();
  mask.cells.assign(n_stage * n_state, 0);

  for (std::size_t i = 0; i < n_stage; ++i) {
    for (std::size_t j = 0; j < n_state; ++j) {
      SagittalState s{cfg.stages.node(i), cfg.states.node(j)};
      bool recovered = std::abs(sigma_apex(s, m)) <= epsilon;
      // Only the policy matters before entry, so no blending is needed here.
      for (std::size_t k = 0; !recovered && s.xdot > 0.0 && k < 10000000; ++k) {
        const StepControls u = table.lookup(s.x, s.xdot);
        s = integrate_step({s, {}}, recovery_field(cfg, u), {u.tau_y, 0.0}, dt)
                .sagittal;
        if (s.x > cfg.stages.max || !std::isfinite(s.x)) break;
        recovered = std::abs(sigma_apex(s, m)) <= epsilon;
      }
      mask.cells[i * n_state + j] = recovered ? 1 : 0;
    }
  }
  return mask;
}

RecoverabilityMask estimate_recoverability(const DPConfig& cfg, double epsilon,
                                           double dt) {
  return estimate_recoverability(solve_dp(cfg), epsilon, dt);
}

}  // namespace psl
