#include "psl/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "psl/errors.hpp"

namespace psl {

namespace {

// Portable [0, 1) draw; std distributions differ between standard libraries.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

}  // namespace

// ---------------------------------------------------------------- terrain

void TerrainSpec::validate() const {
  if (steps.empty()) {
    throw ParameterError("terrain has no steps");
  }
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (!(steps[i].foot.x > steps[i - 1].foot.x)) {
      throw ParameterError(fmt::format(
          "terrain step {} foot x={} does not advance past {}", i,
          steps[i].foot.x, steps[i - 1].foot.x));
    }
  }
}

TerrainSpec generate_terrain(const TerrainOptions& o) {
  if (o.n_steps < 1) {
    throw ParameterError("terrain needs at least one step");
  }
  if (!(o.dh_min > 0.0) || !(o.dh_max > o.dh_min)) {
    throw ParameterError(fmt::format(
        "height bounds must satisfy 0 < dh_min < dh_max, got ({}, {})",
        o.dh_min, o.dh_max));
  }
  if (!(o.step_length > 0.0) || !(o.com_height > 0.0)) {
    throw ParameterError("step length and CoM height must be positive");
  }

  std::mt19937_64 rng(o.seed);
  std::vector<double> heights(o.n_steps, 0.0);
  for (std::size_t k = 1; k < o.n_steps; ++k) {
    const double side = uniform01(rng) < 0.5 ? -1.0 : 1.0;
    const double magnitude = o.dh_min + (o.dh_max - o.dh_min) * uniform01(rng);
    heights[k] = heights[k - 1] + side * magnitude;
  }

  TerrainSpec terrain;
  terrain.steps.reserve(o.n_steps);
  for (std::size_t k = 0; k < o.n_steps; ++k) {
    // Each step leans towards the next height change.
    double rise = 0.0;
    if (k + 1 < o.n_steps) {
      rise = heights[k + 1] - heights[k];
    } else if (k > 0) {
      rise = heights[k] - heights[k - 1];
    }
    TerrainStep step;
    step.foot = {static_cast<double>(k) * o.step_length,
                 (k % 2 == 0 ? 1.0 : -1.0) * o.lateral_offset, heights[k]};
    step.tilt = o.n_steps > 1 ? sign_of(rise) * o.tilt : o.tilt;
    step.surface.a = std::tan(step.tilt);
    step.surface.b = step.foot.z + o.com_height - step.surface.a * step.foot.x;
    terrain.steps.push_back(step);
  }
  return terrain;
}

std::vector<ApexKeyframe> keyframes_from_terrain(const TerrainSpec& terrain,
                                                 double nominal_speed) {
  std::vector<ApexKeyframe> out;
  out.reserve(terrain.steps.size());
  for (std::size_t k = 0; k < terrain.steps.size(); ++k) {
    const double dh =
        k == 0 ? 0.0 : terrain.steps[k].foot.z - terrain.steps[k - 1].foot.z;
    const double v = std::clamp(nominal_speed - 0.2 * dh, 0.4, 0.8);
    out.push_back({v, apex_height(terrain.steps[k].surface, terrain.steps[k].foot)});
  }
  return out;
}

// ---------------------------------------------------------------- fitting

SquaredSpeedCurve SquaredSpeedCurve::fit(std::span<const PhasePoint> samples) {
  const std::size_t n = samples.size();
  if (n < 3) {
    throw InsufficientData(
        fmt::format("curve fit needs at least three samples, got {}", n));
  }
  const bool increasing = samples[1].x > samples[0].x;
  for (std::size_t i = 1; i < n; ++i) {
    if (increasing ? !(samples[i].x > samples[i - 1].x)
                   : !(samples[i].x < samples[i - 1].x)) {
      throw ParameterError("curve fit samples must be strictly monotone in x");
    }
  }

  SquaredSpeedCurve c;
  c.x_min_ = std::min(samples.front().x, samples.back().x);
  c.x_max_ = std::max(samples.front().x, samples.back().x);

  // Least squares on a centred, scaled abscissa for conditioning.
  const double centre = 0.5 * (c.x_min_ + c.x_max_);
  const double half = std::max(0.5 * (c.x_max_ - c.x_min_), 1e-12);
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (samples[i].x - centre) / half;
    A(i, 0) = 1.0;
    A(i, 1) = u;
    A(i, 2) = u * u;
    rhs(i) = samples[i].xdot * samples[i].xdot;
  }
  const Eigen::Vector3d q = A.colPivHouseholderQr().solve(rhs);
  // Back to powers of x.
  const double s1 = q(1) / half;
  const double s2 = q(2) / (half * half);
  c.quadratic_ = {q(0) - s1 * centre + s2 * centre * centre,
                  s1 - 2.0 * s2 * centre, s2};

  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    worst = std::max(worst, std::abs(c(samples[i].x) - rhs(i)));
  }
  if (worst <= 1e-9) {
    return c;
  }

  // Natural cubic spline through every sample.
  c.quadratic_ = {};
  c.knots_.resize(n);
  c.values_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = increasing ? i : n - 1 - i;
    c.knots_[i] = samples[j].x;
    c.values_[i] = samples[j].xdot * samples[j].xdot;
  }
  c.second_.assign(n, 0.0);
  std::vector<double> diag(n, 0.0), rhs_s(n, 0.0), upper(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = c.knots_[i] - c.knots_[i - 1];
    const double h1 = c.knots_[i + 1] - c.knots_[i];
    diag[i] = 2.0 * (h0 + h1);
    upper[i] = h1;
    rhs_s[i] = 6.0 * ((c.values_[i + 1] - c.values_[i]) / h1 -
                      (c.values_[i] - c.values_[i - 1]) / h0);
  }
  // Thomas sweep over the interior unknowns.
  for (std::size_t i = 2; i + 1 < n; ++i) {
    const double lower = c.knots_[i] - c.knots_[i - 1];
    const double m = lower / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    rhs_s[i] -= m * rhs_s[i - 1];
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    c.second_[i] = (rhs_s[i] - upper[i] * c.second_[i + 1]) / diag[i];
    if (i == 1) break;
  }
  return c;
}

double SquaredSpeedCurve::operator()(double x) const {
  if (knots_.empty()) {
    return quadratic_[0] + x * (quadratic_[1] + x * quadratic_[2]);
  }
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  std::size_t i = static_cast<std::size_t>(std::distance(knots_.begin(), it));
  i = std::clamp<std::size_t>(i, 1, knots_.size() - 1);
  const double h = knots_[i] - knots_[i - 1];
  const double a = (knots_[i] - x) / h;
  const double b = (x - knots_[i - 1]) / h;
  return a * values_[i - 1] + b * values_[i] +
         ((a * a * a - a) * second_[i - 1] + (b * b * b - b) * second_[i]) * h *
             h / 6.0;
}

double SquaredSpeedCurve::derivative(double x) const {
  if (knots_.empty()) {
    return quadratic_[1] + 2.0 * quadratic_[2] * x;
  }
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  std::size_t i = static_cast<std::size_t>(std::distance(knots_.begin(), it));
  i = std::clamp<std::size_t>(i, 1, knots_.size() - 1);
  const double h = knots_[i] - knots_[i - 1];
  const double a = (knots_[i] - x) / h;
  const double b = (x - knots_[i - 1]) / h;
  return (values_[i] - values_[i - 1]) / h +
         (-(3.0 * a * a - 1.0) * second_[i - 1] + (3.0 * b * b - 1.0) * second_[i]) *
             h / 6.0;
}

double StepManifold::xdot_at(double x) const {
  const double f = curve(x);
  return f >= 0.0 ? std::sqrt(f) : std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------- nominal

StepManifold make_step_manifold(const ManifoldDescriptor& d,
                                const PlannerOptions& o) {
  if (!(d.omega > 0.0)) {
    throw ParameterError("manifold omega must be positive");
  }
  if (!(d.xdot_apex > 0.0)) {
    throw ParameterError(fmt::format(
        "apex velocity must be positive for forward walking, got {}",
        d.xdot_apex));
  }
  if (!(o.dt > 0.0) || !(o.window > 0.0)) {
    throw ParameterError("planner dt and window must be positive");
  }
  StepParameters p;
  p.omega = d.omega;
  p.foot.x = d.x_foot;
  p.mass = o.mass;
  p.gravity = o.gravity;

  const PhaseState apex{{d.x_foot, d.xdot_apex}, {}};
  constexpr std::size_t kMaxSamples = 1000000;

  std::vector<PhasePoint> backward;
  PhaseState s = apex;
  while (s.sagittal.x >= d.x_foot - o.window) {
    s = integrate_step(s, p, {}, -o.dt);
    backward.push_back({s.sagittal.x, s.sagittal.xdot});
    if (backward.size() > kMaxSamples || !std::isfinite(s.sagittal.x)) {
      throw DivergenceError("backward manifold integration did not leave the window",
                            backward.size());
    }
  }

  StepManifold m;
  m.descriptor = d;
  m.samples.reserve(2 * backward.size() + 1);
  m.samples.assign(backward.rbegin(), backward.rend());
  m.samples.push_back({apex.sagittal.x, apex.sagittal.xdot});
  s = apex;
  std::size_t forward = 0;
  while (s.sagittal.x <= d.x_foot + o.window) {
    s = integrate_step(s, p, {}, o.dt);
    m.samples.push_back({s.sagittal.x, s.sagittal.xdot});
    if (++forward > kMaxSamples || !std::isfinite(s.sagittal.x)) {
      throw DivergenceError("forward manifold integration did not leave the window",
                            forward);
    }
  }
  m.curve = SquaredSpeedCurve::fit(m.samples);
  return m;
}

StepParameters step_parameters(const TerrainStep& step,
                               const PlannerOptions& o) {
  StepParameters p;
  p.omega = omega_from_surface(step.surface, step.foot, o.gravity);
  p.foot = step.foot;
  p.surface = step.surface;
  p.mass = o.mass;
  p.gravity = o.gravity;
  p.tau_y_limits = o.tau_y_limits;
  p.tau_x_limits = o.tau_x_limits;
  return p;
}

std::vector<StepManifold> generate_nominal(
    const TerrainSpec& terrain, std::span<const ApexKeyframe> keyframes,
    const PlannerOptions& o) {
  terrain.validate();
  if (keyframes.size() != terrain.steps.size()) {
    throw ParameterError(fmt::format("{} keyframes for {} terrain steps",
                                     keyframes.size(), terrain.steps.size()));
  }
  std::vector<StepManifold> out;
  out.reserve(keyframes.size());
  for (std::size_t q = 0; q < keyframes.size(); ++q) {
    const auto& step = terrain.steps[q];
    if (!(keyframes[q].z_apex > 0.0)) {
      throw GeometryError(fmt::format("step {}: apex height {} is not positive",
                                      q, keyframes[q].z_apex));
    }
    const double omega = omega_from_surface(step.surface, step.foot, o.gravity);
    const double z_geometry = apex_height(step.surface, step.foot);
    if (std::abs(z_geometry - keyframes[q].z_apex) > 1e-6 * std::max(1.0, z_geometry)) {
      throw GeometryError(fmt::format(
          "step {}: keyframe apex height {} disagrees with the surface ({})", q,
          keyframes[q].z_apex, z_geometry));
    }
    out.push_back(make_step_manifold({keyframes[q].xdot_apex, step.foot.x, omega}, o));
  }
  for (std::size_t q = 1; q < out.size(); ++q) {
    if (!(out[q].curve.x_min() < out[q - 1].curve.x_max())) {
      throw PlanningInfeasible(fmt::format(
          "manifolds of steps {} and {} do not overlap", q - 1, q));
    }
  }
  return out;
}

double arc_length(const StepManifold& m, double x_from, double x_to) {
  constexpr int kIntervals = 256;  // even, composite Simpson
  const double w = m.descriptor.omega;
  auto integrand = [&](double x) {
    const double f = m.curve(x);
    if (!(f > 0.0)) return 1.0;
    const double slope = m.curve.derivative(x) / (2.0 * std::sqrt(f) * w);
    return std::sqrt(1.0 + slope * slope);
  };
  const double h = (x_to - x_from) / kIntervals;
  double sum = integrand(x_from) + integrand(x_to);
  for (int i = 1; i < kIntervals; ++i) {
    sum += (i % 2 == 1 ? 4.0 : 2.0) * integrand(x_from + i * h);
  }
  return sum * h / 3.0;
}

TransitionPoint find_transition(const StepManifold& mq,
                                const StepManifold& mq1) {
  const double lo = std::max(mq.curve.x_min(), mq1.curve.x_min());
  const double hi = std::min(mq.curve.x_max(), mq1.curve.x_max());
  if (!(lo < hi)) {
    throw NoTransition(fmt::format("manifolds do not overlap ([{}, {}])", lo, hi));
  }
  auto diff = [&](double x) { return mq.curve(x) - mq1.curve(x); };

  constexpr int kScan = 2000;
  const double step = (hi - lo) / kScan;
  double scale = 0.0;
  double max_diff = 0.0;
  for (int i = 0; i <= kScan; ++i) {
    const double x = lo + i * step;
    scale = std::max({scale, std::abs(mq.curve(x)), std::abs(mq1.curve(x))});
    max_diff = std::max(max_diff, std::abs(diff(x)));
  }
  if (max_diff <= 1e-12 * std::max(scale, 1.0)) {
    throw DegenerateTransition("adjacent manifolds coincide over their overlap");
  }

  double a = lo;
  double fa = diff(a);
  for (int i = 1; i <= kScan; ++i) {
    const double b = i == kScan ? hi : lo + i * step;
    const double fb = diff(b);
    const bool bracket = (fa <= 0.0 && fb >= 0.0) || (fa >= 0.0 && fb <= 0.0);
    if (bracket && mq.curve(0.5 * (a + b)) > 0.0) {
      double left = a;
      double right = b;
      double f_left = fa;
      if (fa == 0.0) {
        right = a;
      } else if (fb == 0.0) {
        left = b;
      }
      while (right - left > 1e-10) {
        const double mid = 0.5 * (left + right);
        const double fm = diff(mid);
        if ((fm <= 0.0) == (f_left <= 0.0) && fm != 0.0) {
          left = mid;
          f_left = fm;
        } else {
          right = mid;
        }
      }
      double x = 0.5 * (left + right);
      // Newton polish, kept only while it stays in the bracket.
      for (int it = 0; it < 3; ++it) {
        const double slope = mq.curve.derivative(x) - mq1.curve.derivative(x);
        if (slope == 0.0) break;
        const double next = x - diff(x) / slope;
        if (next < left - 1e-10 || next > right + 1e-10) break;
        x = next;
      }
      const double f = mq.curve(x);
      if (f > 0.0) {
        return {x, std::sqrt(f), arc_length(mq, mq.descriptor.x_foot, x)};
      }
    }
    a = b;
    fa = fb;
  }
  throw NoTransition("no crossing with positive velocity inside the overlap");
}

// ---------------------------------------------------------------- lateral

LateralState propagate_lateral(const LateralState& init,
                               const StepParameters& p, double t, double dt) {
  if (t == 0.0) return init;
  const auto n = static_cast<std::size_t>(std::ceil(std::abs(t) / dt));
  const double h = t / static_cast<double>(n);
  PhaseState s{{}, init};
  for (std::size_t k = 0; k < n; ++k) {
    s = integrate_step(s, p, {}, h);
  }
  return s.lateral;
}

LateralFootResult lateral_foot_search(const LateralState& init,
                                      const StepParameters& p, double t_apex,
                                      FootBounds bounds, int n_max,
                                      double ydot_tol, double dt) {
  if (n_max < 1) {
    throw ParameterError("lateral search needs at least one iteration");
  }
  if (!(bounds.lower <= bounds.upper)) {
    throw ParameterError("lateral foot bounds are empty");
  }
  LateralFootResult result;
  auto clamp = [&](double y) {
    if (y < bounds.lower || y > bounds.upper) {
      spdlog::warn("lateral foot {} clamped to [{}, {}]", y, bounds.lower,
                   bounds.upper);
      result.clamped = true;
      return std::clamp(y, bounds.lower, bounds.upper);
    }
    return y;
  };
  auto apex_velocity = [&](double y_foot) {
    StepParameters q = p;
    q.foot.y = y_foot;
    return propagate_lateral(init, q, t_apex, dt).ydot;
  };

  double foot = clamp(p.foot.y);
  double vel = apex_velocity(foot);
  double best_foot = foot;
  double best_vel = vel;
  int n = 1;

  // Secant slope seeded by a small probe next to the first guess.
  double probe = foot + 1e-3 * std::max(1.0, bounds.upper - bounds.lower);
  if (probe > bounds.upper) probe = foot - 1e-3 * std::max(1.0, bounds.upper - bounds.lower);
  double slope = (apex_velocity(probe) - vel) / (probe - foot);

  while (n < n_max && std::abs(vel) > ydot_tol) {
    if (slope == 0.0 || !std::isfinite(slope)) break;
    const double next_foot = clamp(foot - vel / slope);
    const double next_vel = apex_velocity(next_foot);
    if (next_foot != foot) {
      slope = (next_vel - vel) / (next_foot - foot);
    }
    foot = next_foot;
    vel = next_vel;
    ++n;
    if (std::abs(vel) < std::abs(best_vel)) {
      best_foot = foot;
      best_vel = vel;
    }
  }
  if (std::abs(vel) > ydot_tol) {
    throw NonConvergence(
        fmt::format("lateral foot search stopped after {} iterations with "
                    "apex velocity {}",
                    n, best_vel),
        best_foot, best_vel);
  }
  result.y_foot = foot;
  result.ydot_apex = vel;
  result.iterations = n;
  return result;
}

// ---------------------------------------------------------------- quintic

Kinematics QuinticSegment::evaluate(std::size_t coordinate, double t) const {
  const auto& c = coefficients.at(coordinate);
  Kinematics k;
  k.p = c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
  k.v = c[1] + t * (2 * c[2] + t * (3 * c[3] + t * (4 * c[4] + t * 5 * c[5])));
  k.a = 2 * c[2] + t * (6 * c[3] + t * (12 * c[4] + t * 20 * c[5]));
  return k;
}

QuinticSegment fit_multicontact(std::span<const CoordinateBoundary> boundary,
                                double duration_fraction, double step_duration) {
  if (!(duration_fraction > 0.0 && duration_fraction < 1.0)) {
    throw ParameterError(fmt::format(
        "multi-contact fraction must lie in (0, 1), got {}", duration_fraction));
  }
  if (!(step_duration > 0.0)) {
    throw DomainError("multi-contact phase has zero duration");
  }
  const double T = duration_fraction * step_duration;
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw DomainError("multi-contact phase has zero duration");
  }
  Eigen::Matrix<double, 6, 6> A;
  A.setZero();
  const double T2 = T * T, T3 = T2 * T, T4 = T3 * T, T5 = T4 * T;
  A(0, 0) = 1;
  A(1, 1) = 1;
  A(2, 2) = 2;
  A.row(3) << 1, T, T2, T3, T4, T5;
  A.row(4) << 0, 1, 2 * T, 3 * T2, 4 * T3, 5 * T4;
  A.row(5) << 0, 0, 2, 6 * T, 12 * T2, 20 * T3;
  const auto lu = A.fullPivLu();

  QuinticSegment seg;
  seg.duration = T;
  for (const auto& b : boundary) {
    Eigen::Matrix<double, 6, 1> rhs;
    rhs << b.entry.p, b.entry.v, b.entry.a, b.exit.p, b.exit.v, b.exit.a;
    const Eigen::Matrix<double, 6, 1> c = lu.solve(rhs);
    seg.coefficients.push_back({c(0), c(1), c(2), c(3), c(4), c(5)});
  }
  return seg;
}

// ---------------------------------------------------------------- stepping

ApexKeyframe progression_map(const ApexKeyframe& apex,
                             const StepParameters& current,
                             const StepControls& u, const StepParameters& next,
                             const ManifoldDescriptor& next_manifold,
                             double dt) {
  StepParameters field = current;
  field.omega = u.omega;
  const PhaseState start{{current.foot.x, apex.xdot_apex}, {}};
  auto on_next = [&](const PhaseState& s) {
    return sigma_apex(s.sagittal, next_manifold);
  };
  if (on_next(start) >= 0.0) {
    throw NoTransition("the apex already lies beyond the next manifold");
  }
  const Crossing switch_point =
      advance_until(start, field, {u.tau_y, 0.0}, dt, on_next);
  const Crossing next_apex = advance_until(
      switch_point.state, next, {}, dt,
      [&](const PhaseState& s) { return s.sagittal.x - next.foot.x; });
  return {next_apex.state.sagittal.xdot, apex_height(next.surface, next.foot)};
}

WalkingPlan build_plan(const TerrainSpec& terrain,
                       std::span<const ApexKeyframe> keyframes,
                       const PlannerOptions& o) {
  WalkingPlan plan;
  plan.terrain = terrain;
  plan.keyframes.assign(keyframes.begin(), keyframes.end());
  plan.manifolds = generate_nominal(terrain, keyframes, o);
  for (const auto& step : terrain.steps) {
    plan.steps.push_back(step_parameters(step, o));
  }
  for (std::size_t q = 0; q + 1 < plan.manifolds.size(); ++q) {
    plan.transitions.push_back(find_transition(plan.manifolds[q], plan.manifolds[q + 1]));
  }

  // Lateral feet: zero lateral velocity at every sagittal apex.
  plan.lateral_start = {0.5 * plan.steps.front().foot.y, 0.0};
  LateralState lat = plan.lateral_start;
  for (std::size_t q = 0; q + 1 < plan.steps.size(); ++q) {
    const auto& tr = plan.transitions[q];
    const auto& cur = plan.steps[q];
    auto& nxt = plan.steps[q + 1];
    const double to_transition =
        -time_to_apex(tr.x_trans, tr.xdot_trans, cur.foot.x, cur.omega);
    lat = propagate_lateral(lat, cur, to_transition, o.dt);
    const double to_apex =
        time_to_apex(tr.x_trans, tr.xdot_trans, nxt.foot.x, nxt.omega);
    nxt.foot.y =
        lateral_foot_search(lat, nxt, to_apex, kLateralFootBounds, 20, 1e-6, o.dt)
            .y_foot;
    lat = propagate_lateral(lat, nxt, to_apex, o.dt);
  }
  return plan;
}

std::vector<PlanSample> simulate_plan(const WalkingPlan& plan, double dt) {
  std::vector<PlanSample> out;
  PhaseState s{{plan.steps.front().foot.x, plan.keyframes.front().xdot_apex},
               plan.lateral_start};
  double t = 0.0;
  auto record = [&](std::size_t q) {
    const auto& p = plan.steps[q];
    out.push_back({t, q, s, sagittal_derivative(s.sagittal, p, 0.0).acceleration,
                   lateral_derivative(s.lateral, p, 0.0).acceleration});
  };
  record(0);
  for (std::size_t q = 0; q < plan.steps.size(); ++q) {
    const auto& p = plan.steps[q];
    const bool last = q + 1 == plan.steps.size();
    auto level = [&](const PhaseState& st) {
      return last ? st.sagittal.x - p.foot.x
                  : sigma_apex(st.sagittal, plan.manifolds[q + 1].descriptor);
    };
    if (last && level(s) >= 0.0) break;
    while (true) {
      const PhaseState next = integrate_step(s, p, {}, dt);
      if (level(next) >= 0.0) {
        const Crossing c = advance_until(s, p, {}, dt, level, 1);
        t += c.t;
        s = c.state;
        record(q);
        if (!last) record(q + 1);  // same state, next field
        break;
      }
      s = next;
      t += dt;
      record(q);
    }
  }
  return out;
}

}  // namespace psl
