#include "psl/run.hpp"

#include <chrono>

#include <json.hpp>

namespace psl {

namespace {

using ordered = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

RunReport run_scenario(const Scenario& s, const ControllerHooks& hooks) {
  RunReport r;
  const auto t0 = Clock::now();
  WalkingPlan plan;
  try {
    const TerrainSpec terrain = s.resolve_terrain();
    const std::vector<ApexKeyframe> keyframes = s.resolve_keyframes(terrain);
    plan = build_plan(terrain, keyframes, s.planner_options());
  } catch (const Error& e) {
    r.timings.plan_s = seconds_since(t0);
    r.error = e.what();
    return r;
  }
  r.timings.plan_s = seconds_since(t0);

  const auto t1 = Clock::now();
  r.trace = run_plan(plan, s.automaton, s.disturbances, hooks);
  r.timings.walk_s = seconds_since(t1);
  r.error = r.trace.error;
  for (const auto& d : r.trace.disturbances) {
    r.kappa.push_back(d.kappa);
    if (d.recovered) ++r.recoveries;
    if (d.replanned) ++r.replans;
  }
  return r;
}

std::string report_json(const RunReport& r) {
  ordered doc;
  doc["steps"] = r.trace.plan.steps.size();
  doc["samples"] = r.trace.records.size();
  ordered transitions = ordered::array();
  for (const auto& t : r.trace.transitions) {
    transitions.push_back({{"from_step", t.from_step},
                           {"t", t.t},
                           {"guard", to_string(t.guard.kind)},
                           {"x", t.at.state.sagittal.x},
                           {"xdot", t.at.state.sagittal.xdot},
                           {"zeta", t.at.zeta}});
  }
  doc["transitions"] = transitions;
  ordered disturbances = ordered::array();
  for (const auto& d : r.trace.disturbances) {
    disturbances.push_back({{"step", d.step},
                            {"t", d.t},
                            {"dxdot", d.impulse.dxdot},
                            {"dydot", d.impulse.dydot},
                            {"pattern", to_string(d.pattern)},
                            {"sigma", d.sigma},
                            {"recoverable", d.recoverable},
                            {"recovered", d.recovered},
                            {"replanned", d.replanned},
                            {"replan_infeasible", d.replan_infeasible},
                            {"new_foot", d.new_foot ? ordered(*d.new_foot) : ordered(nullptr)},
                            {"kappa", d.kappa}});
  }
  doc["disturbances"] = disturbances;
  doc["recoveries"] = r.recoveries;
  doc["replans"] = r.replans;
  doc["error"] = r.error ? ordered(*r.error) : ordered(nullptr);
  return doc.dump(2) + "\n";
}

std::string timings_json(const RunTimings& t) {
  ordered doc{{"plan_s", t.plan_s}, {"walk_s", t.walk_s}};
  return doc.dump(2) + "\n";
}

}  // namespace psl
