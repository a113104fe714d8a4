#pragma once

#include <optional>
#include <string>
#include <vector>

#include "psl/scenario.hpp"
#include "psl/walker.hpp"

namespace psl {

struct RunTimings {
  double plan_s = 0.0;
  double walk_s = 0.0;
};

struct RunReport {
  HybridTrace trace;  // trace.transitions holds one record per step boundary
  std::vector<double> kappa;  // one per disturbance
  std::size_t recoveries = 0;  // disturbances that returned to the bundle
  std::size_t replans = 0;
  RunTimings timings;
  std::optional<std::string> error;
};

/// Builds the plan and runs the walking loop. Library errors end up in
/// RunReport::error instead of propagating.
RunReport run_scenario(const Scenario& s, const ControllerHooks& hooks = {});

/// Deterministic JSON summary. Wall-clock timings are kept out of it so that
/// identical runs give identical text; see timings_json.
std::string report_json(const RunReport& r);
std::string timings_json(const RunTimings& t);

}  // namespace psl
