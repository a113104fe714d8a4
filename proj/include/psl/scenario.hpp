#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psl/controller.hpp"
#include "psl/planner.hpp"
#include "psl/walker.hpp"

namespace psl {

/// Everything one run needs. Exactly one of `generator` and `terrain` is set.
struct Scenario {
  std::optional<TerrainOptions> generator;
  std::optional<TerrainSpec> terrain;
  std::optional<std::vector<ApexKeyframe>> keyframes;  // derived when absent
  double nominal_speed = 0.6;
  double window = 0.6;
  AutomatonConfig automaton;
  SagittalState dp_initial{1.1, 0.7};
  std::vector<Disturbance> disturbances;

  std::size_t step_count() const;
  /// The terrain, generated if needed.
  TerrainSpec resolve_terrain() const;
  std::vector<ApexKeyframe> resolve_keyframes(const TerrainSpec& terrain) const;
  PlannerOptions planner_options() const;

  bool operator==(const Scenario&) const = default;
};

/// Parses and validates a JSON scenario document. Errors name the offending
/// field as a JSON pointer.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);

/// Canonical JSON with every field spelled out.
std::string serialize_scenario(const Scenario& s);

}  // namespace psl
