#include "psl/scenario.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "psl/errors.hpp"

namespace psl {

using json = nlohmann::json;
using ordered = nlohmann::ordered_json;

namespace {

std::string join(const std::string& path, std::string_view key) {
  return fmt::format("{}/{}", path, key);
}

/// Strict view of a JSON object: unknown keys and wrong types are errors.
class Fields {
 public:
  Fields(const json& j, std::string path, std::initializer_list<std::string_view> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j.is_object()) {
      throw ParseError(path_.empty() ? "/" : path_, "expected an object");
    }
    for (const auto& [key, value] : j.items()) {
      bool known = false;
      for (auto a : allowed) known = known || a == key;
      if (!known) throw ParseError(join(path_, key), "unknown key");
    }
  }

  bool has(std::string_view key) const { return j_.contains(std::string(key)); }
  const json& at(std::string_view key) const { return j_.at(std::string(key)); }
  std::string path(std::string_view key) const { return join(path_, key); }

  double number(std::string_view key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number()) throw ParseError(path(key), "expected a number");
    return v.get<double>();
  }

  double required_number(std::string_view key) const {
    if (!has(key)) throw ParseError(path(key), "missing required field");
    return number(key, 0.0);
  }

  std::uint64_t unsigned_integer(std::string_view key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_unsigned()) {
      throw ParseError(path(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(std::string_view key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) throw ParseError(path(key), "expected true or false");
    return v.get<bool>();
  }

  std::string text(std::string_view key, std::string fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_string()) throw ParseError(path(key), "expected a string");
    return v.get<std::string>();
  }

 private:
  const json& j_;
  std::string path_;
};

template <typename E>
using NameTable = std::vector<std::pair<std::string_view, E>>;

template <typename E>
E parse_enum(const Fields& f, std::string_view key, E fallback,
             const NameTable<E>& names) {
  if (!f.has(key)) return fallback;
  const std::string name = f.text(key, "");
  for (const auto& [n, e] : names) {
    if (n == name) return e;
  }
  std::string options;
  for (const auto& [n, e] : names) {
    options += options.empty() ? "" : ", ";
    options += n;
  }
  throw ParseError(f.path(key), fmt::format("unknown value '{}' (expected {})", name, options));
}

template <typename E>
std::string_view enum_name(E value, const NameTable<E>& names) {
  for (const auto& [n, e] : names) {
    if (e == value) return n;
  }
  return "";
}

const NameTable<GuardKind> kGuards{
    {"position", GuardKind::kPosition},
    {"velocity", GuardKind::kVelocity},
    {"progression", GuardKind::kProgression},
    {"manifold", GuardKind::kManifold}};
const NameTable<ContactModel> kContacts{
    {"instantaneous", ContactModel::kInstantaneous},
    {"multi_contact", ContactModel::kMultiContact}};
const NameTable<IntegrationScheme> kSchemes{
    {"rk4", IntegrationScheme::kRungeKutta4},
    {"constant_acceleration", IntegrationScheme::kConstantAcceleration}};
const NameTable<TriggerKind> kTriggers{
    {"x", TriggerKind::kPosition}, {"zeta", TriggerKind::kProgression}};
const NameTable<SuccessorInterpolation> kInterpolations{{"linear", SuccessorInterpolation::kLinear},
                    {"nearest", SuccessorInterpolation::kNearest}};

const json& array_at(const Fields& f, std::string_view key) {
  const json& v = f.at(key);
  if (!v.is_array()) throw ParseError(f.path(key), "expected an array");
  return v;
}

TerrainOptions parse_generator(const json& j, const std::string& path) {
  Fields f(j, path,
           {"steps", "dh_min", "dh_max", "tilt", "seed", "step_length", "com_height",
            "lateral_offset"});
  TerrainOptions o;
  o.n_steps = f.unsigned_integer("steps", o.n_steps);
  o.dh_min = f.number("dh_min", o.dh_min);
  o.dh_max = f.number("dh_max", o.dh_max);
  o.tilt = f.number("tilt", o.tilt);
  o.seed = f.unsigned_integer("seed", o.seed);
  o.step_length = f.number("step_length", o.step_length);
  o.com_height = f.number("com_height", o.com_height);
  o.lateral_offset = f.number("lateral_offset", o.lateral_offset);
  if (o.n_steps < 1) throw ParseError(f.path("steps"), "need at least one step");
  if (!(o.dh_min > 0.0 && o.dh_max > o.dh_min)) {
    throw ParseError(f.path("dh_max"), "require 0 < dh_min < dh_max");
  }
  return o;
}

TerrainSpec parse_steps(const Fields& parent, std::string_view key) {
  const json& arr = array_at(parent, key);
  TerrainSpec t;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = fmt::format("{}/{}", parent.path(key), i);
    Fields f(arr[i], p, {"foot", "tilt", "surface"});
    TerrainStep step;
    if (!f.has("foot")) throw ParseError(f.path("foot"), "missing required field");
    const json& foot = f.at("foot");
    if (!foot.is_array() || foot.size() != 3) {
      throw ParseError(f.path("foot"), "expected [x, y, z]");
    }
    for (std::size_t k = 0; k < 3; ++k) {
      if (!foot[k].is_number()) {
        throw ParseError(fmt::format("{}/{}", f.path("foot"), k), "expected a number");
      }
    }
    step.foot = {foot[0].get<double>(), foot[1].get<double>(), foot[2].get<double>()};
    step.tilt = f.number("tilt", 0.0);
    if (!f.has("surface")) throw ParseError(f.path("surface"), "missing required field");
    Fields s(f.at("surface"), f.path("surface"), {"a", "b"});
    step.surface = {s.required_number("a"), s.required_number("b")};
    t.steps.push_back(step);
  }
  if (t.steps.empty()) throw ParseError(parent.path(key), "need at least one step");
  try {
    t.validate();
  } catch (const ParameterError& e) {
    throw ParseError(parent.path(key), e.what());
  }
  return t;
}

NodeGrid parse_node_grid(const json& j, const std::string& path, NodeGrid g) {
  Fields f(j, path, {"min", "max", "res"});
  g.min = f.number("min", g.min);
  g.max = f.number("max", g.max);
  g.res = f.number("res", g.res);
  return g;
}

ControlGrid parse_control_grid(const json& j, const std::string& path, ControlGrid g) {
  Fields f(j, path, {"min", "max", "levels"});
  g.min = f.number("min", g.min);
  g.max = f.number("max", g.max);
  g.levels = f.unsigned_integer("levels", g.levels);
  return g;
}

DPConfig parse_dp(const json& j, const std::string& path, SagittalState& initial) {
  Fields f(j, path,
           {"stage", "state", "omega", "tau", "alpha", "beta", "gamma1", "gamma2", "eta",
            "omega_ref", "tau_ref", "x_foot", "xdot_apex", "mass", "gravity",
            "xdot_terminal", "interpolation", "initial"});
  DPConfig c;
  if (f.has("stage")) c.stages = parse_node_grid(f.at("stage"), f.path("stage"), c.stages);
  if (f.has("state")) c.states = parse_node_grid(f.at("state"), f.path("state"), c.states);
  if (f.has("omega")) c.omega = parse_control_grid(f.at("omega"), f.path("omega"), c.omega);
  if (f.has("tau")) c.tau = parse_control_grid(f.at("tau"), f.path("tau"), c.tau);
  c.alpha = f.number("alpha", c.alpha);
  c.beta = f.number("beta", c.beta);
  c.gamma1 = f.number("gamma1", c.gamma1);
  c.gamma2 = f.number("gamma2", c.gamma2);
  c.eta = f.number("eta", c.eta);
  c.omega_ref = f.number("omega_ref", c.omega_ref);
  c.tau_ref = f.number("tau_ref", c.tau_ref);
  c.x_foot = f.number("x_foot", c.x_foot);
  c.xdot_apex = f.number("xdot_apex", c.xdot_apex);
  c.mass = f.number("mass", c.mass);
  c.gravity = f.number("gravity", c.gravity);
  if (f.has("xdot_terminal") && !f.at("xdot_terminal").is_null()) {
    c.xdot_terminal = f.number("xdot_terminal", 0.0);
  }
  c.interpolation = parse_enum(f, "interpolation", c.interpolation, kInterpolations);
  if (f.has("initial")) {
    Fields s(f.at("initial"), f.path("initial"), {"x", "xdot"});
    initial = {s.number("x", initial.x), s.number("xdot", initial.xdot)};
  }
  try {
    c.validate();
  } catch (const ParameterError& e) {
    throw ParseError(path, e.what());
  }
  return c;
}

Disturbance parse_disturbance(const json& j, const std::string& path) {
  Fields f(j, path, {"step", "trigger", "at", "dxdot", "dydot"});
  Disturbance d;
  if (!f.has("step")) throw ParseError(f.path("step"), "missing required field");
  d.step = f.unsigned_integer("step", 0);
  d.trigger = parse_enum(f, "trigger", d.trigger, kTriggers);
  d.at = f.required_number("at");
  d.impulse = {f.number("dxdot", 0.0), f.number("dydot", 0.0)};
  return d;
}

}  // namespace

std::size_t Scenario::step_count() const {
  return generator ? generator->n_steps : terrain->steps.size();
}

TerrainSpec Scenario::resolve_terrain() const {
  return generator ? generate_terrain(*generator) : *terrain;
}

std::vector<ApexKeyframe> Scenario::resolve_keyframes(const TerrainSpec& t) const {
  return keyframes ? *keyframes : keyframes_from_terrain(t, nominal_speed);
}

PlannerOptions Scenario::planner_options() const {
  PlannerOptions o;
  o.dt = automaton.dt;
  o.window = window;
  o.gravity = automaton.dp.gravity;
  o.mass = automaton.dp.mass;
  return o;
}

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("/", fmt::format("malformed JSON ({})", e.what()));
  }
  Fields root(doc, "",
              {"terrain", "keyframes", "nominal_speed", "window", "automaton", "dp",
               "disturbances", "integrator"});
  Scenario s;

  if (!root.has("terrain")) throw ParseError("/terrain", "missing required field");
  Fields terrain(root.at("terrain"), "/terrain", {"generator", "steps"});
  if (terrain.has("generator") == terrain.has("steps")) {
    throw ParseError("/terrain", "give exactly one of 'generator' and 'steps'");
  }
  if (terrain.has("generator")) {
    s.generator = parse_generator(terrain.at("generator"), terrain.path("generator"));
  } else {
    s.terrain = parse_steps(terrain, "steps");
  }

  s.nominal_speed = root.number("nominal_speed", s.nominal_speed);
  s.window = root.number("window", s.window);
  if (!(s.window > 0.0)) throw ParseError("/window", "must be positive");

  if (root.has("keyframes")) {
    const json& arr = array_at(root, "keyframes");
    std::vector<ApexKeyframe> kf;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Fields f(arr[i], fmt::format("/keyframes/{}", i), {"xdot_apex", "z_apex"});
      ApexKeyframe k{f.required_number("xdot_apex"), f.required_number("z_apex")};
      if (!(k.z_apex > 0.0)) throw ParseError(f.path("z_apex"), "must be positive");
      kf.push_back(k);
    }
    if (kf.size() != s.step_count()) {
      throw ParseError("/keyframes", fmt::format("{} keyframes for {} terrain steps",
                                                 kf.size(), s.step_count()));
    }
    s.keyframes = std::move(kf);
  }

  AutomatonConfig& a = s.automaton;
  if (root.has("automaton")) {
    Fields f(root.at("automaton"), "/automaton",
             {"guard", "contact", "duration_fraction", "epsilon", "replan_feet"});
    a.guard = parse_enum(f, "guard", a.guard, kGuards);
    a.contact = parse_enum(f, "contact", a.contact, kContacts);
    a.duration_fraction = f.number("duration_fraction", a.duration_fraction);
    a.epsilon = f.number("epsilon", a.epsilon);
    a.replan_feet = f.boolean("replan_feet", a.replan_feet);
    if (!(a.duration_fraction > 0.0 && a.duration_fraction < 1.0)) {
      throw ParseError(f.path("duration_fraction"), "must lie in (0, 1)");
    }
    if (!(a.epsilon > 0.0)) throw ParseError(f.path("epsilon"), "must be positive");
  }
  if (root.has("dp")) a.dp = parse_dp(root.at("dp"), "/dp", s.dp_initial);
  if (root.has("integrator")) {
    Fields f(root.at("integrator"), "/integrator", {"dt", "scheme"});
    a.dt = f.number("dt", a.dt);
    a.scheme = parse_enum(f, "scheme", a.scheme, kSchemes);
    if (!(a.dt > 0.0)) throw ParseError(f.path("dt"), "must be positive");
  }
  if (root.has("disturbances")) {
    const json& arr = array_at(root, "disturbances");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Disturbance d = parse_disturbance(arr[i], fmt::format("/disturbances/{}", i));
      if (d.step >= s.step_count()) {
        throw ParseError(fmt::format("/disturbances/{}/step", i),
                         fmt::format("no step {} in a {}-step scenario", d.step,
                                     s.step_count()));
      }
      s.disturbances.push_back(d);
    }
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot read scenario '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}#{}", path, e.path()),
                     std::string(e.what()).substr(e.path().size() + 2));
  }
}

std::string serialize_scenario(const Scenario& s) {
  ordered doc;
  if (s.generator) {
    const auto& g = *s.generator;
    doc["terrain"]["generator"] = {{"steps", g.n_steps},
                                   {"dh_min", g.dh_min},
                                   {"dh_max", g.dh_max},
                                   {"tilt", g.tilt},
                                   {"seed", g.seed},
                                   {"step_length", g.step_length},
                                   {"com_height", g.com_height},
                                   {"lateral_offset", g.lateral_offset}};
  } else {
    ordered steps = ordered::array();
    for (const auto& st : s.terrain->steps) {
      steps.push_back({{"foot", {st.foot.x, st.foot.y, st.foot.z}},
                       {"tilt", st.tilt},
                       {"surface", {{"a", st.surface.a}, {"b", st.surface.b}}}});
    }
    doc["terrain"]["steps"] = steps;
  }
  if (s.keyframes) {
    ordered kf = ordered::array();
    for (const auto& k : *s.keyframes) {
      kf.push_back({{"xdot_apex", k.xdot_apex}, {"z_apex", k.z_apex}});
    }
    doc["keyframes"] = kf;
  }
  doc["nominal_speed"] = s.nominal_speed;
  doc["window"] = s.window;
  const auto& a = s.automaton;
  doc["automaton"] = {{"guard", enum_name(a.guard, kGuards)},
                      {"contact", enum_name(a.contact, kContacts)},
                      {"duration_fraction", a.duration_fraction},
                      {"epsilon", a.epsilon},
                      {"replan_feet", a.replan_feet}};
  const auto& c = a.dp;
  ordered dp;
  dp["stage"] = {{"min", c.stages.min}, {"max", c.stages.max}, {"res", c.stages.res}};
  dp["state"] = {{"min", c.states.min}, {"max", c.states.max}, {"res", c.states.res}};
  dp["omega"] = {{"min", c.omega.min}, {"max", c.omega.max}, {"levels", c.omega.levels}};
  dp["tau"] = {{"min", c.tau.min}, {"max", c.tau.max}, {"levels", c.tau.levels}};
  dp["alpha"] = c.alpha;
  dp["beta"] = c.beta;
  dp["gamma1"] = c.gamma1;
  dp["gamma2"] = c.gamma2;
  dp["eta"] = c.eta;
  dp["omega_ref"] = c.omega_ref;
  dp["tau_ref"] = c.tau_ref;
  dp["x_foot"] = c.x_foot;
  dp["xdot_apex"] = c.xdot_apex;
  dp["mass"] = c.mass;
  dp["gravity"] = c.gravity;
  dp["xdot_terminal"] = c.xdot_terminal ? ordered(*c.xdot_terminal) : ordered(nullptr);
  dp["interpolation"] = enum_name(c.interpolation, kInterpolations);
  dp["initial"] = {{"x", s.dp_initial.x}, {"xdot", s.dp_initial.xdot}};
  doc["dp"] = dp;
  ordered dist = ordered::array();
  for (const auto& d : s.disturbances) {
    dist.push_back({{"step", d.step},
                    {"trigger", enum_name(d.trigger, kTriggers)},
                    {"at", d.at},
                    {"dxdot", d.impulse.dxdot},
                    {"dydot", d.impulse.dydot}});
  }
  doc["disturbances"] = dist;
  doc["integrator"] = {{"dt", a.dt}, {"scheme", enum_name(a.scheme, kSchemes)}};
  return doc.dump(2) + "\n";
}

}  // namespace psl
