#include "psl/export.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "psl/errors.hpp"

namespace psl {

void write_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace {

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string shortest(double v) { return fmt::format("{}", v); }

}  // namespace

std::string trajectory_csv(const HybridTrace& trace) {
  if (trace.records.empty()) {
    throw ParameterError("cannot export an empty trace");
  }
  std::string out = "t,zeta,mode,x,xd,y,yd,z,sigma,omega,tau_y,event\n";
  for (const auto& r : trace.records) {
    std::string events;
    for (const auto& e : r.events) {
      if (!events.empty()) events += ';';
      events += e;
    }
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", sci(r.t), sci(r.zeta),
                       to_string(r.mode), sci(r.state.sagittal.x),
                       sci(r.state.sagittal.xdot), sci(r.state.lateral.y),
                       sci(r.state.lateral.ydot), sci(r.z), sci(r.sigma),
                       sci(r.control.omega), sci(r.control.tau_y), events);
  }
  return out;
}

void export_trajectory(const HybridTrace& trace, const std::filesystem::path& path) {
  write_file(path, trajectory_csv(trace));
}

namespace {

constexpr std::string_view kMagic = "# psl-grid v1";

void grid_header(std::string& out, std::string_view kind, const NodeGrid& stages,
                 const NodeGrid& states) {
  out += fmt::format("{}\nkind {}\n", kMagic, kind);
  out += fmt::format("stage_min {}\nstage_max {}\nstage_res {}\n", shortest(stages.min),
                     shortest(stages.max), shortest(stages.res));
  out += fmt::format("state_min {}\nstate_max {}\nstate_res {}\n", shortest(states.min),
                     shortest(states.max), shortest(states.res));
  out += fmt::format("stages {}\nstates {}\n", stages.count(), states.count());
}

std::string_view interpolation_name(SuccessorInterpolation i) {
  return i == SuccessorInterpolation::kNearest ? "nearest" : "linear";
}

/// Header lines up to and including "fields", then the body lines.
struct GridText {
  std::map<std::string, std::string> header;
  std::vector<std::string> body;

  const std::string& get(const std::string& key) const {
    const auto it = header.find(key);
    if (it == header.end()) throw ParseError(key, "missing grid header field");
    return it->second;
  }
  double number(const std::string& key) const {
    const std::string& v = get(key);
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
      throw ParseError(key, fmt::format("'{}' is not a number", v));
    }
    return out;
  }
  std::size_t count(const std::string& key) const {
    const std::string& v = get(key);
    std::size_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
      throw ParseError(key, fmt::format("'{}' is not a count", v));
    }
    return out;
  }
};

GridText split_grid(std::string_view text, std::string_view kind) {
  GridText g;
  std::size_t pos = 0;
  bool in_body = false;
  bool first = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    if (first) {
      if (line != kMagic) throw ParseError("header", "not a psl grid file");
      first = false;
      continue;
    }
    if (in_body) {
      g.body.push_back(line);
      continue;
    }
    const auto space = line.find(' ');
    if (space == std::string::npos) {
      throw ParseError("header", fmt::format("malformed line '{}'", line));
    }
    const std::string key = line.substr(0, space);
    g.header[key] = line.substr(space + 1);
    if (key == "fields") in_body = true;
  }
  if (first) throw ParseError("header", "empty grid file");
  if (g.get("kind") != kind) {
    throw ParseError("kind", fmt::format("expected a {} grid, found {}", kind, g.get("kind")));
  }
  return g;
}

std::vector<double> parse_numbers(const std::string& line, std::size_t row) {
  std::vector<double> out;
  const char* p = line.data();
  const char* end = line.data() + line.size();
  while (p < end) {
    if (*p == ' ') {
      ++p;
      continue;
    }
    double v = 0.0;
    const auto res = std::from_chars(p, end, v);
    if (res.ec != std::errc()) {
      throw ParseError(fmt::format("row {}", row), "malformed value");
    }
    out.push_back(v);
    p = res.ptr;
  }
  return out;
}

void check_grid(const GridText& g, const NodeGrid& stages, const NodeGrid& states) {
  if (g.count("stages") != stages.count() || g.count("states") != states.count()) {
    throw ParseError("stages", "node counts disagree with the ranges");
  }
}

}  // namespace

std::string policy_grid(const PolicyTable& table) {
  const DPConfig& c = table.config;
  std::string out;
  grid_header(out, "policy", c.stages, c.states);
  out += fmt::format("omega_min {}\nomega_max {}\nomega_levels {}\n", shortest(c.omega.min),
                     shortest(c.omega.max), c.omega.levels);
  out += fmt::format("tau_min {}\ntau_max {}\ntau_levels {}\n", shortest(c.tau.min),
                     shortest(c.tau.max), c.tau.levels);
  out += fmt::format(
      "alpha {}\nbeta {}\ngamma1 {}\ngamma2 {}\neta {}\nomega_ref {}\ntau_ref {}\n",
      shortest(c.alpha), shortest(c.beta), shortest(c.gamma1), shortest(c.gamma2),
      shortest(c.eta), shortest(c.omega_ref), shortest(c.tau_ref));
  out += fmt::format("x_foot {}\nxdot_apex {}\nmass {}\ngravity {}\n", shortest(c.x_foot),
                     shortest(c.xdot_apex), shortest(c.mass), shortest(c.gravity));
  out += fmt::format("xdot_terminal {}\n",
                     c.xdot_terminal ? shortest(*c.xdot_terminal) : std::string("none"));
  out += fmt::format("interpolation {}\n", interpolation_name(c.interpolation));
  out += "fields omega tau_y cost\n";
  for (std::size_t k = 0; k < table.cost.size(); ++k) {
    out += fmt::format("{} {} {}\n", shortest(table.omega[k]), shortest(table.tau[k]),
                       shortest(table.cost[k]));
  }
  return out;
}

std::string mask_grid(const RecoverabilityMask& mask) {
  std::string out;
  grid_header(out, "mask", mask.stages, mask.states);
  out += fmt::format("epsilon {}\n", shortest(mask.epsilon));
  out += "fields recoverable\n";
  const std::size_t n = mask.state_count();
  for (std::size_t i = 0; i < mask.stage_count(); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out += mask.at(i, j) ? '1' : '0';
      out += j + 1 == n ? '\n' : ' ';
    }
  }
  return out;
}

void export_policy(const PolicyTable& table, const std::filesystem::path& path) {
  write_file(path, policy_grid(table));
}

void export_policy(const RecoverabilityMask& mask, const std::filesystem::path& path) {
  write_file(path, mask_grid(mask));
}

PolicyTable parse_policy_grid(std::string_view text) {
  const GridText g = split_grid(text, "policy");
  PolicyTable t;
  DPConfig& c = t.config;
  c.stages = {g.number("stage_min"), g.number("stage_max"), g.number("stage_res")};
  c.states = {g.number("state_min"), g.number("state_max"), g.number("state_res")};
  c.omega = {g.number("omega_min"), g.number("omega_max"), g.count("omega_levels")};
  c.tau = {g.number("tau_min"), g.number("tau_max"), g.count("tau_levels")};
  c.alpha = g.number("alpha");
  c.beta = g.number("beta");
  c.gamma1 = g.number("gamma1");
  c.gamma2 = g.number("gamma2");
  c.eta = g.number("eta");
  c.omega_ref = g.number("omega_ref");
  c.tau_ref = g.number("tau_ref");
  c.x_foot = g.number("x_foot");
  c.xdot_apex = g.number("xdot_apex");
  c.mass = g.number("mass");
  c.gravity = g.number("gravity");
  if (g.get("xdot_terminal") != "none") c.xdot_terminal = g.number("xdot_terminal");
  const std::string& interp = g.get("interpolation");
  if (interp == "nearest") {
    c.interpolation = SuccessorInterpolation::kNearest;
  } else if (interp != "linear") {
    throw ParseError("interpolation", fmt::format("unknown value '{}'", interp));
  }
  if (g.get("fields") != "omega tau_y cost") {
    throw ParseError("fields", "expected 'omega tau_y cost'");
  }
  check_grid(g, c.stages, c.states);
  const std::size_t cells = c.stages.count() * c.states.count();
  if (g.body.size() != cells) {
    throw ParseError("body", fmt::format("{} rows for {} cells", g.body.size(), cells));
  }
  for (std::size_t k = 0; k < cells; ++k) {
    const std::vector<double> v = parse_numbers(g.body[k], k);
    if (v.size() != 3) throw ParseError(fmt::format("row {}", k), "expected three values");
    t.omega.push_back(v[0]);
    t.tau.push_back(v[1]);
    t.cost.push_back(v[2]);
  }
  return t;
}

RecoverabilityMask parse_mask_grid(std::string_view text) {
  const GridText g = split_grid(text, "mask");
  RecoverabilityMask m;
  m.stages = {g.number("stage_min"), g.number("stage_max"), g.number("stage_res")};
  m.states = {g.number("state_min"), g.number("state_max"), g.number("state_res")};
  m.epsilon = g.number("epsilon");
  if (g.get("fields") != "recoverable") {
    throw ParseError("fields", "expected 'recoverable'");
  }
  check_grid(g, m.stages, m.states);
  if (g.body.size() != m.stage_count()) {
    throw ParseError("body", fmt::format("{} rows for {} stages", g.body.size(),
                                         m.stage_count()));
  }
  for (std::size_t i = 0; i < g.body.size(); ++i) {
    const std::string& line = g.body[i];
    std::size_t n = 0;
    for (std::size_t k = 0; k < line.size(); ++k) {
      const char ch = line[k];
      if (k % 2 == 1) {
        if (ch != ' ') throw ParseError(fmt::format("row {}", i), "malformed row");
        continue;
      }
      if (ch != '0' && ch != '1') throw ParseError(fmt::format("row {}", i), "expected 0 or 1");
      m.cells.push_back(ch == '1' ? 1 : 0);
      ++n;
    }
    if (n != m.state_count()) {
      throw ParseError(fmt::format("row {}", i), fmt::format("{} cells, expected {}", n,
                                                             m.state_count()));
    }
  }
  return m;
}

PolicyTable import_policy(const std::filesystem::path& path) {
  return parse_policy_grid(read_file(path));
}

RecoverabilityMask import_mask(const std::filesystem::path& path) {
  return parse_mask_grid(read_file(path));
}

}  // namespace psl
