// Command line front end: psl_cli <plan|walk|disturb|dp|bundle|terrain>
//   --scenario <path> [--out <dir>] [--seed <u64>] [--dt <s>]
// Exit codes: 0 success, 1 domain or input error, 2 usage error.
// PSL_LOG selects the log level (trace, debug, info, warn, error, off).

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "psl/export.hpp"
#include "psl/run.hpp"
#include "psl/scenario.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string scenario;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void configure_logging() {
  const char* level = std::getenv("PSL_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
}

psl::Scenario load(const Options& o) {
  psl::Scenario s = psl::load_scenario(o.scenario);
  if (o.seed) {
    if (!s.generator) throw UsageError("--seed needs a scenario with a terrain generator");
    s.generator->seed = *o.seed;
  }
  if (o.dt) {
    if (!(*o.dt > 0.0)) throw UsageError("--dt must be positive");
    s.automaton.dt = *o.dt;
  }
  return s;
}

fs::path out_dir(const Options& o) {
  fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw psl::IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  return dir;
}

std::string num(double v) { return fmt::format("{:.16e}", v); }

int cmd_terrain(const Options& o) {
  const psl::Scenario s = load(o);
  const psl::TerrainSpec t = s.resolve_terrain();
  const auto kf = s.resolve_keyframes(t);
  std::string csv = "step,foot_x,foot_y,foot_z,tilt,a,b,xdot_apex,z_apex\n";
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const auto& st = t.steps[i];
    csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", i, num(st.foot.x), num(st.foot.y),
                       num(st.foot.z), num(st.tilt), num(st.surface.a), num(st.surface.b),
                       num(kf[i].xdot_apex), num(kf[i].z_apex));
  }
  psl::write_file(out_dir(o) / "terrain.csv", csv);
  return 0;
}

int cmd_plan(const Options& o) {
  const psl::Scenario s = load(o);
  const psl::TerrainSpec t = s.resolve_terrain();
  const auto kf = s.resolve_keyframes(t);
  const psl::WalkingPlan plan = psl::build_plan(t, kf, s.planner_options());
  const fs::path dir = out_dir(o);

  std::string samples = "t,step,x,xd,y,yd,xdd,ydd\n";
  for (const auto& p : psl::simulate_plan(plan, s.automaton.dt)) {
    samples += fmt::format("{},{},{},{},{},{},{},{}\n", num(p.t), p.step,
                           num(p.state.sagittal.x), num(p.state.sagittal.xdot),
                           num(p.state.lateral.y), num(p.state.lateral.ydot), num(p.xddot),
                           num(p.yddot));
  }
  psl::write_file(dir / "plan.csv", samples);

  std::string manifolds = "step,x,xd\n";
  for (std::size_t q = 0; q < plan.manifolds.size(); ++q) {
    for (const auto& p : plan.manifolds[q].samples) {
      manifolds += fmt::format("{},{},{}\n", q, num(p.x), num(p.xdot));
    }
  }
  psl::write_file(dir / "manifolds.csv", manifolds);

  std::string transitions = "from_step,x_trans,xd_trans,zeta_trans,foot_x,foot_y\n";
  for (std::size_t q = 0; q < plan.transitions.size(); ++q) {
    const auto& tp = plan.transitions[q];
    const auto& next = plan.steps[q + 1].foot;
    transitions += fmt::format("{},{},{},{},{},{}\n", q, num(tp.x_trans), num(tp.xdot_trans),
                               num(tp.zeta_trans), num(next.x), num(next.y));
  }
  psl::write_file(dir / "transitions.csv", transitions);
  return 0;
}

int cmd_walk(const Options& o, bool with_disturbances) {
  psl::Scenario s = load(o);
  if (!with_disturbances) s.disturbances.clear();
  const psl::RunReport r = psl::run_scenario(s);
  const fs::path dir = out_dir(o);
  if (!r.trace.records.empty()) psl::export_trajectory(r.trace, dir / "trajectory.csv");
  psl::write_file(dir / "report.json", psl::report_json(r));
  psl::write_file(dir / "timings.json", psl::timings_json(r.timings));
  if (r.error) {
    spdlog::error("run stopped: {}", *r.error);
    return 1;
  }
  return 0;
}

int cmd_dp(const Options& o) {
  const psl::Scenario s = load(o);
  const psl::PolicyTable table = psl::solve_dp(s.automaton.dp);
  const fs::path dir = out_dir(o);
  psl::export_policy(table, dir / "policy.grid");
  std::string csv = "t,x,xd,sigma,omega,tau_y\n";
  for (const auto& r :
       psl::simulate_recovery(table, s.dp_initial, s.automaton.epsilon, s.automaton.dt)) {
    csv += fmt::format("{},{},{},{},{},{}\n", num(r.t), num(r.state.x), num(r.state.xdot),
                       num(r.sigma), num(r.control.omega), num(r.control.tau_y));
  }
  psl::write_file(dir / "recovery.csv", csv);
  return 0;
}

int cmd_bundle(const Options& o) {
  const psl::Scenario s = load(o);
  const psl::PolicyTable table = psl::solve_dp(s.automaton.dp);
  const psl::RecoverabilityMask mask =
      psl::estimate_recoverability(table, s.automaton.epsilon, s.automaton.dt);
  psl::export_policy(mask, out_dir(o) / "mask.grid");
  spdlog::info("{} of {} cells recoverable", mask.recoverable_count(), mask.cells.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Phase-space planning and push recovery for a prismatic inverted pendulum"};
  app.require_subcommand(1);
  Options opts;

  const auto add_common = [&opts](CLI::App* sub) {
    sub->add_option("--scenario", opts.scenario, "scenario JSON file")->required();
    sub->add_option("--out", opts.out, "output directory");
    sub->add_option("--seed", opts.seed, "terrain generator seed override");
    sub->add_option("--dt", opts.dt, "integration step override [s]");
  };
  CLI::App* plan = app.add_subcommand("plan", "nominal manifolds, transitions and samples");
  CLI::App* walk = app.add_subcommand("walk", "hybrid walking run without disturbances");
  CLI::App* disturb = app.add_subcommand("disturb", "hybrid walking run with the push schedule");
  CLI::App* dp = app.add_subcommand("dp", "solve the recovery DP and simulate the closed loop");
  CLI::App* bundle = app.add_subcommand("bundle", "recoverability mask of the DP policy");
  CLI::App* terrain = app.add_subcommand("terrain", "resolved terrain and apex keyframes");
  for (CLI::App* sub : {plan, walk, disturb, dp, bundle, terrain}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (plan->parsed()) return cmd_plan(opts);
    if (walk->parsed()) return cmd_walk(opts, false);
    if (disturb->parsed()) return cmd_walk(opts, true);
    if (dp->parsed()) return cmd_dp(opts);
    if (bundle->parsed()) return cmd_bundle(opts);
    return cmd_terrain(opts);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const psl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
