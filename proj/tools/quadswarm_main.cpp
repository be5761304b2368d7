#include "quadswarm/config.hpp"
#include "quadswarm/range_bounds.hpp"
#include "quadswarm/range_oracle.hpp"
#include "quadswarm/sim.hpp"
#include "quadswarm/trace_io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace qs = quadswarm;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitGeneration = 3;
constexpr int kExitGains = 4;

std::string utc_now() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string regime;
  int parallel = 2;
};

qs::ScenarioConfig load_scenario(const CommonArgs& args, qs::ConfigMap* map_out = nullptr) {
  qs::ConfigMap map;
  if (!args.config_path.empty()) map = qs::load_config_file(args.config_path);
  qs::apply_env_overrides(map);
  qs::ScenarioConfig cfg = qs::scenario_from_config(map);
  if (args.seed_set) cfg.seed = args.seed;
  if (map_out) *map_out = map;
  return cfg;
}

qs::RangeBoundInputs agent_pair_inputs(const qs::ScenarioConfig& cfg) {
  qs::RangeBoundInputs in;
  in.gains = cfg.gains;
  in.geom = {cfg.margins.d_s, cfg.params.radius, cfg.params.radius};
  in.a_max_i = cfg.params.a_max;
  in.v_rel_max = 2.0 * cfg.params.v_max;
  return in;
}

qs::RangeBoundInputs obstacle_pair_inputs(const qs::ScenarioConfig& cfg, double r_o) {
  qs::RangeBoundInputs in;
  in.gains = cfg.gains;
  in.geom = {cfg.margins.d_so, cfg.params.radius, r_o};
  in.a_max_i = cfg.params.a_max;
  in.v_rel_max = cfg.params.v_max;  // obstacles are static
  return in;
}

void apply_regime(qs::ScenarioConfig& cfg, const std::string& regime) {
  if (regime.empty()) return;
  const double inf = std::numeric_limits<double>::infinity();
  if (regime == "inf") {
    cfg.r_dd = inf;
    cfg.r_ddo = inf;
  } else if (regime == "nonconservative") {
    cfg.r_dd = qs::discretize_bound(qs::nonconservative_bound(agent_pair_inputs(cfg)).bound,
                                    cfg.control_dt, 2.0 * cfg.params.v_max);
    cfg.r_ddo = qs::discretize_bound(
        qs::nonconservative_bound(obstacle_pair_inputs(cfg, cfg.r_o_max)).bound,
        cfg.control_dt, cfg.params.v_max);
  } else if (regime == "conservative") {
    cfg.r_dd = qs::discretize_bound(qs::conservative_bound(agent_pair_inputs(cfg)).bound,
                                    cfg.control_dt, 2.0 * cfg.params.v_max);
    cfg.r_ddo = qs::discretize_bound(
        qs::conservative_bound(obstacle_pair_inputs(cfg, cfg.r_o_max)).bound,
        cfg.control_dt, cfg.params.v_max);
  } else if (regime == "r2.0") {
    cfg.r_dd = 2.0;
    cfg.r_ddo = 2.0;
  } else if (regime == "restrictive") {
    cfg.r_dd = 1.0;
    cfg.r_ddo = 1.5;
  } else {
    throw qs::ConfigError("unknown regime '" + regime +
                          "' (expected inf|nonconservative|conservative|r2.0|restrictive)");
  }
}

void write_manifest_file(const CommonArgs& args, const std::string& command,
                         const qs::ScenarioConfig& cfg) {
  if (args.out_dir.empty()) return;
  fs::create_directories(args.out_dir);
  qs::RunManifest manifest;
  manifest.command = command;
  manifest.config_path = args.config_path;
  manifest.out_dir = args.out_dir;
  manifest.seed = cfg.seed;
  manifest.created_utc = utc_now();
  manifest.resolved_config = qs::flatten_scenario(cfg);
  std::ofstream f(fs::path(args.out_dir) / "manifest.json");
  qs::write_manifest(manifest, f);
}

void print_bound_block(const char* label, const qs::RangeBoundResult& res,
                       double dt, double v_rel_max) {
  std::printf("  %s:\n", label);
  std::printf("    condition (i) threshold:   %.4f m\n", res.threshold_i);
  if (res.threshold_ii)
    std::printf("    condition (ii) threshold:  %.4f m\n", *res.threshold_ii);
  else
    std::printf("    condition (ii) threshold:  none (holds for every range)\n");
  std::printf("    condition (iii) threshold: %.4f m\n", res.threshold_iii);
  std::printf("    bound (max combination):   %.4f m\n", res.bound);
  std::printf("    literal min combination:   %.4f m (diagnostic)\n", res.literal_min);
  std::printf("    discretized (+dt*v_rel):   %.4f m\n",
              qs::discretize_bound(res.bound, dt, v_rel_max));
}

int cmd_bounds(const CommonArgs& args) {
  const qs::ScenarioConfig cfg = load_scenario(args);
  const qs::RangeBoundInputs agent_in = agent_pair_inputs(cfg);
  const qs::RangeBoundInputs obs_in = obstacle_pair_inputs(cfg, cfg.r_o_max);

  std::printf("detection range bounds (alpha1=%.3g alpha2=%.3g a_max=%.3g v_max=%.3g dt=%.3g)\n",
              cfg.gains.alpha1, cfg.gains.alpha2, cfg.params.a_max, cfg.params.v_max,
              cfg.control_dt);
  std::printf("agent-agent (d_s=%.3g, 2 r_q=%.3g, v_rel_max=%.3g):\n", cfg.margins.d_s,
              2.0 * cfg.params.radius, agent_in.v_rel_max);
  print_bound_block("conservative", qs::conservative_bound(agent_in), cfg.control_dt,
                    agent_in.v_rel_max);
  print_bound_block("non-conservative", qs::nonconservative_bound(agent_in),
                    cfg.control_dt, agent_in.v_rel_max);
  std::printf("agent-obstacle (d_so=%.3g, r_q=%.3g, r_o=%.3g, v_rel_max=%.3g):\n",
              cfg.margins.d_so, cfg.params.radius, cfg.r_o_max, obs_in.v_rel_max);
  print_bound_block("conservative", qs::conservative_bound(obs_in), cfg.control_dt,
                    obs_in.v_rel_max);
  print_bound_block("non-conservative", qs::nonconservative_bound(obs_in),
                    cfg.control_dt, obs_in.v_rel_max);

  write_manifest_file(args, "bounds", cfg);
  return kExitOk;
}

int cmd_validate_gains(const CommonArgs& args) {
  qs::ConfigMap map;
  if (!args.config_path.empty()) map = qs::load_config_file(args.config_path);
  qs::apply_env_overrides(map);
  const double alpha1 = qs::get_double(map, "gains.alpha1", 36.0);
  const double alpha2 = qs::get_double(map, "gains.alpha2", 22.0);

  const qs::PoleCheck check = qs::check_poles(alpha1, alpha2);
  std::printf("gains alpha1=%.6g alpha2=%.6g\n", alpha1, alpha2);
  if (!check.ok()) {
    std::printf("INVALID: %s\n", check.message.c_str());
    return kExitGains;
  }
  std::printf("valid: poles p1=%.4f p2=%.4f (real, positive)\n", check.p1, check.p2);

  // Initial-condition membership for the configured world.
  qs::ScenarioConfig cfg = load_scenario(args);
  const qs::World world = qs::generate_scenario(cfg);
  bool all_ok = true;
  for (int i = 0; i < cfg.n_agents; ++i) {
    for (int j = i + 1; j < cfg.n_agents; ++j) {
      const qs::RelativeState rel = qs::RelativeState::between(
          world.states[i].p, world.states[i].v, world.states[j].p, world.states[j].v);
      const qs::SafetyGeometry geom{cfg.margins.d_s, cfg.params.radius,
                                    cfg.params.radius};
      const auto rep = qs::validate_initial_conditions(rel, geom, cfg.gains);
      const bool boundary = rep.ok() && (rep.nu0 < 1e-9 || rep.nu1 < 1e-9);
      std::printf("  pair (%d,%d): nu0=%.4f nu1=%.4f -> %s%s\n", i, j, rep.nu0, rep.nu1,
                  rep.ok() ? "in-set" : "VIOLATED",
                  boundary ? " (boundary membership)" : "");
      all_ok = all_ok && rep.ok();
    }
    for (const qs::Obstacle& ob : world.obstacles) {
      const qs::RelativeState rel = qs::RelativeState::between(
          world.states[i].p, world.states[i].v, ob.p, Eigen::Vector3d::Zero());
      const qs::SafetyGeometry geom{cfg.margins.d_so, cfg.params.radius, ob.radius};
      const auto rep = qs::validate_initial_conditions(rel, geom, cfg.gains);
      if (!rep.ok()) {
        std::printf("  pair (%d,obstacle %d): nu0=%.4f nu1=%.4f -> VIOLATED\n", i, ob.id,
                    rep.nu0, rep.nu1);
        all_ok = false;
      }
    }
  }
  std::printf("initial conditions: %s\n", all_ok ? "all pairs in-set" : "violations found");
  write_manifest_file(args, "validate-gains", cfg);
  return kExitOk;
}

int cmd_fig3(const CommonArgs& args) {
  qs::ConfigMap map;
  qs::ScenarioConfig cfg = load_scenario(args, &map);
  const std::vector<double> v_list = qs::parse_double_list(
      qs::get_string(map, "fig3.v_max_list", "0.5, 1.0, 1.5, 2.0"));
  const double tolerance = qs::get_double(map, "fig3.tolerance", 0.05);
  const double leg_length = qs::get_double(map, "fig3.leg_length", 15.0);

  std::vector<qs::Fig3Point> points(v_list.size());
  std::vector<qs::BoundCurvePoint> curve(v_list.size());
  for (std::size_t k = 0; k < v_list.size(); ++k) {
    const double v = v_list[k];
    qs::ScenarioConfig probe_cfg = cfg;
    probe_cfg.params.v_max = v;
    const qs::RangeBoundInputs in = agent_pair_inputs(probe_cfg);
    const double cons = qs::conservative_bound(in).bound;
    const double noncons = qs::nonconservative_bound(in).bound;

    qs::OracleProblem problem;
    problem.base = cfg;
    problem.v_max = v;
    problem.tolerance = tolerance;
    problem.leg_length = leg_length;
    const qs::OracleResult oracle = qs::min_range_oracle(problem);

    points[k] = {v, qs::discretize_bound(cons, cfg.control_dt, in.v_rel_max),
                 qs::discretize_bound(noncons, cfg.control_dt, in.v_rel_max),
                 oracle.min_safe_range};
    curve[k] = {v, cons, noncons,
                qs::discretize_bound(noncons, cfg.control_dt, in.v_rel_max),
                oracle.min_safe_range};
    std::printf("v_max=%.2f: conservative=%.3f nonconservative=%.3f oracle=%.3f (%d probes)\n",
                v, points[k].conservative_discrete, points[k].nonconservative_discrete,
                oracle.min_safe_range, oracle.probes);
  }

  if (!args.out_dir.empty()) {
    fs::create_directories(args.out_dir);
    std::ofstream f(fs::path(args.out_dir) / "fig3.csv");
    qs::write_fig3_csv(points, f);
    std::ofstream g(fs::path(args.out_dir) / "bound_curve.csv");
    qs::write_bound_curve_csv(curve, g);
  }
  write_manifest_file(args, "fig3", cfg);
  return kExitOk;
}

int cmd_sweep(const CommonArgs& args) {
  qs::ConfigMap map;
  qs::ScenarioConfig cfg = load_scenario(args, &map);

  const std::vector<int> agents =
      qs::parse_int_list(qs::get_string(map, "sweep.agents_list", "2, 5, 10"));
  const std::vector<int> obstacles =
      qs::parse_int_list(qs::get_string(map, "sweep.obstacles_list", "0, 5, 10, 20"));
  const int n_seeds = qs::get_int(map, "sweep.n_seeds", 10);
  const std::uint64_t base_seed = qs::get_u64(map, "sweep.base_seed", cfg.seed);
  std::vector<std::string> regime_names;
  {
    std::stringstream ss(qs::get_string(map, "sweep.regimes",
                                        "inf, nonconservative, r2.0, restrictive"));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b != std::string::npos) regime_names.push_back(item.substr(b, e - b + 1));
    }
  }
  if (!args.regime.empty()) regime_names = {args.regime};

  std::vector<qs::SweepCell> cells;
  for (int n : agents)
    for (int no : obstacles) cells.push_back({n, no});

  std::vector<qs::RegimeSpec> regimes;
  for (const std::string& name : regime_names) {
    qs::ScenarioConfig tmp = cfg;
    apply_regime(tmp, name);
    regimes.push_back({name, tmp.r_dd, tmp.r_ddo});
  }

  std::vector<std::uint64_t> seeds;
  for (int s = 0; s < n_seeds; ++s) seeds.push_back(base_seed + s);

  const auto rows = qs::sweep_campaign(cfg, cells, regimes, seeds, args.parallel);
  qs::write_sweep_csv(rows, std::cout);
  if (!args.out_dir.empty()) {
    fs::create_directories(args.out_dir);
    std::ofstream f(fs::path(args.out_dir) / "sweep.csv");
    qs::write_sweep_csv(rows, f);
  }
  write_manifest_file(args, "sweep", cfg);
  return kExitOk;
}

int cmd_simulate(const CommonArgs& args) {
  qs::ScenarioConfig cfg = load_scenario(args);
  apply_regime(cfg, args.regime);

  const qs::Simulator::RunResult result = qs::run_scenario(cfg);
  std::printf("simulated %.1f s, %zu steps, %s\n", result.end_time,
              result.trace.steps.size(),
              result.all_reached ? "all goals reached" : "duration limit hit");
  std::printf("violations: %d (agent-agent %zu, agent-obstacle %zu)\n",
              result.violations.total(), result.violations.agent_agent.size(),
              result.violations.agent_obstacle.size());
  std::printf("trace hash: %016llx\n",
              static_cast<unsigned long long>(result.trace.hash()));

  if (!args.out_dir.empty()) {
    fs::create_directories(args.out_dir);
    {
      std::ofstream f(fs::path(args.out_dir) / "trace.ndjson");
      qs::write_trace_ndjson(result.trace, f);
    }
    {
      std::ofstream f(fs::path(args.out_dir) / "distances.csv");
      qs::write_distances_csv(result.trace, f);
    }
    {
      std::ofstream f(fs::path(args.out_dir) / "violations.csv");
      qs::write_violations_csv(result.violations, f);
    }
  }
  write_manifest_file(args, "simulate", cfg);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decentralized safe multi-quadrotor NMPC toolkit"};
  app.require_subcommand(1);

  CommonArgs args;
  const auto add_common = [&](CLI::App* cmd, bool with_regime = false) {
    cmd->add_option("--config", args.config_path, "INI-style config file");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "seed override")
        ->each([&](const std::string&) { args.seed_set = true; });
    cmd->add_option("--parallel", args.parallel, "worker threads for campaign cells");
    if (with_regime)
      cmd->add_option("--regime", args.regime,
                      "detection regime: inf|nonconservative|conservative|r2.0|restrictive");
  };

  CLI::App* bounds = app.add_subcommand("bounds", "closed-form detection range bounds");
  add_common(bounds);
  CLI::App* gains = app.add_subcommand("validate-gains", "pole and initial-set checks");
  add_common(gains);
  CLI::App* fig3 = app.add_subcommand("fig3", "bisection oracle vs theory curves");
  add_common(fig3);
  CLI::App* sweep = app.add_subcommand("sweep", "randomized violation campaign");
  add_common(sweep, true);
  CLI::App* simulate = app.add_subcommand("simulate", "single scenario rollout");
  add_common(simulate, true);

  try {
    app.parse(argc, argv);
    if (bounds->parsed()) return cmd_bounds(args);
    if (gains->parsed()) return cmd_validate_gains(args);
    if (fig3->parsed()) return cmd_fig3(args);
    if (sweep->parsed()) return cmd_sweep(args);
    if (simulate->parsed()) return cmd_simulate(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  } catch (const qs::InvalidGainsError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitGains;
  } catch (const qs::GenerationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitGeneration;
  } catch (const qs::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
