#include "quadswarm/trace_io.hpp"

#include <json.hpp>

#include <cstdio>
#include <ostream>

namespace quadswarm {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

json vec3_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

json state_json(const QuadState& s) {
  return json{{"p", vec3_json(s.p)},
              {"v", vec3_json(s.v)},
              {"q", json::array({s.q.w(), s.q.x(), s.q.y(), s.q.z()})},
              {"w", vec3_json(s.w)}};
}

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::solved: return "solved";
    case SolveStatus::max_iters: return "max_iters";
    case SolveStatus::infeasible_qp: return "infeasible_qp";
  }
  return "unknown";
}

json config_json(const ScenarioConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["n_agents"] = cfg.n_agents;
  j["n_obstacles"] = cfg.n_obstacles;
  j["env_min"] = vec3_json(cfg.env_min);
  j["env_max"] = vec3_json(cfg.env_max);
  j["r_o_min"] = cfg.r_o_min;
  j["r_o_max"] = cfg.r_o_max;
  j["r_dd"] = std::isfinite(cfg.r_dd) ? json(cfg.r_dd) : json("inf");
  j["r_ddo"] = std::isfinite(cfg.r_ddo) ? json(cfg.r_ddo) : json("inf");
  j["d_s"] = cfg.margins.d_s;
  j["d_so"] = cfg.margins.d_so;
  j["alpha1"] = cfg.gains.alpha1;
  j["alpha2"] = cfg.gains.alpha2;
  j["v_max"] = cfg.params.v_max;
  j["a_max"] = cfg.params.a_max;
  j["radius"] = cfg.params.radius;
  j["sim_duration"] = cfg.sim_duration;
  j["control_dt"] = cfg.control_dt;
  j["plant_substeps"] = cfg.plant_substeps;
  j["back_and_forth_cycles"] = cfg.back_and_forth_cycles;
  j["horizon"] = cfg.ocp.horizon;
  j["ocp_dt"] = cfg.ocp.dt;
  j["rti"] = cfg.ocp.rti;
  return j;
}

}  // namespace

void write_trace_ndjson(const SimTrace& trace, std::ostream& os) {
  json meta;
  meta["schema_version"] = trace.schema_version;
  meta["config"] = config_json(trace.config);
  json obstacles = json::array();
  for (const Obstacle& ob : trace.world.obstacles)
    obstacles.push_back(json{{"id", ob.id}, {"p", vec3_json(ob.p)}, {"radius", ob.radius}});
  meta["obstacles"] = obstacles;
  json goals = json::array();
  for (const Eigen::Vector3d& g : trace.world.goals) goals.push_back(vec3_json(g));
  meta["goals"] = goals;
  meta["trace_hash"] = trace.hash();
  os << meta.dump() << "\n";

  for (const StepRecord& rec : trace.steps) {
    json step;
    step["t"] = rec.t;
    json agents = json::array();
    for (const AgentRecord& ar : rec.agents) {
      json a = state_json(ar.state);
      a["u"] = json::array({ar.cmd.u(0), ar.cmd.u(1), ar.cmd.u(2), ar.cmd.u(3)});
      a["neighbors"] = ar.agent_neighbors;
      a["obstacle_neighbors"] = ar.obstacle_neighbors;
      a["solver"] = json{{"sqp_iterations", ar.stats.sqp_iterations},
                         {"kkt_residual", ar.stats.kkt_residual},
                         {"max_slack", ar.stats.max_slack},
                         {"wall_ms", ar.stats.wall_ms},
                         {"status", status_name(ar.stats.status)},
                         {"held_previous_command", ar.stats.held_previous_command}};
      agents.push_back(a);
    }
    step["agents"] = agents;
    step["agent_agent_distance"] = rec.agent_agent_distance;
    step["agent_obstacle_distance"] = rec.agent_obstacle_distance;
    os << step.dump() << "\n";
  }
}

void write_distances_csv(const SimTrace& trace, std::ostream& os) {
  os << "# schema_version=" << kCsvSchemaVersion << "\n";
  os << "step,t,kind,i,j,distance\n";
  const int n = trace.config.n_agents;
  const std::size_t n_obs = trace.world.obstacles.size();
  for (std::size_t s = 0; s < trace.steps.size(); ++s) {
    const StepRecord& rec = trace.steps[s];
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j, ++idx) {
        os << s << "," << format_double(rec.t) << ",agent," << i << "," << j << ","
           << format_double(rec.agent_agent_distance[idx]) << "\n";
      }
    }
    for (int i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n_obs; ++j) {
        os << s << "," << format_double(rec.t) << ",obstacle," << i << "," << j << ","
           << format_double(rec.agent_obstacle_distance[i * n_obs + j]) << "\n";
      }
    }
  }
}

void write_violations_csv(const ViolationReport& report, std::ostream& os) {
  os << "# schema_version=" << kCsvSchemaVersion << "\n";
  os << "kind,a,b,onset_time,min_distance\n";
  for (const ViolationEvent& ev : report.agent_agent)
    os << "agent_agent," << ev.a << "," << ev.b << "," << format_double(ev.onset_time)
       << "," << format_double(ev.min_distance) << "\n";
  for (const ViolationEvent& ev : report.agent_obstacle)
    os << "agent_obstacle," << ev.a << "," << ev.b << ","
       << format_double(ev.onset_time) << "," << format_double(ev.min_distance) << "\n";
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
  os << "# schema_version=" << kCsvSchemaVersion << "\n";
  os << "n_agents,n_obstacles,regime,runs,total_violations,agent_agent,"
        "agent_obstacle,generation_failures,runs_all_reached\n";
  for (const SweepRow& row : rows) {
    os << row.cell.n_agents << "," << row.cell.n_obstacles << "," << row.regime << ","
       << row.runs << "," << row.total_violations << "," << row.agent_agent_violations
       << "," << row.agent_obstacle_violations << "," << row.generation_failures << ","
       << row.runs_all_reached << "\n";
  }
}

void write_fig3_csv(const std::vector<Fig3Point>& points, std::ostream& os) {
  os << "v_max,conservative_discrete,nonconservative_discrete,oracle\n";
  for (const Fig3Point& p : points) {
    os << format_double(p.v_max) << "," << format_double(p.conservative_discrete)
       << "," << format_double(p.nonconservative_discrete) << ","
       << format_double(p.oracle) << "\n";
  }
}

void write_bound_curve_csv(const std::vector<BoundCurvePoint>& points,
                           std::ostream& os) {
  os << "v_max,theory_conservative,theory_nonconservative,theory_discrete,"
        "oracle_value\n";
  for (const BoundCurvePoint& p : points) {
    os << format_double(p.v_max) << "," << format_double(p.theory_conservative) << ","
       << format_double(p.theory_nonconservative) << ","
       << format_double(p.theory_discrete) << "," << format_double(p.oracle_value)
       << "\n";
  }
}

void write_manifest(const RunManifest& manifest, std::ostream& os) {
  json j;
  j["command"] = manifest.command;
  j["config_path"] = manifest.config_path;
  j["out_dir"] = manifest.out_dir;
  j["seed"] = manifest.seed;
  j["tool_version"] = manifest.tool_version;
  j["created_utc"] = manifest.created_utc;
  json resolved = json::object();
  for (const auto& [key, value] : manifest.resolved_config) resolved[key] = value;
  j["resolved_config"] = resolved;
  os << j.dump(2) << "\n";
}

}  // namespace quadswarm
