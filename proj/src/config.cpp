#include "quadswarm/config.hpp"

#include "quadswarm/trace_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

extern char** environ;

namespace quadswarm {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

double parse_double_value(const std::string& key, const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "inf" || t == "infinity") return std::numeric_limits<double>::infinity();
  try {
    std::size_t pos = 0;
    const double v = std::stod(t, &pos);
    if (pos != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse '" + text + "' as a number for " + key);
  }
}

}  // namespace

ConfigMap parse_config(const std::string& text) {
  ConfigMap map;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config: malformed section header at line " +
                          std::to_string(line_no));
      section = lower(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key = value at line " +
                        std::to_string(line_no));
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config: empty key at line " + std::to_string(line_no));
    map[section.empty() ? key : section + "." + key] = value;
  }
  return map;
}

ConfigMap load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_config(buf.str());
}

void apply_env_overrides(ConfigMap& map, const std::string& prefix) {
  for (char** env = environ; env && *env; ++env) {
    const std::string entry(*env);
    if (entry.rfind(prefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string key = entry.substr(prefix.size(), eq - prefix.size());
    const std::string value = entry.substr(eq + 1);
    // QUADSWARM_SCENARIO_N_AGENTS -> scenario.n_agents; the first underscore
    // separates the section.
    const auto us = key.find('_');
    if (us == std::string::npos) continue;
    key[us] = '.';
    map[lower(key)] = value;
  }
}

bool has_key(const ConfigMap& map, const std::string& key) {
  return map.find(key) != map.end();
}

std::string get_string(const ConfigMap& map, const std::string& key,
                       const std::string& fallback) {
  const auto it = map.find(key);
  return it == map.end() ? fallback : it->second;
}

double get_double(const ConfigMap& map, const std::string& key, double fallback) {
  const auto it = map.find(key);
  return it == map.end() ? fallback : parse_double_value(key, it->second);
}

int get_int(const ConfigMap& map, const std::string& key, int fallback) {
  const double v = get_double(map, key, static_cast<double>(fallback));
  return static_cast<int>(std::llround(v));
}

std::uint64_t get_u64(const ConfigMap& map, const std::string& key,
                      std::uint64_t fallback) {
  const auto it = map.find(key);
  if (it == map.end()) return fallback;
  try {
    return std::stoull(trim(it->second));
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse '" + it->second + "' as integer for " + key);
  }
}

bool get_bool(const ConfigMap& map, const std::string& key, bool fallback) {
  const auto it = map.find(key);
  if (it == map.end()) return fallback;
  const std::string v = lower(trim(it->second));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: cannot parse '" + it->second + "' as bool for " + key);
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double_value("list", item));
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_double_list(text)) out.push_back(static_cast<int>(std::llround(v)));
  return out;
}

std::vector<Eigen::Vector3d> parse_vec3_list(const std::string& text) {
  std::vector<Eigen::Vector3d> out;
  std::stringstream ss(text);
  std::string group;
  while (std::getline(ss, group, ';')) {
    group = trim(group);
    if (group.empty()) continue;
    const std::vector<double> v = parse_double_list(group);
    if (v.size() != 3) throw ConfigError("config: expected x,y,z triplet in '" + group + "'");
    out.emplace_back(v[0], v[1], v[2]);
  }
  return out;
}

std::vector<Obstacle> parse_obstacle_list(const std::string& text) {
  std::vector<Obstacle> out;
  std::stringstream ss(text);
  std::string group;
  while (std::getline(ss, group, ';')) {
    group = trim(group);
    if (group.empty()) continue;
    const std::vector<double> v = parse_double_list(group);
    if (v.size() != 4)
      throw ConfigError("config: expected x,y,z,radius quadruplet in '" + group + "'");
    Obstacle ob;
    ob.id = static_cast<int>(out.size());
    ob.p = {v[0], v[1], v[2]};
    ob.radius = v[3];
    out.push_back(ob);
  }
  return out;
}

ScenarioConfig scenario_from_config(const ConfigMap& map) {
  ScenarioConfig cfg;

  cfg.gains = EcbfGains::from_alphas(get_double(map, "gains.alpha1", 36.0),
                                     get_double(map, "gains.alpha2", 22.0));
  cfg.margins.d_s = get_double(map, "geometry.d_s", cfg.margins.d_s);
  cfg.margins.d_so = get_double(map, "geometry.d_so", cfg.margins.d_so);

  QuadParams& p = cfg.params;
  p.mass = get_double(map, "quad.mass", p.mass);
  p.inertia_diag.x() = get_double(map, "quad.inertia_x", p.inertia_diag.x());
  p.inertia_diag.y() = get_double(map, "quad.inertia_y", p.inertia_diag.y());
  p.inertia_diag.z() = get_double(map, "quad.inertia_z", p.inertia_diag.z());
  p.arm_length = get_double(map, "quad.arm_length", p.arm_length);
  p.torque_coeff = get_double(map, "quad.torque_coeff", p.torque_coeff);
  p.u_min = get_double(map, "quad.u_min", p.u_min);
  p.u_max = get_double(map, "quad.u_max", p.u_max);
  p.v_max = get_double(map, "quad.v_max", p.v_max);
  p.a_max = get_double(map, "quad.a_max", p.a_max);
  p.radius = get_double(map, "quad.radius", p.radius);
  p.gravity = get_double(map, "quad.gravity", p.gravity);

  OcpConfig& ocp = cfg.ocp;
  ocp.horizon = get_double(map, "ocp.horizon", ocp.horizon);
  ocp.dt = get_double(map, "ocp.dt", ocp.dt);
  ocp.q_pos = get_double(map, "ocp.q_pos", ocp.q_pos);
  ocp.q_vel = get_double(map, "ocp.q_vel", ocp.q_vel);
  ocp.q_att = get_double(map, "ocp.q_att", ocp.q_att);
  ocp.q_rate = get_double(map, "ocp.q_rate", ocp.q_rate);
  ocp.r_input = get_double(map, "ocp.r_input", ocp.r_input);
  ocp.slack_penalty = get_double(map, "ocp.slack_penalty", ocp.slack_penalty);
  ocp.max_sqp_iters = get_int(map, "ocp.max_sqp_iters", ocp.max_sqp_iters);
  ocp.kkt_tol = get_double(map, "ocp.kkt_tol", ocp.kkt_tol);
  ocp.rti = get_bool(map, "ocp.rti", ocp.rti);
  ocp.ecbf_every_node = get_bool(map, "ocp.ecbf_every_node", ocp.ecbf_every_node);
  ocp.freeze_vrel = get_bool(map, "ocp.freeze_vrel", ocp.freeze_vrel);

  cfg.seed = get_u64(map, "scenario.seed", cfg.seed);
  cfg.n_agents = get_int(map, "scenario.n_agents", cfg.n_agents);
  cfg.n_obstacles = get_int(map, "scenario.n_obstacles", cfg.n_obstacles);
  cfg.env_min.x() = get_double(map, "scenario.env_x_min", cfg.env_min.x());
  cfg.env_min.y() = get_double(map, "scenario.env_y_min", cfg.env_min.y());
  cfg.env_min.z() = get_double(map, "scenario.env_z_min", cfg.env_min.z());
  cfg.env_max.x() = get_double(map, "scenario.env_x_max", cfg.env_max.x());
  cfg.env_max.y() = get_double(map, "scenario.env_y_max", cfg.env_max.y());
  cfg.env_max.z() = get_double(map, "scenario.env_z_max", cfg.env_max.z());
  cfg.r_o_min = get_double(map, "scenario.r_o_min", cfg.r_o_min);
  cfg.r_o_max = get_double(map, "scenario.r_o_max", cfg.r_o_max);
  cfg.r_dd = get_double(map, "scenario.r_dd", cfg.r_dd);
  cfg.r_ddo = get_double(map, "scenario.r_ddo", cfg.r_ddo);
  cfg.sim_duration = get_double(map, "scenario.sim_duration", cfg.sim_duration);
  cfg.control_dt = get_double(map, "scenario.control_dt", cfg.control_dt);
  cfg.plant_substeps = get_int(map, "scenario.plant_substeps", cfg.plant_substeps);
  cfg.back_and_forth_cycles =
      get_int(map, "scenario.back_and_forth_cycles", cfg.back_and_forth_cycles);
  cfg.goal_capture_radius =
      get_double(map, "scenario.goal_capture_radius", cfg.goal_capture_radius);
  cfg.goal_capture_speed =
      get_double(map, "scenario.goal_capture_speed", cfg.goal_capture_speed);
  cfg.max_placement_attempts =
      get_int(map, "scenario.max_placement_attempts", cfg.max_placement_attempts);

  if (has_key(map, "scenario.fixed_starts"))
    cfg.fixed_starts = parse_vec3_list(map.at("scenario.fixed_starts"));
  if (has_key(map, "scenario.fixed_goals"))
    cfg.fixed_goals = parse_vec3_list(map.at("scenario.fixed_goals"));
  if (has_key(map, "scenario.fixed_obstacles"))
    cfg.fixed_obstacles = parse_obstacle_list(map.at("scenario.fixed_obstacles"));

  cfg.validate();
  return cfg;
}

std::vector<std::pair<std::string, std::string>> flatten_scenario(
    const ScenarioConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  const auto add = [&](const std::string& k, double v) {
    out.emplace_back(k, format_double(v));
  };
  out.emplace_back("scenario.seed", std::to_string(cfg.seed));
  out.emplace_back("scenario.n_agents", std::to_string(cfg.n_agents));
  out.emplace_back("scenario.n_obstacles", std::to_string(cfg.n_obstacles));
  add("scenario.r_dd", cfg.r_dd);
  add("scenario.r_ddo", cfg.r_ddo);
  add("scenario.sim_duration", cfg.sim_duration);
  add("scenario.control_dt", cfg.control_dt);
  out.emplace_back("scenario.back_and_forth_cycles",
                   std::to_string(cfg.back_and_forth_cycles));
  add("gains.alpha1", cfg.gains.alpha1);
  add("gains.alpha2", cfg.gains.alpha2);
  add("geometry.d_s", cfg.margins.d_s);
  add("geometry.d_so", cfg.margins.d_so);
  add("quad.mass", cfg.params.mass);
  add("quad.v_max", cfg.params.v_max);
  add("quad.a_max", cfg.params.a_max);
  add("quad.radius", cfg.params.radius);
  add("quad.u_min", cfg.params.u_min);
  add("quad.u_max", cfg.params.u_max);
  add("ocp.horizon", cfg.ocp.horizon);
  add("ocp.dt", cfg.ocp.dt);
  add("ocp.slack_penalty", cfg.ocp.slack_penalty);
  out.emplace_back("ocp.rti", cfg.ocp.rti ? "true" : "false");
  return out;
}

}  // namespace quadswarm
