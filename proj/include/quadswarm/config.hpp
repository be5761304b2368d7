#pragma once

#include "quadswarm/scenario.hpp"

#include <map>
#include <string>
#include <vector>

namespace quadswarm {

/// Flat "section.key" -> value map parsed from the INI-style config format:
/// [section] headers, key = value lines, '#' or ';' comments.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config(const std::string& text);
ConfigMap load_config_file(const std::string& path);  // throws ConfigError

/// Environment variables QUADSWARM_<SECTION>_<KEY> override file values.
void apply_env_overrides(ConfigMap& map, const std::string& prefix = "QUADSWARM_");

bool has_key(const ConfigMap& map, const std::string& key);
std::string get_string(const ConfigMap& map, const std::string& key,
                       const std::string& fallback);
double get_double(const ConfigMap& map, const std::string& key, double fallback);
int get_int(const ConfigMap& map, const std::string& key, int fallback);
std::uint64_t get_u64(const ConfigMap& map, const std::string& key,
                      std::uint64_t fallback);
bool get_bool(const ConfigMap& map, const std::string& key, bool fallback);

/// Comma-separated scalars; "0.5, 1.0, 1.5".
std::vector<double> parse_double_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);
/// Semicolon-separated triplets; "0,0,1; 1,2,3".
std::vector<Eigen::Vector3d> parse_vec3_list(const std::string& text);
/// Semicolon-separated quadruplets x,y,z,radius.
std::vector<Obstacle> parse_obstacle_list(const std::string& text);

/// Builds the full scenario (vehicle, gains, margins, OCP, run control) from
/// a config map, falling back to struct defaults for missing keys.
ScenarioConfig scenario_from_config(const ConfigMap& map);

/// Flattened echo for the run manifest.
std::vector<std::pair<std::string, std::string>> flatten_scenario(
    const ScenarioConfig& cfg);

}  // namespace quadswarm
