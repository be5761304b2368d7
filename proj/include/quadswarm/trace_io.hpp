#pragma once

#include "quadswarm/range_oracle.hpp"
#include "quadswarm/sim.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace quadswarm {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kCsvSchemaVersion = 1;

/// One JSON object per control step; first line is a metadata object with
/// the scenario echo and schema_version.
void write_trace_ndjson(const SimTrace& trace, std::ostream& os);

/// Per-step distance matrix rows: step, t, kind, i, j, distance.
void write_distances_csv(const SimTrace& trace, std::ostream& os);

void write_violations_csv(const ViolationReport& report, std::ostream& os);

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os);

struct Fig3Point {
  double v_max = 0.0;
  double conservative_discrete = 0.0;
  double nonconservative_discrete = 0.0;
  double oracle = 0.0;
};

void write_fig3_csv(const std::vector<Fig3Point>& points, std::ostream& os);

/// Range-bound export rows (one per probe speed) with the continuous values.
struct BoundCurvePoint {
  double v_max = 0.0;
  double theory_conservative = 0.0;
  double theory_nonconservative = 0.0;
  double theory_discrete = 0.0;
  double oracle_value = 0.0;
};

void write_bound_curve_csv(const std::vector<BoundCurvePoint>& points, std::ostream& os);

/// Every output directory gets the manifest that produced it.
struct RunManifest {
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string tool_version = kToolVersion;
  std::string created_utc;
  std::vector<std::pair<std::string, std::string>> resolved_config;
};

void write_manifest(const RunManifest& manifest, std::ostream& os);

/// Lossless, locale-independent double formatting shared by all writers.
std::string format_double(double v);

}  // namespace quadswarm
