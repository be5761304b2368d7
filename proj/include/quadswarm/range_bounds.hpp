#pragma once

#include "quadswarm/ecbf.hpp"

#include <optional>
#include <vector>

namespace quadswarm {

/// Scalars feeding the closed-form minimum detection-range analysis.
struct RangeBoundInputs {
  EcbfGains gains;
  SafetyGeometry geom;
  double a_max_i = 0.0;     // m/s^2, ego acceleration bound
  double v_rel_max = 0.0;   // m/s, v_max_i + v_max_j (v_max_j = 0 for obstacles)
  double pole = 0.0;        // pole used by the nu1 condition; 0 => gains.p1

  double condition_pole() const { return pole > 0.0 ? pole : gains.p1; }
};

/// Per-condition thresholds and their combination. threshold_ii (and, for
/// the non-conservative variant, threshold_i) may be absent when the
/// corresponding inequality holds for every range.
struct RangeBoundResult {
  double threshold_i = 0.0;                  // constraint-feasibility root
  std::optional<double> threshold_ii;        // nu1 root; nullopt => always satisfied
  double threshold_iii = 0.0;                // d_s + r_i + r_j floor
  double bound = 0.0;                        // max of applicable thresholds
  double literal_min = 0.0;                  // min-combination, diagnostic only
};

/// Minimum range under which safety holds for any ego action at activation:
/// worst case is full acceleration toward the neighbor.
RangeBoundResult conservative_bound(const RangeBoundInputs& in);

/// Minimum range under which some admissible action preserves safety:
/// best case is full deceleration away from the neighbor.
RangeBoundResult nonconservative_bound(const RangeBoundInputs& in);

/// One-step Euler correction for a sampled controller: the two bodies can
/// close dt*v_rel_max between activations.
double discretize_bound(double range, double dt, double v_rel_max);

enum class PairVerdict {
  guaranteed,     // activation at or beyond the conservative bound
  pairwise_only,  // meets only the non-conservative bound
  none,           // below both
};

struct PairCase {
  RangeBoundInputs inputs;
  double activation_distance = 0.0;  // m
};

struct CompatibilityRow {
  std::size_t pair = 0;
  double activation_distance = 0.0;
  double conservative = 0.0;
  double nonconservative = 0.0;
  PairVerdict verdict = PairVerdict::none;
};

/// Joint forward-invariance only follows when every pair activates at the
/// conservative bound; below it each pair is at best individually feasible.
std::vector<CompatibilityRow> compatibility_check(const std::vector<PairCase>& pairs);

}  // namespace quadswarm
