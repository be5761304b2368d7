#include "quadswarm/range_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace quadswarm {

namespace {

// Larger root of a R^2 + b R + c, a > 0. nullopt when the parabola never
// crosses zero (condition satisfied everywhere) or the root is negative
// (satisfied for every physical range).
std::optional<double> binding_root(double a, double b, double c) {
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  const double root = (-b + std::sqrt(disc)) / (2.0 * a);
  if (root < 0.0) return std::nullopt;
  return root;
}

RangeBoundResult assemble(const RangeBoundInputs& in, double b_i, bool conservative) {
  in.geom.validate();
  if (!(in.a_max_i >= 0.0) || !(in.v_rel_max >= 0.0))
    throw std::invalid_argument("range bounds: negative a_max or v_rel_max");

  const double d = in.geom.combined();
  const double a1 = in.gains.alpha1;
  const double p = in.condition_pole();

  RangeBoundResult out;
  out.threshold_iii = d;

  // Condition (i): a1 R^2 + b_i R + (2 v^2 - a1 d^2) >= 0.
  const double c_i = 2.0 * in.v_rel_max * in.v_rel_max - a1 * d * d;
  const auto root_i = binding_root(a1, b_i, c_i);
  if (conservative && !root_i)
    // With real poles alpha2^2 >= 4 alpha1, so the conservative discriminant
    // is provably positive; reaching here means broken inputs.
    throw std::logic_error("range bounds: conservative condition (i) lost its root");
  out.threshold_i = root_i.value_or(0.0);

  // Condition (ii): p R^2 - 2 v R + p d^2 >= 0.
  out.threshold_ii = binding_root(p, -2.0 * in.v_rel_max, p * d * d);

  double bound = std::max(out.threshold_i, out.threshold_iii);
  double literal = out.threshold_iii;
  if (root_i) literal = std::min(literal, *root_i);
  if (out.threshold_ii) {
    bound = std::max(bound, *out.threshold_ii);
    literal = std::min(literal, *out.threshold_ii);
  }
  // The propositions print a min-combination, but satisfying all three
  // conditions simultaneously takes the max; the min is kept as a diagnostic.
  out.bound = bound;
  out.literal_min = literal;
  return out;
}

}  // namespace

RangeBoundResult conservative_bound(const RangeBoundInputs& in) {
  const double b = -2.0 * (in.a_max_i + in.gains.alpha2 * in.v_rel_max);
  return assemble(in, b, true);
}

RangeBoundResult nonconservative_bound(const RangeBoundInputs& in) {
  const double b = 2.0 * (in.a_max_i - in.gains.alpha2 * in.v_rel_max);
  return assemble(in, b, false);
}

double discretize_bound(double range, double dt, double v_rel_max) {
  if (!(dt >= 0.0)) throw std::invalid_argument("discretize_bound: dt must be >= 0");
  return range + dt * v_rel_max;
}

std::vector<CompatibilityRow> compatibility_check(const std::vector<PairCase>& pairs) {
  std::vector<CompatibilityRow> rows;
  rows.reserve(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const PairCase& pc = pairs[k];
    CompatibilityRow row;
    row.pair = k;
    row.activation_distance = pc.activation_distance;
    row.conservative = conservative_bound(pc.inputs).bound;
    row.nonconservative = nonconservative_bound(pc.inputs).bound;
    if (pc.activation_distance >= row.conservative)
      row.verdict = PairVerdict::guaranteed;
    else if (pc.activation_distance >= row.nonconservative)
      row.verdict = PairVerdict::pairwise_only;
    else
      row.verdict = PairVerdict::none;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace quadswarm
