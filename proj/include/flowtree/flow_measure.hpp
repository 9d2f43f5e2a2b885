#pragma once

#include "flowtree/numeric.hpp"
#include "flowtree/tree.hpp"

#include <optional>
#include <span>
#include <vector>

namespace flowtree {

/// Positive vertex function with mu(x) = sum of mu over s(x) at every vertex
/// whose successors are all present. Holds a reference to its tree.
class FlowMeasure {
 public:
  FlowMeasure(const TruncatedTree& tree, std::vector<Rational> values);

  const TruncatedTree& tree() const { return *tree_; }
  const Rational& operator[](VertexId x) const { return values_[x]; }
  double as_double(VertexId x) const { return doubles_[x]; }
  std::span<const Rational> values() const { return values_; }
  std::span<const double> double_values() const { return doubles_; }

 private:
  const TruncatedTree* tree_;
  std::vector<Rational> values_;
  std::vector<double> doubles_;
};

/// mu(x) = q^{l(x) - level_bot} on slabs and q^{l(x)} on balls.
FlowMeasure canonical_flow(const TruncatedTree& t);

/// Upward aggregation from the bottom level of a slab. `bottom_values` is in
/// the order of t.vertices_at_level(level_bot).
FlowMeasure flow_from_bottom(const TruncatedTree& t, std::span<const Rational> bottom_values);

struct FlowValidation {
  bool ok = true;
  std::optional<VertexId> witness;  // first vertex (by id) violating the flow condition
};

FlowValidation validate_flow(const FlowMeasure& m);

Rational set_measure(const FlowMeasure& m, std::span<const VertexId> set);

inline const Rational kDefaultDoublingThreshold{64};

struct DoublingReport {
  bool is_locally_doubling = true;
  Rational worst_ratio{1};
  VertexId parent = kNoVertex;
  VertexId child = kNoVertex;
};

DoublingReport doubling_report(const FlowMeasure& m, const Rational& threshold = kDefaultDoublingThreshold);

}  // namespace flowtree
