#include "flowtree/flow_measure.hpp"

#include "flowtree/errors.hpp"

#include <string>

namespace flowtree {

FlowMeasure::FlowMeasure(const TruncatedTree& tree, std::vector<Rational> values)
    : tree_(&tree), values_(std::move(values)) {
  if (values_.size() != tree.size()) throw InvalidInput("measure has the wrong number of values");
  doubles_.reserve(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    values_[i].canonicalize();
    if (values_[i] <= 0) throw InvalidInput("measure must be positive at vertex " + std::to_string(i));
    doubles_.push_back(values_[i].get_d());
  }
}

FlowMeasure canonical_flow(const TruncatedTree& t) {
  const auto q = t.homogeneous_q();
  if (!q) throw InvalidInput("canonical flow needs a homogeneous tree");
  const int base = t.is_slab() ? t.slab().level_bot : 0;
  std::vector<Rational> values(t.size());
  for (int l = t.min_level(); l <= t.max_level(); ++l) {
    const Rational v = pow_int(Rational(*q), l - base);
    for (VertexId x : t.vertices_at_level(l)) values[x] = v;
  }
  return FlowMeasure(t, std::move(values));
}

FlowMeasure flow_from_bottom(const TruncatedTree& t, std::span<const Rational> bottom_values) {
  if (!t.is_slab()) throw InvalidInput("flow_from_bottom needs a slab");
  const int bot = t.slab().level_bot;
  const auto bottom = t.vertices_at_level(bot);
  if (bottom_values.size() != bottom.size())
    throw InvalidInput("expected " + std::to_string(bottom.size()) + " bottom values");
  std::vector<Rational> values(t.size());
  for (std::size_t i = 0; i < bottom.size(); ++i) {
    if (bottom_values[i] <= 0) throw InvalidInput("bottom values must be positive");
    values[bottom[i]] = bottom_values[i];
    values[bottom[i]].canonicalize();
  }
  for (int l = bot + 1; l <= t.max_level(); ++l)
    for (VertexId x : t.vertices_at_level(l))
      for (VertexId c : t.successors(x)) values[x] += values[c];
  return FlowMeasure(t, std::move(values));
}

FlowValidation validate_flow(const FlowMeasure& m) {
  const TruncatedTree& t = m.tree();
  for (VertexId x = 0; x < t.size(); ++x) {
    if (!t.successors_complete(x)) continue;
    Rational sum;
    for (VertexId c : t.successors(x)) sum += m[c];
    if (sum != m[x]) return {false, x};
  }
  return {};
}

Rational set_measure(const FlowMeasure& m, std::span<const VertexId> set) {
  Rational sum;
  for (VertexId x : set) sum += m[x];
  return sum;
}

DoublingReport doubling_report(const FlowMeasure& m, const Rational& threshold) {
  const TruncatedTree& t = m.tree();
  DoublingReport r;
  for (VertexId x = 0; x < t.size(); ++x) {
    for (VertexId c : t.successors(x)) {
      Rational ratio = m[x] / m[c];
      if (r.parent == kNoVertex || ratio > r.worst_ratio) {
        r.worst_ratio = ratio;
        r.parent = x;
        r.child = c;
      }
    }
  }
  r.is_locally_doubling = r.worst_ratio <= threshold;
  return r;
}

}  // namespace flowtree
