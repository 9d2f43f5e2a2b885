#include "flowtree/reference.hpp"

namespace flowtree::reference {

Rational weighted_sum(std::span<const Rational> values, const FlowMeasure& m, const Trapezoid& r) {
  Rational s;
  for (VertexId y : members(m.tree(), r)) s += values[y] * m[y];
  return s;
}

RefSup a2_constant(std::span<const Rational> w, const FlowMeasure& m, Beta b) {
  RefSup best;
  for (const Trapezoid& r : enumerate_admissible(m.tree(), b)) {
    Rational sw, ss, mr;
    for (VertexId y : members(m.tree(), r)) {
      sw += w[y] * m[y];
      ss += m[y] / w[y];
      mr += m[y];
    }
    const Rational v = sw * ss / (mr * mr);
    if (v > best.value) best = {v, r};
  }
  return best;
}

RefSup a1_constant(std::span<const Rational> w, const FlowMeasure& m, Beta b) {
  RefSup best;
  for (const Trapezoid& r : enumerate_admissible(m.tree(), b)) {
    Rational sw, mr, lowest = -1;
    for (VertexId y : members(m.tree(), r)) {
      sw += w[y] * m[y];
      mr += m[y];
      if (lowest < 0 || w[y] < lowest) lowest = w[y];
    }
    const Rational v = sw / (mr * lowest);
    if (v > best.value) best = {v, r};
  }
  return best;
}

Rational maximal_at(std::span<const Rational> f, const FlowMeasure& m, Beta b, VertexId x,
                    std::span<const Rational> w) {
  Rational best = -1;
  for (const Trapezoid& r : containing_trapezoids(m.tree(), b, x)) {
    Rational num, den;
    for (VertexId y : members(m.tree(), r)) {
      const Rational wy = w.empty() ? Rational(1) : w[y];
      num += abs(f[y]) * wy * m[y];
      den += wy * m[y];
    }
    const Rational v = num / den;
    if (v > best) best = v;
  }
  return best;
}

std::vector<Rational> maximal_function(std::span<const Rational> f, const FlowMeasure& m, Beta b,
                                       std::span<const Rational> w) {
  std::vector<Rational> out(m.tree().size());
  for (VertexId x = 0; x < out.size(); ++x) out[x] = maximal_at(f, m, b, x, w);
  return out;
}

Rational bmo_norm(std::span<const Rational> f, const FlowMeasure& m, Beta b) {
  Rational best;
  for (const Trapezoid& r : enumerate_admissible(m.tree(), b)) {
    const auto mem = members(m.tree(), r);
    Rational s, mr;
    for (VertexId y : mem) {
      s += f[y] * m[y];
      mr += m[y];
    }
    const Rational mean = s / mr;
    Rational osc;
    for (VertexId y : mem) osc += abs(f[y] - mean) * m[y];
    if (osc / mr > best) best = osc / mr;
  }
  return best;
}

}  // namespace flowtree::reference
