#pragma once

// Parallel building blocks: per-vertex prefix sums over downward distance,
// slice extrema, and suprema over the admissible family.

#include "flowtree/numeric.hpp"
#include "flowtree/trapezoid.hpp"
#include "flowtree/tree.hpp"

#include <omp.h>

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <type_traits>
#include <vector>

namespace flowtree {

inline constexpr std::size_t kDefaultTableBudget = 32'000'000;

/// Entries needed by a table with one slot per (x, h), h = 0..height(x)+1.
std::size_t prefix_table_entries(const TruncatedTree& t);

/// G(x, h) = sum of g(y) over y <= x with d(x, y) < h, for a per-vertex value
/// g (typically f mu). Trapezoid sums are G(x, h2) - G(x, h1). When the table
/// would exceed the budget, sums are evaluated on demand by walking layers.
template <class T>
class PrefixSums {
 public:
  PrefixSums(const TruncatedTree& t, std::vector<T> g, std::size_t budget = kDefaultTableBudget)
      : tree_(&t), g_(std::move(g)) {
    if (prefix_table_entries(t) <= budget) build();
  }

  bool tabulated() const { return !offset_.empty(); }

  T prefix(VertexId x, int h) const {
    if (tabulated()) return table_[offset_[x] + static_cast<std::size_t>(h)];
    return walk(x, 0, h);
  }

  T sum(const Trapezoid& r) const {
    if (!tabulated()) return walk(r.root, r.h1, r.h2);
    T s = prefix(r.root, r.h2) - prefix(r.root, r.h1);
    if constexpr (std::is_same_v<T, Interval>) {
      // Cancellation can widen a difference of enclosures across zero.
      if (s.lower() <= 0.0 && s.upper() > 0.0) return walk(r.root, r.h1, r.h2);
    }
    return s;
  }

  const T& value(VertexId x) const { return g_[x]; }

 private:
  void build() {
    const TruncatedTree& t = *tree_;
    offset_.resize(t.size() + 1);
    offset_[0] = 0;
    for (VertexId x = 0; x < t.size(); ++x) offset_[x + 1] = offset_[x] + static_cast<std::size_t>(t.height(x) + 2);
    table_.assign(offset_.back(), T(0));
    // Level-synchronous sweep: every child sits one level below its parent.
    for (int l = t.min_level(); l <= t.max_level(); ++l) {
      const auto level = t.vertices_at_level(l);
      const auto n = static_cast<std::ptrdiff_t>(level.size());
#pragma omp parallel for schedule(static) if (n > 256)
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        const VertexId x = level[static_cast<std::size_t>(i)];
        T* row = table_.data() + offset_[x];
        const int top = t.height(x) + 1;
        for (int h = 1; h <= top; ++h) row[h] = g_[x];
        for (VertexId c : t.successors(x)) {
          const T* child = table_.data() + offset_[c];
          for (int h = 2; h <= top; ++h) row[h] += child[h - 1];
        }
      }
    }
  }

  T walk(VertexId x, int lo, int hi) const {
    T total(0);
    std::vector<VertexId> layer{x}, next;
    for (int depth = 0; depth < hi && !layer.empty(); ++depth) {
      if (depth >= lo)
        for (VertexId v : layer) total += g_[v];
      next.clear();
      for (VertexId v : layer)
        for (VertexId c : tree_->successors(v)) next.push_back(c);
      layer.swap(next);
    }
    return total;
  }

  const TruncatedTree* tree_;
  std::vector<T> g_;
  std::vector<std::size_t> offset_;
  std::vector<T> table_;
};

/// Minimum and maximum of a vertex function over each layer
/// {y <= x : d(x, y) = k}, k = 0..height(x).
template <class T>
class SliceExtrema {
 public:
  SliceExtrema(const TruncatedTree& t, std::span<const T> values) : tree_(&t) {
    offset_.resize(t.size() + 1);
    offset_[0] = 0;
    for (VertexId x = 0; x < t.size(); ++x) offset_[x + 1] = offset_[x] + static_cast<std::size_t>(t.height(x) + 1);
    min_.resize(offset_.back());
    max_.resize(offset_.back());
    for (int l = t.min_level(); l <= t.max_level(); ++l) {
      const auto level = t.vertices_at_level(l);
      const auto n = static_cast<std::ptrdiff_t>(level.size());
#pragma omp parallel for schedule(static) if (n > 256)
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        const VertexId x = level[static_cast<std::size_t>(i)];
        const std::size_t o = offset_[x];
        min_[o] = max_[o] = values[x];
        const int h = t.height(x);
        bool first = true;
        for (VertexId c : t.successors(x)) {
          for (int k = 1; k <= h; ++k) {
            const T& lo = min_[offset_[c] + static_cast<std::size_t>(k - 1)];
            const T& hi = max_[offset_[c] + static_cast<std::size_t>(k - 1)];
            if (first || lo < min_[o + k]) min_[o + k] = lo;
            if (first || hi > max_[o + k]) max_[o + k] = hi;
          }
          first = false;
        }
      }
    }
  }

  /// Extrema over the members of r (which must fit).
  std::pair<T, T> range(const Trapezoid& r) const {
    const std::size_t o = offset_[r.root];
    T lo = min_[o + r.h1], hi = max_[o + r.h1];
    for (int k = r.h1 + 1; k < r.h2; ++k) {
      if (min_[o + k] < lo) lo = min_[o + k];
      if (max_[o + k] > hi) hi = max_[o + k];
    }
    return {lo, hi};
  }

 private:
  const TruncatedTree* tree_;
  std::vector<std::size_t> offset_;
  std::vector<T> min_, max_;
};

template <class T>
struct SupResult {
  T value{};
  Trapezoid argmax{};
  std::size_t family_size = 0;
  bool empty = true;
};

/// Supremum of eval(R) over the admissible family. The argmax is the first
/// maximizer in enumeration order (root index, then h1, then h2), so serial
/// and parallel runs agree. For intervals the value is the enclosure of the
/// supremum and the argmax maximizes the upper endpoint.
template <class T, class Eval>
SupResult<T> family_sup(const TruncatedTree& t, Beta b, EnumerationOptions opt, Eval&& eval, bool parallel = true) {
  const auto n = static_cast<std::ptrdiff_t>(t.size());
  std::vector<SupResult<T>> per_root(t.size());
#pragma omp parallel if (parallel && n > 64)
  {
    std::vector<Trapezoid> family;
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto x = static_cast<VertexId>(i);
      family.clear();
      admissible_at_root(t, b, x, opt, family);
      SupResult<T>& best = per_root[x];
      best.family_size = family.size();
      for (const Trapezoid& r : family) {
        T v = eval(r);
        if (best.empty) {
          best.value = v;
          best.argmax = r;
          best.empty = false;
        } else {
          if (sup_greater(v, best.value)) best.argmax = r;
          sup_merge(best.value, v);
        }
      }
    }
  }
  SupResult<T> out;
  for (SupResult<T>& r : per_root) {
    out.family_size += r.family_size;
    if (r.empty) continue;
    if (out.empty) {
      out.value = r.value;
      out.argmax = r.argmax;
      out.empty = false;
    } else {
      if (sup_greater(r.value, out.value)) out.argmax = r.argmax;
      sup_merge(out.value, r.value);
    }
  }
  return out;
}

/// Calls visit(R) for every admissible R, in parallel over roots.
template <class Visit>
void for_each_admissible(const TruncatedTree& t, Beta b, EnumerationOptions opt, Visit&& visit, bool parallel = true) {
  const auto n = static_cast<std::ptrdiff_t>(t.size());
#pragma omp parallel if (parallel && n > 64)
  {
    std::vector<Trapezoid> family;
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      family.clear();
      admissible_at_root(t, b, static_cast<VertexId>(i), opt, family);
      for (const Trapezoid& r : family) visit(r);
    }
  }
}

/// Layers below x: result[k] = {y <= x : d(x, y) = k}, k < depth.
std::vector<std::vector<VertexId>> descendant_layers(const TruncatedTree& t, VertexId x, int depth);

/// Sets the OpenMP worker count from FLOWTREE_THREADS when present.
void configure_threads_from_env();

}  // namespace flowtree
