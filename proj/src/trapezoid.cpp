#include "flowtree/trapezoid.hpp"

#include "flowtree/errors.hpp"

#include <algorithm>
#include <numeric>

namespace flowtree {

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

// Depth interval [lo, hi) of r measured from an ancestor `k` levels above its root.
struct DepthRange {
  int lo, hi;
};

bool overlap(DepthRange a, DepthRange b) { return std::max(a.lo, b.lo) < std::min(a.hi, b.hi); }

}  // namespace

std::string describe(const Trapezoid& r) {
  if (r.is_singleton()) return "{" + std::to_string(r.root) + "}";
  return "R_" + std::to_string(r.h1) + "^" + std::to_string(r.h2) + "(" + std::to_string(r.root) + ")";
}

Beta::Beta(int value) : value_(value) {
  if (value < 12) throw InvalidInput("beta must be at least 12");
}

bool is_admissible(const Trapezoid& r, Beta b) {
  if (r.is_singleton()) return true;
  return r.h1 >= 1 && 2 * r.h1 <= r.h2 && r.h2 <= b.value() * r.h1;
}

bool fits(const TruncatedTree& t, const Trapezoid& r) {
  return r.root < t.size() && r.h1 >= 0 && r.h1 < r.h2 && r.h2 - 1 <= t.height(r.root);
}

bool contains(const TruncatedTree& t, const Trapezoid& r, VertexId y) {
  const int depth = t.level(r.root) - t.level(y);
  return depth >= r.h1 && depth < r.h2 && is_below(t, y, r.root);
}

std::vector<VertexId> members(const TruncatedTree& t, const Trapezoid& r) {
  if (!fits(t, r)) throw WindowTooSmall(describe(r) + " does not fit the truncation");
  std::vector<VertexId> out;
  std::vector<VertexId> layer{r.root}, next;
  for (int depth = 0; depth < r.h2; ++depth) {
    if (depth >= r.h1) out.insert(out.end(), layer.begin(), layer.end());
    next.clear();
    for (VertexId v : layer)
      for (VertexId c : t.successors(v)) next.push_back(c);
    layer.swap(next);
  }
  return out;
}

Rational trapezoid_measure(const FlowMeasure& m, const Trapezoid& r) {
  if (!fits(m.tree(), r)) throw WindowTooSmall(describe(r) + " does not fit the truncation");
  return Rational(r.h2 - r.h1) * m[r.root];
}

Trapezoid envelope(Beta b, const Trapezoid& r) {
  if (r.is_singleton()) return r;
  if (!is_admissible(r, b)) throw InvalidInput("envelope of a non-admissible trapezoid");
  return {r.root, ceil_div(r.h1, b.value()), r.h2 * b.value()};
}

void admissible_at_root(const TruncatedTree& t, Beta b, VertexId x, EnumerationOptions opt,
                        std::vector<Trapezoid>& out) {
  out.push_back(singleton(x));
  const int beta = b.value();
  const int height = t.height(x);
  // Largest h2 that fits, or whose envelope fits.
  const int max_h2 = opt.envelopes_in_window ? (height + 1) / beta : height + 1;
  for (int h1 = 1; 2 * h1 <= max_h2; ++h1)
    for (int h2 = 2 * h1; h2 <= std::min(max_h2, beta * h1); ++h2) out.push_back({x, h1, h2});
}

std::vector<Trapezoid> enumerate_admissible(const TruncatedTree& t, Beta b, EnumerationOptions opt) {
  std::vector<Trapezoid> out;
  for (VertexId x = 0; x < t.size(); ++x) admissible_at_root(t, b, x, opt, out);
  return out;
}

std::vector<Trapezoid> containing_trapezoids(const TruncatedTree& t, Beta b, VertexId x, EnumerationOptions opt) {
  std::vector<Trapezoid> out{singleton(x)};
  std::vector<Trapezoid> at_root;
  VertexId a = t.pred(x);
  for (int k = 1; a != kNoVertex; ++k, a = t.pred(a)) {
    at_root.clear();
    admissible_at_root(t, b, a, opt, at_root);
    for (const Trapezoid& r : at_root)
      if (r.h1 <= k && k < r.h2) out.push_back(r);
  }
  return out;
}

bool intersects(const TruncatedTree& t, const Trapezoid& a, const Trapezoid& b) {
  if (is_below(t, a.root, b.root)) {
    const int k = t.level(b.root) - t.level(a.root);
    return overlap({k + a.h1, k + a.h2}, {b.h1, b.h2});
  }
  if (is_below(t, b.root, a.root)) {
    const int k = t.level(a.root) - t.level(b.root);
    return overlap({k + b.h1, k + b.h2}, {a.h1, a.h2});
  }
  return false;
}

bool is_subset(const TruncatedTree& t, const Trapezoid& a, const Trapezoid& b) {
  if (is_below(t, a.root, b.root)) {
    const int k = t.level(b.root) - t.level(a.root);
    return b.h1 <= k + a.h1 && k + a.h2 <= b.h2;
  }
  if (!is_below(t, b.root, a.root)) return false;
  // b's root is strictly below a's: every member of a must sit under b's
  // root, which requires a single-successor chain from a.root down to it.
  const int c = t.level(a.root) - t.level(b.root);
  if (a.h1 < c) return false;
  for (VertexId v = t.pred(b.root);; v = t.pred(v)) {
    if (t.successors(v).size() != 1 || !t.successors_complete(v)) return false;
    if (v == a.root) break;
  }
  return b.h1 <= a.h1 - c && a.h2 - c <= b.h2;
}

bool check_lemma_intersection(Beta b, const Trapezoid& r1, const Trapezoid& r2, const FlowMeasure& m) {
  const TruncatedTree& t = m.tree();
  if (!intersects(t, r1, r2)) throw Inapplicable("trapezoids do not intersect");
  if (m[r1.root] < m[r2.root]) throw Inapplicable("first root must carry the larger mass");
  return is_subset(t, r2, envelope(b, r1));
}

const char* to_string(CoverCase c) {
  switch (c) {
    case CoverCase::kLargeBase: return "h1>=3";
    case CoverCase::kMediumBase: return "h1=1,h2>=3 or h1=2";
    case CoverCase::kUnitBase: return "h1=1,h2=2";
  }
  return "?";
}

EnvelopeCover envelope_cover(Beta b, const Trapezoid& r, const FlowMeasure& m, bool require_fit) {
  if (r.is_singleton() || !is_admissible(r, b))
    throw InvalidInput("envelope cover needs an admissible non-singleton trapezoid");
  const int beta = b.value();
  const int h1 = r.h1, h2 = r.h2, s = h1 + h2;
  const int mid_floor = s / 2, mid_ceil = ceil_div(s, 2), half_beta = beta / 2;
  const VertexId x = r.root;

  const Trapezoid R0{x, ceil_div(h1, beta), h1};
  const Trapezoid R1{x, ceil_div(s, 2 * beta), mid_floor};
  const Trapezoid R2{x, mid_floor, mid_floor * beta};
  const Trapezoid R3{x, mid_ceil * half_beta, mid_ceil * half_beta * beta};
  const Trapezoid Rbar0{x, 1, beta};
  const Trapezoid Rbar1{x, half_beta, half_beta * beta};

  EnvelopeCover cover;
  if (h1 >= 3) {
    cover.case_tag = CoverCase::kLargeBase;
    cover.pieces = {R0, R1, R2, R3};
    cover.labels = {"R0", "R1", "R2", "R3"};
  } else if (h2 >= 3) {
    cover.case_tag = CoverCase::kMediumBase;
    cover.pieces = {Rbar0, Rbar1, R2, R3};
    cover.labels = {"Rbar0", "Rbar1", "R2", "R3"};
  } else {
    cover.case_tag = CoverCase::kUnitBase;
    cover.pieces = {Rbar0, Rbar1};
    cover.labels = {"Rbar0", "Rbar1"};
  }

  if (require_fit)
    for (const Trapezoid& p : cover.pieces)
      if (!fits(m.tree(), p)) throw WindowTooSmall("cover piece " + describe(p) + " does not fit");

  cover.all_admissible = std::all_of(cover.pieces.begin(), cover.pieces.end(),
                                     [&](const Trapezoid& p) { return is_admissible(p, b); });

  // Same root throughout, so covering is a statement about height intervals.
  const Trapezoid env = envelope(b, r);
  std::vector<std::pair<int, int>> spans;
  for (const Trapezoid& p : cover.pieces) spans.emplace_back(p.h1, p.h2);
  std::sort(spans.begin(), spans.end());
  int reach = env.h1;
  for (auto [lo, hi] : spans)
    if (lo <= reach) reach = std::max(reach, hi);
  cover.covers_envelope = reach >= env.h2;

  const Rational& mass = m[x];
  for (int i = 0; i < static_cast<int>(cover.pieces.size()); ++i)
    for (int j = i + 1; j < static_cast<int>(cover.pieces.size()); ++j) {
      const Trapezoid& a = cover.pieces[i];
      const Trapezoid& c = cover.pieces[j];
      const int len = std::max(0, std::min(a.h2, c.h2) - std::max(a.h1, c.h1));
      cover.overlaps.push_back({i, j, Rational(len) * mass});
    }
  return cover;
}

std::vector<Trapezoid> vitali_select(Beta, const FlowMeasure& m, const std::vector<Trapezoid>& family) {
  std::vector<std::size_t> order(family.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const int c = cmp(m[family[a].root], m[family[b].root]);
    if (c != 0) return c > 0;
    return family[a].root < family[b].root;
  });
  std::vector<Trapezoid> kept;
  for (std::size_t i : order) {
    const Trapezoid& r = family[i];
    const bool disjoint = std::none_of(kept.begin(), kept.end(),
                                       [&](const Trapezoid& k) { return intersects(m.tree(), r, k); });
    if (disjoint) kept.push_back(r);
  }
  return kept;
}

}  // namespace flowtree
