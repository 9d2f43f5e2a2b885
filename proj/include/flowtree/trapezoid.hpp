#pragma once

#include "flowtree/flow_measure.hpp"
#include "flowtree/numeric.hpp"
#include "flowtree/tree.hpp"

#include <functional>
#include <string>
#include <vector>

namespace flowtree {

/// R_{h1}^{h2}(root) = {y <= root : h1 <= d(root, y) < h2}. The singleton
/// {root} is stored as h1 = 0, h2 = 1, which is the same vertex set.
struct Trapezoid {
  VertexId root = kNoVertex;
  int h1 = 0;
  int h2 = 1;

  bool is_singleton() const { return h1 == 0 && h2 == 1; }
  friend bool operator==(const Trapezoid&, const Trapezoid&) = default;
};

inline Trapezoid singleton(VertexId x) { return {x, 0, 1}; }

std::string describe(const Trapezoid& r);

class Beta {
 public:
  explicit Beta(int value = 12);
  int value() const { return value_; }

 private:
  int value_;
};

/// Singletons, or 2 h1 <= h2 <= beta h1 with h1 >= 1.
bool is_admissible(const Trapezoid& r, Beta b);

/// Every member of r is present in the truncation.
bool fits(const TruncatedTree& t, const Trapezoid& r);

bool contains(const TruncatedTree& t, const Trapezoid& r, VertexId y);

std::vector<VertexId> members(const TruncatedTree& t, const Trapezoid& r);

Rational trapezoid_measure(const FlowMeasure& m, const Trapezoid& r);

/// R_{ceil(h1/beta)}^{h2 beta}; a singleton is its own envelope.
Trapezoid envelope(Beta b, const Trapezoid& r);

struct EnumerationOptions {
  bool envelopes_in_window = false;
};

/// Admissible trapezoids rooted at x that fit, singleton first, then by
/// (h1, h2).
void admissible_at_root(const TruncatedTree& t, Beta b, VertexId x, EnumerationOptions opt,
                        std::vector<Trapezoid>& out);

std::vector<Trapezoid> enumerate_admissible(const TruncatedTree& t, Beta b, EnumerationOptions opt = {});

std::vector<Trapezoid> containing_trapezoids(const TruncatedTree& t, Beta b, VertexId x,
                                             EnumerationOptions opt = {});

// Set relations computed from roots and height intervals. Valid for any
// trapezoids that fit; subtrees below the window are treated as nonempty.
bool intersects(const TruncatedTree& t, const Trapezoid& a, const Trapezoid& b);
bool is_subset(const TruncatedTree& t, const Trapezoid& a, const Trapezoid& b);

/// Whether r2 lies in the envelope of r1, for intersecting r1, r2 with
/// mu(root1) >= mu(root2). Throws Inapplicable otherwise.
bool check_lemma_intersection(Beta b, const Trapezoid& r1, const Trapezoid& r2, const FlowMeasure& m);

enum class CoverCase { kLargeBase, kMediumBase, kUnitBase };
const char* to_string(CoverCase c);

struct PieceOverlap {
  int first = 0;
  int second = 0;
  Rational measure;
};

struct EnvelopeCover {
  CoverCase case_tag = CoverCase::kLargeBase;
  std::vector<Trapezoid> pieces;
  std::vector<std::string> labels;
  std::vector<PieceOverlap> overlaps;
  bool covers_envelope = false;
  bool all_admissible = false;
};

/// Case-dependent pieces covering the envelope of an admissible non-singleton
/// trapezoid. Overlap measures use mu(root) and height arithmetic.
/// With `require_fit`, every piece must fit the window.
EnvelopeCover envelope_cover(Beta b, const Trapezoid& r, const FlowMeasure& m, bool require_fit = true);

/// Greedy disjoint subfamily in decreasing order of mu(root), ties by lower
/// root index then input order.
std::vector<Trapezoid> vitali_select(Beta b, const FlowMeasure& m, const std::vector<Trapezoid>& family);

}  // namespace flowtree
