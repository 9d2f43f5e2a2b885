#pragma once

// Bijections of truncated trees: Jacobians, the end-exchanging reflection of
// a ball, Gromov-distance isometries and bounded-distortion diagnostics.

#include "flowtree/weights.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace flowtree {

class TreeBijection {
 public:
  /// Validates that `forward` is a permutation of the vertex ids of t.
  TreeBijection(const TruncatedTree& t, std::vector<VertexId> forward);

  static TreeBijection identity(const TruncatedTree& t);

  const TruncatedTree& tree() const { return *tree_; }
  VertexId operator()(VertexId x) const { return forward_[x]; }
  VertexId inverse(VertexId x) const { return inverse_[x]; }
  std::span<const VertexId> forward() const { return forward_; }

 private:
  const TruncatedTree* tree_;
  std::vector<VertexId> forward_;
  std::vector<VertexId> inverse_;
};

/// d-isometry of a ball of T_q fixing the center and sending x_n to x_{-n}.
/// A vertex hanging off the frame at x_k along child slots s_1..s_j goes to
/// the vertex hanging off x_{-k} along the same slots.
TreeBijection reflection_isometry(const TruncatedTree& ball);

struct DistanceCheck {
  bool isometry = true;
  std::size_t pairs = 0;
  std::optional<std::pair<VertexId, VertexId>> witness;
};
/// Compares d(f(u), f(v)) with d(u, v) on every pair (or `max_pairs` random
/// pairs when nonzero).
DistanceCheck check_d_isometry(const TreeBijection& f, std::size_t max_pairs = 0, std::uint64_t seed = 1);

/// J_f(x) = mu(f(x)) / mu(x).
Weight jacobian(const TreeBijection& f, const FlowMeasure& m);

/// (J_f)_mu(E) == mu(f(E)).
bool jacobian_identity(const TreeBijection& f, const FlowMeasure& m, const Weight& j, std::span<const VertexId> e);

struct CounterexampleRatios {
  int q = 0;
  int n = 0;
  Trapezoid r{};                  // R_n^{2n}(o)
  std::vector<VertexId> e;        // E_n = {x <= x_{-n}} in R_n
  Rational mu_ratio;              // mu(E_n)/mu(R_n), equals q^{-n}
  Rational image_e;               // mu(f(E_n))
  Rational image_rest;            // mu(f(R_n minus E_n))
  Rational image_ratio;           // mu(f(E_n))/mu(f(R_n))
  Rational image_e_lower;         // q^{2n-1}
  Rational image_rest_upper;      // 3n q^{n-1}
  Rational image_ratio_lower;     // 1/(1 + 3n q^{-n})
  bool bounds_hold = false;
};
/// Exact values on the ball of radius 2n - 1 next to the analytic bounds.
CounterexampleRatios counterexample_ratios(int q, int n);

struct AinftyFailureRow {
  int n = 0;
  Rational xi;  // q^{-n}
  Rational image_ratio;
  Rational bound;
  bool bounds_hold = false;
};
struct AinftyFailureReport {
  int q = 0;
  std::vector<AinftyFailureRow> rows;
  bool xi_decreasing = true;
  bool ratio_increasing = true;
  bool bounds_hold = true;
};
/// Condition iv of the A_infinity characterization fails for the Jacobian
/// of the reflection: mu-small subsets carry almost all of the J_f mu mass.
AinftyFailureReport ainfty_failure_certificate(int q, int n_min, int n_max);

struct GromovCheck {
  bool rho_isometry = true;
  bool level_preserving = true;
  bool order_preserving = true;
  bool consistent = true;  // rho-isometry holds iff levels and order are kept
  std::size_t pairs = 0;
  std::size_t excluded = 0;  // pairs whose confluent leaves the window
  std::optional<std::pair<VertexId, VertexId>> witness;
};
GromovCheck gromov_isometry_check(const TreeBijection& f, std::size_t max_pairs = 0, std::uint64_t seed = 1);

struct BilipschitzReport {
  int c = 0;                   // max |log rho(x, y) - log rho(f(x), f(y))|
  int level_displacement = 0;  // max |l(x) - l(f(x))|
  Rational jacobian_max;       // max(J_f, 1/J_f)
  int qi_defect = 0;           // max |d(f(x), f(y)) - d(x, y)|
  bool displacement_ok = false;
  bool jacobian_ok = false;
  bool qi_ok = false;
  std::size_t pairs = 0;
  std::size_t excluded = 0;
  bool ok() const { return displacement_ok && jacobian_ok && qi_ok; }
};
/// Requires a measure of the form mu = c q^level (the canonical flow).
BilipschitzReport bilipschitz_diagnostics(const TreeBijection& f, const FlowMeasure& m, std::size_t max_pairs = 0,
                                          std::uint64_t seed = 1);

/// Random automorphism of a slab: children are permuted independently at
/// every vertex. Preserves levels and the order.
TreeBijection random_level_automorphism(const TruncatedTree& t, std::uint64_t seed);

/// Random bijection that permutes each block {z} u s(z) u s(s(z)) for a
/// random set of vertices z at levels of one residue mod 3, identity
/// elsewhere. Displaces levels by at most two.
TreeBijection random_bounded_shift(const TruncatedTree& t, std::uint64_t seed);

}  // namespace flowtree
