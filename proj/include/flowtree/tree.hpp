#pragma once

// Finite truncations of a tree with root at infinity. Vertices hang down from
// the boundary point at infinity: every vertex has at most one predecessor
// (one level up) and an ordered list of successors (one level down).

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace flowtree {

using VertexId = std::uint32_t;
inline constexpr VertexId kNoVertex = std::numeric_limits<VertexId>::max();

inline constexpr std::size_t kDefaultVertexCap = 4'000'000;

struct SlabShape {
  int level_top = 0;
  int level_bot = 0;
};

struct BallShape {
  VertexId center = 0;
  int radius = 0;
};

class TruncatedTree {
 public:
  std::size_t size() const { return level_.size(); }

  int level(VertexId x) const { return level_[x]; }
  /// kNoVertex when the predecessor lies outside the truncation.
  VertexId pred(VertexId x) const { return pred_[x]; }
  std::span<const VertexId> successors(VertexId x) const {
    return {succ_.data() + succ_offset_[x], succ_.data() + succ_offset_[x + 1]};
  }
  /// True when every successor of x in the ambient tree is present.
  bool successors_complete(VertexId x) const { return complete_[x] != 0; }
  /// Largest h such that every y <= x with d(x, y) <= h is present.
  int height(VertexId x) const { return height_[x]; }

  bool is_slab() const { return is_slab_; }
  bool is_ball() const { return !is_slab_; }
  const SlabShape& slab() const { return slab_; }
  const BallShape& ball() const { return ball_; }

  /// Slab: the unique vertex of maximal level. Ball: the center.
  VertexId top() const { return top_; }
  int degree_bound() const { return degree_bound_; }
  /// Branching number q when built from a homogeneous tree T_q.
  std::optional<int> homogeneous_q() const { return homogeneous_q_; }

  int min_level() const { return min_level_; }
  int max_level() const { return max_level_; }
  /// Vertices of a level in increasing id order; empty outside [min, max].
  std::span<const VertexId> vertices_at_level(int level) const;

  /// k-th ancestor, or kNoVertex if it leaves the truncation.
  VertexId ancestor(VertexId x, int k) const;

  // Ball-only structure: the two-ended geodesic through the center with
  // level(x_n) = n, and the canonical slot of each vertex among its
  // predecessor's successors.
  VertexId geodesic_vertex(int n) const;
  int child_slot(VertexId x) const { return slot_[x]; }
  VertexId child_with_slot(VertexId x, int slot) const;
  /// Distance from the ball center (0 for slabs' top-relative use is not defined).
  int center_distance(VertexId x) const { return center_distance_[x]; }

 private:
  friend class TreeAssembler;

  std::vector<int> level_;
  std::vector<VertexId> pred_;
  std::vector<std::size_t> succ_offset_;
  std::vector<VertexId> succ_;
  std::vector<std::uint8_t> complete_;
  std::vector<int> height_;
  std::vector<int> slot_;
  std::vector<int> center_distance_;
  std::vector<std::size_t> level_offset_;
  std::vector<VertexId> by_level_;
  std::vector<VertexId> frame_;

  bool is_slab_ = true;
  SlabShape slab_{};
  BallShape ball_{};
  VertexId top_ = 0;
  int degree_bound_ = 0;
  std::optional<int> homogeneous_q_;
  int min_level_ = 0;
  int max_level_ = 0;
};

/// Slab of T_q between two levels; vertex count is sum_{k=0}^{top-bot} q^k.
TruncatedTree build_homogeneous_slab(int q, int level_top, int level_bot,
                                     std::size_t max_vertices = kDefaultVertexCap);

/// Slab whose non-bottom vertices, in breadth-first id order, have the given
/// successor counts. Zero counts are rejected.
TruncatedTree build_general_slab(std::span<const int> succ_counts, int level_top, int level_bot,
                                 std::size_t max_vertices = kDefaultVertexCap);

/// Slab where every vertex at a given level has the same number of
/// successors; `counts_from_top[i]` applies to level level_top - i.
TruncatedTree build_level_branching_slab(std::span<const int> counts_from_top, int level_top,
                                         int level_bot,
                                         std::size_t max_vertices = kDefaultVertexCap);

/// Ball of radius r around a center o of T_q. Levels are measured along a
/// fixed two-ended geodesic through o, with level(o) = 0.
TruncatedTree build_ball(int q, int radius, std::size_t max_vertices = kDefaultVertexCap);

std::size_t homogeneous_slab_size(int q, int depth);
std::size_t ball_size(int q, int radius);

/// The confluent x ∧ y: the lowest vertex above both. Throws WindowTooSmall
/// if the common ancestor is outside the truncation.
VertexId confluent(const TruncatedTree& t, VertexId x, VertexId y);

int geodesic_distance(const TruncatedTree& t, VertexId x, VertexId y);

/// Level of x ∧ y; rho(x, y) = e^{that level} for x != y.
int gromov_level(const TruncatedTree& t, VertexId x, VertexId y);
double gromov_distance(const TruncatedTree& t, VertexId x, VertexId y);

/// x <= y: y lies on the predecessor chain of x (inclusive).
bool is_below(const TruncatedTree& t, VertexId x, VertexId y);

}  // namespace flowtree
