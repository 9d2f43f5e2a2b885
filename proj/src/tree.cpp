#include "flowtree/tree.hpp"

#include "flowtree/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <string>

namespace flowtree {

// Collects vertices in construction order, then freezes them into the
// compressed layout used by TruncatedTree.
class TreeAssembler {
 public:
  explicit TreeAssembler(std::size_t cap) : cap_(cap) {}

  VertexId add(int level, VertexId pred, int slot, bool complete, int center_distance = 0) {
    if (level_.size() >= cap_)
      throw SizeCapExceeded("truncation exceeds the vertex cap of " + std::to_string(cap_));
    const auto id = static_cast<VertexId>(level_.size());
    level_.push_back(level);
    pred_.push_back(pred);
    slot_.push_back(slot);
    complete_.push_back(complete ? 1 : 0);
    center_distance_.push_back(center_distance);
    children_.emplace_back();
    if (pred != kNoVertex) children_[pred].push_back(id);
    return id;
  }

  void set_pred(VertexId child, VertexId parent, int slot) {
    pred_[child] = parent;
    slot_[child] = slot;
    children_[parent].push_back(child);
  }

  void set_slab_shape(SlabShape shape, std::optional<int> q) {
    is_slab_ = true;
    slab_ = shape;
    q_ = q;
  }

  void set_ball_shape(BallShape shape, int q, std::vector<VertexId> frame) {
    is_slab_ = false;
    ball_ = shape;
    q_ = q;
    frame_ = std::move(frame);
  }

  TruncatedTree finish() {
    TruncatedTree t;
    t.is_slab_ = is_slab_;
    t.slab_ = slab_;
    t.ball_ = ball_;
    t.top_ = is_slab_ ? 0 : ball_.center;
    t.homogeneous_q_ = q_;
    t.frame_ = std::move(frame_);
    const std::size_t n = level_.size();
    t.level_ = std::move(level_);
    t.pred_ = std::move(pred_);
    t.slot_ = std::move(slot_);
    t.complete_ = std::move(complete_);
    t.center_distance_ = std::move(center_distance_);

    t.succ_offset_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) {
      auto& kids = children_[v];
      std::sort(kids.begin(), kids.end(), [&](VertexId a, VertexId b) { return t.slot_[a] < t.slot_[b]; });
      t.succ_offset_[v + 1] = t.succ_offset_[v] + kids.size();
      t.degree_bound_ = std::max<int>(t.degree_bound_, static_cast<int>(kids.size()) + (t.pred_[v] != kNoVertex));
    }
    t.succ_.reserve(t.succ_offset_[n]);
    for (auto& kids : children_) t.succ_.insert(t.succ_.end(), kids.begin(), kids.end());

    t.min_level_ = n ? *std::min_element(t.level_.begin(), t.level_.end()) : 0;
    t.max_level_ = n ? *std::max_element(t.level_.begin(), t.level_.end()) : 0;
    const int span = t.max_level_ - t.min_level_ + 1;
    t.level_offset_.assign(static_cast<std::size_t>(span) + 1, 0);
    for (std::size_t v = 0; v < n; ++v) ++t.level_offset_[t.level_[v] - t.min_level_ + 1];
    for (int i = 0; i < span; ++i) t.level_offset_[i + 1] += t.level_offset_[i];
    t.by_level_.resize(n);
    std::vector<std::size_t> fill(t.level_offset_.begin(), t.level_offset_.end() - 1);
    for (std::size_t v = 0; v < n; ++v) t.by_level_[fill[t.level_[v] - t.min_level_]++] = static_cast<VertexId>(v);

    // Children sit exactly one level below, so a bottom-up sweep by level
    // sees every child before its parent.
    t.height_.assign(n, 0);
    for (int l = t.min_level_; l <= t.max_level_; ++l) {
      for (VertexId v : t.vertices_at_level(l)) {
        if (!t.complete_[v]) continue;
        int h = std::numeric_limits<int>::max();
        for (VertexId c : t.successors(v)) h = std::min(h, t.height_[c]);
        t.height_[v] = (h == std::numeric_limits<int>::max()) ? 0 : h + 1;
      }
    }
    return t;
  }

 private:
  std::size_t cap_;
  std::vector<int> level_;
  std::vector<VertexId> pred_;
  std::vector<int> slot_;
  std::vector<std::uint8_t> complete_;
  std::vector<int> center_distance_;
  std::vector<std::vector<VertexId>> children_;
  bool is_slab_ = true;
  SlabShape slab_{};
  BallShape ball_{};
  std::optional<int> q_;
  std::vector<VertexId> frame_;
};

std::span<const VertexId> TruncatedTree::vertices_at_level(int level) const {
  if (size() == 0 || level < min_level_ || level > max_level_) return {};
  const std::size_t i = static_cast<std::size_t>(level - min_level_);
  return {by_level_.data() + level_offset_[i], by_level_.data() + level_offset_[i + 1]};
}

VertexId TruncatedTree::ancestor(VertexId x, int k) const {
  for (int i = 0; i < k && x != kNoVertex; ++i) x = pred_[x];
  return x;
}

VertexId TruncatedTree::geodesic_vertex(int n) const {
  if (is_slab_) throw InvalidInput("geodesic frame is only defined on ball truncations");
  if (n < -ball_.radius || n > ball_.radius) throw WindowTooSmall("x_" + std::to_string(n) + " is outside the ball");
  return frame_[static_cast<std::size_t>(n + ball_.radius)];
}

VertexId TruncatedTree::child_with_slot(VertexId x, int slot) const {
  for (VertexId c : successors(x))
    if (slot_[c] == slot) return c;
  return kNoVertex;
}

std::size_t homogeneous_slab_size(int q, int depth) {
  long double total = 0, term = 1;
  for (int k = 0; k <= depth; ++k) {
    total += term;
    term *= q;
  }
  return total > static_cast<long double>(std::numeric_limits<std::size_t>::max())
             ? std::numeric_limits<std::size_t>::max()
             : static_cast<std::size_t>(total);
}

std::size_t ball_size(int q, int radius) {
  if (radius == 0) return 1;
  long double total = 1, shell = q + 1;
  for (int r = 1; r <= radius; ++r) {
    total += shell;
    shell *= q;
  }
  return static_cast<std::size_t>(total);
}

namespace {

template <class CountFn>
TruncatedTree build_slab(CountFn&& count_for, int level_top, int level_bot, std::size_t max_vertices,
                         std::optional<int> q = std::nullopt) {
  if (level_top < level_bot) throw InvalidInput("slab needs level_top >= level_bot");
  TreeAssembler a(max_vertices);
  std::vector<VertexId> frontier{a.add(level_top, kNoVertex, 0, level_top > level_bot)};
  std::size_t index = 0;
  for (int l = level_top; l > level_bot; --l) {
    std::vector<VertexId> next;
    for (VertexId v : frontier) {
      const int c = count_for(index++, l);
      if (c <= 0)
        throw InvalidInput("vertex " + std::to_string(v) + " above the bottom level needs a positive successor count");
      for (int s = 0; s < c; ++s) next.push_back(a.add(l - 1, v, s, l - 1 > level_bot));
    }
    frontier = std::move(next);
  }
  a.set_slab_shape(SlabShape{level_top, level_bot}, q);
  return a.finish();
}

}  // namespace

TruncatedTree build_homogeneous_slab(int q, int level_top, int level_bot, std::size_t max_vertices) {
  if (q < 2) throw InvalidInput("homogeneous slab needs q >= 2");
  if (level_top <= level_bot) throw InvalidInput("slab needs level_top > level_bot");
  const std::size_t expected = homogeneous_slab_size(q, level_top - level_bot);
  if (expected > max_vertices)
    throw SizeCapExceeded("homogeneous slab would have " + std::to_string(expected) + " vertices");
  return build_slab([q](std::size_t, int) { return q; }, level_top, level_bot, max_vertices, q);
}

TruncatedTree build_general_slab(std::span<const int> succ_counts, int level_top, int level_bot,
                                 std::size_t max_vertices) {
  return build_slab(
      [&](std::size_t i, int) {
        if (i >= succ_counts.size()) throw InvalidInput("succ_counts is shorter than the number of non-bottom vertices");
        return succ_counts[i];
      },
      level_top, level_bot, max_vertices);
}

TruncatedTree build_level_branching_slab(std::span<const int> counts_from_top, int level_top, int level_bot,
                                         std::size_t max_vertices) {
  if (counts_from_top.size() < static_cast<std::size_t>(level_top - level_bot))
    throw InvalidInput("need one successor count per non-bottom level");
  return build_slab([&](std::size_t, int l) { return counts_from_top[static_cast<std::size_t>(level_top - l)]; },
                    level_top, level_bot, max_vertices);
}

TruncatedTree build_ball(int q, int radius, std::size_t max_vertices) {
  if (q < 2) throw InvalidInput("ball needs q >= 2");
  if (radius < 0) throw InvalidInput("ball radius must be nonnegative");
  if (ball_size(q, radius) > max_vertices)
    throw SizeCapExceeded("ball would have " + std::to_string(ball_size(q, radius)) + " vertices");

  // Breadth-first growth from the center. Geodesic vertices remember their
  // index n so that their ambient neighbours can be generated.
  constexpr int kOff = std::numeric_limits<int>::min();
  TreeAssembler a(max_vertices);
  std::vector<int> geo, dist, lev;
  std::vector<VertexId> frame(static_cast<std::size_t>(2 * radius + 1), kNoVertex);
  auto add = [&](int level, VertexId pred, int slot, int d, int g) {
    const VertexId id = a.add(level, pred, slot, d < radius, d);
    geo.push_back(g);
    dist.push_back(d);
    lev.push_back(level);
    if (g != kOff) frame[static_cast<std::size_t>(g + radius)] = id;
    return id;
  };

  const VertexId o = add(0, kNoVertex, 0, 0, 0);
  std::deque<std::pair<VertexId, VertexId>> queue{{o, kNoVertex}};
  while (!queue.empty()) {
    auto [v, from] = queue.front();
    queue.pop_front();
    if (dist[v] == radius) continue;
    const int d = dist[v] + 1;
    const int n = geo[v];
    if (n != kOff) {
      if (from == kNoVertex || geo[from] != n + 1) {
        const VertexId p = add(n + 1, kNoVertex, 0, d, n + 1);
        a.set_pred(v, p, 0);
        queue.emplace_back(p, v);
      }
      // Slot 0 continues the geodesic downward.
      if (from == kNoVertex || geo[from] != n - 1) queue.emplace_back(add(n - 1, v, 0, d, n - 1), v);
      for (int s = 1; s < q; ++s) queue.emplace_back(add(n - 1, v, s, d, kOff), v);
    } else {
      for (int s = 0; s < q; ++s) queue.emplace_back(add(lev[v] - 1, v, s, d, kOff), v);
    }
  }
  a.set_ball_shape(BallShape{o, radius}, q, std::move(frame));
  return a.finish();
}

VertexId confluent(const TruncatedTree& t, VertexId x, VertexId y) {
  while (t.level(x) < t.level(y)) {
    x = t.pred(x);
    if (x == kNoVertex) throw WindowTooSmall("confluent lies outside the truncation");
  }
  while (t.level(y) < t.level(x)) {
    y = t.pred(y);
    if (y == kNoVertex) throw WindowTooSmall("confluent lies outside the truncation");
  }
  while (x != y) {
    x = t.pred(x);
    y = t.pred(y);
    if (x == kNoVertex || y == kNoVertex) throw WindowTooSmall("confluent lies outside the truncation");
  }
  return x;
}

int geodesic_distance(const TruncatedTree& t, VertexId x, VertexId y) {
  const VertexId c = confluent(t, x, y);
  return 2 * t.level(c) - t.level(x) - t.level(y);
}

int gromov_level(const TruncatedTree& t, VertexId x, VertexId y) { return t.level(confluent(t, x, y)); }

double gromov_distance(const TruncatedTree& t, VertexId x, VertexId y) {
  if (x == y) return 0.0;
  return std::exp(static_cast<double>(gromov_level(t, x, y)));
}

bool is_below(const TruncatedTree& t, VertexId x, VertexId y) {
  while (x != kNoVertex && t.level(x) < t.level(y)) x = t.pred(x);
  return x == y;
}

}  // namespace flowtree
