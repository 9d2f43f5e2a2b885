#include "flowtree/tree_maps.hpp"

#include "flowtree/errors.hpp"

#include <algorithm>
#include <cstdlib>
#include <random>

namespace flowtree {

TreeBijection::TreeBijection(const TruncatedTree& t, std::vector<VertexId> forward)
    : tree_(&t), forward_(std::move(forward)) {
  if (forward_.size() != t.size()) throw InvalidInput("map size does not match the tree");
  inverse_.assign(t.size(), kNoVertex);
  for (VertexId x = 0; x < t.size(); ++x) {
    const VertexId y = forward_[x];
    if (y >= t.size()) throw InvalidInput("map sends vertex " + std::to_string(x) + " outside the tree");
    if (inverse_[y] != kNoVertex) throw InvalidInput("map is not injective at vertex " + std::to_string(y));
    inverse_[y] = x;
  }
}

TreeBijection TreeBijection::identity(const TruncatedTree& t) {
  std::vector<VertexId> id(t.size());
  for (VertexId x = 0; x < t.size(); ++x) id[x] = x;
  return TreeBijection(t, std::move(id));
}

TreeBijection reflection_isometry(const TruncatedTree& ball) {
  if (!ball.is_ball()) throw InvalidInput("the reflection is defined on ball truncations");
  const int r = ball.ball().radius;
  if (r < 1) throw InvalidInput("reflection needs radius >= 1");
  std::vector<int> frame_index(ball.size(), 0);
  std::vector<std::uint8_t> on_frame(ball.size(), 0);
  for (int n = -r; n <= r; ++n) {
    const VertexId v = ball.geodesic_vertex(n);
    on_frame[v] = 1;
    frame_index[v] = n;
  }
  std::vector<VertexId> forward(ball.size(), kNoVertex);
  std::vector<int> slots;
  for (VertexId v = 0; v < ball.size(); ++v) {
    slots.clear();
    VertexId u = v;
    while (!on_frame[u]) {
      slots.push_back(ball.child_slot(u));
      u = ball.pred(u);
    }
    VertexId image = ball.geodesic_vertex(-frame_index[u]);
    for (auto it = slots.rbegin(); it != slots.rend(); ++it) image = ball.child_with_slot(image, *it);
    if (image == kNoVertex) throw Error("reflection image left the ball");
    forward[v] = image;
  }
  return TreeBijection(ball, std::move(forward));
}

namespace {

// Ordered pairs u < v: all of them, or a seeded sample.
std::vector<std::pair<VertexId, VertexId>> pair_list(std::size_t n, std::size_t max_pairs, std::uint64_t seed) {
  std::vector<std::pair<VertexId, VertexId>> out;
  const std::size_t all = n * (n - 1) / 2;
  if (max_pairs == 0 || max_pairs >= all) {
    out.reserve(all);
    for (VertexId u = 0; u < n; ++u)
      for (VertexId v = u + 1; v < n; ++v) out.emplace_back(u, v);
    return out;
  }
  std::mt19937_64 rng(seed);
  out.reserve(max_pairs);
  while (out.size() < max_pairs) {
    const auto u = static_cast<VertexId>(rng() % n), v = static_cast<VertexId>(rng() % n);
    if (u != v) out.emplace_back(std::min(u, v), std::max(u, v));
  }
  return out;
}

std::optional<int> level_of_confluent(const TruncatedTree& t, VertexId x, VertexId y) {
  try {
    return gromov_level(t, x, y);
  } catch (const WindowTooSmall&) {
    return std::nullopt;
  }
}

}  // namespace

DistanceCheck check_d_isometry(const TreeBijection& f, std::size_t max_pairs, std::uint64_t seed) {
  const TruncatedTree& t = f.tree();
  const auto pairs = pair_list(t.size(), max_pairs, seed);
  DistanceCheck out;
  out.pairs = pairs.size();
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
  std::size_t first_bad = pairs.size();
#pragma omp parallel for schedule(static) reduction(min : first_bad) if (n > 4096)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto [u, v] = pairs[static_cast<std::size_t>(i)];
    if (geodesic_distance(t, f(u), f(v)) != geodesic_distance(t, u, v))
      first_bad = std::min(first_bad, static_cast<std::size_t>(i));
  }
  if (first_bad < pairs.size()) {
    out.isometry = false;
    out.witness = pairs[first_bad];
  }
  return out;
}

Weight jacobian(const TreeBijection& f, const FlowMeasure& m) {
  const TruncatedTree& t = f.tree();
  if (&m.tree() != &t) throw InvalidInput("measure lives on a different tree");
  std::vector<Rational> j(t.size());
  for (VertexId x = 0; x < t.size(); ++x) j[x] = m[f(x)] / m[x];
  return Weight(t, std::move(j));
}

bool jacobian_identity(const TreeBijection& f, const FlowMeasure& m, const Weight& j, std::span<const VertexId> e) {
  Rational lhs = 0, rhs = 0;
  for (VertexId x : e) {
    lhs += j[x] * m[x];
    rhs += m[f(x)];
  }
  return lhs == rhs;
}

CounterexampleRatios counterexample_ratios(int q, int n) {
  if (n < 1) throw InvalidInput("counterexample needs n >= 1");
  const TruncatedTree ball = build_ball(q, 2 * n - 1);
  const FlowMeasure m = canonical_flow(ball);
  const TreeBijection f = reflection_isometry(ball);
  CounterexampleRatios c;
  c.q = q;
  c.n = n;
  c.r = {ball.ball().center, n, 2 * n};
  if (!fits(ball, c.r)) throw WindowTooSmall("R_n does not fit the ball");
  const VertexId anchor = ball.geodesic_vertex(-n);
  Rational mu_r = 0, mu_e = 0;
  for (VertexId y : members(ball, c.r)) {
    mu_r += m[y];
    if (is_below(ball, y, anchor)) {
      c.e.push_back(y);
      mu_e += m[y];
      c.image_e += m[f(y)];
    } else {
      c.image_rest += m[f(y)];
    }
  }
  c.mu_ratio = mu_e / mu_r;
  c.image_ratio = c.image_e / (c.image_e + c.image_rest);
  c.image_e_lower = pow_int(Rational(q), 2 * n - 1);
  c.image_rest_upper = Rational(3 * n) * pow_int(Rational(q), n - 1);
  c.image_ratio_lower = 1 / (1 + Rational(3 * n) * pow_int(Rational(q), -n));
  c.bounds_hold = c.mu_ratio == pow_int(Rational(q), -n) && c.image_e >= c.image_e_lower &&
                  c.image_rest <= c.image_rest_upper && c.image_ratio >= c.image_ratio_lower;
  return c;
}

AinftyFailureReport ainfty_failure_certificate(int q, int n_min, int n_max) {
  if (n_min < 1 || n_min > n_max) throw InvalidInput("bad n range");
  AinftyFailureReport rep;
  rep.q = q;
  for (int n = n_min; n <= n_max; ++n) {
    const CounterexampleRatios c = counterexample_ratios(q, n);
    AinftyFailureRow row{n, c.mu_ratio, c.image_ratio, c.image_ratio_lower, c.bounds_hold};
    if (!rep.rows.empty()) {
      rep.xi_decreasing = rep.xi_decreasing && row.xi < rep.rows.back().xi;
      rep.ratio_increasing = rep.ratio_increasing && row.image_ratio > rep.rows.back().image_ratio;
    }
    rep.bounds_hold = rep.bounds_hold && row.bounds_hold;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

GromovCheck gromov_isometry_check(const TreeBijection& f, std::size_t max_pairs, std::uint64_t seed) {
  const TruncatedTree& t = f.tree();
  GromovCheck out;
  for (VertexId x = 0; x < t.size(); ++x)
    if (t.level(f(x)) != t.level(x)) {
      out.level_preserving = false;
      break;
    }
  const auto pairs = pair_list(t.size(), max_pairs, seed);
  out.pairs = pairs.size();
  for (const auto& [u, v] : pairs) {
    if (out.order_preserving &&
        (is_below(t, u, v) != is_below(t, f(u), f(v)) || is_below(t, v, u) != is_below(t, f(v), f(u))))
      out.order_preserving = false;
    const auto before = level_of_confluent(t, u, v);
    const auto after = level_of_confluent(t, f(u), f(v));
    if (!before || !after) {
      ++out.excluded;
      continue;
    }
    if (*before != *after && out.rho_isometry) {
      out.rho_isometry = false;
      out.witness = std::make_pair(u, v);
    }
  }
  const bool kept = out.level_preserving && out.order_preserving;
  out.consistent = out.rho_isometry == kept;
  return out;
}

BilipschitzReport bilipschitz_diagnostics(const TreeBijection& f, const FlowMeasure& m, std::size_t max_pairs,
                                          std::uint64_t seed) {
  const TruncatedTree& t = f.tree();
  if (&m.tree() != &t) throw InvalidInput("measure lives on a different tree");
  const auto q = t.homogeneous_q();
  if (!q) throw Inapplicable("bilipschitz diagnostics need a homogeneous tree");
  BilipschitzReport rep;
  const auto pairs = pair_list(t.size(), max_pairs, seed);
  rep.pairs = pairs.size();
  for (const auto& [u, v] : pairs) {
    const auto before = level_of_confluent(t, u, v);
    const auto after = level_of_confluent(t, f(u), f(v));
    if (!before || !after) {
      ++rep.excluded;
      continue;
    }
    rep.c = std::max(rep.c, std::abs(*before - *after));
    const int du = 2 * *before - t.level(u) - t.level(v);
    const int df = 2 * *after - t.level(f(u)) - t.level(f(v));
    rep.qi_defect = std::max(rep.qi_defect, std::abs(du - df));
  }
  rep.jacobian_max = 1;
  const Weight j = jacobian(f, m);
  for (VertexId x = 0; x < t.size(); ++x) {
    rep.level_displacement = std::max(rep.level_displacement, std::abs(t.level(x) - t.level(f(x))));
    const Rational r = j[x] >= 1 ? j[x] : Rational(1 / j[x]);
    if (r > rep.jacobian_max) rep.jacobian_max = r;
  }
  rep.displacement_ok = rep.level_displacement <= rep.c;
  rep.jacobian_ok = rep.jacobian_max <= pow_int(Rational(*q), rep.c);
  rep.qi_ok = rep.qi_defect <= 4 * rep.c;
  return rep;
}

TreeBijection random_level_automorphism(const TruncatedTree& t, std::uint64_t seed) {
  if (!t.is_slab()) throw InvalidInput("automorphisms are generated on slabs");
  std::mt19937_64 rng(seed);
  std::vector<VertexId> forward(t.size(), kNoVertex);
  forward[t.top()] = t.top();
  std::vector<VertexId> queue{t.top()}, kids;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    const VertexId x = queue[i];
    const auto from = t.successors(x);
    const auto to = t.successors(forward[x]);
    if (from.size() != to.size()) throw InvalidInput("slab is not homogeneous enough for an automorphism");
    kids.assign(to.begin(), to.end());
    std::shuffle(kids.begin(), kids.end(), rng);
    for (std::size_t k = 0; k < from.size(); ++k) {
      forward[from[k]] = kids[k];
      queue.push_back(from[k]);
    }
  }
  return TreeBijection(t, std::move(forward));
}

TreeBijection random_bounded_shift(const TruncatedTree& t, std::uint64_t seed) {
  if (!t.is_slab()) throw InvalidInput("bounded-shift maps are generated on slabs");
  std::mt19937_64 rng(seed);
  std::vector<VertexId> forward(t.size());
  for (VertexId x = 0; x < t.size(); ++x) forward[x] = x;
  const int bot = t.slab().level_bot;
  const int residue = static_cast<int>(rng() % 3);
  std::vector<VertexId> block, image;
  for (VertexId z = 0; z < t.size(); ++z) {
    if ((t.level(z) - bot) % 3 != residue || t.level(z) - bot < 4 || (rng() & 1)) continue;
    block.assign(1, z);
    for (VertexId c : t.successors(z)) {
      block.push_back(c);
      for (VertexId g : t.successors(c)) block.push_back(g);
    }
    image = block;
    std::shuffle(image.begin(), image.end(), rng);
    for (std::size_t k = 0; k < block.size(); ++k) forward[block[k]] = image[k];
  }
  return TreeBijection(t, std::move(forward));
}

}  // namespace flowtree
