#include "flowtree/errors.hpp"
#include "flowtree/tree.hpp"

#include <doctest.h>

#include <cmath>
#include <queue>
#include <vector>

using namespace flowtree;

namespace {

// Breadth-first distances over the undirected graph given by pred links.
std::vector<std::vector<int>> bfs_distances(const TruncatedTree& t) {
  const std::size_t n = t.size();
  std::vector<std::vector<VertexId>> adj(n);
  for (VertexId v = 0; v < n; ++v)
    if (t.pred(v) != kNoVertex) {
      adj[v].push_back(t.pred(v));
      adj[t.pred(v)].push_back(v);
    }
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
  for (VertexId s = 0; s < n; ++s) {
    std::queue<VertexId> q;
    q.push(s);
    dist[s][s] = 0;
    while (!q.empty()) {
      VertexId v = q.front();
      q.pop();
      for (VertexId u : adj[v])
        if (dist[s][u] < 0) {
          dist[s][u] = dist[s][v] + 1;
          q.push(u);
        }
    }
  }
  return dist;
}

}  // namespace

TEST_CASE("homogeneous slab sizes") {
  CHECK(build_homogeneous_slab(2, 2, 0).size() == 7);
  auto t = build_homogeneous_slab(3, 1, 0);
  CHECK(t.size() == 4);
  CHECK(t.successors(t.top()).size() == 3);
  CHECK(build_homogeneous_slab(2, 12, 0).size() == 8191);
  for (int q = 2; q <= 4; ++q)
    for (int depth = 1; depth <= 6; ++depth) {
      std::size_t expected = 0, term = 1;
      for (int k = 0; k <= depth; ++k, term *= q) expected += term;
      CHECK(build_homogeneous_slab(q, depth + 3, 3).size() == expected);
    }
  CHECK_THROWS_AS(build_homogeneous_slab(2, 30, 0, 1000), SizeCapExceeded);
  CHECK_THROWS_AS(build_homogeneous_slab(2, 0, 0), InvalidInput);
}

TEST_CASE("slab structure invariants") {
  auto t = build_homogeneous_slab(2, 5, 1);
  CHECK(t.is_slab());
  CHECK(t.level(t.top()) == 5);
  CHECK(t.degree_bound() == 3);
  for (VertexId v = 0; v < t.size(); ++v) {
    CHECK(t.level(v) >= 1);
    CHECK(t.level(v) <= 5);
    if (v != t.top()) REQUIRE(t.pred(v) != kNoVertex);
    if (t.pred(v) != kNoVertex) CHECK(t.level(t.pred(v)) == t.level(v) + 1);
    for (VertexId c : t.successors(v)) CHECK(t.pred(c) == v);
    CHECK(t.height(v) == t.level(v) - 1);
  }
}

TEST_CASE("general slab") {
  std::vector<int> ones(10, 1);
  auto path = build_general_slab(ones, 10, 0);
  CHECK(path.size() == 11);
  CHECK(path.height(path.top()) == 10);

  // Two successors at even levels, one at odd: level sizes multiply.
  std::vector<int> per_level;
  for (int l = 6; l > 0; --l) per_level.push_back(l % 2 == 0 ? 2 : 1);
  auto mixed = build_level_branching_slab(per_level, 6, 0);
  std::size_t expected = 0, width = 1;
  for (int l = 6; l >= 0; --l) {
    CHECK(mixed.vertices_at_level(l).size() == width);
    expected += width;
    if (l > 0) width *= (l % 2 == 0 ? 2 : 1);
  }
  CHECK(mixed.size() == expected);

  std::vector<int> with_zero{2, 0, 1};
  CHECK_THROWS_AS(build_general_slab(with_zero, 2, 0), InvalidInput);
  std::vector<int> too_short{2};
  CHECK_THROWS_AS(build_general_slab(too_short, 2, 0), InvalidInput);
}

TEST_CASE("ball sizes and frame") {
  CHECK(build_ball(2, 0).size() == 1);
  CHECK(build_ball(2, 1).size() == 4);
  CHECK(build_ball(2, 2).size() == 10);
  CHECK(build_ball(2, 4).size() == 46);
  for (int q = 2; q <= 4; ++q)
    for (int r = 1; r <= 5; ++r) {
      auto b = build_ball(q, r);
      long long expected = 1, power = 1;
      for (int i = 0; i < r; ++i) power *= q;
      expected += (q + 1) * (power - 1) / (q - 1);
      CHECK(static_cast<long long>(b.size()) == expected);
    }
  auto b = build_ball(3, 4);
  CHECK(b.is_ball());
  CHECK(b.level(b.top()) == 0);
  CHECK(b.height(b.top()) == 4);
  for (int n = -4; n <= 4; ++n) {
    VertexId x = b.geodesic_vertex(n);
    CHECK(b.level(x) == n);
    CHECK(b.center_distance(x) == std::abs(n));
    if (n < 4) CHECK(b.pred(x) == b.geodesic_vertex(n + 1));
    if (n > -4) CHECK(b.child_with_slot(x, 0) == b.geodesic_vertex(n - 1));
  }
  auto dist = bfs_distances(b);
  for (VertexId v = 0; v < b.size(); ++v) {
    CHECK(dist[b.top()][v] == b.center_distance(v));
    CHECK(dist[b.top()][v] <= 4);
    const std::size_t degree = b.successors(v).size() + (b.pred(v) != kNoVertex);
    if (b.center_distance(v) < 4) CHECK(degree == 4);
  }
}

TEST_CASE("distance, confluent, order") {
  auto t = build_homogeneous_slab(2, 2, 0);
  VertexId top = t.top();
  auto kids = t.successors(top);
  CHECK(geodesic_distance(t, top, top) == 0);
  CHECK(geodesic_distance(t, top, kids[0]) == 1);
  CHECK(geodesic_distance(t, kids[0], kids[1]) == 2);
  VertexId a = t.successors(kids[0])[0], b = t.successors(kids[1])[1];
  CHECK(confluent(t, a, b) == top);
  CHECK(confluent(t, a, a) == a);
  CHECK(confluent(t, a, kids[0]) == kids[0]);
  CHECK(is_below(t, a, a));
  CHECK_FALSE(is_below(t, top, a));
  for (VertexId leaf : t.vertices_at_level(0)) CHECK(is_below(t, leaf, top));

  auto s = build_homogeneous_slab(2, 5, 2);
  VertexId l1 = s.successors(s.top())[0];
  CHECK(gromov_distance(s, s.successors(l1)[0], s.successors(l1)[1]) == doctest::Approx(std::exp(4.0)));
  CHECK(gromov_distance(s, l1, l1) == 0.0);
}

TEST_CASE("distances match a BFS oracle; rho is an ultrametric") {
  for (int q : {2, 3}) {
    auto t = build_homogeneous_slab(q, q == 2 ? 5 : 3, 0);
    auto dist = bfs_distances(t);
    const auto n = static_cast<VertexId>(t.size());
    for (VertexId x = 0; x < n; ++x)
      for (VertexId y = 0; y < n; ++y) {
        REQUIRE(geodesic_distance(t, x, y) == dist[x][y]);
        VertexId c = confluent(t, x, y);
        CHECK(2 * t.level(c) - t.level(x) - t.level(y) == dist[x][y]);
      }
  }
  auto t = build_homogeneous_slab(2, 6, 0);
  const auto n = static_cast<VertexId>(t.size());
  long violations = 0;
  for (VertexId x = 0; x < n; ++x)
    for (VertexId y = 0; y < n; ++y)
      for (VertexId z = 0; z < n; ++z) {
        if (x == z) continue;
        // rho(x, z) <= max(rho(x, y), rho(y, z)), compared through levels.
        const int lxz = gromov_level(t, x, z);
        const int lxy = x == y ? -1000 : gromov_level(t, x, y);
        const int lyz = y == z ? -1000 : gromov_level(t, y, z);
        if (lxz > std::max(lxy, lyz)) ++violations;
      }
  CHECK(violations == 0);
}

TEST_CASE("order is antisymmetric and transitive") {
  std::vector<int> counts{2, 1, 3, 1, 2, 1, 1, 2, 2, 1, 1, 3, 1, 2, 2, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  auto t = build_general_slab(counts, 4, 0);
  const auto n = static_cast<VertexId>(t.size());
  for (VertexId x = 0; x < n; ++x)
    for (VertexId y = 0; y < n; ++y) {
      if (is_below(t, x, y) && is_below(t, y, x)) CHECK(x == y);
      for (VertexId z = 0; z < n; ++z)
        if (is_below(t, x, y) && is_below(t, y, z)) CHECK(is_below(t, x, z));
    }
}

TEST_CASE("confluent outside a ball") {
  auto b = build_ball(2, 2);
  VertexId top = b.geodesic_vertex(2);
  // Any vertex not below x_2 has its confluent with x_2 outside the ball.
  for (VertexId v = 0; v < b.size(); ++v)
    if (!is_below(b, v, top)) CHECK_THROWS_AS(confluent(b, v, top), WindowTooSmall);
}
