#include "flowtree/errors.hpp"
#include "flowtree/tree_maps.hpp"

#include <doctest.h>

#include <random>

using namespace flowtree;

namespace {

// Vertices hanging j steps off the frame at a fixed frame vertex, first step
// off the geodesic.
Rational hanging_count(int q, int j) { return j == 0 ? Rational(1) : Rational(q - 1) * pow_int(Rational(q), j - 1); }

// mu(f(E_n)): y hangs off x_{-n-i} at depth j with i + j <= n - 1, and f(y)
// sits at level n + i - j.
Rational image_of_e(int q, int n) {
  Rational s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; i + j <= n - 1; ++j) s += hanging_count(q, j) * pow_int(Rational(q), n + i - j);
  return s;
}

// mu(f(R_n \ E_n)): y hangs off x_{-i}, 0 <= i < n, at depth j >= 1 with
// n <= i + j <= 2n - 1; f(y) sits at level i - j.
Rational image_of_rest(int q, int n) {
  Rational s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(1, n - i); i + j <= 2 * n - 1; ++j) s += hanging_count(q, j) * pow_int(Rational(q), i - j);
  return s;
}

}  // namespace

TEST_CASE("bijections validate their input") {
  auto t = build_homogeneous_slab(2, 2, 0);
  CHECK_THROWS_AS(TreeBijection(t, std::vector<VertexId>{0, 1}), InvalidInput);
  CHECK_THROWS_AS(TreeBijection(t, std::vector<VertexId>(t.size(), 0)), InvalidInput);
  auto id = TreeBijection::identity(t);
  for (VertexId x = 0; x < t.size(); ++x) CHECK(id.inverse(id(x)) == x);
}

TEST_CASE("reflection isometry of a ball") {
  for (int q : {2, 3}) {
    auto ball = build_ball(q, 4);
    auto f = reflection_isometry(ball);
    if (q == 2) CHECK(ball.size() == 46);
    CHECK(f(ball.ball().center) == ball.ball().center);
    for (int n = -4; n <= 4; ++n) CHECK(f(ball.geodesic_vertex(n)) == ball.geodesic_vertex(-n));
    for (VertexId x = 0; x < ball.size(); ++x) {
      CHECK(f.inverse(f(x)) == x);
      CHECK(f(f(x)) == x);
      CHECK(ball.center_distance(f(x)) == ball.center_distance(x));
    }
    auto iso = check_d_isometry(f);
    CHECK(iso.isometry);
    CHECK(iso.pairs == ball.size() * (ball.size() - 1) / 2);

    auto m = canonical_flow(ball);
    auto j = jacobian(f, m);
    for (int n = -4; n <= 4; ++n) CHECK(j[ball.geodesic_vertex(n)] == pow_int(Rational(q), -2 * n));
    std::mt19937_64 rng(q);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<VertexId> e;
      for (VertexId x = 0; x < ball.size(); ++x)
        if (rng() % 3 == 0) e.push_back(x);
      CHECK(jacobian_identity(f, m, j, e));
    }
  }
  CHECK(check_d_isometry(reflection_isometry(build_ball(2, 7)), 20000, 4).isometry);
  CHECK_THROWS_AS(reflection_isometry(build_ball(2, 0)), InvalidInput);
  CHECK_THROWS_AS(reflection_isometry(build_homogeneous_slab(2, 3, 0)), InvalidInput);
}

TEST_CASE("jacobian of level-preserving maps") {
  auto t = build_homogeneous_slab(3, 4, 0);
  auto m = canonical_flow(t);
  auto j = jacobian(random_level_automorphism(t, 5), m);
  CHECK(j.is_constant());
  CHECK(j[0] == 1);
  CHECK(jacobian(TreeBijection::identity(t), m).is_constant());
}

TEST_CASE("counterexample ratios") {
  auto c = counterexample_ratios(2, 3);
  CHECK(c.mu_ratio == Rational(1, 8));
  CHECK(c.image_e >= 32);
  CHECK(c.image_e == 72);
  CHECK(c.image_rest == Rational(21, 2));
  CHECK(c.image_ratio == Rational(48, 55));
  CHECK(c.image_ratio_lower == Rational(8, 17));
  CHECK(c.bounds_hold);
  for (int q : {2, 3})
    for (int n = 1; n <= 5; ++n) {
      auto r = counterexample_ratios(q, n);
      CHECK(r.mu_ratio == pow_int(Rational(q), -n));
      CHECK(r.image_e == image_of_e(q, n));
      CHECK(r.image_rest == image_of_rest(q, n));
      CHECK(r.bounds_hold);
      // The reflected weight J_f mu gives E_n the same share as the image.
      auto ball = build_ball(q, 2 * n - 1);
      auto m = canonical_flow(ball);
      auto j = jacobian(reflection_isometry(ball), m);
      Rational we = 0, wr = 0;
      for (VertexId y : members(ball, r.r)) wr += j[y] * m[y];
      for (VertexId y : r.e) we += j[y] * m[y];
      CHECK(we / wr == r.image_ratio);
    }
  CHECK_THROWS_AS(counterexample_ratios(2, 0), InvalidInput);
}

TEST_CASE("failure of condition iv for the reflected weight") {
  auto rep = ainfty_failure_certificate(2, 1, 7);
  REQUIRE(rep.rows.size() == 7);
  CHECK(rep.rows.front().n == 1);
  CHECK(rep.xi_decreasing);
  CHECK(rep.ratio_increasing);
  CHECK(rep.bounds_hold);
  for (auto& row : rep.rows) CHECK(row.image_ratio == counterexample_ratios(2, row.n).image_ratio);
  CHECK(rep.rows.back().image_ratio > Rational(9, 10));
}

TEST_CASE("Gromov isometries") {
  auto t = build_homogeneous_slab(2, 6, 0);
  auto id = gromov_isometry_check(TreeBijection::identity(t));
  CHECK(id.rho_isometry);
  CHECK(id.consistent);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto f = random_level_automorphism(t, seed);
    auto g = gromov_isometry_check(f);
    CHECK(g.rho_isometry);
    CHECK(g.level_preserving);
    CHECK(g.order_preserving);
    CHECK(g.consistent);
    CHECK(g.excluded == 0);
  }
  auto ball = build_ball(2, 4);
  auto r = gromov_isometry_check(reflection_isometry(ball));
  CHECK_FALSE(r.rho_isometry);
  CHECK_FALSE(r.level_preserving);
  CHECK(r.consistent);
  CHECK(r.witness);
  for (std::uint64_t seed = 0; seed < 10; ++seed) CHECK(gromov_isometry_check(random_bounded_shift(t, seed)).consistent);
}

TEST_CASE("bilipschitz diagnostics") {
  auto t = build_homogeneous_slab(2, 8, 0);
  auto m = canonical_flow(t);
  auto id = bilipschitz_diagnostics(TreeBijection::identity(t), m);
  CHECK(id.c == 0);
  CHECK(id.qi_defect == 0);
  CHECK(id.level_displacement == 0);
  CHECK(id.jacobian_max == 1);
  CHECK(id.ok());
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto a = bilipschitz_diagnostics(random_level_automorphism(t, seed), m);
    CHECK(a.c == 0);
    CHECK(a.qi_defect == 0);
    CHECK(a.ok());
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto f = random_bounded_shift(t, seed);
    auto rep = bilipschitz_diagnostics(f, m);
    CHECK(rep.ok());
    CHECK(rep.c <= 4);
    CHECK(rep.level_displacement <= 2);
  }
}
