#include "flowtree/errors.hpp"
#include "flowtree/maximal.hpp"
#include "flowtree/reference.hpp"

#include <doctest.h>

#include <random>

using namespace flowtree;

namespace {

std::vector<Rational> random_function(std::size_t n, std::uint64_t seed, int range = 9) {
  std::mt19937_64 rng(seed);
  std::vector<Rational> f;
  for (std::size_t i = 0; i < n; ++i)
    f.emplace_back(static_cast<long>(rng() % range) - range / 2, static_cast<long>(1 + rng() % 4));
  for (Rational& v : f) v.canonicalize();
  return f;
}

Weight random_weight(const TruncatedTree& t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Rational> v;
  for (std::size_t i = 0; i < t.size(); ++i) v.emplace_back(static_cast<long>(1 + rng() % 5), static_cast<long>(1 + rng() % 2));
  return Weight(t, std::move(v));
}

FlowMeasure mixed_measure(const TruncatedTree& t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Rational> bottom;
  for (std::size_t i = 0; i < t.vertices_at_level(t.min_level()).size(); ++i)
    bottom.emplace_back(static_cast<long>(1 + rng() % 6));
  return flow_from_bottom(t, bottom);
}

TruncatedTree mixed_tree(int depth, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> counts;
  for (int i = 0; i < 400; ++i) counts.push_back(1 + static_cast<int>(rng() % 3));
  return build_general_slab(counts, depth, 0);
}

void check_field_consistency(const MaximalField& mf, const FlowMeasure& m, std::span<const Rational> f,
                             std::span<const Rational> w = {}) {
  for (VertexId x = 0; x < m.tree().size(); ++x) {
    const Trapezoid& r = mf.argmax[x];
    REQUIRE(contains(m.tree(), r, x));
    Rational num = 0, den = 0;
    for (VertexId y : members(m.tree(), r)) {
      const Rational wy = w.empty() ? Rational(1) : w[y];
      num += abs(f[y]) * wy * m[y];
      den += wy * m[y];
    }
    CHECK(num / den == mf.values[x]);
  }
}

}  // namespace

TEST_CASE("maximal function equals the brute-force field") {
  Beta b;
  auto t = build_homogeneous_slab(2, 6, 0);
  auto m = canonical_flow(t);
  for (int seed = 0; seed < 3; ++seed) {
    auto f = random_function(t.size(), seed);
    auto mf = maximal_function(m, b, f);
    CHECK(mf.values == reference::maximal_function(f, m, b));
    check_field_consistency(mf, m, f);
  }
  auto g = mixed_tree(7, 3);
  auto gm = mixed_measure(g, 4);
  auto f = random_function(g.size(), 8);
  auto mf = maximal_function(gm, b, f);
  CHECK(mf.values == reference::maximal_function(f, gm, b));
  check_field_consistency(mf, gm, f);
}

TEST_CASE("maximal function of an indicator") {
  Beta b;
  auto t = build_homogeneous_slab(2, 6, 0);
  auto m = canonical_flow(t);
  const VertexId x = t.vertices_at_level(4)[1];
  std::vector<Rational> f(t.size(), Rational(0));
  for (VertexId y : members(t, {x, 1, 2})) f[y] = 1;
  auto mf = maximal_function(m, b, f);
  CHECK(mf.values == reference::maximal_function(f, m, b));
  for (VertexId y : members(t, {x, 1, 2})) CHECK(mf.values[y] == 1);
  // Best at x: R_1^3 of the parent, mass mu(x) over 4 mu(x).
  CHECK(mf.values[x] == Rational(1, 4));
}

TEST_CASE("weighted maximal function") {
  Beta b;
  auto t = build_homogeneous_slab(2, 6, 0);
  auto m = canonical_flow(t);
  auto f = random_function(t.size(), 12);
  auto alt = level_weight(t, LevelWeight::periodic({Rational(2), Rational(1)}));
  auto mw = weighted_maximal_function(alt, m, b, f);
  CHECK(mw.values == reference::maximal_function(f, m, b, alt.values()));
  check_field_consistency(mw, m, f, alt.values());
  auto rw = random_weight(t, 5);
  CHECK(weighted_maximal_function(rw, m, b, f).values == reference::maximal_function(f, m, b, rw.values()));
  CHECK(weighted_maximal_function(constant_weight(t, 1), m, b, f).values == maximal_function(m, b, f).values);
  std::vector<Rational> c(t.size(), Rational(7, 2));
  for (const Rational& v : weighted_maximal_function(rw, m, b, c).values) CHECK(v == Rational(7, 2));
}

TEST_CASE("pointwise properties") {
  Beta b;
  auto t = build_homogeneous_slab(3, 5, 0);
  auto m = canonical_flow(t);
  std::vector<Rational> c(t.size(), Rational(-3));
  for (const Rational& v : maximal_function(m, b, c).values) CHECK(v == 3);
  for (int seed = 0; seed < 5; ++seed) {
    auto f = random_function(t.size(), 100 + seed);
    auto g = random_function(t.size(), 200 + seed);
    std::vector<Rational> sum(t.size());
    for (VertexId y = 0; y < t.size(); ++y) sum[y] = f[y] + g[y];
    auto mf = maximal_function(m, b, f), mg = maximal_function(m, b, g), ms = maximal_function(m, b, sum);
    for (VertexId y = 0; y < t.size(); ++y) {
      CHECK(mf.values[y] >= abs(f[y]));
      CHECK(ms.values[y] <= mf.values[y] + mg.values[y]);
    }
  }
}

TEST_CASE("domination by the A1 constant") {
  Beta b;
  auto t = build_homogeneous_slab(2, 7, 0);
  auto m = canonical_flow(t);
  for (int seed = 0; seed < 3; ++seed) {
    auto w = random_weight(t, 50 + seed);
    const Rational a1 = *a1_constant(w, m, b).constant_exact;
    auto mw = maximal_function(m, b, w.values());
    for (VertexId y = 0; y < t.size(); ++y) CHECK(mw.values[y] <= a1 * w[y]);
    auto f = random_function(t.size(), 60 + seed);
    auto plain = maximal_function(m, b, f), weighted = weighted_maximal_function(w, m, b, f);
    for (VertexId y = 0; y < t.size(); ++y) CHECK(plain.values[y] <= a1 * weighted.values[y]);
  }
}

TEST_CASE("weak type ratios") {
  Beta b;
  auto t = build_homogeneous_slab(2, 8, 0);
  auto m = canonical_flow(t);
  auto one = constant_weight(t, 1);
  std::vector<Rational> grid;
  for (int k = -12; k <= 2; ++k) grid.push_back(k >= 0 ? Rational(1 << k) : Rational(1, 1 << -k));
  std::vector<Rational> zero(t.size(), Rational(0));
  CHECK(weak11_constant(one, m, b, zero, grid).constant == 0);
  // For a point mass the level set sits inside one envelope, whose measure is
  // (beta h2 - ceil(h1/beta)) mu(x) < 24 (h2 - h1) mu(x).
  for (VertexId x : {VertexId(0), VertexId(3), VertexId(200), VertexId(510)}) {
    std::vector<Rational> f(t.size(), Rational(0));
    f[x] = 1;
    auto rep = weak11_constant(one, m, b, f, grid);
    CHECK(rep.constant > 0);
    CHECK(rep.constant < 24);
  }
  CHECK_THROWS_AS(weak11_constant(one, m, b, zero, std::vector<Rational>{Rational(0)}), InvalidInput);
}

TEST_CASE("empirical operator norms") {
  Beta b;
  auto t = build_homogeneous_slab(2, 6, 0);
  auto m = canonical_flow(t);
  auto one = constant_weight(t, 1);
  auto samples = standard_samples(m, b, 4, 7);
  auto rep = lp_operator_norm(one, m, b, Rational(2), samples);
  CHECK(rep.norm.lower() >= 1.0);
  CHECK(rep.rows.front().ratio.lower() == 1.0);
  CHECK(rep.rows.size() == samples.size() + 1);
  auto alt = level_weight(t, LevelWeight::periodic({Rational(2), Rational(1)}));
  CHECK(lp_operator_norm(alt, m, b, Rational(3), samples).norm.upper() < 100.0);

  // The necessity sample for 2^level grows with depth.
  double previous = 0;
  for (int depth = 4; depth <= 8; ++depth) {
    auto d = build_homogeneous_slab(2, depth, 0);
    auto dm = canonical_flow(d);
    auto expo = level_weight(d, LevelWeight::exponential(2));
    auto r = lp_operator_norm(expo, dm, b, Rational(2), {});
    REQUIRE(r.rows.size() == 1);
    CHECK(r.norm.lower() > previous);
    previous = r.norm.upper();
  }
}

TEST_CASE("split rule cases") {
  Beta b;
  std::vector<int> ones(60, 1);
  auto path = build_general_slab(ones, 60, 0);
  auto t = build_homogeneous_slab(2, 7, 0);
  const VertexId x = t.top();
  auto s = split_trapezoid(t, b, {x, 1, 2});
  CHECK(s.case_tag == SplitCase::kChildren);
  CHECK(s.pieces == std::vector<Trapezoid>{singleton(t.successors(x)[0]), singleton(t.successors(x)[1])});
  s = split_trapezoid(t, b, {x, 2, 4});
  CHECK(s.case_tag == SplitCase::kPushDown);
  CHECK(s.pieces == std::vector<Trapezoid>{{t.successors(x)[0], 1, 3}, {t.successors(x)[1], 1, 3}});
  s = split_trapezoid(t, b, {x, 1, 5});
  CHECK(s.case_tag == SplitCase::kUnitBase);
  CHECK(s.pieces.size() == 4);
  const VertexId top = path.top();
  s = split_trapezoid(path, b, {top, 2, 24});
  CHECK(s.case_tag == SplitCase::kHeightSplit);
  CHECK(s.pieces == std::vector<Trapezoid>{{top, 2, 4}, {top, 4, 24}});
  CHECK_THROWS_AS(split_trapezoid(t, b, singleton(x)), InvalidInput);
  CHECK_THROWS_AS(split_trapezoid(t, b, {x, 1, 9}), WindowTooSmall);
  CHECK_THROWS_AS(split_trapezoid(t, b, {x, 2, 3}), InvalidInput);
}

TEST_CASE("every split is an exact partition") {
  Beta b;
  std::vector<int> ones(60, 1);
  auto path = build_general_slab(ones, 60, 0);
  std::vector<Rational> unit{Rational(1)};
  auto pm = flow_from_bottom(path, unit);
  auto t = build_homogeneous_slab(2, 7, 0);
  auto tm = canonical_flow(t);
  auto g = mixed_tree(8, 9);
  auto gm = mixed_measure(g, 10);
  for (const FlowMeasure* m : {&pm, &tm, &gm}) {
    auto rule = compute_split_rule(*m, b);
    for (const Trapezoid& r : enumerate_admissible(m->tree(), b)) {
      if (r.is_singleton()) continue;
      auto s = split_trapezoid(m->tree(), b, r);
      auto c = check_split(*m, b, r, s);
      CHECK(c.ok());
      CHECK(c.min_ratio >= rule.c_d);
      CHECK(static_cast<int>(s.pieces.size()) <= rule.n);
    }
  }
}

TEST_CASE("split floor for the canonical flow") {
  Beta b;
  for (auto [q, depth] : {std::pair{2, 3}, std::pair{2, 6}, std::pair{3, 5}, std::pair{2, 12}, std::pair{2, 13}}) {
    auto t = build_homogeneous_slab(q, depth, 0);
    auto rule = compute_split_rule(canonical_flow(t), b);
    CHECK(rule.c_d == Rational(1, q * std::min(depth, 11)));
    CHECK(rule.n == 2 * q);
    CHECK(rule.d_cz() == q * std::min(depth, 11));
    CHECK(rule.worst_case == SplitCase::kUnitBase);
    auto one = constant_weight(t, 3);
    CHECK(compute_split_rule(canonical_flow(t), b, &one).c_d == rule.c_d);
  }
}

TEST_CASE("stopping-time decomposition") {
  Beta b;
  auto t = build_homogeneous_slab(2, 8, 0);
  auto m = canonical_flow(t);
  auto rule = compute_split_rule(m, b);
  const Trapezoid r0{t.top(), 1, 9};
  std::vector<Rational> c(t.size(), Rational(1));
  auto empty = cz_decompose(m, b, c, Rational(2), r0, &rule);
  CHECK(empty.pieces.empty());
  CHECK(empty.certified());

  std::vector<Rational> spike(t.size(), Rational(0));
  const VertexId leaf = t.vertices_at_level(0)[37];
  spike[leaf] = 1000;
  auto fam = cz_decompose(m, b, spike, Rational(10), r0, &rule);
  CHECK(fam.certified());
  REQUIRE(!fam.pieces.empty());
  for (const Trapezoid& e : fam.pieces) CHECK(contains(t, e, leaf));
  CHECK(cz_decompose(m, b, spike, Rational(100000), r0, &rule).pieces.empty());
  CHECK_THROWS_AS(cz_decompose(m, b, spike, Rational(1, 100), r0, &rule), InvalidInput);

  std::mt19937_64 rng(3);
  auto family = enumerate_admissible(t, b);
  std::erase_if(family, [](const Trapezoid& r) { return r.h2 < 3; });
  int nonempty = 0;
  for (int i = 0; i < 100; ++i) {
    auto f = random_function(t.size(), 1000 + i, 21);
    const Trapezoid& r = family[rng() % family.size()];
    Rational avg = 0;
    for (VertexId y : members(t, r)) avg += abs(f[y]) * m[y];
    avg /= trapezoid_measure(m, r);
    const Rational lambda = avg * Rational(static_cast<long>(11 + rng() % 30), 10);
    auto out = cz_decompose(m, b, f, lambda, r, &rule);
    CHECK(out.certified());
    nonempty += !out.pieces.empty();
  }
  CHECK(nonempty > 50);
}

TEST_CASE("weighted stopping time and assumption 1") {
  Beta b;
  auto t = build_homogeneous_slab(2, 7, 0);
  auto m = canonical_flow(t);
  auto rule = compute_split_rule(m, b);
  auto one = constant_weight(t, 1);
  auto a = assumption1_check(one, m, b, 2, 5);
  CHECK(a.eta == 1 - rule.c_d);
  CHECK(a.passes);
  REQUIRE(a.witness);
  CHECK(a.witness->mu_ratio <= 1 - rule.c_d);

  auto alt = level_weight(t, LevelWeight::periodic({Rational(2), Rational(1)}));
  const Rational a2 = *ap_constant(alt, m, b, Rational(2)).constant_exact;
  auto aa = assumption1_check(alt, m, b, 2, 5);
  CHECK(aa.passes);
  CHECK(aa.eta <= 1 - rule.c_d * rule.c_d / a2);
  CHECK(aa.alpha == 1 - aa.eta);

  const Trapezoid r0{t.top(), 1, 8};
  auto f = random_function(t.size(), 77, 15);
  Rational mass = 0, wmass = 0;
  for (VertexId y : members(t, r0)) {
    mass += abs(f[y]) * m[y];
    wmass += m[y];
  }
  const Rational lambda = 2 * mass / wmass;
  auto plain = cz_decompose(m, b, f, lambda, r0, &rule);
  auto weighted = cz_decompose_weighted(one, m, b, f, lambda, r0);
  CHECK(weighted.pieces == plain.pieces);
  CHECK(weighted.d_cz == plain.d_cz);
  Rational amass = 0, awmass = 0;
  for (VertexId y : members(t, r0)) {
    amass += abs(f[y]) * alt[y] * m[y];
    awmass += alt[y] * m[y];
  }
  auto wa = cz_decompose_weighted(alt, m, b, f, 2 * amass / awmass, r0);
  CHECK(wa.certified());
  CHECK(!wa.pieces.empty());
  CHECK(wa.d_cz == compute_split_rule(m, b, &alt).d_cz());
}

TEST_CASE("assumption 1 failure is reported") {
  Beta b;
  auto t = build_homogeneous_slab(2, 6, 0);
  auto m = canonical_flow(t);
  auto expo = level_weight(t, LevelWeight::exponential(1000));
  auto rep = assumption1_check(expo, m, b, 1, 3, Rational(1, 10));
  CHECK_FALSE(rep.passes);
  REQUIRE(rep.witness);
  CHECK(rep.witness->mu_ratio <= 1 - rep.c_d);
  CHECK(rep.witness->w_ratio == rep.eta);
  std::vector<Rational> f(t.size(), Rational(0));
  CHECK_THROWS_AS(cz_decompose_weighted(expo, m, b, f, Rational(1), {t.top(), 1, 7}), Inapplicable);
}

TEST_CASE("reverse Hoelder for the inverse weight") {
  Beta b;
  auto t = build_homogeneous_slab(2, 7, 0);
  auto m = canonical_flow(t);
  auto flat = weighted_reverse_holder(constant_weight(t, 5), m, b, 0, 4);
  REQUIRE(flat.epsilon);
  CHECK(*flat.epsilon == 1);
  for (auto& row : flat.rows) CHECK(row.constant.upper() == 1.0);
  auto alt = level_weight(t, LevelWeight::periodic({Rational(3), Rational(1), Rational(2)}));
  auto rh = weighted_reverse_holder(alt, m, b, 0, 10);
  REQUIRE(rh.epsilon);
  // C(eps)^{(1+eps)/eps} is the A_{1+1/eps} constant.
  for (auto& row : rh.rows) {
    const Rational e = row.epsilon;
    auto ap = ap_constant(alt, m, b, 1 + 1 / e).constant;
    auto lifted = pow(row.constant, Rational((1 + e) / e));
    CHECK(std::abs(lifted.upper() - ap.upper()) < 1e-9 * ap.upper());
  }
}

TEST_CASE("proof constants of reverse Hoelder bound the measured constant") {
  Beta b;
  auto t = build_homogeneous_slab(2, 7, 0);
  auto m = canonical_flow(t);
  auto rule = compute_split_rule(m, b);
  for (auto w : {level_weight(t, LevelWeight::periodic({Rational(2), Rational(1)})),
                 level_weight(t, LevelWeight::periodic({Rational(1), Rational(3), Rational(2)}))}) {
    auto a2 = ap_constant(w, m, b, Rational(2)).constant;
    auto proof = reverse_holder_proof(rule.d_cz(), Rational(1, 2), a2, Rational(2));
    REQUIRE(proof.valid);
    CHECK(proof.contraction.upper() < 1.0);
    CHECK(proof.eps > 0);
    // Measure the reverse Hoelder constant at the proof's eps.
    int k = 0;
    while (Rational(1, mpz_class(1) << k) != proof.eps) ++k;
    auto rh = reverse_holder_search(w, m, b, k, k, Rational(1000));
    CHECK(rh.rows[0].constant.upper() <= proof.constant.lower());
  }
  CHECK_THROWS_AS(reverse_holder_proof(Rational(2), Rational(0), Interval(2.0), Rational(2)), InvalidInput);
}
