#include "flowtree/errors.hpp"
#include "flowtree/reference.hpp"
#include "flowtree/weights.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace flowtree;

namespace {

Weight random_weight(const TruncatedTree& t, std::uint64_t seed, int spread = 4) {
  std::mt19937_64 rng(seed);
  std::vector<Rational> v;
  for (std::size_t i = 0; i < t.size(); ++i) v.emplace_back(static_cast<long>(1 + rng() % spread), static_cast<long>(1 + rng() % 3));
  return Weight(t, std::move(v));
}

LevelWeight alternating() { return LevelWeight::periodic({Rational(2), Rational(1)}); }

}  // namespace

TEST_CASE("weighted measure") {
  auto t = build_homogeneous_slab(2, 4, 0);
  auto m = canonical_flow(t);
  auto one = constant_weight(t, 1);
  std::vector<VertexId> all(t.size());
  for (VertexId v = 0; v < t.size(); ++v) all[v] = v;
  CHECK(weighted_measure(one, m, all) == set_measure(m, all));
  auto w = random_weight(t, 1);
  std::vector<VertexId> single{5};
  CHECK(weighted_measure(w, m, single) == w[5] * m[5]);
  std::vector<VertexId> a(all.begin(), all.begin() + 10), b(all.begin() + 10, all.end());
  CHECK(weighted_measure(w, m, all) == weighted_measure(w, m, a) + weighted_measure(w, m, b));
}

TEST_CASE("constant weights have every constant equal to one") {
  auto t = build_homogeneous_slab(2, 6, 0);
  auto m = canonical_flow(t);
  Beta b;
  auto w = constant_weight(t, Rational(7, 3));
  CHECK(*ap_constant(w, m, b, Rational(2)).constant_exact == 1);
  for (const Rational& p : {Rational(3, 2), Rational(3), Rational(11, 10)}) {
    auto rep = ap_constant(w, m, b, p);
    CHECK(rep.constant.lower() == 1.0);
    CHECK(rep.constant.upper() == 1.0);
  }
  CHECK(*a1_constant(w, m, b).constant_exact == 1);
  auto ainf = ainfty_constant(w, m, b);
  CHECK(ainf.constant.lower() == 1.0);
  CHECK(ainf.constant.upper() == 1.0);
  auto lw = log_weight(w);
  auto bmo = bmo_norm(lw, m, b, w.values());
  CHECK(bmo.norm.upper() == 0.0);
  auto rh = reverse_holder_search(w, m, b, 0, 6);
  REQUIRE(rh.epsilon);
  CHECK(*rh.epsilon == 1);
  for (auto& row : rh.rows) CHECK(row.constant.upper() == 1.0);
}

TEST_CASE("A2 constant matches the member-walking oracle") {
  std::vector<int> counts;
  std::mt19937_64 rng(21);
  for (int i = 0; i < 200; ++i) counts.push_back(1 + static_cast<int>(rng() % 3));
  auto t = build_general_slab(counts, 6, 0);
  std::vector<Rational> bottom;
  for (std::size_t i = 0; i < t.vertices_at_level(0).size(); ++i) bottom.emplace_back(static_cast<long>(1 + rng() % 5));
  auto m = flow_from_bottom(t, bottom);
  Beta b;
  for (int seed = 0; seed < 4; ++seed) {
    auto w = random_weight(t, 100 + seed);
    auto fast = ap_constant(w, m, b, Rational(2));
    auto slow = reference::a2_constant(w.values(), m, b);
    CHECK(*fast.constant_exact == slow.value);
    CHECK(fast.argmax == slow.argmax);
    auto fast1 = a1_constant(w, m, b);
    auto slow1 = reference::a1_constant(w.values(), m, b);
    CHECK(*fast1.constant_exact == slow1.value);
    // The interval backend encloses the exact value.
    auto fl = ap_constant_float(w, m, b, Rational(2));
    CHECK(fl.constant.lower() <= slow.value.get_d());
    CHECK(fl.constant.upper() >= slow.value.get_d());
    CHECK(fl.constant.upper() - fl.constant.lower() < 1e-9);
  }
}

TEST_CASE("prefix tables and the on-demand fallback agree") {
  auto t = build_homogeneous_slab(3, 5, 0);
  auto m = canonical_flow(t);
  auto w = random_weight(t, 5);
  std::vector<Rational> g(t.size());
  for (VertexId y = 0; y < t.size(); ++y) g[y] = w[y] * m[y];
  PrefixSums<Rational> table(t, g), walk(t, g, 0);
  CHECK(table.tabulated());
  CHECK_FALSE(walk.tabulated());
  for (const Trapezoid& r : enumerate_admissible(t, Beta{})) {
    CHECK(table.sum(r) == walk.sum(r));
    CHECK(table.sum(r) == reference::weighted_sum(w.values(), m, r));
  }
  // f = 1 gives G(x, h) = h mu(x).
  std::vector<Rational> mu(m.values().begin(), m.values().end());
  PrefixSums<Rational> ones(t, mu);
  for (VertexId x = 0; x < t.size(); ++x)
    for (int h = 0; h <= t.height(x) + 1; ++h) CHECK(ones.prefix(x, h) == Rational(h) * m[x]);
}

TEST_CASE("scaling invariance, lower bound and equality case") {
  auto t = build_homogeneous_slab(2, 6, 0);
  auto m = canonical_flow(t);
  Beta b;
  auto w = random_weight(t, 9);
  auto base = ap_constant(w, m, b, Rational(2));
  auto scaled = ap_constant(scaled_weight(w, Rational(13, 5)), m, b, Rational(2));
  CHECK(*base.constant_exact == *scaled.constant_exact);
  CHECK(base.argmax == scaled.argmax);
  CHECK(*base.constant_exact > 1);
  auto a1 = a1_constant(w, m, b);
  CHECK(*a1_constant(scaled_weight(w, Rational(1, 7)), m, b).constant_exact == *a1.constant_exact);
}

TEST_CASE("duality between w and its conjugate weight") {
  auto t = build_homogeneous_slab(2, 6, 0);
  auto m = canonical_flow(t);
  Beta b;
  auto v = random_weight(t, 17);
  // p = 2 is self-dual: [w^{-1}]_{A_2} = [w]_{A_2}.
  CHECK(*ap_constant(power_weight(v, -1), m, b, Rational(2)).constant_exact == *ap_constant(v, m, b, Rational(2)).constant_exact);
  // p = 3 with w = v^2, so w^{-1/2} = v^{-1} is exact: [v^{-1}]_{A_{3/2}} = [v^2]_{A_3}^{1/2}.
  auto w = power_weight(v, 2);
  auto lhs = ap_constant(power_weight(v, -1), m, b, Rational(3, 2)).constant;
  auto rhs = pow(ap_constant(w, m, b, Rational(3)).constant, Rational(1, 2));
  CHECK(overlap(lhs, rhs));
  CHECK(std::abs(lhs.upper() - rhs.upper()) < 1e-9);
}

TEST_CASE("monotonicity in p and the limit at one") {
  auto t = build_homogeneous_slab(2, 6, 0);
  auto m = canonical_flow(t);
  Beta b;
  auto w = random_weight(t, 23);
  auto a15 = ap_constant(w, m, b, Rational(3, 2)).constant;
  auto a2 = ap_constant(w, m, b, Rational(2)).constant;
  auto a3 = ap_constant(w, m, b, Rational(3)).constant;
  CHECK(a3.upper() <= a2.lower());
  CHECK(a2.upper() <= a15.lower());
  const double a1 = a1_constant(w, m, b).constant_exact->get_d();
  double previous_gap = 1e300;
  for (const Rational& q : {Rational(3, 2), Rational(11, 10), Rational(101, 100)}) {
    auto c = ap_constant(w, m, b, q).constant;
    CHECK(c.lower() <= a1 + 1e-12);
    const double gap = a1 - c.lower();
    CHECK(gap < previous_gap);
    previous_gap = gap;
  }
  CHECK(previous_gap < 0.05 * a1);
  auto ainf = ainfty_constant(w, m, b).constant;
  CHECK(ainf.upper() <= a3.lower());
}

TEST_CASE("duality characterization") {
  auto t = build_homogeneous_slab(2, 5, 0);
  auto m = canonical_flow(t);
  Beta b;
  auto w = level_weight(t, alternating());
  auto rep = ap_constant(w, m, b, Rational(2));
  const Rational A = *rep.constant_exact;
  std::mt19937_64 rng(4);
  auto fam = enumerate_admissible(t, b);
  for (int trial = 0; trial < 200; ++trial) {
    const Trapezoid& r = fam[rng() % fam.size()];
    std::vector<Rational> f;
    for (std::size_t i = 0; i < t.size(); ++i) f.emplace_back(static_cast<long>(rng() % 7) - 3);
    f[r.root] = 1;
    std::vector<Rational> chi(t.size(), Rational(0));
    for (VertexId y : members(t, r)) chi[y] = 1;
    if (r.h1 == 0) CHECK(ap_duality_characterization_check(w, m, Rational(2), A, f, r).holds);
    CHECK(ap_duality_characterization_check(w, m, Rational(2), A, chi, r).holds);
    CHECK(ap_duality_characterization_check(w, m, Rational(3, 2), A + 1, chi, r).holds);
    CHECK(a2_extremal_identity(w, m, r));
  }
  std::vector<Rational> zero(t.size(), Rational(0));
  CHECK_THROWS_AS(ap_duality_characterization_check(w, m, Rational(2), A, zero, fam[1]), Inapplicable);
}

TEST_CASE("level weights on the integers") {
  CHECK(level_ap_constant(LevelWeight::constant(1), -5, 5, 0).constant == 1);
  auto expo = LevelWeight::exponential(2);
  Rational previous = 0;
  for (int L = 1; L <= 12; ++L) {
    auto r = level_ap_constant(expo, 0, 30, L);
    CHECK(r.constant > previous);
    previous = r.constant;
  }
  auto alt = level_ap_constant(alternating(), 0, 40, 16);
  CHECK(alt.constant == Rational(9, 8));
  CHECK(level_ap_product(alternating(), Rational(2), 0, 1).lower() <= 9.0 / 8.0);
}

TEST_CASE("witness root level") {
  Beta b;
  for (int a = -5; a <= 5; ++a)
    for (int bb = a; bb <= a + 40; ++bb) {
      int brute = bb + 1;
      while (brute + 1 - a > 12 * (brute - bb)) ++brute;
      CHECK(witness_root_level(a, bb, b) == brute);
      const int h1 = brute - bb, h2 = brute - a + 1;
      CHECK(is_admissible({0, h1, h2}, b));
    }
}

TEST_CASE("tree constant equals interval constant for level weights") {
  auto t = build_homogeneous_slab(2, 8, 0);
  auto m = canonical_flow(t);
  auto w = level_weight(t, alternating());
  auto tree = ap_constant(w, m, Beta{}, Rational(2));
  auto ints = level_ap_constant(alternating(), 0, 8, 0);
  CHECK(*tree.constant_exact == ints.constant);

  for (const LevelWeight& W : {alternating(), LevelWeight::periodic({Rational(1), Rational(3), Rational(2)}),
                               LevelWeight::exponential(Rational(3, 2))}) {
    auto cert = theorem_th01_check(W, 2, 9, 0);
    CHECK(cert.per_trapezoid_equal);
    CHECK(cert.suprema_equal);
    CHECK(cert.intervals_matched > 0);
  }
  auto c3 = theorem_th01_check(LevelWeight::constant(5), 3, 5, 0);
  CHECK(c3.tree_constant == 1);
  CHECK(c3.interval_constant == 1);
}

TEST_CASE("envelope ratio for the unit weight") {
  std::vector<int> ones(80, 1);
  auto path = build_general_slab(ones, 80, 0);
  std::vector<Rational> one{Rational(1)};
  auto m = flow_from_bottom(path, one);
  auto w = constant_weight(path, 1);
  PrefixSums<Rational> s(path, std::vector<Rational>(m.values().begin(), m.values().end()));
  const Trapezoid r{0, 3, 6};
  CHECK(s.sum(envelope(Beta{}, r)) / s.sum(r) == Rational(71, 3));
  auto cert = theorem_th1_check(w, m, Beta{});
  CHECK(cert.per_trapezoid_holds);
  CHECK(cert.global_holds);
  CHECK(cert.trapezoids_checked > 0);

  auto alt = level_weight(path, alternating());
  auto c2 = theorem_th1_check(alt, m, Beta{});
  CHECK(c2.per_trapezoid_holds);
  CHECK(c2.global_holds);
}

TEST_CASE("cover constants are finite and at least one") {
  for (int h1 = 1; h1 <= 20; ++h1)
    for (int h2 = 2 * h1; h2 <= 12 * h1; ++h2) {
      auto c = cover_constants(Beta{}, {0, h1, h2}, 2);
      CHECK(c.linear >= 1);
      CHECK(c.quadratic >= 1);
    }
}

TEST_CASE("subset inequalities") {
  auto t = build_homogeneous_slab(2, 6, 0);
  auto m = canonical_flow(t);
  Beta b;
  auto w = level_weight(t, alternating());
  const Rational A = *ap_constant(w, m, b, Rational(2)).constant_exact;
  auto pre = lemma_pre_reverse_check(w, m, b, Rational(1, 2), A, 4, 99);
  CHECK(pre.holds);
  CHECK(pre.samples > 0);
  CHECK(pre.worst_ratio < 1);
  auto iv = thAinf_condition_iv_check(w, m, b, Rational(1, 2), 4, 99);
  CHECK(iv.worst_ratio == pre.worst_ratio);
  // Every sample respects the mass budget.
  auto fam = enumerate_admissible(t, b);
  for (std::size_t i = 1; i < fam.size(); i += 37)
    for (auto& s : sample_subsets(w, m, fam[i], Rational(1, 3), 3, 1)) CHECK(s.mu_ratio <= Rational(1, 3));
}

TEST_CASE("reverse Hoelder and openness") {
  auto t = build_homogeneous_slab(2, 7, 0);
  auto m = canonical_flow(t);
  Beta b;
  auto w = level_weight(t, alternating());
  auto rh = reverse_holder_search(w, m, b, 0, 10);
  REQUIRE(rh.epsilon);
  CHECK(*rh.epsilon >= Rational(1, 1024));
  for (std::size_t i = 1; i < rh.rows.size(); ++i)
    CHECK(rh.rows[i].constant.upper() <= rh.rows[i - 1].constant.upper() + 1e-12);
  auto open = openness_check(w, m, b, Rational(2), *rh.epsilon);
  CHECK(open.holds);
  auto one = openness_check(constant_weight(t, 3), m, b, Rational(2), Rational(1, 4));
  CHECK(one.holds);
}

TEST_CASE("condition iii") {
  auto t = build_homogeneous_slab(2, 7, 0);
  auto m = canonical_flow(t);
  Beta b;
  auto one = constant_weight(t, 1);
  auto r1 = thAinf_condition_iii_check(one, m, b, Rational(1, 2), Interval(1.0));
  CHECK(r1.delta == 0);
  auto w = level_weight(t, LevelWeight::periodic({Rational(8), Rational(1), Rational(2)}));
  auto ainf = ainfty_constant(w, m, b).constant;
  Rational previous = 2;
  for (int k = 1; k <= 6; ++k) {
    auto row = thAinf_condition_iii_check(w, m, b, Rational(1, 1 << k), ainf);
    CHECK(row.delta <= previous);
    CHECK(row.within_bound);
    previous = row.delta;
  }
}

TEST_CASE("mean oscillation") {
  auto t = build_homogeneous_slab(2, 6, 0);
  auto m = canonical_flow(t);
  Beta b;
  std::vector<Rational> pm(t.size());
  for (VertexId v = 0; v < t.size(); ++v) pm[v] = (t.level(v) % 2 == 0) ? Rational(3, 2) : Rational(-3, 2);
  auto fast = bmo_norm(std::span<const Rational>(pm), m, b);
  const Rational slow = reference::bmo_norm(pm, m, b);
  CHECK(fast.norm.lower() <= slow.get_d());
  CHECK(fast.norm.upper() >= slow.get_d());
  std::vector<Rational> c(t.size(), Rational(5));
  CHECK(bmo_norm(std::span<const Rational>(c), m, b).norm.upper() == 0.0);
}

TEST_CASE("log of an A2 weight: oscillation against the A2 constant") {
  auto t = build_homogeneous_slab(2, 6, 0);
  auto m = canonical_flow(t);
  Beta b;
  auto w = level_weight(t, alternating());
  const Rational A = *ap_constant(w, m, b, Rational(2)).constant_exact;
  CHECK(A == Rational(9, 8));
  auto osc = bmo_norm(log_weight(w), m, b, w.values()).norm;
  // On R_1^3 the oscillation of log w is log(2)/2, which exceeds log(9/8).
  CHECK(osc.lower() > std::log(9.0 / 8.0));
  CHECK(std::abs(osc.upper() - std::log(2.0) / 2) < 1e-12);
  // A bound that does hold: 2 log(1 + sqrt([w]_{A_2})).
  CHECK(osc.upper() < 2 * std::log(1 + std::sqrt(A.get_d())));
}

TEST_CASE("exponential round trip") {
  auto t = build_homogeneous_slab(2, 6, 0);
  auto m = canonical_flow(t);
  Beta b;
  auto w = level_weight(t, alternating());
  auto f = log_weight(w);
  std::vector<Rational> grid{Rational(1, 4), Rational(1), Rational(4), Rational(16)};
  auto rep = bmo_to_ainfty(f, m, b, grid, Rational(2), Rational(4), w.values());
  REQUIRE(rep.rows.size() == 4);
  // lambda = 1 recovers w itself.
  CHECK(std::abs(rep.rows[1].ap_constant.upper() - 9.0 / 8.0) < 1e-9);
  REQUIRE(rep.smallest_workable);
  CHECK(*rep.smallest_workable == Rational(1, 4));
  CHECK_FALSE(rep.rows[3].workable);
  std::vector<Interval> zero(t.size(), Interval(0.0));
  std::vector<Rational> key(t.size(), Rational(0));
  auto flat = bmo_to_ainfty(zero, m, b, grid, Rational(2), Rational(4), key);
  for (auto& row : flat.rows) CHECK(row.workable);
}
