#include "flowtree/errors.hpp"
#include "flowtree/trapezoid.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace flowtree;

namespace {

std::set<VertexId> member_set(const TruncatedTree& t, const Trapezoid& r) {
  auto v = members(t, r);
  return {v.begin(), v.end()};
}

// Membership test straight from the definition, over every vertex.
std::set<VertexId> defining_set(const TruncatedTree& t, const Trapezoid& r) {
  std::set<VertexId> out;
  for (VertexId y = 0; y < t.size(); ++y) {
    if (!is_below(t, y, r.root)) continue;
    const int d = geodesic_distance(t, r.root, y);
    if (r.h1 <= d && d < r.h2) out.insert(y);
  }
  return out;
}

TruncatedTree mixed_slab() {
  std::vector<int> counts;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 400; ++i) counts.push_back(1 + static_cast<int>(rng() % 3 == 0));
  return build_general_slab(counts, 7, 0);
}

}  // namespace

TEST_CASE("members and measure") {
  auto t = build_homogeneous_slab(2, 6, 0);
  auto m = canonical_flow(t);
  VertexId x = t.top();
  auto kids = t.successors(x);
  CHECK(member_set(t, {x, 1, 2}) == std::set<VertexId>(kids.begin(), kids.end()));
  CHECK(member_set(t, singleton(x)) == std::set<VertexId>{x});
  CHECK(members(t, {x, 2, 4}).size() == 12);
  CHECK_THROWS_AS(members(t, {x, 2, 8}), WindowTooSmall);

  VertexId at5 = t.vertices_at_level(5)[0];
  CHECK(trapezoid_measure(m, {at5, 2, 4}) == 64);
  CHECK(trapezoid_measure(m, singleton(at5)) == m[at5]);
  CHECK(trapezoid_measure(m, {t.vertices_at_level(5)[1], 3, 6}) == 96);

  for (const Trapezoid& r : enumerate_admissible(t, Beta{})) {
    CHECK(member_set(t, r) == defining_set(t, r));
    CHECK(trapezoid_measure(m, r) == set_measure(m, members(t, r)));
  }
}

TEST_CASE("measure formula on a mixed-degree flow") {
  auto t = mixed_slab();
  std::vector<Rational> bottom;
  for (std::size_t i = 0; i < t.vertices_at_level(0).size(); ++i) bottom.emplace_back(static_cast<long>(i % 5 + 1), 3);
  auto m = flow_from_bottom(t, bottom);
  for (const Trapezoid& r : enumerate_admissible(t, Beta{})) {
    auto mem = members(t, r);
    CHECK(set_measure(m, mem) == Rational(r.h2 - r.h1) * m[r.root]);
  }
}

TEST_CASE("admissibility and envelopes") {
  Beta b;
  CHECK(is_admissible({0, 3, 6}, b));
  CHECK(is_admissible({0, 1, 12}, b));
  CHECK_FALSE(is_admissible({0, 1, 13}, b));
  CHECK_FALSE(is_admissible({0, 2, 3}, b));
  CHECK(is_admissible(singleton(0), b));
  CHECK(envelope(b, {0, 3, 6}) == Trapezoid{0, 1, 72});
  CHECK(envelope(b, {0, 12, 24}) == Trapezoid{0, 1, 288});
  CHECK(envelope(b, singleton(5)) == singleton(5));
  CHECK_THROWS_AS(Beta(11), InvalidInput);
  CHECK(envelope(Beta(20), {0, 21, 42}) == Trapezoid{0, 2, 840});
  // The envelope is never admissible for h2 >= 2 h1 >= 2.
  for (int h1 = 1; h1 <= 30; ++h1)
    for (int h2 = 2 * h1; h2 <= 12 * h1; ++h2) CHECK_FALSE(is_admissible(envelope(b, {0, h1, h2}), b));
}

TEST_CASE("enumeration") {
  std::vector<int> ones(3, 1);
  auto path = build_general_slab(ones, 3, 0);
  auto fam = enumerate_admissible(path, Beta{});
  std::vector<Trapezoid> expected{singleton(0), {0, 1, 2}, {0, 1, 3}, {0, 1, 4}, {0, 2, 4},
                                  singleton(1), {1, 1, 2}, {1, 1, 3},
                                  singleton(2), {2, 1, 2},
                                  singleton(3)};
  CHECK(fam == expected);

  auto one_level = build_homogeneous_slab(2, 1, 0);
  auto fam1 = enumerate_admissible(one_level, Beta{});
  CHECK(fam1.size() == 4);
  CHECK(fam1[1] == Trapezoid{0, 1, 2});

  CHECK_THROWS_AS(build_homogeneous_slab(2, 30, 0, 40), SizeCapExceeded);
}

TEST_CASE("envelope-restricted enumeration") {
  std::vector<int> ones(60, 1);
  auto path = build_general_slab(ones, 60, 0);
  for (const Trapezoid& r : enumerate_admissible(path, Beta{}, {.envelopes_in_window = true})) {
    CHECK(fits(path, envelope(Beta{}, r)));
  }
  std::size_t full = enumerate_admissible(path, Beta{}).size();
  std::size_t restricted = enumerate_admissible(path, Beta{}, {.envelopes_in_window = true}).size();
  CHECK(restricted < full);
}

TEST_CASE("containing trapezoids") {
  auto t = build_homogeneous_slab(2, 4, 0);
  Beta b;
  CHECK(containing_trapezoids(t, b, t.top()).size() == 1);
  VertexId x = t.successors(t.successors(t.top())[0])[1];
  auto fam = containing_trapezoids(t, b, x);
  std::set<std::tuple<VertexId, int, int>> got, want;
  for (auto& r : fam) got.insert({r.root, r.h1, r.h2});
  for (auto& r : enumerate_admissible(t, b))
    if (contains(t, r, x)) want.insert({r.root, r.h1, r.h2});
  CHECK(got == want);
  CHECK(got.count({t.pred(x), 1, 2}) == 1);
  CHECK(got.count({t.top(), 1, 3}) == 1);
  CHECK(got.count({t.top(), 2, 4}) == 1);
  auto single = build_general_slab({}, 0, 0);
  CHECK(containing_trapezoids(single, b, 0) == std::vector<Trapezoid>{singleton(0)});
  CHECK(enumerate_admissible(single, b) == std::vector<Trapezoid>{singleton(0)});
}

TEST_CASE("structural set relations match member sets") {
  auto t = mixed_slab();
  auto fam = enumerate_admissible(t, Beta{});
  std::vector<std::set<VertexId>> sets;
  for (auto& r : fam) sets.push_back(member_set(t, r));
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20000; ++trial) {
    std::size_t i = rng() % fam.size(), j = rng() % fam.size();
    bool meet = std::any_of(sets[i].begin(), sets[i].end(), [&](VertexId v) { return sets[j].count(v) > 0; });
    bool sub = std::includes(sets[j].begin(), sets[j].end(), sets[i].begin(), sets[i].end());
    REQUIRE(intersects(t, fam[i], fam[j]) == meet);
    REQUIRE(is_subset(t, fam[i], fam[j]) == sub);
  }
}

TEST_CASE("intersection lemma on a binary slab") {
  auto t = build_homogeneous_slab(2, 6, 0);
  auto m = canonical_flow(t);
  Beta b;
  auto fam = enumerate_admissible(t, b);
  long checked = 0, failed = 0;
  for (auto& r1 : fam)
    for (auto& r2 : fam) {
      if (!intersects(t, r1, r2) || m[r1.root] < m[r2.root]) continue;
      ++checked;
      if (!check_lemma_intersection(b, r1, r2, m)) ++failed;
    }
  CHECK(checked > 0);
  CHECK(failed == 0);
  CHECK(check_lemma_intersection(b, fam[3], fam[3], m));
  Trapezoid left{t.successors(t.top())[0], 1, 2}, right{t.successors(t.top())[1], 1, 2};
  CHECK_THROWS_AS(check_lemma_intersection(b, left, right, m), Inapplicable);
}

TEST_CASE("envelope cover pieces") {
  std::vector<int> ones(500, 1);
  auto path = build_general_slab(ones, 500, 0);
  std::vector<Rational> one{Rational(1)};
  auto m = flow_from_bottom(path, one);
  Beta b;
  auto c = envelope_cover(b, {path.top(), 3, 6}, m);
  CHECK(c.case_tag == CoverCase::kLargeBase);
  std::vector<Trapezoid> want{{0, 1, 3}, {0, 1, 4}, {0, 4, 48}, {0, 30, 360}};
  CHECK(c.pieces == want);
  CHECK(c.covers_envelope);
  CHECK(c.all_admissible);
  // R0 ∩ R1 has measure at least mu(x) h1 / beta.
  CHECK(c.overlaps[0].measure >= m[0] * Rational(3, 12));

  auto u = envelope_cover(b, {0, 1, 2}, m);
  CHECK(u.case_tag == CoverCase::kUnitBase);
  CHECK(u.pieces == std::vector<Trapezoid>{{0, 1, 12}, {0, 6, 72}});
  CHECK(u.covers_envelope);

  auto mid = envelope_cover(b, {0, 2, 5}, m);
  CHECK(mid.case_tag == CoverCase::kMediumBase);
  CHECK(mid.covers_envelope);

  CHECK_THROWS_AS(envelope_cover(b, {499, 1, 2}, m), WindowTooSmall);
  CHECK_NOTHROW(envelope_cover(b, {499, 1, 2}, m, false));
}

TEST_CASE("vitali selection") {
  auto t = build_homogeneous_slab(2, 8, 0);
  auto m = canonical_flow(t);
  Beta b;
  Trapezoid big{t.top(), 1, 4};
  CHECK(vitali_select(b, m, {big}) == std::vector<Trapezoid>{big});
  Trapezoid inner{t.successors(t.top())[0], 1, 2};
  auto sel = vitali_select(b, m, {inner, big});
  CHECK(sel == std::vector<Trapezoid>{big});
  CHECK(is_subset(t, inner, envelope(b, big)));

  std::vector<Trapezoid> disjoint;
  for (VertexId v : t.vertices_at_level(3)) disjoint.push_back({v, 1, 3});
  CHECK(vitali_select(b, m, disjoint).size() == disjoint.size());

  std::mt19937_64 rng(9);
  auto fam = enumerate_admissible(t, b);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Trapezoid> pick;
    for (int k = 0; k < 25; ++k) pick.push_back(fam[rng() % fam.size()]);
    auto kept = vitali_select(b, m, pick);
    for (std::size_t i = 0; i < kept.size(); ++i)
      for (std::size_t j = i + 1; j < kept.size(); ++j) CHECK_FALSE(intersects(t, kept[i], kept[j]));
    for (auto& r : pick)
      CHECK(std::any_of(kept.begin(), kept.end(), [&](const Trapezoid& k) { return is_subset(t, r, envelope(b, k)); }));
  }
}
