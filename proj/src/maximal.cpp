#include "flowtree/maximal.hpp"

#include "flowtree/errors.hpp"
#include "flowtree/kernels.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace flowtree {

namespace {

// best(a, k): the largest average over admissible trapezoids rooted at a
// whose height range [h1, h2) contains k. Stored row by row with
// height(a) + 1 entries per root.
struct BestTable {
  std::vector<std::size_t> offset;
  std::vector<Rational> value;
  std::vector<Trapezoid> arg;
  std::vector<std::uint8_t> set;
};

template <class Average>
BestTable best_table(const TruncatedTree& t, Beta b, EnumerationOptions opt, Average&& average) {
  BestTable bt;
  bt.offset.resize(t.size() + 1);
  bt.offset[0] = 0;
  for (VertexId x = 0; x < t.size(); ++x) bt.offset[x + 1] = bt.offset[x] + static_cast<std::size_t>(t.height(x) + 1);
  bt.value.assign(bt.offset.back(), Rational(0));
  bt.arg.assign(bt.offset.back(), Trapezoid{});
  bt.set.assign(bt.offset.back(), 0);
  const auto n = static_cast<std::ptrdiff_t>(t.size());
#pragma omp parallel if (n > 64)
  {
    std::vector<Trapezoid> family;
    std::vector<Rational> values;
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto a = static_cast<VertexId>(i);
      family.clear();
      admissible_at_root(t, b, a, opt, family);
      values.resize(family.size());
      for (std::size_t j = 0; j < family.size(); ++j) values[j] = average(family[j]);
      const std::size_t o = bt.offset[a];
      // Family is grouped by h1 ascending, h2 ascending within a group. A
      // descending sweep over h2 gives the best pair with h2 > k; ">=" keeps
      // the smallest h2 among ties, strict ">" across groups the smallest h1.
      std::size_t end = family.size();
      std::vector<std::size_t> starts;
      for (std::size_t j = 0; j < family.size(); ++j)
        if (j == 0 || family[j].h1 != family[j - 1].h1) starts.push_back(j);
      std::vector<std::pair<Rational, Trapezoid>> group_best;
      for (std::size_t g = starts.size(); g-- > 0;) {
        const std::size_t begin = starts[g];
        const int h1 = family[begin].h1;
        const int top = family[end - 1].h2 - 1;
        group_best.assign(static_cast<std::size_t>(top - h1 + 1), {Rational(0), Trapezoid{}});
        std::size_t j = end;
        bool have = false;
        Rational run;
        Trapezoid run_arg;
        for (int k = top; k >= h1; --k) {
          while (j > begin && family[j - 1].h2 > k) {
            --j;
            if (!have || values[j] >= run) {
              run = values[j];
              run_arg = family[j];
              have = true;
            }
          }
          group_best[static_cast<std::size_t>(k - h1)] = {run, run_arg};
        }
        end = begin;
        // Later groups (larger h1) were merged first; overwrite on ">=" so
        // the smallest h1 wins ties.
        for (int k = h1; k <= top; ++k) {
          const std::size_t slot = o + static_cast<std::size_t>(k);
          auto& gb = group_best[static_cast<std::size_t>(k - h1)];
          if (!bt.set[slot] || gb.first >= bt.value[slot]) {
            bt.value[slot] = gb.first;
            bt.arg[slot] = gb.second;
            bt.set[slot] = 1;
          }
        }
      }
    }
  }
  return bt;
}

MaximalField collect(const TruncatedTree& t, const BestTable& bt) {
  MaximalField out;
  out.values.assign(t.size(), Rational(0));
  out.argmax.assign(t.size(), Trapezoid{});
  const auto n = static_cast<std::ptrdiff_t>(t.size());
#pragma omp parallel for schedule(dynamic, 64) if (n > 256)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto x = static_cast<VertexId>(i);
    bool have = false;
    VertexId a = x;
    for (int k = 0; a != kNoVertex; ++k, a = t.pred(a)) {
      if (k > t.height(a)) continue;
      const std::size_t slot = bt.offset[a] + static_cast<std::size_t>(k);
      if (!bt.set[slot]) continue;
      if (!have || bt.value[slot] > out.values[x]) {
        out.values[x] = bt.value[slot];
        out.argmax[x] = bt.arg[slot];
        have = true;
      }
    }
  }
  return out;
}

void check_size(const TruncatedTree& t, std::span<const Rational> f) {
  if (f.size() != t.size()) throw InvalidInput("function size does not match the tree");
}

}  // namespace

MaximalField maximal_function(const FlowMeasure& m, Beta b, std::span<const Rational> f, EnumerationOptions opt) {
  const TruncatedTree& t = m.tree();
  check_size(t, f);
  std::vector<Rational> g(t.size());
  for (VertexId y = 0; y < t.size(); ++y) g[y] = abs(f[y]) * m[y];
  PrefixSums<Rational> s(t, std::move(g));
  return collect(t, best_table(t, b, opt, [&](const Trapezoid& r) {
    return Rational(s.sum(r) / (Rational(r.h2 - r.h1) * m[r.root]));
  }));
}

MaximalField weighted_maximal_function(const Weight& w, const FlowMeasure& m, Beta b, std::span<const Rational> f,
                                       EnumerationOptions opt) {
  const TruncatedTree& t = m.tree();
  check_size(t, f);
  std::vector<Rational> g(t.size()), d(t.size());
  for (VertexId y = 0; y < t.size(); ++y) {
    d[y] = w[y] * m[y];
    g[y] = abs(f[y]) * d[y];
  }
  PrefixSums<Rational> s(t, std::move(g)), mass(t, std::move(d));
  return collect(t, best_table(t, b, opt, [&](const Trapezoid& r) { return Rational(s.sum(r) / mass.sum(r)); }));
}

Weak11Report weak11_constant(const Weight& w, const FlowMeasure& m, Beta b, std::span<const Rational> f,
                             std::span<const Rational> lambda_grid, bool weighted) {
  const TruncatedTree& t = m.tree();
  check_size(t, f);
  const MaximalField mf = weighted ? weighted_maximal_function(w, m, b, f) : maximal_function(m, b, f);
  Rational norm = 0;
  for (VertexId y = 0; y < t.size(); ++y) norm += abs(f[y]) * w[y] * m[y];
  Weak11Report rep;
  for (const Rational& lambda : lambda_grid) {
    if (lambda <= 0) throw InvalidInput("weak-type levels must be positive");
    Weak11Row row{lambda, 0, 0};
    for (VertexId y = 0; y < t.size(); ++y)
      if (mf.values[y] > lambda) row.level_set_mass += w[y] * m[y];
    if (norm != 0) row.ratio = lambda * row.level_set_mass / norm;
    if (row.ratio > rep.constant) rep.constant = row.ratio;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

std::vector<SampleFunction> standard_samples(const FlowMeasure& m, Beta b, int count, std::uint64_t seed) {
  const TruncatedTree& t = m.tree();
  std::mt19937_64 rng(seed);
  std::vector<SampleFunction> out;
  out.push_back({"constant", std::vector<Rational>(t.size(), Rational(1))});
  for (int i = 0; i < count; ++i) {
    const auto x = static_cast<VertexId>(rng() % t.size());
    std::vector<Rational> v(t.size(), Rational(0));
    v[x] = 1;
    out.push_back({"point-mass " + std::to_string(x), std::move(v)});
  }
  const auto family = enumerate_admissible(t, b);
  for (int i = 0; i < count && !family.empty(); ++i) {
    const Trapezoid& r = family[rng() % family.size()];
    std::vector<Rational> v(t.size(), Rational(0));
    for (VertexId y : members(t, r)) v[y] = 1;
    out.push_back({"indicator " + describe(r), std::move(v)});
  }
  for (int i = 0; i < count; ++i) {
    std::map<int, int> sign;
    std::vector<Rational> v(t.size());
    for (VertexId y = 0; y < t.size(); ++y) {
      auto it = sign.find(t.level(y));
      if (it == sign.end()) it = sign.emplace(t.level(y), (rng() & 1) ? 1 : -1).first;
      v[y] = it->second;
    }
    out.push_back({"level-signs " + std::to_string(i), std::move(v)});
  }
  return out;
}

SampleFunction necessity_sample(const Weight& w, const FlowMeasure& m, const Rational& p, const Trapezoid& r) {
  if (p <= 1) throw InvalidInput("necessity sample needs p > 1");
  const TruncatedTree& t = m.tree();
  std::vector<Rational> v(t.size(), Rational(0));
  const double e = -1.0 / Rational(p - 1).get_d();
  for (VertexId y : members(t, r)) v[y] = p == 2 ? Rational(1 / w[y]) : Rational(std::pow(w[y].get_d(), e));
  return {"necessity " + describe(r), std::move(v)};
}

namespace {

// Sum of |v|^p w mu, exact for integer p.
Interval lp_mass(std::span<const Rational> v, const Weight& w, const FlowMeasure& m, const Rational& p) {
  if (p.get_den() == 1 && p.get_num().fits_slong_p()) {
    const long k = p.get_num().get_si();
    Rational s = 0;
    for (VertexId y = 0; y < v.size(); ++y)
      if (v[y] != 0) s += pow_int(abs(v[y]), k) * w[y] * m[y];
    return to_interval(s);
  }
  Interval s(0.0);
  std::map<Rational, Interval> cache;
  for (VertexId y = 0; y < v.size(); ++y) {
    if (v[y] == 0) continue;
    const Rational a = abs(v[y]);
    auto it = cache.find(a);
    if (it == cache.end()) it = cache.emplace(a, pow(to_interval(a), p)).first;
    s += it->second * to_interval(w[y] * m[y]);
  }
  return s;
}

}  // namespace

NormReport lp_operator_norm(const Weight& w, const FlowMeasure& m, Beta b, const Rational& p,
                            std::span<const SampleFunction> samples, bool include_necessity) {
  if (p <= 1) throw InvalidInput("operator norm needs p > 1");
  std::vector<SampleFunction> all(samples.begin(), samples.end());
  if (include_necessity) all.push_back(necessity_sample(w, m, p, ap_constant(w, m, b, p).argmax));
  NormReport rep;
  const Rational inv = 1 / p;
  bool have = false;
  for (const SampleFunction& s : all) {
    const Interval den = lp_mass(s.values, w, m, p);
    if (den.upper() == 0.0) continue;
    const MaximalField mf = maximal_function(m, b, s.values);
    const Interval num = lp_mass(mf.values, w, m, p);
    const Interval ratio = pow(Interval(num / den), inv);
    rep.rows.push_back({s.name, ratio});
    if (!have || sup_greater(ratio, rep.norm)) rep.argmax = s.name;
    if (!have) rep.norm = ratio;
    else sup_merge(rep.norm, ratio);
    have = true;
  }
  return rep;
}

}  // namespace flowtree
