#include "flowtree/errors.hpp"
#include "flowtree/kernels.hpp"
#include "flowtree/maximal.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace flowtree {

const char* to_string(SplitCase c) {
  switch (c) {
    case SplitCase::kChildren: return "children";
    case SplitCase::kUnitBase: return "unit-base";
    case SplitCase::kPushDown: return "push-down";
    case SplitCase::kHeightSplit: return "height-split";
  }
  return "unknown";
}

Split split_trapezoid(const TruncatedTree& t, Beta b, const Trapezoid& r) {
  if (r.is_singleton()) throw InvalidInput("singletons are not split");
  if (!is_admissible(r, b)) throw InvalidInput("split of a non-admissible trapezoid " + describe(r));
  if (!fits(t, r)) throw WindowTooSmall("trapezoid " + describe(r) + " does not fit the window");
  Split s;
  const auto children = t.successors(r.root);
  if (r.h1 == 1 && r.h2 == 2) {
    s.case_tag = SplitCase::kChildren;
    for (VertexId y : children) s.pieces.push_back(singleton(y));
  } else if (r.h1 == 1) {
    s.case_tag = SplitCase::kUnitBase;
    for (VertexId y : children) {
      s.pieces.push_back(singleton(y));
      s.pieces.push_back({y, 1, r.h2 - 1});
    }
  } else if (r.h2 - 1 <= b.value() * (r.h1 - 1)) {
    s.case_tag = SplitCase::kPushDown;
    for (VertexId y : children) s.pieces.push_back({y, r.h1 - 1, r.h2 - 1});
  } else {
    s.case_tag = SplitCase::kHeightSplit;
    s.pieces.push_back({r.root, r.h1, 2 * r.h1});
    s.pieces.push_back({r.root, 2 * r.h1, r.h2});
  }
  for (const Trapezoid& p : s.pieces)
    if (!is_admissible(p, b)) throw Error("split produced a non-admissible piece " + describe(p));
  return s;
}

SplitCheck check_split(const FlowMeasure& m, Beta b, const Trapezoid& parent, const Split& s,
                       std::span<const Rational> w) {
  const TruncatedTree& t = m.tree();
  auto mass = [&](std::span<const VertexId> set) {
    Rational total = 0;
    for (VertexId y : set) total += w.empty() ? m[y] : w[y] * m[y];
    return total;
  };
  SplitCheck c;
  std::vector<VertexId> whole = members(t, parent);
  const Rational parent_mass = mass(whole);
  std::vector<VertexId> joined;
  c.all_admissible = true;
  c.all_fit = true;
  for (const Trapezoid& p : s.pieces) {
    c.all_admissible = c.all_admissible && is_admissible(p, b);
    c.all_fit = c.all_fit && fits(t, p);
    if (!fits(t, p)) continue;
    std::vector<VertexId> part = members(t, p);
    const Rational ratio = mass(part) / parent_mass;
    if (ratio < c.min_ratio) c.min_ratio = ratio;
    joined.insert(joined.end(), part.begin(), part.end());
  }
  std::sort(whole.begin(), whole.end());
  std::sort(joined.begin(), joined.end());
  c.disjoint = std::adjacent_find(joined.begin(), joined.end()) == joined.end();
  c.exact_union = joined == whole;
  return c;
}

SplitRule compute_split_rule(const FlowMeasure& m, Beta b, const Weight* w) {
  const TruncatedTree& t = m.tree();
  std::vector<Rational> g(t.size());
  for (VertexId y = 0; y < t.size(); ++y) g[y] = w ? (*w)[y] * m[y] : m[y];
  PrefixSums<Rational> mass(t, std::move(g));
  auto family = enumerate_admissible(t, b);
  std::erase_if(family, [](const Trapezoid& r) { return r.is_singleton(); });

  struct Local {
    Rational ratio{2};
    Trapezoid piece{};
    SplitCase tag = SplitCase::kChildren;
    int count = 0;
  };
  std::vector<Local> local(family.size());
  const auto n = static_cast<std::ptrdiff_t>(family.size());
#pragma omp parallel for schedule(dynamic, 64) if (n > 256)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Trapezoid& r = family[static_cast<std::size_t>(i)];
    const Split s = split_trapezoid(t, b, r);
    const Rational whole = mass.sum(r);
    Local& l = local[static_cast<std::size_t>(i)];
    l.tag = s.case_tag;
    l.count = static_cast<int>(s.pieces.size());
    for (const Trapezoid& p : s.pieces) {
      Rational ratio = mass.sum(p) / whole;
      if (ratio < l.ratio) {
        l.ratio = std::move(ratio);
        l.piece = p;
      }
    }
  }
  SplitRule rule;
  rule.splits_checked = family.size();
  for (std::size_t i = 0; i < family.size(); ++i) {
    rule.n = std::max(rule.n, local[i].count);
    if (local[i].ratio < rule.c_d) {
      rule.c_d = local[i].ratio;
      rule.worst_parent = family[i];
      rule.worst_piece = local[i].piece;
      rule.worst_case = local[i].tag;
    }
  }
  return rule;
}

namespace {

// Shared stopping time: averages are num(R) / den(R).
CzFamily stopping_time(const FlowMeasure& m, Beta b, std::span<const Rational> f, const Rational& lambda,
                       const Trapezoid& r0, const Rational& d_cz, const PrefixSums<Rational>& num,
                       const PrefixSums<Rational>& den, std::span<const Rational> w) {
  const TruncatedTree& t = m.tree();
  if (f.size() != t.size()) throw InvalidInput("function size does not match the tree");
  if (lambda <= 0) throw InvalidInput("lambda must be positive");
  if (!is_admissible(r0, b)) throw InvalidInput("start trapezoid is not admissible");
  if (!fits(t, r0)) throw WindowTooSmall("start trapezoid " + describe(r0) + " does not fit the window");
  auto average = [&](const Trapezoid& r) { return Rational(num.sum(r) / den.sum(r)); };
  if (average(r0) >= lambda) throw InvalidInput("average over the start trapezoid is not below lambda");

  CzFamily out;
  out.lambda = lambda;
  out.start = r0;
  out.d_cz = d_cz;
  out.partitions_exact = true;
  std::vector<Trapezoid> stack{r0};
  while (!stack.empty()) {
    const Trapezoid r = stack.back();
    stack.pop_back();
    if (r.is_singleton()) continue;
    const Split s = split_trapezoid(t, b, r);
    ++out.splits;
    if (!check_split(m, b, r, s, w).ok()) out.partitions_exact = false;
    // Push in reverse so pieces are visited in split order.
    for (auto it = s.pieces.rbegin(); it != s.pieces.rend(); ++it) {
      if (average(*it) >= lambda) out.pieces.push_back(*it);
      else stack.push_back(*it);
    }
  }

  out.averages_above = true;
  out.averages_below = true;
  for (const Trapezoid& e : out.pieces) {
    Rational a = average(e);
    out.averages_above = out.averages_above && a >= lambda;
    out.averages_below = out.averages_below && a < d_cz * lambda;
    out.averages.push_back(std::move(a));
  }
  std::vector<std::uint8_t> covered(t.size(), 0);
  out.disjoint = true;
  for (const Trapezoid& e : out.pieces)
    for (VertexId y : members(t, e)) {
      if (covered[y]) out.disjoint = false;
      covered[y] = 1;
    }
  out.residual_ok = true;
  for (VertexId y : members(t, r0))
    if (!covered[y] && abs(f[y]) >= lambda) {
      out.residual_ok = false;
      out.residual_witness = y;
      break;
    }
  return out;
}

}  // namespace

CzFamily cz_decompose(const FlowMeasure& m, Beta b, std::span<const Rational> f, const Rational& lambda,
                      const Trapezoid& r0, const SplitRule* rule) {
  const TruncatedTree& t = m.tree();
  if (f.size() != t.size()) throw InvalidInput("function size does not match the tree");
  std::optional<SplitRule> own;
  if (!rule) rule = &own.emplace(compute_split_rule(m, b));
  std::vector<Rational> g(t.size()), d(t.size());
  for (VertexId y = 0; y < t.size(); ++y) {
    d[y] = m[y];
    g[y] = abs(f[y]) * m[y];
  }
  PrefixSums<Rational> num(t, std::move(g)), den(t, std::move(d));
  return stopping_time(m, b, f, lambda, r0, rule->d_cz(), num, den, {});
}

Assumption1Report assumption1_check(const Weight& w, const FlowMeasure& m, Beta b, int samples_per_trapezoid,
                                    std::uint64_t seed, const Rational& margin, std::size_t max_trapezoids,
                                    const SplitRule* rule) {
  const TruncatedTree& t = m.tree();
  std::optional<SplitRule> own;
  if (!rule) rule = &own.emplace(compute_split_rule(m, b));
  Assumption1Report rep;
  rep.c_d = rule->c_d;
  rep.margin = margin;
  const Rational xi = 1 - rule->c_d;

  std::vector<Rational> g(t.size());
  for (VertexId y = 0; y < t.size(); ++y) g[y] = w[y] * m[y];
  PrefixSums<Rational> mass(t, std::move(g));

  auto family = enumerate_admissible(t, b);
  std::erase_if(family, [](const Trapezoid& r) { return r.is_singleton(); });
  if (max_trapezoids != 0 && family.size() > max_trapezoids) family.resize(max_trapezoids);

  struct Local {
    std::optional<SubsetSample> worst;
    std::optional<Trapezoid> worst_complement;  // S = R minus this piece
    Rational ratio{-1};
    std::size_t samples = 0;
  };
  std::vector<Local> local(family.size());
  const auto n = static_cast<std::ptrdiff_t>(family.size());
#pragma omp parallel for schedule(dynamic, 16) if (n > 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Trapezoid& r = family[static_cast<std::size_t>(i)];
    Local& l = local[static_cast<std::size_t>(i)];
    for (SubsetSample& s : sample_subsets(w, m, r, xi, samples_per_trapezoid, seed + static_cast<std::uint64_t>(i))) {
      ++l.samples;
      if (s.w_ratio > l.ratio) {
        l.ratio = s.w_ratio;
        l.worst = std::move(s);
        l.worst_complement.reset();
      }
    }
    const Rational whole = mass.sum(r);
    for (const Trapezoid& p : split_trapezoid(t, b, r).pieces) {
      ++l.samples;
      Rational ratio = 1 - mass.sum(p) / whole;
      if (ratio > l.ratio) {
        l.ratio = std::move(ratio);
        l.worst.reset();
        l.worst_complement = p;
      }
    }
  }

  std::size_t worst_index = family.size();
  for (std::size_t i = 0; i < family.size(); ++i) {
    rep.samples += local[i].samples;
    if (local[i].ratio > rep.eta) {
      rep.eta = local[i].ratio;
      worst_index = i;
    }
  }
  if (worst_index < family.size()) {
    Local& l = local[worst_index];
    if (l.worst) {
      rep.witness = std::move(l.worst);
    } else {
      const Trapezoid& r = family[worst_index];
      const std::vector<VertexId> piece = members(t, *l.worst_complement);
      SubsetSample s{r, {}, 0, l.ratio};
      Rational mu_s = 0;
      for (VertexId y : members(t, r))
        if (std::find(piece.begin(), piece.end(), y) == piece.end()) {
          s.s.push_back(y);
          mu_s += m[y];
        }
      s.mu_ratio = mu_s / trapezoid_measure(m, r);
      rep.witness = std::move(s);
    }
  }
  rep.passes = rep.eta < 1 - margin;
  rep.alpha = 1 - rep.eta;
  rep.beta = rule->c_d;
  return rep;
}

CzFamily cz_decompose_weighted(const Weight& w, const FlowMeasure& m, Beta b, std::span<const Rational> f,
                               const Rational& lambda, const Trapezoid& r0, int assumption_samples,
                               std::uint64_t seed) {
  if (f.size() != m.tree().size()) throw InvalidInput("function size does not match the tree");
  const SplitRule plain = compute_split_rule(m, b);
  const Assumption1Report a1 = assumption1_check(w, m, b, assumption_samples, seed, kDefaultAssumptionMargin, 0, &plain);
  return cz_decompose_weighted(w, m, b, f, lambda, r0, a1, compute_split_rule(m, b, &w));
}

CzFamily cz_decompose_weighted(const Weight& w, const FlowMeasure& m, Beta b, std::span<const Rational> f,
                               const Rational& lambda, const Trapezoid& r0, const Assumption1Report& a1,
                               const SplitRule& weighted) {
  const TruncatedTree& t = m.tree();
  if (f.size() != t.size()) throw InvalidInput("function size does not match the tree");
  if (!a1.passes) {
    std::ostringstream msg;
    msg << "weight fails assumption 1: eta = " << to_string(a1.eta);
    if (a1.witness) msg << " at " << describe(a1.witness->r) << " with |S| = " << a1.witness->s.size();
    throw Inapplicable(msg.str());
  }
  std::vector<Rational> g(t.size()), d(t.size());
  for (VertexId y = 0; y < t.size(); ++y) {
    d[y] = w[y] * m[y];
    g[y] = abs(f[y]) * d[y];
  }
  PrefixSums<Rational> num(t, std::move(g)), den(t, std::move(d));
  return stopping_time(m, b, f, lambda, r0, weighted.d_cz(), num, den, w.values());
}

ReverseHolderResult weighted_reverse_holder(const Weight& w, const FlowMeasure& m, Beta b, int k_min, int k_max,
                                            const Rational& cap) {
  const TruncatedTree& t = m.tree();
  if (k_min > k_max) throw InvalidInput("empty epsilon grid");
  ReverseHolderResult res;
  res.cap = cap;
  std::vector<Interval> gw(t.size());
  for (VertexId y = 0; y < t.size(); ++y) gw[y] = to_interval(w[y] * m[y]);
  PrefixSums<Interval> sw(t, std::move(gw));
  SliceExtrema<Rational> ext(t, w.values());
  std::size_t family = 0;
  for (int k = k_min; k <= k_max; ++k) {
    const Rational eps = k >= 0 ? Rational(1, mpz_class(1) << k) : Rational(mpz_class(1) << -k);
    std::map<Rational, Interval> cache;
    std::vector<Interval> ge(t.size());
    for (VertexId y = 0; y < t.size(); ++y) {
      auto it = cache.find(w[y]);
      if (it == cache.end()) it = cache.emplace(w[y], pow(to_interval(w[y]), Rational(-eps))).first;
      ge[y] = it->second * to_interval(m[y]);
    }
    PrefixSums<Interval> se(t, std::move(ge));
    const Rational inv = 1 / (1 + eps);
    auto sup = family_sup<Interval>(t, b, {}, [&](const Trapezoid& r) {
      auto [lo, hi] = ext.range(r);
      if (lo == hi) return Interval(1.0);
      const Interval mass = sw.sum(r);
      const Interval mr = to_interval(Rational(r.h2 - r.h1) * m[r.root]);
      return Interval(pow(Interval(se.sum(r) / mass), inv) * mass / mr);
    });
    family = sup.family_size;
    res.rows.push_back({eps, sup.value, sup.argmax});
    if (!res.epsilon && sup.value.upper() <= cap.get_d()) {
      res.epsilon = eps;
      res.constant = sup.value;
    }
  }
  res.window = describe_window(t, {}, family);
  return res;
}

ReverseHolderProof reverse_holder_proof(const Rational& d_cz, const Rational& gamma, const Interval& ap_constant,
                                        const Rational& p) {
  if (gamma <= 0 || gamma >= 1) throw InvalidInput("gamma must lie in (0, 1)");
  if (d_cz < 1 || p < 1) throw InvalidInput("need D_CZ >= 1 and p >= 1");
  ReverseHolderProof out;
  out.eta = Interval(1.0) - pow(to_interval(1 - gamma), p) / ap_constant;
  const Interval k = to_interval(d_cz / gamma);
  if (!(out.eta.lower() > 0.0)) {
    // eta <= 0 would make every eps work; keep the certificate conservative.
    out.eta = Interval(std::max(out.eta.lower(), 0.0), std::max(out.eta.upper(), 0.0));
    return out;
  }
  out.eps_limit = -log(out.eta) / log(k);
  const double half = out.eps_limit.lower() / 2;
  if (!(half > 0.0)) return out;
  out.eps = 1;
  while (out.eps.get_d() > half) out.eps /= 2;
  const Interval ke = pow(k, out.eps);
  out.contraction = ke * out.eta;
  out.valid = out.contraction.upper() < 1.0;
  // sum_R w^{1+eps} mu <= C' avg(w)^eps w_mu(R); the normalized constant is C'^{1/(1+eps)}.
  if (out.valid) out.constant = pow(Interval(Interval(1.0) + ke / (Interval(1.0) - out.contraction)), Rational(1 / (1 + out.eps)));
  return out;
}

}  // namespace flowtree
