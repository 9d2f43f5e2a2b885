#include "flowtree/errors.hpp"
#include "flowtree/weights.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

namespace flowtree {

namespace {

// Admissible non-singletons of the window, thinned to at most `limit` by a
// fixed stride when a limit is given.
std::vector<Trapezoid> sampled_family(const TruncatedTree& t, Beta b, std::size_t limit) {
  std::vector<Trapezoid> out;
  for (const Trapezoid& r : enumerate_admissible(t, b))
    if (!r.is_singleton()) out.push_back(r);
  if (limit == 0 || out.size() <= limit) return out;
  std::vector<Trapezoid> thinned;
  const double stride = static_cast<double>(out.size()) / static_cast<double>(limit);
  for (std::size_t i = 0; i < limit; ++i) thinned.push_back(out[static_cast<std::size_t>(static_cast<double>(i) * stride)]);
  return thinned;
}

struct SampleBuilder {
  const Weight& w;
  const FlowMeasure& m;
  const Trapezoid& r;
  Rational budget;
  Rational mu_r;
  Rational w_r;
  std::vector<SubsetSample>& out;

  void add(std::vector<VertexId> s) {
    Rational mu, wmu;
    for (VertexId y : s) {
      mu += m[y];
      wmu += w[y] * m[y];
    }
    if (mu > budget) return;
    std::sort(s.begin(), s.end());
    out.push_back({r, std::move(s), mu / mu_r, wmu / w_r});
  }

  // Greedy fill in the given order, skipping vertices that would overflow.
  void fill(const std::vector<VertexId>& order) {
    std::vector<VertexId> s;
    Rational mu;
    for (VertexId y : order)
      if (mu + m[y] <= budget) {
        mu += m[y];
        s.push_back(y);
      }
    add(std::move(s));
  }
};

}  // namespace

std::vector<SubsetSample> sample_subsets(const Weight& w, const FlowMeasure& m, const Trapezoid& r,
                                         const Rational& xi, int random_samples, std::uint64_t seed) {
  const TruncatedTree& t = m.tree();
  const auto mem = members(t, r);
  std::vector<SubsetSample> out;
  SampleBuilder sb{w, m, r, Rational(0), Rational(0), Rational(0), out};
  for (VertexId y : mem) {
    sb.mu_r += m[y];
    sb.w_r += w[y] * m[y];
  }
  sb.budget = xi * sb.mu_r;
  sb.add({});

  // Heaviest weight first: the natural maximizer of w_mu(S) at fixed mass.
  std::vector<VertexId> order(mem);
  std::stable_sort(order.begin(), order.end(), [&](VertexId a, VertexId c) { return w[a] > w[c]; });
  sb.fill(order);

  std::mt19937_64 rng(seed ^ (static_cast<std::uint64_t>(r.root) << 20) ^ (static_cast<std::uint64_t>(r.h1) << 8) ^
                      static_cast<std::uint64_t>(r.h2));
  for (int i = 0; i < random_samples; ++i) {
    std::shuffle(order.begin(), order.end(), rng);
    sb.fill(order);
  }

  // Whole layers, and the heaviest layers greedily.
  auto layers = descendant_layers(t, r.root, r.h2);
  std::vector<std::pair<Rational, std::size_t>> layer_density;
  for (int k = r.h1; k < static_cast<int>(layers.size()); ++k) {
    sb.add(layers[k]);
    Rational mu, wmu;
    for (VertexId y : layers[k]) {
      mu += m[y];
      wmu += w[y] * m[y];
    }
    layer_density.emplace_back(wmu / mu, static_cast<std::size_t>(k));
  }
  std::stable_sort(layer_density.begin(), layer_density.end(),
                   [](const auto& a, const auto& c) { return a.first > c.first; });
  std::vector<VertexId> by_layer;
  for (auto& [density, k] : layer_density) by_layer.insert(by_layer.end(), layers[k].begin(), layers[k].end());
  sb.fill(by_layer);

  // Members below a single successor of the root.
  if (r.h1 >= 1)
    for (VertexId c : t.successors(r.root)) {
      std::vector<VertexId> s;
      for (VertexId y : mem)
        if (is_below(t, y, c)) s.push_back(y);
      sb.add(std::move(s));
    }
  return out;
}

namespace {

SubsetBound subset_sweep(const Weight& w, const FlowMeasure& m, Beta b, const Rational& xi, int samples,
                         std::uint64_t seed, std::size_t max_trapezoids) {
  if (xi <= 0 || xi >= 1) throw InvalidInput("xi must lie in (0, 1)");
  const auto family = sampled_family(m.tree(), b, max_trapezoids);
  std::vector<SubsetBound> per(family.size());
  const auto n = static_cast<std::ptrdiff_t>(family.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    SubsetBound& acc = per[static_cast<std::size_t>(i)];
    for (SubsetSample& s : sample_subsets(w, m, family[static_cast<std::size_t>(i)], xi, samples, seed)) {
      ++acc.samples;
      if (!acc.witness || s.w_ratio > acc.worst_ratio) {
        acc.worst_ratio = s.w_ratio;
        acc.witness = std::move(s);
      }
    }
  }
  SubsetBound out;
  for (SubsetBound& p : per) {
    out.samples += p.samples;
    if (p.witness && (!out.witness || p.worst_ratio > out.worst_ratio)) {
      out.worst_ratio = p.worst_ratio;
      out.witness = std::move(p.witness);
    }
  }
  return out;
}

}  // namespace

SubsetBound lemma_pre_reverse_check(const Weight& w, const FlowMeasure& m, Beta b, const Rational& xi,
                                    const Rational& a2_constant, int samples_per_trapezoid, std::uint64_t seed,
                                    std::size_t max_trapezoids) {
  SubsetBound out = subset_sweep(w, m, b, xi, samples_per_trapezoid, seed, max_trapezoids);
  const Rational eta = 1 - (1 - xi) * (1 - xi) / a2_constant;
  out.holds = out.worst_ratio <= eta;
  return out;
}

SubsetBound thAinf_condition_iv_check(const Weight& w, const FlowMeasure& m, Beta b, const Rational& xi,
                                      int samples_per_trapezoid, std::uint64_t seed, std::size_t max_trapezoids) {
  SubsetBound out = subset_sweep(w, m, b, xi, samples_per_trapezoid, seed, max_trapezoids);
  out.holds = out.worst_ratio < 1;
  return out;
}

ReverseHolderResult reverse_holder_search(const Weight& w, const FlowMeasure& m, Beta b, int k_min, int k_max,
                                          const Rational& cap) {
  const TruncatedTree& t = m.tree();
  if (k_min > k_max) throw InvalidInput("empty epsilon grid");
  ReverseHolderResult res;
  res.cap = cap;
  std::vector<Interval> gw(t.size());
  std::vector<Interval> wi(t.size());
  for (VertexId y = 0; y < t.size(); ++y) {
    wi[y] = to_interval(w[y]);
    gw[y] = wi[y] * to_interval(m[y]);
  }
  PrefixSums<Interval> sw(t, gw);
  SliceExtrema<Rational> ext(t, w.values());
  std::size_t family = 0;
  for (int k = k_min; k <= k_max; ++k) {
    const Rational eps = k >= 0 ? Rational(1, mpz_class(1) << k) : Rational(mpz_class(1) << -k);
    const Rational e1 = 1 + eps;
    std::map<Rational, Interval> cache;
    std::vector<Interval> ge(t.size());
    for (VertexId y = 0; y < t.size(); ++y) {
      auto it = cache.find(w[y]);
      if (it == cache.end()) it = cache.emplace(w[y], pow(wi[y], e1)).first;
      ge[y] = it->second * to_interval(m[y]);
    }
    PrefixSums<Interval> se(t, std::move(ge));
    const Rational inv = 1 / e1;
    auto sup = family_sup<Interval>(t, b, {}, [&](const Trapezoid& r) {
      auto [lo, hi] = ext.range(r);
      if (lo == hi) return Interval(1.0);
      const Interval mr = to_interval(Rational(r.h2 - r.h1) * m[r.root]);
      return Interval(pow(se.sum(r) / mr, inv) / (sw.sum(r) / mr));
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

OpennessCheck openness_check(const Weight& w, const FlowMeasure& m, Beta b, const Rational& p, const Rational& eps) {
  if (p <= 1 || eps <= 0) throw InvalidInput("openness check needs p > 1 and eps > 0");
  const Rational delta = 1 / (1 + eps);
  const Rational s = (p + eps) / (1 + eps);
  std::vector<Interval> wd(w.values().size());
  std::map<Rational, Interval> cache;
  for (VertexId y = 0; y < wd.size(); ++y) {
    auto it = cache.find(w[y]);
    if (it == cache.end()) it = cache.emplace(w[y], pow(to_interval(w[y]), delta)).first;
    wd[y] = it->second;
  }
  OpennessCheck out;
  out.lhs = ap_constant_values(wd, m, b, s, {}, w.values()).constant;
  const ApReport base = ap_constant(w, m, b, p);
  out.rhs = pow(base.constant, delta);
  out.holds = certainly_le(out.lhs, out.rhs);
  return out;
}

ConditionIiiRow thAinf_condition_iii_check(const Weight& w, const FlowMeasure& m, Beta b, const Rational& gamma,
                                           const Interval& ainfty) {
  const TruncatedTree& t = m.tree();
  std::vector<Rational> gw(t.size());
  for (VertexId y = 0; y < t.size(); ++y) gw[y] = w[y] * m[y];
  PrefixSums<Rational> sw(t, std::move(gw));
  SliceExtrema<Rational> ext(t, w.values());
  auto sup = family_sup<Rational>(t, b, {}, [&](const Trapezoid& r) {
    const Rational mr = Rational(r.h2 - r.h1) * m[r.root];
    const Rational threshold = gamma * sw.sum(r) / mr;
    if (ext.range(r).first > threshold) return Rational(0);
    Rational small;
    auto layers = descendant_layers(t, r.root, r.h2);
    for (int k = r.h1; k < static_cast<int>(layers.size()); ++k)
      for (VertexId y : layers[k])
        if (w[y] <= threshold) small += m[y];
    return Rational(small / mr);
  });
  ConditionIiiRow row;
  row.gamma = gamma;
  row.delta = sup.value;
  row.argmax = sup.argmax;
  const Interval g = to_interval(gamma);
  row.bound = log(Interval(1.0) + ainfty) / log(Interval(1.0) + Interval(1.0) / (g * ainfty));
  row.within_bound = to_interval(row.delta).upper() <= row.bound.lower();
  return row;
}

std::vector<Interval> log_weight(const Weight& w) {
  std::map<Rational, Interval> cache;
  std::vector<Interval> out;
  out.reserve(w.values().size());
  for (const Rational& v : w.values()) {
    auto it = cache.find(v);
    if (it == cache.end()) it = cache.emplace(v, log(to_interval(v))).first;
    out.push_back(it->second);
  }
  return out;
}

namespace {

template <class T>
BmoReport bmo_impl(std::span<const T> f, const FlowMeasure& m, Beta b, std::span<const Rational> key) {
  const TruncatedTree& t = m.tree();
  if (f.size() != t.size()) throw InvalidInput("function has the wrong number of values");
  std::vector<T> mu(t.size()), gf(t.size());
  for (VertexId y = 0; y < t.size(); ++y) {
    mu[y] = from_rational<T>(m[y]);
    gf[y] = f[y] * mu[y];
  }
  PrefixSums<T> sf(t, std::move(gf));
  std::optional<SliceExtrema<Rational>> ext;
  if (!key.empty()) ext.emplace(t, key);
  auto sup = family_sup<T>(t, b, {}, [&](const Trapezoid& r) {
    if (r.is_singleton()) return T(0);
    if (ext) {
      auto [lo, hi] = ext->range(r);
      if (lo == hi) return T(0);
    }
    const T mr = from_rational<T>(Rational(r.h2 - r.h1) * m[r.root]);
    const T mean = sf.sum(r) / mr;
    T osc(0);
    auto layers = descendant_layers(t, r.root, r.h2);
    for (int k = r.h1; k < static_cast<int>(layers.size()); ++k)
      for (VertexId y : layers[k]) osc += abs_value(T(f[y] - mean)) * mu[y];
    return T(osc / mr);
  });
  BmoReport rep;
  rep.norm = [&] {
    if constexpr (std::is_same_v<T, Rational>) return to_interval(sup.value);
    else return sup.value;
  }();
  rep.argmax = sup.argmax;
  rep.window = describe_window(t, {}, sup.family_size);
  return rep;
}

}  // namespace

BmoReport bmo_norm(std::span<const Rational> f, const FlowMeasure& m, Beta b) { return bmo_impl<Rational>(f, m, b, {}); }

BmoReport bmo_norm(std::span<const Interval> f, const FlowMeasure& m, Beta b, std::span<const Rational> key) {
  return bmo_impl<Interval>(f, m, b, key);
}

BmoToAinftyReport bmo_to_ainfty(std::span<const Interval> f, const FlowMeasure& m, Beta b,
                                std::span<const Rational> lambda_grid, const Rational& p, const Rational& cap,
                                std::span<const Rational> key) {
  const TruncatedTree& t = m.tree();
  if (p <= 1) throw InvalidInput("p must exceed 1");
  BmoToAinftyReport rep;
  rep.cap = cap;
  std::optional<SliceExtrema<Rational>> ext;
  if (!key.empty()) ext.emplace(t, key);
  std::vector<Interval> mu(t.size()), gf(t.size());
  for (VertexId y = 0; y < t.size(); ++y) {
    mu[y] = to_interval(m[y]);
    gf[y] = f[y] * mu[y];
  }
  PrefixSums<Interval> sf(t, std::move(gf));
  const Rational eta_factor = std::max(Rational(1), Rational(1 / (p - 1)));
  for (const Rational& lambda : lambda_grid) {
    BmoToAinftyRow row;
    row.lambda = lambda;
    const Interval li = to_interval(lambda);
    std::vector<Interval> psi(t.size());
    for (VertexId y = 0; y < t.size(); ++y) psi[y] = exp(li * f[y]);
    row.ap_constant = ap_constant_values(psi, m, b, p, {}, key).constant;
    const Interval eta = to_interval(lambda * eta_factor);
    auto sup = family_sup<Interval>(t, b, {}, [&](const Trapezoid& r) {
      if (r.is_singleton()) return Interval(1.0);
      if (ext) {
        auto [lo, hi] = ext->range(r);
        if (lo == hi) return Interval(1.0);
      }
      const Interval mr = to_interval(Rational(r.h2 - r.h1) * m[r.root]);
      const Interval mean = sf.sum(r) / mr;
      Interval acc(0.0);
      auto layers = descendant_layers(t, r.root, r.h2);
      for (int k = r.h1; k < static_cast<int>(layers.size()); ++k)
        for (VertexId y : layers[k]) acc += exp(eta * abs_value(Interval(f[y] - mean))) * mu[y];
      return Interval(acc / mr);
    });
    row.exp_moment = sup.value;
    row.workable = row.ap_constant.upper() <= cap.get_d();
    if (row.workable) {
      if (!rep.smallest_workable || lambda < *rep.smallest_workable) rep.smallest_workable = lambda;
      if (!rep.largest_workable || lambda > *rep.largest_workable) rep.largest_workable = lambda;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace flowtree
