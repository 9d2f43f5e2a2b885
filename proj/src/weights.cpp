#include "flowtree/weights.hpp"

#include "flowtree/errors.hpp"

#include <algorithm>
#include <map>

namespace flowtree {

Weight::Weight(const TruncatedTree& t, std::vector<Rational> values) : tree_(&t), values_(std::move(values)) {
  if (values_.size() != t.size()) throw InvalidInput("weight has the wrong number of values");
  for (Rational& v : values_) {
    v.canonicalize();
    if (v <= 0) throw InvalidInput("weights must be positive");
  }
}

bool Weight::is_constant() const {
  return std::all_of(values_.begin(), values_.end(), [&](const Rational& v) { return v == values_.front(); });
}

LevelWeight::LevelWeight(std::function<Rational(int)> fn, std::string name)
    : fn_(std::move(fn)), name_(std::move(name)) {}

LevelWeight LevelWeight::constant(const Rational& c) {
  if (c <= 0) throw InvalidInput("weights must be positive");
  return {[c](int) { return c; }, "constant " + to_string(c)};
}

LevelWeight LevelWeight::periodic(std::vector<Rational> pattern) {
  if (pattern.empty()) throw InvalidInput("empty level pattern");
  std::string name = "periodic [";
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    pattern[i].canonicalize();
    if (pattern[i] <= 0) throw InvalidInput("weights must be positive");
    name += (i ? "," : "") + to_string(pattern[i]);
  }
  name += "]";
  const int period = static_cast<int>(pattern.size());
  return {[pattern = std::move(pattern), period](int l) { return pattern[static_cast<std::size_t>(((l % period) + period) % period)]; },
          name};
}

LevelWeight LevelWeight::exponential(const Rational& base) {
  if (base <= 0) throw InvalidInput("weights must be positive");
  return {[base](int l) { return pow_int(base, l); }, "exponential " + to_string(base) + "^l"};
}

Weight constant_weight(const TruncatedTree& t, const Rational& c) {
  return Weight(t, std::vector<Rational>(t.size(), c));
}

Weight level_weight(const TruncatedTree& t, const LevelWeight& W) {
  std::vector<Rational> v(t.size());
  for (int l = t.min_level(); l <= t.max_level(); ++l) {
    const Rational value = W(l);
    for (VertexId x : t.vertices_at_level(l)) v[x] = value;
  }
  return Weight(t, std::move(v));
}

Weight power_weight(const Weight& w, long s) {
  std::vector<Rational> v;
  v.reserve(w.values().size());
  for (const Rational& x : w.values()) v.push_back(pow_int(x, s));
  return Weight(w.tree(), std::move(v));
}

Weight scaled_weight(const Weight& w, const Rational& c) {
  std::vector<Rational> v;
  for (const Rational& x : w.values()) v.push_back(x * c);
  return Weight(w.tree(), std::move(v));
}

Rational weighted_measure(const Weight& w, const FlowMeasure& m, std::span<const VertexId> set) {
  Rational sum;
  for (VertexId y : set) sum += w[y] * m[y];
  return sum;
}

Window describe_window(const TruncatedTree& t, EnumerationOptions opt, std::size_t family_size) {
  Window win;
  if (t.is_slab()) {
    win.level_top = t.slab().level_top;
    win.level_bot = t.slab().level_bot;
  } else {
    win.level_top = t.max_level();
    win.level_bot = t.min_level();
  }
  win.envelopes_in_window = opt.envelopes_in_window;
  win.family_size = family_size;
  return win;
}

Rational ap_product_exact(const Weight& w, const FlowMeasure& m, const Trapezoid& r) {
  Rational sw, ss;
  for (VertexId y : members(m.tree(), r)) {
    sw += w[y] * m[y];
    ss += m[y] / w[y];
  }
  const Rational mr = trapezoid_measure(m, r);
  return sw * ss / (mr * mr);
}

Interval ap_product(const Weight& w, const FlowMeasure& m, const Rational& p, const Trapezoid& r) {
  if (p <= 1) throw InvalidInput("ap_product needs p > 1");
  const Rational sigma_exp = Rational(-1) / (p - 1);
  Interval sw(0.0), ss(0.0);
  for (VertexId y : members(m.tree(), r)) {
    const Interval wy = to_interval(w[y]), my = to_interval(m[y]);
    sw += wy * my;
    ss += pow(wy, sigma_exp) * my;
  }
  const Interval mr = to_interval(trapezoid_measure(m, r));
  return (sw / mr) * pow(ss / mr, Rational(p - 1));
}

namespace {

Rational conjugate(const Rational& p) { return p / (p - 1); }

ApReport make_report(const Rational& p, const TruncatedTree& t, EnumerationOptions opt, std::size_t family) {
  ApReport rep;
  rep.p = p;
  if (p > 1) rep.p_conj = conjugate(p);
  rep.window = describe_window(t, opt, family);
  return rep;
}

ApReport ap_exact_two(const Weight& w, const FlowMeasure& m, Beta b, EnumerationOptions opt) {
  const TruncatedTree& t = m.tree();
  std::vector<Rational> gw(t.size()), gs(t.size());
  for (VertexId y = 0; y < t.size(); ++y) {
    gw[y] = w[y] * m[y];
    gs[y] = m[y] / w[y];
  }
  PrefixSums<Rational> sw(t, std::move(gw)), ss(t, std::move(gs));
  auto sup = family_sup<Rational>(t, b, opt, [&](const Trapezoid& r) {
    const Rational mr = Rational(r.h2 - r.h1) * m[r.root];
    return Rational(sw.sum(r) * ss.sum(r) / (mr * mr));
  });
  if (sup.empty) throw InvalidInput("empty enumeration window");
  ApReport rep = make_report(Rational(2), t, opt, sup.family_size);
  rep.exact = true;
  rep.constant_exact = sup.value;
  rep.constant = to_interval(sup.value);
  rep.argmax = sup.argmax;
  return rep;
}

}  // namespace

ApReport ap_constant_values(std::span<const Interval> v, const FlowMeasure& m, Beta b, const Rational& p,
                            EnumerationOptions opt, std::span<const Rational> key) {
  if (p <= 1) throw InvalidInput("ap_constant needs p > 1");
  const TruncatedTree& t = m.tree();
  const Rational sigma_exp = Rational(-1) / (p - 1);
  std::vector<Interval> gw(t.size()), gs(t.size());
  for (VertexId y = 0; y < t.size(); ++y) {
    const Interval my = to_interval(m[y]);
    gw[y] = v[y] * my;
    gs[y] = pow(v[y], sigma_exp) * my;
  }
  PrefixSums<Interval> sw(t, std::move(gw)), ss(t, std::move(gs));
  std::optional<SliceExtrema<Rational>> ext;
  if (!key.empty()) ext.emplace(t, key);
  const Rational pm1 = p - 1;
  auto sup = family_sup<Interval>(t, b, opt, [&](const Trapezoid& r) {
    if (ext) {
      auto [lo, hi] = ext->range(r);
      if (lo == hi) return Interval(1.0);
    }
    const Interval mr = to_interval(Rational(r.h2 - r.h1) * m[r.root]);
    return Interval((sw.sum(r) / mr) * pow(ss.sum(r) / mr, pm1));
  });
  if (sup.empty) throw InvalidInput("empty enumeration window");
  ApReport rep = make_report(p, t, opt, sup.family_size);
  rep.constant = sup.value;
  rep.argmax = sup.argmax;
  return rep;
}

ApReport ap_constant_float(const Weight& w, const FlowMeasure& m, Beta b, const Rational& p, EnumerationOptions opt) {
  std::vector<Interval> v;
  v.reserve(w.values().size());
  for (const Rational& x : w.values()) v.push_back(to_interval(x));
  return ap_constant_values(v, m, b, p, opt, w.values());
}

ApReport ap_constant(const Weight& w, const FlowMeasure& m, Beta b, const Rational& p, EnumerationOptions opt) {
  if (p <= 1) throw InvalidInput("ap_constant needs p > 1");
  if (p == 2) return ap_exact_two(w, m, b, opt);
  return ap_constant_float(w, m, b, p, opt);
}

ApReport a1_constant(const Weight& w, const FlowMeasure& m, Beta b, EnumerationOptions opt) {
  const TruncatedTree& t = m.tree();
  std::vector<Rational> gw(t.size());
  for (VertexId y = 0; y < t.size(); ++y) gw[y] = w[y] * m[y];
  PrefixSums<Rational> sw(t, std::move(gw));
  SliceExtrema<Rational> ext(t, w.values());
  auto sup = family_sup<Rational>(t, b, opt, [&](const Trapezoid& r) {
    const Rational mr = Rational(r.h2 - r.h1) * m[r.root];
    return Rational(sw.sum(r) / (mr * ext.range(r).first));
  });
  if (sup.empty) throw InvalidInput("empty enumeration window");
  ApReport rep = make_report(Rational(1), t, opt, sup.family_size);
  rep.exact = true;
  rep.constant_exact = sup.value;
  rep.constant = to_interval(sup.value);
  rep.argmax = sup.argmax;
  return rep;
}

AinftyReport ainfty_constant(const Weight& w, const FlowMeasure& m, Beta b, EnumerationOptions opt) {
  const TruncatedTree& t = m.tree();
  std::vector<Interval> gw(t.size()), gl(t.size());
  std::map<Rational, Interval> log_cache;
  for (VertexId y = 0; y < t.size(); ++y) {
    const Interval my = to_interval(m[y]);
    gw[y] = to_interval(w[y]) * my;
    auto it = log_cache.find(w[y]);
    if (it == log_cache.end()) it = log_cache.emplace(w[y], log(to_interval(w[y]))).first;
    gl[y] = it->second * my;
  }
  PrefixSums<Interval> sw(t, std::move(gw)), sl(t, std::move(gl));
  SliceExtrema<Rational> ext(t, w.values());
  auto sup = family_sup<Interval>(t, b, opt, [&](const Trapezoid& r) {
    auto [lo, hi] = ext.range(r);
    if (lo == hi) return Interval(1.0);
    const Interval mr = to_interval(Rational(r.h2 - r.h1) * m[r.root]);
    return Interval((sw.sum(r) / mr) * exp(-(sl.sum(r) / mr)));
  });
  if (sup.empty) throw InvalidInput("empty enumeration window");
  AinftyReport rep;
  rep.constant = sup.value;
  rep.argmax = sup.argmax;
  rep.window = describe_window(t, opt, sup.family_size);
  return rep;
}

DualityCheck ap_duality_characterization_check(const Weight& w, const FlowMeasure& m, const Rational& p,
                                               const Rational& ap_bound, std::span<const Rational> f,
                                               const Trapezoid& r) {
  const auto mem = members(m.tree(), r);
  Rational sf, wr;
  for (VertexId y : mem) {
    sf += abs(f[y]) * m[y];
    wr += w[y] * m[y];
  }
  if (sf == 0) throw Inapplicable("f vanishes on the trapezoid");
  const Rational mr = trapezoid_measure(m, r);
  DualityCheck out;
  if (p.get_den() == 1 && p.get_num().fits_slong_p()) {
    const long k = p.get_num().get_si();
    Rational sp;
    for (VertexId y : mem) sp += pow_int(abs(f[y]), k) * w[y] * m[y];
    const Rational lhs = pow_int(sf / mr, k);
    const Rational rhs = ap_bound * sp / wr;
    out.holds = lhs <= rhs;
    out.lhs = to_interval(lhs);
    out.rhs = to_interval(rhs);
    return out;
  }
  Interval sp(0.0);
  for (VertexId y : mem)
    if (f[y] != 0) sp += pow(to_interval(abs(f[y])), p) * to_interval(w[y] * m[y]);
  out.lhs = pow(to_interval(sf / mr), p);
  out.rhs = to_interval(ap_bound) * sp / to_interval(wr);
  out.holds = certainly_le(out.lhs, out.rhs);
  return out;
}

bool a2_extremal_identity(const Weight& w, const FlowMeasure& m, const Trapezoid& r) {
  Rational sf, sf2w, wr;
  for (VertexId y : members(m.tree(), r)) {
    const Rational f = 1 / w[y];
    sf += f * m[y];
    sf2w += f * f * w[y] * m[y];
    wr += w[y] * m[y];
  }
  const Rational mr = trapezoid_measure(m, r);
  const Rational lhs = (sf / mr) * (sf / mr) * wr / sf2w;
  return lhs == ap_product_exact(w, m, r);
}

LevelApResult level_ap_constant(const LevelWeight& W, int lo, int hi, int max_length) {
  if (lo > hi) throw InvalidInput("empty level range");
  const int n = hi - lo + 1;
  std::vector<Rational> pw(n + 1), ps(n + 1);
  for (int i = 0; i < n; ++i) {
    const Rational v = W(lo + i);
    pw[i + 1] = pw[i] + v;
    ps[i + 1] = ps[i] + 1 / v;
  }
  LevelApResult best{Rational(0), lo, lo};
  const int cap = max_length > 0 ? max_length : n;
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n && b - a + 1 <= cap; ++b) {
      const Rational len = b - a + 1;
      const Rational v = (pw[b + 1] - pw[a]) * (ps[b + 1] - ps[a]) / (len * len);
      if (v > best.constant) best = {v, lo + a, lo + b};
    }
  return best;
}

Interval level_ap_product(const LevelWeight& W, const Rational& p, int a, int b) {
  if (p <= 1) throw InvalidInput("p must exceed 1");
  const Rational sigma_exp = Rational(-1) / (p - 1);
  Interval sw(0.0), ss(0.0);
  for (int l = a; l <= b; ++l) {
    const Interval v = to_interval(W(l));
    sw += v;
    ss += pow(v, sigma_exp);
  }
  const Interval len(static_cast<double>(b - a + 1));
  return (sw / len) * pow(ss / len, Rational(p - 1));
}

int witness_root_level(int a, int b, Beta beta) {
  if (a > b) throw InvalidInput("empty interval");
  const int length = b - a + 1;
  const int h1 = std::max(1, (length + beta.value() - 2) / (beta.value() - 1));
  return b + h1;
}

Th01Certificate theorem_th01_check(const LevelWeight& W, int q, int level_top, int level_bot, Beta b) {
  const TruncatedTree t = build_homogeneous_slab(q, level_top, level_bot);
  const FlowMeasure m = canonical_flow(t);
  const Weight w = level_weight(t, W);
  Th01Certificate cert;

  // Interval side by prefix sums over levels (counting measure).
  const int n = level_top - level_bot + 1;
  std::vector<Rational> pw(n + 1), ps(n + 1);
  for (int i = 0; i < n; ++i) {
    const Rational v = W(level_bot + i);
    pw[i + 1] = pw[i] + v;
    ps[i + 1] = ps[i] + 1 / v;
  }
  auto interval_product = [&](int a, int bb) {
    const int i = a - level_bot, j = bb - level_bot;
    const Rational len = bb - a + 1;
    return Rational((pw[j + 1] - pw[i]) * (ps[j + 1] - ps[i]) / (len * len));
  };

  // Tree side: every admissible trapezoid against its level interval.
  const ApReport tree = ap_constant(w, m, b, Rational(2));
  cert.tree_constant = *tree.constant_exact;
  cert.tree_argmax = tree.argmax;
  std::vector<Rational> gw(t.size()), gs(t.size());
  for (VertexId y = 0; y < t.size(); ++y) {
    gw[y] = w[y] * m[y];
    gs[y] = m[y] / w[y];
  }
  PrefixSums<Rational> sw(t, std::move(gw)), ss(t, std::move(gs));
  for (const Trapezoid& r : enumerate_admissible(t, b)) {
    ++cert.trapezoids_checked;
    const Rational mr = Rational(r.h2 - r.h1) * m[r.root];
    const Rational tree_value = sw.sum(r) * ss.sum(r) / (mr * mr);
    const int l = t.level(r.root);
    if (tree_value != interval_product(l - r.h2 + 1, l - r.h1)) {
      cert.per_trapezoid_equal = false;
      if (!cert.mismatch) cert.mismatch = r;
    }
  }

  // Interval side: intervals whose witness trapezoid fits the slab.
  cert.interval_constant = 0;
  for (int a = level_bot; a <= level_top; ++a)
    for (int bb = a; bb <= level_top; ++bb) {
      const int root_level = witness_root_level(a, bb, b);
      if (root_level > level_top) {
        ++cert.intervals_excluded;
        continue;
      }
      ++cert.intervals_matched;
      const Rational v = interval_product(a, bb);
      if (v > cert.interval_constant) {
        cert.interval_constant = v;
        cert.interval_argmax = {a, bb};
      }
    }
  cert.suprema_equal = cert.tree_constant == cert.interval_constant;
  return cert;
}

CoverConstants cover_constants(Beta b, const Trapezoid& r, long p) {
  // a(P, Q) = (mu(P) / mu(P ∩ Q))^p; the common factor mu(x) cancels.
  auto a = [p](const Trapezoid& P, const Trapezoid& Q) {
    const int inter = std::min(P.h2, Q.h2) - std::max(P.h1, Q.h1);
    if (inter <= 0) throw InvalidInput("cover pieces are expected to overlap");
    return pow_int(Rational(P.h2 - P.h1, inter), p);
  };
  const int beta = b.value();
  const int s = r.h1 + r.h2, mf = s / 2, mc = (s + 1) / 2, hb = beta / 2;
  const Trapezoid R0{r.root, (r.h1 + beta - 1) / beta, r.h1};
  const Trapezoid R1{r.root, (s + 2 * beta - 1) / (2 * beta), mf};
  const Trapezoid R2{r.root, mf, mf * beta};
  const Trapezoid R3{r.root, mc * hb, mc * hb * beta};
  const Trapezoid B0{r.root, 1, beta};
  const Trapezoid B1{r.root, hb, hb * beta};
  CoverConstants c;
  if (r.h1 >= 3) {
    c.linear = a(R1, r) + a(R2, r);
    c.quadratic = a(R0, R1) * a(R1, r) + a(R3, R2) * a(R2, r);
  } else if (r.h2 >= 3) {
    c.linear = a(B0, r) + a(R2, r);
    c.quadratic = a(B1, R2) * a(R2, r) + a(R3, R2) * a(R2, r);
  } else {
    c.linear = a(B0, r);
    c.quadratic = a(B1, B0) * a(B0, r);
  }
  return c;
}

Th1Certificate theorem_th1_check(const Weight& w, const FlowMeasure& m, Beta b) {
  const TruncatedTree& t = m.tree();
  const EnumerationOptions env_opt{.envelopes_in_window = true};
  Th1Certificate cert;
  const ApReport ap = ap_constant(w, m, b, Rational(2));
  cert.ap_constant = *ap.constant_exact;
  const Rational A = cert.ap_constant;

  std::vector<Rational> gw(t.size());
  for (VertexId y = 0; y < t.size(); ++y) gw[y] = w[y] * m[y];
  PrefixSums<Rational> sw(t, std::move(gw));

  bool first = true;
  for (const Trapezoid& r : enumerate_admissible(t, b, env_opt)) {
    if (r.is_singleton()) continue;
    ++cert.trapezoids_checked;
    const Rational ratio = sw.sum(envelope(b, r)) / sw.sum(r);
    const CoverConstants c = cover_constants(b, r, 2);
    const Rational bound = A * c.linear + A * A * c.quadratic;
    const Rational c_local = std::max(c.linear, c.quadratic);
    const Rational slack = ratio / bound;
    if (ratio > bound) cert.per_trapezoid_holds = false;
    if (first || c_local > cert.c_cover) cert.c_cover = c_local;
    if (first || ratio > cert.worst_ratio) {
      cert.worst_ratio = ratio;
      cert.worst_ratio_trapezoid = r;
    }
    if (first || slack > cert.worst_slack) {
      cert.worst_slack = slack;
      cert.worst_slack_trapezoid = r;
    }
    first = false;
  }
  if (first) throw WindowTooSmall("no envelope fits the window");
  cert.global_holds = cert.worst_ratio <= cert.c_cover * (A + A * A);
  return cert;
}

}  // namespace flowtree
