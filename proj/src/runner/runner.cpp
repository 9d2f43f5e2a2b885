#include "flowtree/runner.hpp"

#include "flowtree/errors.hpp"
#include "flowtree/reference.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace flowtree::runner {

bool SuiteResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.informational || c.passed; });
}

bool RunReport::passed() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed(); });
}

Json RunReport::to_json() const {
  Json out{{"scenario", scenario}, {"seed", seed}, {"passed", passed()}};
  Json list = Json::array();
  for (const SuiteResult& s : suites) {
    Json checks = Json::array();
    for (const Check& c : s.checks) {
      Json j{{"name", c.name}, {"passed", c.passed}};
      if (c.informational) j["informational"] = true;
      if (!c.passed && !c.witness.is_null()) j["witness"] = c.witness;
      if (!c.detail.is_null()) j["detail"] = c.detail;
      checks.push_back(std::move(j));
    }
    Json sj{{"name", s.name}, {"context", s.context}, {"passed", s.passed()}, {"checks", std::move(checks)}};
    sj["data"] = s.data;
    if (record_timing) sj["seconds"] = s.seconds;
    list.push_back(std::move(sj));
  }
  out["suites"] = std::move(list);
  out["series"] = series;
  return out;
}

std::string summary(const RunReport& report) {
  std::ostringstream os;
  for (const SuiteResult& s : report.suites) {
    os << (s.passed() ? "PASS " : "FAIL ") << s.name << " [" << s.context << "]";
    for (const Check& c : s.checks)
      if (!c.passed && !c.informational) os << "\n     failed: " << c.name;
    os << '\n';
  }
  os << (report.passed() ? "all suites passed" : "some suites failed") << '\n';
  return os.str();
}

namespace {

using io::to_json;

struct Options {
  std::size_t lstv_exhaustive = 1500;  // family size up to which every pair is checked
  std::size_t lstv_pairs = 100000;
  int cz_instances = 20;
  int weighted_cz_instances = 2;
  int subset_samples = 2;
  std::size_t max_trapezoids = 1500;
  int rh_k_max = 10;
  std::size_t map_pairs = 20000;
  std::size_t exhaustive_map_vertices = 700;
  int automorphisms = 5;
  int bounded_shifts = 5;
  int maximal_vertices = 200;
  int counterexample_q = 2;
  int counterexample_n_max = 5;
  bool float_backend = false;
};

struct NamedWeight {
  std::string name;
  Weight w;
  std::optional<LevelWeight> level;
};

struct Context {
  const TruncatedTree& t;
  const FlowMeasure& m;
  Beta b;
  std::vector<NamedWeight> weights;
  std::vector<Rational> exponents;
  std::uint64_t seed = 1;
  int depth = 0;
  const Options& opt;
  // Shared between suites of one depth.
  std::optional<SplitRule> rule;
  std::map<std::string, Assumption1Report> assumption;

  const SplitRule& split_rule() {
    if (!rule) rule = compute_split_rule(m, b);
    return *rule;
  }
  const Assumption1Report& assumption1(const NamedWeight& nw) {
    auto it = assumption.find(nw.name);
    if (it == assumption.end())
      it = assumption
               .emplace(nw.name, assumption1_check(nw.w, m, b, opt.subset_samples, seed, kDefaultAssumptionMargin,
                                                   opt.max_trapezoids, &split_rule()))
               .first;
    return it->second;
  }
};

void add(SuiteResult& s, std::string name, bool ok, Json witness = nullptr, Json detail = nullptr) {
  s.checks.push_back({std::move(name), ok, false, std::move(witness), std::move(detail)});
}

void note(SuiteResult& s, std::string name, bool ok, Json detail = nullptr) {
  s.checks.push_back({std::move(name), ok, true, nullptr, std::move(detail)});
}

std::string p_label(const Rational& p) {
  return p.get_den() == 1 ? p.get_num().get_str() : p.get_num().get_str() + "/" + p.get_den().get_str();
}

bool contains_one(const Interval& x) { return x.lower() <= 1.0 && 1.0 <= x.upper(); }

std::size_t pair_budget(const TruncatedTree& t, const Options& opt) {
  return t.size() <= opt.exhaustive_map_vertices ? 0 : opt.map_pairs;
}

// Suites ------------------------------------------------------------------

void suite_constants(Context& c, SuiteResult& s, Json& series) {
  for (const NamedWeight& nw : c.weights) {
    Json wd = Json::object();
    std::vector<ApReport> reports;
    for (const Rational& p : c.exponents) {
      ApReport r = p == 1                 ? a1_constant(nw.w, c.m, c.b)
                   : c.opt.float_backend ? ap_constant_float(nw.w, c.m, c.b, p)
                                         : ap_constant(nw.w, c.m, c.b, p);
      const std::string key = "A_" + p_label(p);
      const bool at_least_one = r.constant_exact ? *r.constant_exact >= 1 : r.constant.upper() >= 1.0;
      add(s, nw.name + ": [w]_" + key + " >= 1", at_least_one, to_json(r.argmax));
      if (nw.w.is_constant()) {
        const bool one = r.constant_exact ? *r.constant_exact == 1 : contains_one(r.constant);
        add(s, nw.name + ": [w]_" + key + " = 1 for a constant weight", one, to_json(r.argmax));
      }
      Json point{{"depth", c.depth}};
      point["value"] = r.constant_exact ? to_json(*r.constant_exact) : Json(r.constant.upper());
      series[nw.name][key].push_back(std::move(point));
      wd[key] = to_json(r);
      reports.push_back(std::move(r));
    }
    const AinftyReport ai = ainfty_constant(nw.w, c.m, c.b);
    wd["A_inf"] = to_json(ai);
    for (const ApReport& r : reports) {
      if (r.p == 1) continue;
      add(s, nw.name + ": [w]_A_inf <= [w]_A_" + p_label(r.p), possibly_le(ai.constant, r.constant),
          Json{{"a_inf_argmax", to_json(ai.argmax)}, {"a_p_argmax", to_json(r.argmax)}});
    }
    if (nw.w.is_constant()) add(s, nw.name + ": [w]_A_inf = 1", contains_one(ai.constant), to_json(ai.argmax));
    series[nw.name]["A_inf"].push_back({{"depth", c.depth}, {"value", ai.constant.upper()}});
    s.data[nw.name] = std::move(wd);
  }
}

void suite_th01(Context& c, SuiteResult& s) {
  if (!c.t.is_slab() || !c.t.homogeneous_q()) {
    note(s, "level-weight transfer needs a homogeneous slab", true);
    return;
  }
  bool any = false;
  for (const NamedWeight& nw : c.weights) {
    if (!nw.level) continue;
    any = true;
    const auto cert =
        theorem_th01_check(*nw.level, *c.t.homogeneous_q(), c.t.slab().level_top, c.t.slab().level_bot, c.b);
    add(s, nw.name + ": tree product equals interval product on every matched trapezoid", cert.per_trapezoid_equal,
        cert.mismatch ? to_json(*cert.mismatch) : Json(nullptr));
    add(s, nw.name + ": tree constant equals interval constant", cert.suprema_equal,
        Json{{"tree_argmax", to_json(cert.tree_argmax)},
             {"interval_argmax", Json::array({cert.interval_argmax.first, cert.interval_argmax.second})}});
    s.data[nw.name] = to_json(cert);
  }
  if (!any) note(s, "no level weights in the scenario", true);
}

void suite_th1(Context& c, SuiteResult& s) {
  for (const NamedWeight& nw : c.weights) {
    Th1Certificate cert;
    try {
      cert = theorem_th1_check(nw.w, c.m, c.b);
    } catch (const WindowTooSmall&) {
      note(s, nw.name + ": no envelope fits the window", true);
      continue;
    }
    s.data[nw.name] = to_json(cert);
    add(s, nw.name + ": w_mu(envelope) <= bound on every trapezoid", cert.per_trapezoid_holds,
        to_json(cert.worst_slack_trapezoid));
    add(s, nw.name + ": sup ratio <= C_cover ([w] + [w]^2)", cert.global_holds, to_json(cert.worst_ratio_trapezoid));
  }
}

void suite_lstv(Context& c, SuiteResult& s) {
  const auto fam = enumerate_admissible(c.t, c.b);
  std::size_t checked = 0, failed = 0;
  Json witness = nullptr;
  auto visit = [&](const Trapezoid& r1, const Trapezoid& r2) {
    if (!intersects(c.t, r1, r2) || c.m[r1.root] < c.m[r2.root]) return;
    ++checked;
    if (!check_lemma_intersection(c.b, r1, r2, c.m)) {
      if (failed++ == 0) witness = Json{{"r1", to_json(r1)}, {"r2", to_json(r2)}};
    }
  };
  const bool exhaustive = fam.size() <= c.opt.lstv_exhaustive;
  if (exhaustive) {
    for (const Trapezoid& r1 : fam)
      for (const Trapezoid& r2 : fam) visit(r1, r2);
  } else {
    std::mt19937_64 rng(c.seed);
    for (std::size_t i = 0; i < c.opt.lstv_pairs; ++i) visit(fam[rng() % fam.size()], fam[rng() % fam.size()]);
  }
  s.data = {{"family_size", fam.size()}, {"exhaustive", exhaustive}, {"pairs_checked", checked}, {"failures", failed}};
  add(s, "intersecting trapezoid lies in the envelope of the heavier one", failed == 0, witness);
}

void suite_cover(Context& c, SuiteResult& s) {
  const auto fam = enumerate_admissible(c.t, c.b, {.envelopes_in_window = true});
  std::size_t checked = 0;
  std::map<std::string, std::size_t> cases;
  std::optional<Trapezoid> bad_cover, bad_admissible, bad_overlap;
  for (const Trapezoid& r : fam) {
    if (r.is_singleton()) continue;
    const EnvelopeCover cov = envelope_cover(c.b, r, c.m, false);
    ++checked;
    ++cases[to_string(cov.case_tag)];
    if (!cov.covers_envelope && !bad_cover) bad_cover = r;
    if (!cov.all_admissible && !bad_admissible) bad_admissible = r;
    if (cov.case_tag == CoverCase::kLargeBase) {
      const Rational need = c.m[r.root] * Rational(r.h1, c.b.value());
      const bool ok = std::any_of(cov.overlaps.begin(), cov.overlaps.end(), [&](const PieceOverlap& o) {
        return o.first == 0 && o.second == 1 && o.measure >= need;
      });
      if (!ok && !bad_overlap) bad_overlap = r;
    }
  }
  auto wit = [](const std::optional<Trapezoid>& r) { return r ? to_json(*r) : Json(nullptr); };
  Json case_counts = Json::object();
  for (const auto& [k, v] : cases) case_counts[k] = v;
  s.data = {{"trapezoids_checked", checked}, {"cases", case_counts}};
  if (checked == 0) {
    note(s, "no envelope fits the window", true);
    return;
  }
  add(s, "cover contains the envelope", !bad_cover, wit(bad_cover));
  add(s, "cover pieces are admissible", !bad_admissible, wit(bad_admissible));
  add(s, "mu(R0 and R1) >= mu(x) h1 / beta in the large-base case", !bad_overlap, wit(bad_overlap));
}

std::vector<VertexId> sample_vertices(const TruncatedTree& t, int count, std::uint64_t seed) {
  std::vector<VertexId> out;
  if (t.size() <= static_cast<std::size_t>(count)) {
    for (VertexId x = 0; x < t.size(); ++x) out.push_back(x);
    return out;
  }
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count; ++i) out.push_back(static_cast<VertexId>(rng() % t.size()));
  return out;
}

void suite_maximal(Context& c, SuiteResult& s) {
  const auto samples = standard_samples(c.m, c.b, 4, c.seed);
  const auto vertices = sample_vertices(c.t, c.opt.maximal_vertices, c.seed);
  Json functions = Json::array();
  for (const SampleFunction& f : samples) {
    const MaximalField field = maximal_function(c.m, c.b, f.values);
    std::optional<VertexId> mismatch, below;
    for (VertexId x : vertices)
      if (!mismatch && field.values[x] != reference::maximal_at(f.values, c.m, c.b, x)) mismatch = x;
    for (VertexId x = 0; x < c.t.size() && !below; ++x)
      if (field.values[x] < abs(f.values[x])) below = x;
    add(s, f.name + ": field equals the brute-force oracle", !mismatch,
        mismatch ? Json{{"vertex", *mismatch}} : Json(nullptr));
    add(s, f.name + ": M f >= |f|", !below, below ? Json{{"vertex", *below}} : Json(nullptr));
    functions.push_back(f.name);
  }
  s.data["functions"] = std::move(functions);
  s.data["vertices_compared"] = vertices.size();

  for (const NamedWeight& nw : c.weights) {
    Json wd = Json::object();
    const MaximalField wf = weighted_maximal_function(nw.w, c.m, c.b, samples.front().values);
    std::optional<VertexId> mismatch;
    for (VertexId x : vertices)
      if (!mismatch && wf.values[x] != reference::maximal_at(samples.front().values, c.m, c.b, x, nw.w.values()))
        mismatch = x;
    add(s, nw.name + ": weighted field equals the brute-force oracle", !mismatch,
        mismatch ? Json{{"vertex", *mismatch}} : Json(nullptr));

    const ApReport a1 = a1_constant(nw.w, c.m, c.b);
    const MaximalField mw = maximal_function(c.m, c.b, nw.w.values());
    std::optional<VertexId> over;
    for (VertexId x = 0; x < c.t.size() && !over; ++x)
      if (mw.values[x] > *a1.constant_exact * nw.w[x]) over = x;
    add(s, nw.name + ": M w <= [w]_A_1 w at every vertex", !over,
        over ? Json{{"vertex", *over}, {"argmax", to_json(mw.argmax[*over])}} : Json(nullptr));
    wd["a1"] = to_json(*a1.constant_exact);

    for (const Rational& p : c.exponents) {
      if (p <= 1) continue;
      const NormReport nr = lp_operator_norm(nw.w, c.m, c.b, p, samples);
      add(s, nw.name + ": empirical L^" + p_label(p) + " norm >= 1", nr.norm.upper() >= 1.0 - 1e-12,
          Json{{"argmax", nr.argmax}});
      wd["norm_p=" + p_label(p)] = to_json(nr);
      break;
    }
    s.data[nw.name] = std::move(wd);
  }
}

std::vector<Rational> random_values(std::size_t n, std::mt19937_64& rng) {
  std::vector<Rational> f(n);
  for (Rational& v : f) v = Rational(static_cast<long>(rng() % 21)) - (rng() % 4 == 0 ? 10 : 0);
  return f;
}

Rational mean_abs(const FlowMeasure& m, std::span<const Rational> f, const Trapezoid& r) {
  Rational sum = 0;
  for (VertexId y : members(m.tree(), r)) sum += abs(f[y]) * m[y];
  return sum / trapezoid_measure(m, r);
}

void suite_split_cz(Context& c, SuiteResult& s) {
  const SplitRule& rule = c.split_rule();
  s.data["rule"] = to_json(rule);

  auto fam = enumerate_admissible(c.t, c.b);
  std::erase_if(fam, [](const Trapezoid& r) { return r.is_singleton(); });
  std::optional<Trapezoid> bad_split;
  for (const Trapezoid& r : fam)
    if (!check_split(c.m, c.b, r, split_trapezoid(c.t, c.b, r)).ok()) {
      bad_split = r;
      break;
    }
  add(s, "every split is a disjoint admissible partition", !bad_split,
      bad_split ? to_json(*bad_split) : Json(nullptr), Json{{"splits", fam.size()}});

  std::erase_if(fam, [](const Trapezoid& r) { return r.h2 < 3; });
  if (fam.empty()) {
    note(s, "no trapezoid with h2 >= 3 fits the window", true);
    return;
  }
  std::mt19937_64 rng(c.seed);
  std::size_t certified = 0, nonempty = 0;
  Json witness = nullptr;
  auto instance = [&](std::vector<Rational>& f, Trapezoid& r, Rational& lambda) {
    f = random_values(c.t.size(), rng);
    r = fam[rng() % fam.size()];
    const Rational avg = mean_abs(c.m, f, r);
    lambda = avg == 0 ? Rational(1) : Rational(avg * Rational(static_cast<long>(11 + rng() % 30), 10));
  };
  for (int i = 0; i < c.opt.cz_instances; ++i) {
    std::vector<Rational> f;
    Trapezoid r;
    Rational lambda;
    instance(f, r, lambda);
    const CzFamily out = cz_decompose(c.m, c.b, f, lambda, r, &rule);
    if (out.certified()) {
      ++certified;
    } else if (witness.is_null()) {
      witness = to_json(out);
      witness["instance"] = i;
    }
    nonempty += !out.pieces.empty();
  }
  s.data["instances"] = c.opt.cz_instances;
  s.data["nonempty_families"] = nonempty;
  add(s, "stopping-time families satisfy i), ii), iii) with exact partitions",
      certified == static_cast<std::size_t>(c.opt.cz_instances), witness);

  for (const NamedWeight& nw : c.weights) {
    const Assumption1Report& a = c.assumption1(nw);
    s.data["assumption1"][nw.name] = to_json(a);
    if (!a.passes) {
      note(s, nw.name + ": assumption 1 fails, weighted decomposition not applicable", false, to_json(a));
      continue;
    }
    bool ok = true;
    Json wit = nullptr;
    const SplitRule weighted = compute_split_rule(c.m, c.b, &nw.w);
    for (int i = 0; i < c.opt.weighted_cz_instances && ok; ++i) {
      std::vector<Rational> f;
      Trapezoid r;
      Rational lambda;
      instance(f, r, lambda);
      const CzFamily out = cz_decompose_weighted(nw.w, c.m, c.b, f, lambda, r, a, weighted);
      if (!out.certified()) {
        ok = false;
        wit = to_json(out);
      }
    }
    add(s, nw.name + ": weighted stopping-time families are certified", ok, wit);
  }
}

void suite_reverse_holder(Context& c, SuiteResult& s) {
  for (const NamedWeight& nw : c.weights) {
    Json wd = Json::object();
    const auto rh = reverse_holder_search(nw.w, c.m, c.b, 0, c.opt.rh_k_max);
    wd["search"] = to_json(rh);
    add(s, nw.name + ": some eps >= 2^-" + std::to_string(c.opt.rh_k_max) + " has C <= cap", rh.epsilon.has_value(),
        rh.rows.empty() ? Json(nullptr) : to_json(rh.rows.back().argmax));
    if (nw.w.is_constant()) {
      const bool flat =
          std::all_of(rh.rows.begin(), rh.rows.end(), [](const ReverseHolderRow& r) { return contains_one(r.constant); });
      add(s, nw.name + ": C = 1 for every eps", flat);
    }
    if (rh.epsilon) {
      const auto open = openness_check(nw.w, c.m, c.b, Rational(2), *rh.epsilon);
      add(s, nw.name + ": [w^delta]_A_s <= [w]_A_2^delta", open.holds,
          Json{{"lhs", to_json(open.lhs)}, {"rhs", to_json(open.rhs)}});
    }

    const Interval a2 = ap_constant(nw.w, c.m, c.b, Rational(2)).constant;
    const auto proof = reverse_holder_proof(c.split_rule().d_cz(), Rational(1, 2), a2, Rational(2));
    Json pj{{"eta", to_json(proof.eta)},
            {"eps", to_json(proof.eps)},
            {"contraction", to_json(proof.contraction)},
            {"constant", to_json(proof.constant)},
            {"valid", proof.valid}};
    add(s, nw.name + ": stopping-time proof yields an exponent", proof.valid, pj);
    if (proof.valid) {
      int k = 0;
      while (Rational(1, mpz_class(1) << k) > proof.eps) ++k;
      const auto measured = reverse_holder_search(nw.w, c.m, c.b, k, k, Rational(1) << 40);
      add(s, nw.name + ": measured constant <= proof constant", possibly_le(measured.rows[0].constant, proof.constant),
          to_json(measured.rows[0].argmax));
      pj["measured"] = to_json(measured.rows[0].constant);
    }
    wd["proof"] = std::move(pj);

    const Assumption1Report& a = c.assumption1(nw);
    if (a.passes) {
      const auto wrh = weighted_reverse_holder(nw.w, c.m, c.b, 0, c.opt.rh_k_max);
      add(s, nw.name + ": weighted reverse Hoelder finds eps > 0", wrh.epsilon.has_value(),
          wrh.rows.empty() ? Json(nullptr) : to_json(wrh.rows.back().argmax));
      wd["weighted"] = to_json(wrh);
    } else {
      note(s, nw.name + ": assumption 1 fails, weighted variant skipped", false);
    }
    s.data[nw.name] = std::move(wd);
  }
}

void suite_ainfty(Context& c, SuiteResult& s) {
  for (const NamedWeight& nw : c.weights) {
    Json wd = Json::object();
    const AinftyReport ai = ainfty_constant(nw.w, c.m, c.b);
    wd["a_inf"] = to_json(ai);
    Json rows = Json::array();
    std::optional<Rational> previous;
    bool monotone = true, bounded = true;
    Json mono_wit = nullptr, bound_wit = nullptr;
    for (int k = 1; k <= 6; ++k) {
      const auto row = thAinf_condition_iii_check(nw.w, c.m, c.b, Rational(1, 1 << k), ai.constant);
      // Shrinking gamma admits smaller sets, so delta can only shrink.
      if (previous && row.delta > *previous && monotone) {
        monotone = false;
        mono_wit = to_json(row);
      }
      if (!row.within_bound && bounded) {
        bounded = false;
        bound_wit = to_json(row);
      }
      previous = row.delta;
      rows.push_back(to_json(row));
    }
    add(s, nw.name + ": condition iii delta monotone along gamma = 2^-1..2^-6", monotone, mono_wit);
    add(s, nw.name + ": condition iii delta within the log bound", bounded, bound_wit);
    wd["condition_iii"] = std::move(rows);

    const Rational a2 = *ap_constant(nw.w, c.m, c.b, Rational(2)).constant_exact;
    const Rational xi(1, 2);
    const auto iv = thAinf_condition_iv_check(nw.w, c.m, c.b, xi, c.opt.subset_samples, c.seed, c.opt.max_trapezoids);
    const auto pre =
        lemma_pre_reverse_check(nw.w, c.m, c.b, xi, a2, c.opt.subset_samples, c.seed, c.opt.max_trapezoids);
    add(s, nw.name + ": condition iv eta(1/2) < 1", iv.worst_ratio < 1,
        iv.witness ? to_json(*iv.witness) : Json(nullptr));
    add(s, nw.name + ": eta(1/2) <= 1 - (1/2)^2 / [w]_A_2", pre.holds,
        pre.witness ? to_json(*pre.witness) : Json(nullptr));
    wd["condition_iv"] = to_json(iv);
    wd["pre_reverse_bound"] = to_json(Rational(1 - Rational(1, 4) / a2));
    s.data[nw.name] = std::move(wd);
  }
}

void suite_bmo(Context& c, SuiteResult& s) {
  std::vector<Rational> constant(c.t.size(), Rational(3));
  const auto flat = bmo_norm(std::span<const Rational>(constant), c.m, c.b);
  add(s, "constant functions have oscillation 0", flat.norm.upper() == 0.0, to_json(flat.argmax));
  for (const NamedWeight& nw : c.weights) {
    const Rational a2 = *ap_constant(nw.w, c.m, c.b, Rational(2)).constant_exact;
    const BmoReport osc = bmo_norm(log_weight(nw.w), c.m, c.b, nw.w.values());
    const Interval a = to_interval(a2);
    const Interval bound = Interval(2.0) * log(Interval(1.0) + boost::numeric::sqrt(a));
    add(s, nw.name + ": ||log w||_BMO <= 2 log(1 + sqrt([w]_A_2))", possibly_le(osc.norm, bound),
        to_json(osc.argmax));
    const bool log_bound = possibly_le(osc.norm, log(a));
    s.checks.push_back({nw.name + ": ||log w||_BMO <= log [w]_A_2", log_bound, true, nullptr,
                        log_bound ? Json(nullptr) : Json{{"witness", to_json(osc.argmax)}}});
    if (nw.w.is_constant()) add(s, nw.name + ": log of a constant weight has oscillation 0", osc.norm.upper() == 0.0);
    s.data[nw.name] = {{"oscillation", to_json(osc)}, {"a2", to_json(a2)}, {"bound", to_json(bound)}};
  }
}

void suite_maps(Context& c, SuiteResult& s) {
  if (c.t.is_slab() && c.t.homogeneous_q()) {
    const std::size_t budget = pair_budget(c.t, c.opt);
    const FlowMeasure canon = canonical_flow(c.t);
    bool gromov = true, lipschitz = true;
    Json gw = nullptr, lw = nullptr;
    for (int i = 0; i < c.opt.automorphisms; ++i) {
      const auto g = gromov_isometry_check(random_level_automorphism(c.t, c.seed + i), budget, c.seed);
      if (gromov && !(g.rho_isometry && g.consistent && g.level_preserving && g.order_preserving)) {
        gromov = false;
        gw = to_json(g);
      }
    }
    add(s, "level automorphisms are rho-isometries", gromov, gw);
    const auto id = bilipschitz_diagnostics(TreeBijection::identity(c.t), canon, budget, c.seed);
    add(s, "identity has zero distortion", id.c == 0 && id.qi_defect == 0 && id.ok(), to_json(id));
    Json shifts = Json::array();
    for (int i = 0; i < c.opt.bounded_shifts; ++i) {
      const auto r = bilipschitz_diagnostics(random_bounded_shift(c.t, c.seed + i), canon, budget, c.seed);
      if (lipschitz && !(r.ok() && r.qi_defect <= 4 * r.c)) {
        lipschitz = false;
        lw = to_json(r);
      }
      shifts.push_back(to_json(r));
    }
    add(s, "bounded shifts have defect <= 4C", lipschitz, lw);
    s.data["bounded_shifts"] = std::move(shifts);
  }

  std::unique_ptr<TruncatedTree> own;
  const TruncatedTree* ball = &c.t;
  if (!c.t.is_ball()) {
    own = std::make_unique<TruncatedTree>(build_ball(c.t.homogeneous_q().value_or(2), std::clamp(c.depth, 1, 5)));
    ball = own.get();
  }
  const auto f = reflection_isometry(*ball);
  const auto iso = check_d_isometry(f, pair_budget(*ball, c.opt), c.seed);
  add(s, "reflection is a d-isometry", iso.isometry, to_json(iso));
  const FlowMeasure m = canonical_flow(*ball);
  const Weight j = jacobian(f, m);
  const int q = ball->homogeneous_q().value_or(2);
  bool frame = true;
  for (int n = -ball->ball().radius; n <= ball->ball().radius; ++n)
    frame = frame && j[ball->geodesic_vertex(n)] == pow_int(Rational(q), -2 * n);
  add(s, "J(x_n) = q^(-2n) along the frame", frame);
  std::mt19937_64 rng(c.seed);
  bool identity = true;
  for (int trial = 0; trial < 20 && identity; ++trial) {
    std::vector<VertexId> e;
    for (VertexId x = 0; x < ball->size(); ++x)
      if (rng() % 3 == 0) e.push_back(x);
    identity = jacobian_identity(f, m, j, e);
  }
  add(s, "(J_f)_mu(E) = mu(f(E)) on random sets", identity);
  const auto g = gromov_isometry_check(f, pair_budget(*ball, c.opt), c.seed);
  add(s, "reflection: rho-isometry iff levels and order are kept", g.consistent, to_json(g));
  s.data["ball"] = io::tree_summary(*ball);
  s.data["reflection"] = {{"distance", to_json(iso)}, {"gromov", to_json(g)}};
}

void suite_counterexample(Context& c, SuiteResult& s) {
  const int q = c.opt.counterexample_q, n_max = c.opt.counterexample_n_max;
  const auto rep = ainfty_failure_certificate(q, 1, n_max);
  s.data = to_json(rep);
  add(s, "xi_n = q^-n decreases", rep.xi_decreasing);
  add(s, "image ratio increases with n", rep.ratio_increasing);
  add(s, "image ratio >= 1 / (1 + 3 n q^-n)", rep.bounds_hold, to_json(rep));
  const bool fails = rep.rows.size() >= 2 && rep.rows.back().image_ratio > Rational(1, 2) &&
                     rep.rows.back().xi < Rational(1, 2);
  add(s, "condition iv fails for the reflected weight", fails);
  if (q == 2 && n_max >= 3) {
    const auto r = counterexample_ratios(2, 3);
    add(s, "q = 2, n = 3: mu(E_3)/mu(R_3) = 1/8 and mu(f(E_3)) >= 32",
        r.mu_ratio == Rational(1, 8) && r.image_e >= 32, to_json(r));
    s.data["q2_n3"] = to_json(r);
  }
}

// Scenario parsing ---------------------------------------------------------

Options options_from(const Json& j) {
  Options o;
  if (j.is_null()) return o;
  if (!j.is_object()) throw InvalidInput("\"options\" must be an object");
  auto size = [&](const char* k, std::size_t& v) {
    if (j.contains(k)) v = j.at(k).get<std::size_t>();
  };
  auto integer = [&](const char* k, int& v) {
    if (j.contains(k)) v = j.at(k).get<int>();
  };
  size("lstv_exhaustive", o.lstv_exhaustive);
  size("lstv_pairs", o.lstv_pairs);
  integer("cz_instances", o.cz_instances);
  integer("weighted_cz_instances", o.weighted_cz_instances);
  integer("subset_samples", o.subset_samples);
  size("max_trapezoids", o.max_trapezoids);
  integer("rh_k_max", o.rh_k_max);
  size("map_pairs", o.map_pairs);
  integer("automorphisms", o.automorphisms);
  integer("bounded_shifts", o.bounded_shifts);
  integer("maximal_vertices", o.maximal_vertices);
  integer("counterexample_q", o.counterexample_q);
  integer("counterexample_n_max", o.counterexample_n_max);
  if (j.contains("backend")) {
    const std::string backend = j.at("backend").get<std::string>();
    if (backend != "exact" && backend != "float") throw InvalidInput("backend must be \"exact\" or \"float\"");
    o.float_backend = backend == "float";
  }
  return o;
}

Json tree_at_depth(Json spec, int depth) {
  if (depth < 1) throw InvalidInput("depth must be at least 1");
  if (spec.value("kind", "") == "ball") {
    spec["radius"] = depth;
  } else {
    spec["level_top"] = spec.value("level_bot", 0) + depth;
  }
  return spec;
}

}  // namespace

RunReport run_scenario(const Json& sc) {
  if (!sc.is_object()) throw InvalidInput("scenario must be a JSON object");
  RunReport report;
  report.scenario = sc.value("name", "scenario");
  report.seed = sc.value("seed", std::uint64_t{1});
  report.record_timing = sc.value("record_timing", false);
  const Beta b(sc.value("beta", 12));
  const Options opt = options_from(sc.contains("options") ? sc.at("options") : Json(nullptr));
  if (!sc.contains("tree")) throw InvalidInput("scenario needs a \"tree\"");

  std::vector<std::string> suites;
  const Json sel = sc.value("suites", Json("all"));
  if (sel.is_string() && sel.get<std::string>() == "all") {
    suites.assign(kSuiteOrder.begin(), kSuiteOrder.end());
  } else if (sel.is_array()) {
    std::set<std::string> want;
    for (const Json& x : sel) {
      const std::string name = x.get<std::string>();
      if (std::find(kSuiteOrder.begin(), kSuiteOrder.end(), name) == kSuiteOrder.end())
        throw InvalidInput("unknown suite \"" + name + "\"");
      want.insert(name);
    }
    for (std::string_view name : kSuiteOrder)
      if (want.count(std::string(name))) suites.emplace_back(name);
  } else {
    throw InvalidInput("\"suites\" must be \"all\" or an array of names");
  }

  std::vector<Rational> exponents;
  if (sc.contains("exponents")) {
    exponents = io::rationals_from(sc.at("exponents"));
  } else {
    exponents = {Rational(2)};
  }
  for (const Rational& p : exponents)
    if (p < 1) throw InvalidInput("exponents must be >= 1");

  Json weight_specs = sc.value("weights", Json::array({Json{{"name", "unit"}, {"kind", "constant"}, {"value", 1}}}));
  if (!weight_specs.is_array() || weight_specs.empty()) throw InvalidInput("\"weights\" must be a nonempty array");
  std::set<std::string> names;
  for (const Json& ws : weight_specs) {
    const std::string name = ws.value("name", "");
    if (name.empty()) throw InvalidInput("every weight needs a \"name\"");
    if (!names.insert(name).second) throw InvalidInput("duplicate weight name \"" + name + "\"");
  }

  std::vector<int> depths;
  if (sc.contains("depths")) depths = sc.at("depths").get<std::vector<int>>();
  const Json measure_spec = sc.value("measure", Json(nullptr));
  if (depths.size() > 1 && !measure_spec.is_null() && measure_spec.value("kind", "canonical") != "canonical")
    throw InvalidInput("a depth sweep needs the canonical measure");

  const std::size_t runs = std::max<std::size_t>(depths.size(), 1);
  for (std::size_t k = 0; k < runs; ++k) {
    const Json tree_spec = depths.empty() ? sc.at("tree") : tree_at_depth(sc.at("tree"), depths[k]);
    const auto tree = io::tree_from(tree_spec);
    const FlowMeasure m = io::measure_from(*tree, measure_spec);
    const int depth = tree->is_ball() ? tree->ball().radius : tree->slab().level_top - tree->slab().level_bot;
    Context ctx{*tree, m, b, {}, exponents, report.seed, depth, opt, std::nullopt, {}};
    for (const Json& ws : weight_specs)
      ctx.weights.push_back({ws.at("name").get<std::string>(), io::weight_from(*tree, ws), io::level_weight_from(ws)});
    const std::string context = "depth " + std::to_string(depth);

    for (const std::string& name : suites) {
      if (name == "counterexample" && k > 0) continue;
      SuiteResult s;
      s.name = name;
      s.context = name == "counterexample" ? "ball" : context;
      const auto start = std::chrono::steady_clock::now();
      try {
        if (name == "constants") suite_constants(ctx, s, report.series);
        else if (name == "th01") suite_th01(ctx, s);
        else if (name == "th1") suite_th1(ctx, s);
        else if (name == "lstv") suite_lstv(ctx, s);
        else if (name == "cover") suite_cover(ctx, s);
        else if (name == "maximal") suite_maximal(ctx, s);
        else if (name == "split-cz") suite_split_cz(ctx, s);
        else if (name == "reverse-holder") suite_reverse_holder(ctx, s);
        else if (name == "ainfty") suite_ainfty(ctx, s);
        else if (name == "bmo") suite_bmo(ctx, s);
        else if (name == "maps") suite_maps(ctx, s);
        else if (name == "counterexample") suite_counterexample(ctx, s);
      } catch (const Error& e) {
        add(s, "suite raised an error", false, Json{{"error", e.what()}});
      }
      s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      report.suites.push_back(std::move(s));
    }

    if (k + 1 == runs && sc.contains("output") && sc.at("output").contains("csv"))
      report.csv = io::trapezoid_csv(*tree, m, b, ctx.weights.front().w, exponents.front());
  }

  // Window monotonicity is informational: nested windows only arise for
  // level weights on a fixed bottom level.
  for (auto& [wname, per_key] : report.series.items())
    for (auto& [key, points] : per_key.items()) {
      bool non_decreasing = true;
      double prev = 0.0;
      for (const Json& pt : points) {
        const Json& v = pt.at("value");
        const double d = v.is_string() ? parse_rational(v.get<std::string>()).get_d() : v.get<double>();
        if (d < prev) non_decreasing = false;
        prev = d;
      }
      Json copy = std::move(points);
      points = Json{{"points", std::move(copy)}, {"non_decreasing", non_decreasing}};
    }
  return report;
}

RunReport run_scenario_file(const std::string& path) {
  const Json sc = io::read_json_file(path);
  RunReport report = run_scenario(sc);
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  if (sc.contains("output")) {
    const Json& out = sc.at("output");
    auto write = [&](const char* key, const std::string& text) {
      if (!out.contains(key)) return;
      const std::filesystem::path target = base / out.at(key).get<std::string>();
      std::ofstream f(target);
      if (!f) throw InvalidInput("cannot write " + target.string());
      f << text;
    };
    write("report", io::dump(report.to_json()));
    write("csv", report.csv);
  }
  return report;
}

namespace {

Json weight_json(const char* name, Json spec) {
  spec["name"] = name;
  return spec;
}

}  // namespace

RunReport verify_all(int depth, std::uint64_t seed) {
  if (depth < 1) throw InvalidInput("verify depth must be at least 1, got " + std::to_string(depth));
  const Json unit = weight_json("unit", {{"kind", "constant"}, {"value", 1}});
  const Json alternating = weight_json("alternating", {{"kind", "level-periodic"}, {"values", {"2", "1"}}});
  const Json period3 = weight_json("period-3", {{"kind", "level-periodic"}, {"values", {"1", "3", "2"}}});
  const Json random = weight_json("random", {{"kind", "random"}, {"seed", seed}, {"max", 4}});

  std::vector<Json> scenarios;
  scenarios.push_back({{"name", "binary slab"},
                       {"seed", seed},
                       {"tree", {{"kind", "homogeneous-slab"}, {"q", 2}, {"level_top", depth}, {"level_bot", 0}}},
                       {"weights", {unit, alternating, period3, random}},
                       {"exponents", {"1", "2", "3/2", "3"}}});
  scenarios.push_back({{"name", "ternary slab"},
                       {"seed", seed},
                       {"tree", {{"kind", "homogeneous-slab"}, {"q", 3}, {"level_top", depth}, {"level_bot", 0}}},
                       {"weights", {unit, period3}},
                       {"exponents", {"2"}},
                       {"suites", {"constants", "th01", "th1", "lstv", "cover", "maximal", "split-cz", "ainfty", "bmo",
                                   "maps"}}});

  // Mixed branching with a nonuniform flow.
  std::mt19937_64 rng(seed);
  std::vector<int> counts;
  std::size_t width = 1, bottom = 0;
  for (int level = depth; level > 0; --level) {
    std::size_t next = 0;
    for (std::size_t i = 0; i < width; ++i) {
      counts.push_back(2 + static_cast<int>(rng() % 2));
      next += static_cast<std::size_t>(counts.back());
    }
    width = next;
  }
  bottom = width;
  Json masses = Json::array();
  for (std::size_t i = 0; i < bottom; ++i) masses.push_back(1 + static_cast<int>(rng() % 3));
  scenarios.push_back({{"name", "mixed slab"},
                       {"seed", seed},
                       {"tree", {{"kind", "general-slab"}, {"succ_counts", counts}, {"level_top", depth}, {"level_bot", 0}}},
                       {"measure", {{"kind", "bottom-values"}, {"values", masses}}},
                       {"weights", {unit, random}},
                       {"exponents", {"2"}},
                       {"suites", {"constants", "th1", "lstv", "cover", "maximal", "split-cz", "reverse-holder",
                                   "ainfty", "bmo"}}});
  // Envelopes need height beta h2 - 1, so the covering suites run on a deep
  // slab that branches only every twelfth level.
  const int deep = 30 + 5 * depth;
  std::vector<int> sparse(static_cast<std::size_t>(deep));
  std::size_t leaves = 1;
  for (int i = 0; i < deep; ++i) {
    sparse[static_cast<std::size_t>(i)] = (i % 12 == 11) ? 2 : 1;
    leaves *= static_cast<std::size_t>(sparse[static_cast<std::size_t>(i)]);
  }
  scenarios.push_back({{"name", "sparse slab"},
                       {"seed", seed},
                       {"tree", {{"kind", "level-branching-slab"}, {"counts_from_top", sparse}, {"level_top", deep},
                                 {"level_bot", 0}}},
                       {"measure", {{"kind", "bottom-values"}, {"values", Json(std::vector<int>(leaves, 1))}}},
                       {"weights", {unit, alternating, period3}},
                       {"exponents", {"2"}},
                       {"suites", {"constants", "th1", "cover", "split-cz", "bmo"}}});

  RunReport all;
  all.scenario = "verify depth " + std::to_string(depth);
  all.seed = seed;
  for (const Json& sc : scenarios) {
    RunReport r = run_scenario(sc);
    for (SuiteResult& s : r.suites) {
      s.context = sc.at("name").get<std::string>() + ", " + s.context;
      all.suites.push_back(std::move(s));
    }
    all.series[sc.at("name").get<std::string>()] = std::move(r.series);
  }
  return all;
}

}  // namespace flowtree::runner
