#include "flowtree/io.hpp"

#include "flowtree/errors.hpp"

#include <fstream>
#include <random>
#include <sstream>

namespace flowtree::io {

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte is one past the offending character.
    std::size_t line = 1, column = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw InvalidInput(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + e.what());
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_json(buffer.str(), path);
}

namespace {

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InvalidInput(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

int int_field(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_number_integer()) throw InvalidInput(std::string("field \"") + key + "\" must be an integer");
  return v.get<int>();
}

int int_field(const Json& j, const char* key, int fallback) { return j.contains(key) ? int_field(j, key) : fallback; }

std::string kind_of(const Json& spec) {
  const Json& k = require(spec, "kind");
  if (!k.is_string()) throw InvalidInput("field \"kind\" must be a string");
  return k.get<std::string>();
}

}  // namespace

Rational rational_from(const Json& j) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (j.is_string()) return parse_rational(j.get<std::string>());
  throw InvalidInput("expected a rational as \"p/q\" or an integer, got " + j.dump());
}

std::vector<Rational> rationals_from(const Json& j) {
  if (!j.is_array()) throw InvalidInput("expected an array of rationals");
  std::vector<Rational> out;
  out.reserve(j.size());
  for (const Json& v : j) out.push_back(rational_from(v));
  return out;
}

std::unique_ptr<TruncatedTree> tree_from(const Json& spec) {
  const std::string kind = kind_of(spec);
  const auto cap = spec.contains("max_vertices") ? spec.at("max_vertices").get<std::size_t>() : kDefaultVertexCap;
  if (kind == "homogeneous-slab")
    return std::make_unique<TruncatedTree>(
        build_homogeneous_slab(int_field(spec, "q"), int_field(spec, "level_top"), int_field(spec, "level_bot", 0), cap));
  if (kind == "general-slab" || kind == "level-branching-slab") {
    const Json& counts = require(spec, kind == "general-slab" ? "succ_counts" : "counts_from_top");
    const std::vector<int> c = counts.get<std::vector<int>>();
    const int top = int_field(spec, "level_top"), bot = int_field(spec, "level_bot", 0);
    return std::make_unique<TruncatedTree>(kind == "general-slab" ? build_general_slab(c, top, bot, cap)
                                                                  : build_level_branching_slab(c, top, bot, cap));
  }
  if (kind == "ball")
    return std::make_unique<TruncatedTree>(build_ball(int_field(spec, "q"), int_field(spec, "radius"), cap));
  throw InvalidInput("unknown tree kind \"" + kind + "\"");
}

FlowMeasure measure_from(const TruncatedTree& t, const Json& spec) {
  if (spec.is_null()) return canonical_flow(t);
  const std::string kind = kind_of(spec);
  if (kind == "canonical") return canonical_flow(t);
  if (kind == "bottom-values") return flow_from_bottom(t, rationals_from(require(spec, "values")));
  if (kind == "values") {
    FlowMeasure m(t, rationals_from(require(spec, "values")));
    const FlowValidation v = validate_flow(m);
    if (!v.ok) throw InvalidInput("flow condition fails at vertex " + std::to_string(*v.witness));
    return m;
  }
  throw InvalidInput("unknown measure kind \"" + kind + "\"");
}

std::optional<LevelWeight> level_weight_from(const Json& spec) {
  const std::string kind = kind_of(spec);
  if (kind == "constant") return LevelWeight::constant(rational_from(require(spec, "value")));
  if (kind == "level-periodic") return LevelWeight::periodic(rationals_from(require(spec, "values")));
  if (kind == "level-exponential") return LevelWeight::exponential(rational_from(require(spec, "base")));
  return std::nullopt;
}

Weight weight_from(const TruncatedTree& t, const Json& spec) {
  if (auto lw = level_weight_from(spec)) return level_weight(t, *lw);
  const std::string kind = kind_of(spec);
  if (kind == "values") {
    auto v = rationals_from(require(spec, "values"));
    if (v.size() != t.size()) throw InvalidInput("weight has " + std::to_string(v.size()) + " values for a tree of " +
                                                 std::to_string(t.size()) + " vertices");
    return Weight(t, std::move(v));
  }
  if (kind == "random") {
    std::mt19937_64 rng(spec.value("seed", 1));
    const int top = int_field(spec, "max", 4);
    if (top < 1) throw InvalidInput("random weight needs max >= 1");
    std::vector<Rational> v;
    v.reserve(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) v.emplace_back(static_cast<long>(1 + rng() % static_cast<unsigned>(top)));
    return Weight(t, std::move(v));
  }
  throw InvalidInput("unknown weight kind \"" + kind + "\"");
}

Trapezoid trapezoid_from(const Json& j) {
  return {static_cast<VertexId>(int_field(j, "root")), int_field(j, "h1"), int_field(j, "h2")};
}

std::vector<Rational> function_from(const TruncatedTree& t, const Json& spec) {
  const std::string kind = kind_of(spec);
  std::vector<Rational> f(t.size(), Rational(0));
  if (kind == "indicator") {
    const Trapezoid r = trapezoid_from(spec);
    if (r.root >= t.size()) throw InvalidInput("indicator root out of range");
    for (VertexId y : members(t, r)) f[y] = 1;
  } else if (kind == "point-mass") {
    const auto v = static_cast<VertexId>(int_field(spec, "vertex"));
    if (v >= t.size()) throw InvalidInput("point mass vertex out of range");
    f[v] = spec.contains("value") ? rational_from(spec.at("value")) : Rational(1);
  } else if (kind == "random-pm1") {
    std::mt19937_64 rng(spec.value("seed", 1));
    for (Rational& v : f) v = (rng() & 1) ? 1 : -1;
  } else if (kind == "custom") {
    f = rationals_from(require(spec, "values"));
    if (f.size() != t.size()) throw InvalidInput("custom function size does not match the tree");
  } else {
    throw InvalidInput("unknown function kind \"" + kind + "\"");
  }
  return f;
}

Json to_json(const Rational& r) { return to_string(r); }

Json to_json(const Interval& x) { return Json{{"lower", x.lower()}, {"upper", x.upper()}}; }

Json to_json(const Trapezoid& r) { return Json{{"root", r.root}, {"h1", r.h1}, {"h2", r.h2}}; }

Json to_json(const Window& w) {
  return Json{{"level_top", w.level_top},
              {"level_bot", w.level_bot},
              {"envelopes_in_window", w.envelopes_in_window},
              {"family_size", w.family_size}};
}

Json to_json(const ApReport& r) {
  Json j{{"p", to_json(r.p)}, {"exact", r.exact}};
  if (r.constant_exact) j["constant_exact"] = to_json(*r.constant_exact);
  j["constant"] = to_json(r.constant);
  j["argmax"] = to_json(r.argmax);
  j["window"] = to_json(r.window);
  return j;
}

Json to_json(const AinftyReport& r) {
  return Json{{"constant", to_json(r.constant)}, {"argmax", to_json(r.argmax)}, {"window", to_json(r.window)}};
}

Json to_json(const ReverseHolderResult& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"epsilon", to_json(row.epsilon)}, {"constant", to_json(row.constant)}, {"argmax", to_json(row.argmax)}});
  Json j{{"cap", to_json(r.cap)}};
  j["epsilon"] = r.epsilon ? to_json(*r.epsilon) : Json(nullptr);
  j["constant"] = to_json(r.constant);
  j["rows"] = std::move(rows);
  j["window"] = to_json(r.window);
  return j;
}

Json to_json(const BmoReport& r) {
  return Json{{"norm", to_json(r.norm)}, {"argmax", to_json(r.argmax)}, {"window", to_json(r.window)}};
}

Json to_json(const Th01Certificate& c) {
  Json j{{"per_trapezoid_equal", c.per_trapezoid_equal},
         {"suprema_equal", c.suprema_equal},
         {"tree_constant", to_json(c.tree_constant)},
         {"interval_constant", to_json(c.interval_constant)},
         {"tree_argmax", to_json(c.tree_argmax)},
         {"interval_argmax", Json::array({c.interval_argmax.first, c.interval_argmax.second})},
         {"trapezoids_checked", c.trapezoids_checked},
         {"intervals_matched", c.intervals_matched},
         {"intervals_excluded", c.intervals_excluded}};
  if (c.mismatch) j["mismatch"] = to_json(*c.mismatch);
  return j;
}

Json to_json(const Th1Certificate& c) {
  return Json{{"ap_constant", to_json(c.ap_constant)},
              {"c_cover", to_json(c.c_cover)},
              {"worst_ratio", to_json(c.worst_ratio)},
              {"worst_ratio_trapezoid", to_json(c.worst_ratio_trapezoid)},
              {"worst_slack", to_json(c.worst_slack)},
              {"worst_slack_trapezoid", to_json(c.worst_slack_trapezoid)},
              {"per_trapezoid_holds", c.per_trapezoid_holds},
              {"global_holds", c.global_holds},
              {"trapezoids_checked", c.trapezoids_checked}};
}

Json to_json(const SubsetSample& s) {
  return Json{{"trapezoid", to_json(s.r)},
              {"subset", s.s},
              {"mu_ratio", to_json(s.mu_ratio)},
              {"w_ratio", to_json(s.w_ratio)}};
}

Json to_json(const SubsetBound& b) {
  Json j{{"worst_ratio", to_json(b.worst_ratio)}, {"samples", b.samples}, {"holds", b.holds}};
  if (b.witness) j["witness"] = to_json(*b.witness);
  return j;
}

Json to_json(const ConditionIiiRow& r) {
  return Json{{"gamma", to_json(r.gamma)},
              {"delta", to_json(r.delta)},
              {"argmax", to_json(r.argmax)},
              {"bound", to_json(r.bound)},
              {"within_bound", r.within_bound}};
}

Json to_json(const MaximalField& f) {
  Json values = Json::array(), args = Json::array();
  for (const Rational& v : f.values) values.push_back(to_json(v));
  for (const Trapezoid& r : f.argmax) args.push_back(to_json(r));
  return Json{{"values", std::move(values)}, {"argmax", std::move(args)}};
}

Json to_json(const Weak11Report& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"lambda", to_json(row.lambda)},
                    {"level_set_mass", to_json(row.level_set_mass)},
                    {"ratio", to_json(row.ratio)}});
  return Json{{"constant", to_json(r.constant)}, {"rows", std::move(rows)}};
}

Json to_json(const NormReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) rows.push_back({{"sample", row.name}, {"ratio", to_json(row.ratio)}});
  return Json{{"norm_lower_bound", to_json(r.norm)}, {"argmax", r.argmax}, {"rows", std::move(rows)}};
}

Json to_json(const SplitRule& r) {
  return Json{{"c_d", to_json(r.c_d)},
              {"d_cz", to_json(r.d_cz())},
              {"n", r.n},
              {"worst_parent", to_json(r.worst_parent)},
              {"worst_piece", to_json(r.worst_piece)},
              {"worst_case", to_string(r.worst_case)},
              {"splits_checked", r.splits_checked}};
}

Json to_json(const CzFamily& f) {
  Json pieces = Json::array();
  for (std::size_t i = 0; i < f.pieces.size(); ++i) {
    Json p = to_json(f.pieces[i]);
    p["average"] = to_json(f.averages[i]);
    pieces.push_back(std::move(p));
  }
  Json j{{"lambda", to_json(f.lambda)},
         {"start", to_json(f.start)},
         {"d_cz", to_json(f.d_cz)},
         {"pieces", std::move(pieces)},
         {"certificate",
          {{"averages_at_least_lambda", f.averages_above},
           {"averages_below_d_cz_lambda", f.averages_below},
           {"residual_below_lambda", f.residual_ok},
           {"disjoint", f.disjoint},
           {"partitions_exact", f.partitions_exact},
           {"splits", f.splits}}},
         {"certified", f.certified()}};
  if (f.residual_witness) j["residual_witness"] = *f.residual_witness;
  return j;
}

Json to_json(const Assumption1Report& r) {
  Json j{{"c_d", to_json(r.c_d)},
         {"eta", to_json(r.eta)},
         {"margin", to_json(r.margin)},
         {"passes", r.passes},
         {"samples", r.samples},
         {"alpha", to_json(r.alpha)},
         {"beta", to_json(r.beta)}};
  if (r.witness) j["witness"] = to_json(*r.witness);
  return j;
}

Json to_json(const CounterexampleRatios& c) {
  return Json{{"q", c.q},
              {"n", c.n},
              {"trapezoid", to_json(c.r)},
              {"e_size", c.e.size()},
              {"mu_ratio", to_json(c.mu_ratio)},
              {"image_e", to_json(c.image_e)},
              {"image_rest", to_json(c.image_rest)},
              {"image_ratio", to_json(c.image_ratio)},
              {"image_e_lower", to_json(c.image_e_lower)},
              {"image_rest_upper", to_json(c.image_rest_upper)},
              {"image_ratio_lower", to_json(c.image_ratio_lower)},
              {"bounds_hold", c.bounds_hold}};
}

Json to_json(const AinftyFailureReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"n", row.n},
                    {"xi", to_json(row.xi)},
                    {"image_ratio", to_json(row.image_ratio)},
                    {"bound", to_json(row.bound)},
                    {"bounds_hold", row.bounds_hold}});
  return Json{{"q", r.q},
              {"rows", std::move(rows)},
              {"xi_decreasing", r.xi_decreasing},
              {"ratio_increasing", r.ratio_increasing},
              {"bounds_hold", r.bounds_hold}};
}

namespace {
Json pair_json(const std::optional<std::pair<VertexId, VertexId>>& p) {
  return p ? Json::array({p->first, p->second}) : Json(nullptr);
}
}  // namespace

Json to_json(const DistanceCheck& c) {
  return Json{{"isometry", c.isometry}, {"pairs", c.pairs}, {"witness", pair_json(c.witness)}};
}

Json to_json(const GromovCheck& c) {
  return Json{{"rho_isometry", c.rho_isometry},
              {"level_preserving", c.level_preserving},
              {"order_preserving", c.order_preserving},
              {"consistent", c.consistent},
              {"pairs", c.pairs},
              {"excluded", c.excluded},
              {"witness", pair_json(c.witness)}};
}

Json to_json(const BilipschitzReport& r) {
  return Json{{"c", r.c},
              {"level_displacement", r.level_displacement},
              {"jacobian_max", to_json(r.jacobian_max)},
              {"qi_defect", r.qi_defect},
              {"displacement_ok", r.displacement_ok},
              {"jacobian_ok", r.jacobian_ok},
              {"qi_ok", r.qi_ok},
              {"pairs", r.pairs},
              {"excluded", r.excluded}};
}

Json tree_summary(const TruncatedTree& t) {
  Json j{{"vertices", t.size()}, {"min_level", t.min_level()}, {"max_level", t.max_level()}};
  if (t.is_slab()) {
    j["shape"] = "slab";
    j["level_top"] = t.slab().level_top;
    j["level_bot"] = t.slab().level_bot;
  } else {
    j["shape"] = "ball";
    j["radius"] = t.ball().radius;
  }
  if (t.homogeneous_q()) j["q"] = *t.homogeneous_q();
  return j;
}

std::string trapezoid_csv(const TruncatedTree& t, const FlowMeasure& m, Beta b, const Weight& w, const Rational& p) {
  std::ostringstream os;
  os << "root,level,h1,h2,mu,w_mu,product_lower,product_upper\n";
  os.precision(17);
  for (const Trapezoid& r : enumerate_admissible(t, b)) {
    Rational wm = 0;
    for (VertexId y : members(t, r)) wm += w[y] * m[y];
    os << r.root << ',' << t.level(r.root) << ',' << r.h1 << ',' << r.h2 << ',' << to_string(trapezoid_measure(m, r))
       << ',' << to_string(wm) << ',';
    if (p == 2) {
      const Rational e = ap_product_exact(w, m, r);
      os << to_string(e) << ',' << to_string(e);
    } else if (p > 1) {
      const Interval x = ap_product(w, m, p, r);
      os << x.lower() << ',' << x.upper();
    } else {
      os << ',';
    }
    os << '\n';
  }
  return os.str();
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace flowtree::io
