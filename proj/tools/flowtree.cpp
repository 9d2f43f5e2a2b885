// Command-line front end: scenario runs, the verification battery and one
// subcommand per computation.

#include "flowtree/errors.hpp"
#include "flowtree/io.hpp"
#include "flowtree/runner.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace flowtree;
using io::Json;

namespace {

// A spec argument is inline JSON when it starts with '{' or '[', a file path
// otherwise.
Json spec_arg(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\n");
  if (first != std::string::npos && (text[first] == '{' || text[first] == '['))
    return io::parse_json(text, "argument");
  return io::read_json_file(text);
}

struct TreeArgs {
  std::string tree;
  std::string measure;
  std::string weight;
  int q = 2;
  int depth = 6;
  int beta = 12;
};

void add_tree_options(CLI::App* cmd, TreeArgs& a, bool with_weight = true) {
  cmd->add_option("--tree", a.tree, "Tree spec (JSON text or file); default a T_q slab of the given depth");
  cmd->add_option("--measure", a.measure, "Measure spec; default canonical");
  if (with_weight) cmd->add_option("--weight", a.weight, "Weight spec; default w = 1");
  cmd->add_option("--q", a.q, "Branching of the default slab")->check(CLI::Range(1, 64));
  cmd->add_option("--depth", a.depth, "Depth of the default slab")->check(CLI::Range(1, 64));
  cmd->add_option("--beta", a.beta, "Admissibility ratio bound")->check(CLI::Range(2, 1000));
}

struct Setup {
  std::unique_ptr<TruncatedTree> tree;
  std::unique_ptr<FlowMeasure> measure;
  std::unique_ptr<Weight> weight;
  Json weight_spec;
  Beta b;
};

Setup build(const TreeArgs& a) {
  Setup s;
  s.b = Beta(a.beta);
  const Json tree_spec = a.tree.empty()
                             ? Json{{"kind", "homogeneous-slab"}, {"q", a.q}, {"level_top", a.depth}, {"level_bot", 0}}
                             : spec_arg(a.tree);
  s.tree = io::tree_from(tree_spec);
  s.measure = std::make_unique<FlowMeasure>(io::measure_from(*s.tree, a.measure.empty() ? Json(nullptr)
                                                                                         : spec_arg(a.measure)));
  s.weight_spec = a.weight.empty() ? Json{{"kind", "constant"}, {"value", 1}} : spec_arg(a.weight);
  s.weight = std::make_unique<Weight>(io::weight_from(*s.tree, s.weight_spec));
  return s;
}

std::vector<Rational> function_arg(const Setup& s, const std::string& f) {
  if (f.empty()) return io::function_from(*s.tree, Json{{"kind", "random-pm1"}, {"seed", 1}});
  return io::function_from(*s.tree, spec_arg(f));
}

// "root,h1,h2" or a JSON object.
Trapezoid trapezoid_arg(const std::string& text) {
  if (text.find('{') != std::string::npos) return io::trapezoid_from(io::parse_json(text, "--root"));
  std::stringstream in(text);
  std::string part;
  std::vector<long> v;
  while (std::getline(in, part, ',')) v.push_back(std::stol(part));
  if (v.size() != 3) throw InvalidInput("--root expects root,h1,h2");
  return {static_cast<VertexId>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2])};
}

std::vector<Rational> rational_list(const std::string& text) {
  std::stringstream in(text);
  std::string part;
  std::vector<Rational> out;
  while (std::getline(in, part, ',')) out.push_back(parse_rational(part));
  if (out.empty()) throw InvalidInput("empty list");
  return out;
}

void emit(const Json& j) { std::cout << io::dump(j); }

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  configure_threads_from_env();
  CLI::App app{"Weights, maximal functions and decompositions on trees with a root at infinity"};
  app.require_subcommand(1);
  int exit_code = 0;

  // run
  std::string scenario_path;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run a scenario file");
  run->add_option("scenario", scenario_path, "Scenario JSON")->required();
  run->add_flag("--quiet", quiet, "Suppress the per-suite summary");
  run->callback([&] {
    const Json sc = io::read_json_file(scenario_path);
    const auto report = runner::run_scenario_file(scenario_path);
    if (!sc.contains("output") || !sc.at("output").contains("report")) emit(report.to_json());
    if (!quiet) std::cerr << runner::summary(report);
    exit_code = report.passed() ? 0 : 1;
  });

  // verify
  int verify_depth = 4;
  std::uint64_t verify_seed = 1;
  std::string verify_report;
  auto* verify = app.add_subcommand("verify", "Run every property suite at one depth");
  verify->add_option("--depth", verify_depth, "Window depth")->required();
  verify->add_option("--seed", verify_seed, "Random seed");
  verify->add_option("--report", verify_report, "Write the JSON report here");
  verify->callback([&] {
    const auto report = runner::verify_all(verify_depth, verify_seed);
    if (!verify_report.empty()) write_file(verify_report, io::dump(report.to_json()));
    std::cout << runner::summary(report);
    exit_code = report.passed() ? 0 : 1;
  });

  // ap-constant
  TreeArgs ap_args;
  std::string ap_p = "2", ap_csv;
  bool ap_exact = false, ap_float = false;
  auto* ap = app.add_subcommand("ap-constant", "[w]_{A_p} over the admissible family");
  add_tree_options(ap, ap_args);
  ap->add_option("--p", ap_p, "Exponent p > 1 (\"p/q\" or decimal)");
  auto* exact_flag = ap->add_flag("--exact", ap_exact, "Exact rationals (p = 2 only)");
  ap->add_flag("--float", ap_float, "Certified interval backend")->excludes(exact_flag);
  ap->add_option("--csv", ap_csv, "Per-trapezoid table");
  ap->callback([&] {
    const Setup s = build(ap_args);
    const Rational p = parse_rational(ap_p);
    if (p <= 1) throw InvalidInput("--p must exceed 1; use a1-constant for p = 1");
    if (ap_exact && p != 2) throw InvalidInput("--exact is available for p = 2 only");
    const ApReport r = ap_float ? ap_constant_float(*s.weight, *s.measure, s.b, p)
                                : ap_constant(*s.weight, *s.measure, s.b, p);
    if (!ap_csv.empty()) write_file(ap_csv, io::trapezoid_csv(*s.tree, *s.measure, s.b, *s.weight, p));
    emit(Json{{"tree", io::tree_summary(*s.tree)}, {"report", io::to_json(r)}});
  });

  TreeArgs a1_args;
  auto* a1 = app.add_subcommand("a1-constant", "[w]_{A_1} over the admissible family");
  add_tree_options(a1, a1_args);
  a1->callback([&] {
    const Setup s = build(a1_args);
    emit(Json{{"tree", io::tree_summary(*s.tree)}, {"report", io::to_json(a1_constant(*s.weight, *s.measure, s.b))}});
  });

  TreeArgs ai_args;
  std::string ai_gamma = "1/2", ai_xi = "1/2";
  int ai_samples = 2;
  std::uint64_t ai_seed = 1;
  auto* ai = app.add_subcommand("ainfty-check", "A_inf constant and conditions iii and iv");
  add_tree_options(ai, ai_args);
  ai->add_option("--gamma", ai_gamma, "Mass fraction for condition iii");
  ai->add_option("--xi", ai_xi, "Mass fraction for condition iv");
  ai->add_option("--samples", ai_samples, "Random subsets per trapezoid");
  ai->add_option("--seed", ai_seed, "Random seed");
  ai->callback([&] {
    const Setup s = build(ai_args);
    const AinftyReport r = ainfty_constant(*s.weight, *s.measure, s.b);
    const auto iii = thAinf_condition_iii_check(*s.weight, *s.measure, s.b, parse_rational(ai_gamma), r.constant);
    const auto iv =
        thAinf_condition_iv_check(*s.weight, *s.measure, s.b, parse_rational(ai_xi), ai_samples, ai_seed);
    emit(Json{{"tree", io::tree_summary(*s.tree)},
              {"a_inf", io::to_json(r)},
              {"condition_iii", io::to_json(iii)},
              {"condition_iv", io::to_json(iv)}});
  });

  TreeArgs rh_args;
  std::string rh_grid = "0:10", rh_cap = "2";
  bool rh_weighted = false;
  auto* rh = app.add_subcommand("reverse-holder", "Reverse Hoelder exponent search on eps = 2^-k");
  add_tree_options(rh, rh_args);
  rh->add_option("--grid", rh_grid, "k range as kmin:kmax");
  rh->add_option("--cap", rh_cap, "Acceptable constant");
  rh->add_flag("--weighted", rh_weighted, "Inverse weight under w mu");
  rh->callback([&] {
    const Setup s = build(rh_args);
    const auto colon = rh_grid.find(':');
    if (colon == std::string::npos) throw InvalidInput("--grid expects kmin:kmax");
    const int lo = std::stoi(rh_grid.substr(0, colon)), hi = std::stoi(rh_grid.substr(colon + 1));
    const auto r = rh_weighted ? weighted_reverse_holder(*s.weight, *s.measure, s.b, lo, hi, parse_rational(rh_cap))
                               : reverse_holder_search(*s.weight, *s.measure, s.b, lo, hi, parse_rational(rh_cap));
    emit(Json{{"tree", io::tree_summary(*s.tree)}, {"report", io::to_json(r)}});
  });

  TreeArgs bmo_args;
  std::string bmo_f;
  auto* bmo = app.add_subcommand("bmo-norm", "Mean oscillation of log w, or of --f");
  add_tree_options(bmo, bmo_args);
  bmo->add_option("--f", bmo_f, "Function spec instead of log w");
  bmo->callback([&] {
    const Setup s = build(bmo_args);
    const BmoReport r = bmo_f.empty() ? bmo_norm(log_weight(*s.weight), *s.measure, s.b, s.weight->values())
                                      : bmo_norm(std::span<const Rational>(function_arg(s, bmo_f)), *s.measure, s.b);
    emit(Json{{"tree", io::tree_summary(*s.tree)}, {"report", io::to_json(r)}});
  });

  int th01_q = 2, th01_depth = 8, th01_bot = 0, th01_beta = 12;
  std::string th01_weight = R"({"kind": "level-periodic", "values": ["2", "1"]})";
  auto* th01 = app.add_subcommand("th01-verify", "Tree versus integer-interval A_2 constant of a level weight");
  th01->add_option("--q", th01_q)->check(CLI::Range(1, 64));
  th01->add_option("--depth", th01_depth)->check(CLI::Range(1, 64));
  th01->add_option("--level-bot", th01_bot);
  th01->add_option("--beta", th01_beta)->check(CLI::Range(2, 1000));
  th01->add_option("--weight", th01_weight, "Level weight spec");
  th01->callback([&] {
    const auto lw = io::level_weight_from(spec_arg(th01_weight));
    if (!lw) throw InvalidInput("th01-verify needs a level weight");
    emit(io::to_json(theorem_th01_check(*lw, th01_q, th01_bot + th01_depth, th01_bot, Beta(th01_beta))));
  });

  TreeArgs th1_args;
  auto* th1 = app.add_subcommand("th1-verify", "Envelope ratio against the cover bound, p = 2");
  add_tree_options(th1, th1_args);
  th1->callback([&] {
    const Setup s = build(th1_args);
    emit(io::to_json(theorem_th1_check(*s.weight, *s.measure, s.b)));
  });

  TreeArgs mx_args;
  std::string mx_f;
  bool mx_weighted = false;
  auto* mx = app.add_subcommand("maximal", "Maximal function field with argmax trapezoids");
  add_tree_options(mx, mx_args);
  mx->add_option("--f", mx_f, "Function spec");
  mx->add_flag("--weighted", mx_weighted, "Averages with respect to w mu");
  mx->callback([&] {
    const Setup s = build(mx_args);
    const auto f = function_arg(s, mx_f);
    const MaximalField r = mx_weighted ? weighted_maximal_function(*s.weight, *s.measure, s.b, f)
                                       : maximal_function(*s.measure, s.b, f);
    emit(Json{{"tree", io::tree_summary(*s.tree)}, {"field", io::to_json(r)}});
  });

  TreeArgs cz_args;
  std::string cz_f, cz_lambda = "1", cz_root;
  bool cz_weighted = false;
  auto* cz = app.add_subcommand("cz-decompose", "Stopping-time decomposition with certificates");
  add_tree_options(cz, cz_args);
  cz->add_option("--f", cz_f, "Function spec");
  cz->add_option("--lambda", cz_lambda, "Height");
  cz->add_option("--root", cz_root, "Starting trapezoid root,h1,h2; default the top with full height");
  cz->add_flag("--weighted", cz_weighted, "Weighted variant (requires assumption 1)");
  cz->callback([&] {
    const Setup s = build(cz_args);
    const auto f = function_arg(s, cz_f);
    const Trapezoid r0 =
        cz_root.empty() ? Trapezoid{s.tree->top(), 1, s.tree->height(s.tree->top()) + 1} : trapezoid_arg(cz_root);
    const Rational lambda = parse_rational(cz_lambda);
    const CzFamily fam = cz_weighted ? cz_decompose_weighted(*s.weight, *s.measure, s.b, f, lambda, r0)
                                     : cz_decompose(*s.measure, s.b, f, lambda, r0);
    emit(io::to_json(fam));
  });

  TreeArgs wk_args;
  std::string wk_f, wk_grid = "1/8,1/4,1/2,1,2,4";
  bool wk_weighted = false;
  auto* wk = app.add_subcommand("weak11", "Weak (1,1) ratios on a lambda grid");
  add_tree_options(wk, wk_args);
  wk->add_option("--f", wk_f, "Function spec");
  wk->add_option("--grid", wk_grid, "Comma-separated lambdas");
  wk->add_flag("--weighted", wk_weighted, "Use the w mu maximal function");
  wk->callback([&] {
    const Setup s = build(wk_args);
    const auto f = function_arg(s, wk_f);
    const auto grid = rational_list(wk_grid);
    emit(io::to_json(weak11_constant(*s.weight, *s.measure, s.b, f, grid, wk_weighted)));
  });

  TreeArgs op_args;
  std::string op_p = "2";
  int op_samples = 8;
  std::uint64_t op_seed = 1;
  auto* op = app.add_subcommand("opnorm", "Empirical L^p(w mu) norm of the maximal operator");
  add_tree_options(op, op_args);
  op->add_option("--p", op_p, "Exponent p > 1");
  op->add_option("--samples", op_samples, "Number of sample functions");
  op->add_option("--seed", op_seed, "Random seed");
  op->callback([&] {
    const Setup s = build(op_args);
    const auto samples = standard_samples(*s.measure, s.b, op_samples, op_seed);
    emit(io::to_json(lp_operator_norm(*s.weight, *s.measure, s.b, parse_rational(op_p), samples)));
  });

  int jd_q = 2, jd_n = 5;
  auto* jd = app.add_subcommand("jacobian-demo", "CSV: n, xi_n, image ratio, bound for the reflected weight");
  jd->add_option("--q", jd_q)->check(CLI::Range(2, 16));
  jd->add_option("--n-max", jd_n)->check(CLI::Range(1, 12));
  jd->callback([&] {
    const auto rep = ainfty_failure_certificate(jd_q, 1, jd_n);
    std::cout << "n,xi_n,image_ratio,bound\n";
    for (const auto& row : rep.rows)
      std::cout << row.n << ',' << to_string(row.xi) << ',' << to_string(row.image_ratio) << ','
                << to_string(row.bound) << '\n';
  });

  std::string mc_spec;
  std::size_t mc_pairs = 0;
  auto* mc = app.add_subcommand("map-check", "Diagnostics for an explicit vertex bijection");
  mc->add_option("--spec", mc_spec, "{\"tree\": ..., \"map\": [...], \"measure\"?: ...}")->required();
  mc->add_option("--pairs", mc_pairs, "Random pairs to check (0 = all)");
  mc->callback([&] {
    const Json spec = spec_arg(mc_spec);
    if (!spec.contains("tree") || !spec.contains("map")) throw InvalidInput("map spec needs \"tree\" and \"map\"");
    const auto tree = io::tree_from(spec.at("tree"));
    const FlowMeasure m = io::measure_from(*tree, spec.value("measure", Json(nullptr)));
    const TreeBijection f(*tree, spec.at("map").get<std::vector<VertexId>>());
    Json out{{"tree", io::tree_summary(*tree)},
             {"d_isometry", io::to_json(check_d_isometry(f, mc_pairs))},
             {"gromov", io::to_json(gromov_isometry_check(f, mc_pairs))}};
    const Weight j = jacobian(f, m);
    Json jac = Json::array();
    for (VertexId x = 0; x < tree->size(); ++x) jac.push_back(to_string(j[x]));
    out["jacobian"] = std::move(jac);
    if (tree->homogeneous_q() && (spec.value("measure", Json(nullptr)).is_null()))
      out["bilipschitz"] = io::to_json(bilipschitz_diagnostics(f, m, mc_pairs));
    emit(out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return exit_code;
}
