#pragma once

// JSON specifications for trees, measures, weights and test functions, and
// serializers for every report type. Rationals travel as "p/q" strings.

#include "flowtree/maximal.hpp"
#include "flowtree/tree_maps.hpp"

#include <json.hpp>

#include <memory>
#include <string>

namespace flowtree::io {

using Json = nlohmann::ordered_json;

/// Parses text, reporting syntax errors with line and column.
Json parse_json(const std::string& text, const std::string& source = "input");
Json read_json_file(const std::string& path);

Rational rational_from(const Json& j);  // accepts "p/q", "0.25" or a JSON integer
std::vector<Rational> rationals_from(const Json& j);

std::unique_ptr<TruncatedTree> tree_from(const Json& spec);
FlowMeasure measure_from(const TruncatedTree& t, const Json& spec);  // null spec means canonical

/// {"kind": "constant", "value"} | {"kind": "level-periodic", "values"} |
/// {"kind": "level-exponential", "base"} | {"kind": "values", "values"} |
/// {"kind": "random", "seed", "max"}.
Weight weight_from(const TruncatedTree& t, const Json& spec);
/// Level profile when the spec depends on the level only.
std::optional<LevelWeight> level_weight_from(const Json& spec);

/// {"kind": "indicator", "root", "h1", "h2"} | {"kind": "point-mass", "vertex", "value"} |
/// {"kind": "random-pm1", "seed"} | {"kind": "custom", "values"}.
std::vector<Rational> function_from(const TruncatedTree& t, const Json& spec);

Trapezoid trapezoid_from(const Json& j);

Json to_json(const Rational& r);
Json to_json(const Interval& x);
Json to_json(const Trapezoid& r);
Json to_json(const Window& w);
Json to_json(const ApReport& r);
Json to_json(const AinftyReport& r);
Json to_json(const ReverseHolderResult& r);
Json to_json(const BmoReport& r);
Json to_json(const Th01Certificate& c);
Json to_json(const Th1Certificate& c);
Json to_json(const SubsetBound& b);
Json to_json(const SubsetSample& s);
Json to_json(const ConditionIiiRow& r);
Json to_json(const MaximalField& f);
Json to_json(const Weak11Report& r);
Json to_json(const NormReport& r);
Json to_json(const SplitRule& r);
Json to_json(const CzFamily& f);
Json to_json(const Assumption1Report& r);
Json to_json(const CounterexampleRatios& c);
Json to_json(const AinftyFailureReport& r);
Json to_json(const DistanceCheck& c);
Json to_json(const GromovCheck& c);
Json to_json(const BilipschitzReport& r);
Json tree_summary(const TruncatedTree& t);

/// One row per in-window admissible trapezoid: measures and the A_p product
/// (exact for p = 2, an enclosure otherwise, empty for p = 1).
std::string trapezoid_csv(const TruncatedTree& t, const FlowMeasure& m, Beta b, const Weight& w, const Rational& p);

/// Deterministic text: two-space indentation and a trailing newline.
std::string dump(const Json& j);

}  // namespace flowtree::io
