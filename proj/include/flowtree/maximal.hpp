#pragma once

// Noncentred maximal operators over admissible trapezoids, empirical norm
// estimates, the trapezoid splitting rule and stopping-time decompositions.

#include "flowtree/trapezoid.hpp"
#include "flowtree/weights.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace flowtree {

struct MaximalField {
  std::vector<Rational> values;
  std::vector<Trapezoid> argmax;
};

/// M f(x) = max over in-window admissible R containing x of the mu-average
/// of |f| on R.
MaximalField maximal_function(const FlowMeasure& m, Beta b, std::span<const Rational> f,
                              EnumerationOptions opt = {});

/// Same with averages taken with respect to w mu.
MaximalField weighted_maximal_function(const Weight& w, const FlowMeasure& m, Beta b, std::span<const Rational> f,
                                       EnumerationOptions opt = {});

struct Weak11Row {
  Rational lambda;
  Rational level_set_mass;  // w_mu({M f > lambda})
  Rational ratio;           // lambda * mass / ||f||_{L^1(w mu)}
};
struct Weak11Report {
  Rational constant{0};
  std::vector<Weak11Row> rows;
};
/// With `weighted`, the operator is the w mu maximal function; otherwise M_mu.
Weak11Report weak11_constant(const Weight& w, const FlowMeasure& m, Beta b, std::span<const Rational> f,
                             std::span<const Rational> lambda_grid, bool weighted = false);

struct SampleFunction {
  std::string name;
  std::vector<Rational> values;
};

/// Point masses, trapezoid indicators, level-dependent signs and constants.
std::vector<SampleFunction> standard_samples(const FlowMeasure& m, Beta b, int count, std::uint64_t seed);

/// f = w^{-1/(p-1)} chi_R. Exact for p = 2; otherwise w^{-1/(p-1)} is
/// replaced by its nearest double, which is still a legitimate test function.
SampleFunction necessity_sample(const Weight& w, const FlowMeasure& m, const Rational& p, const Trapezoid& r);

struct NormRow {
  std::string name;
  Interval ratio{1.0};
};
struct NormReport {
  Interval norm{0.0};  // max over samples, a lower bound for the operator norm
  std::string argmax;
  std::vector<NormRow> rows;
};
/// ||M f||_{L^p(w mu)} / ||f||_{L^p(w mu)} over the samples plus the
/// necessity sample at the argmax of [w]_{A_p}.
NormReport lp_operator_norm(const Weight& w, const FlowMeasure& m, Beta b, const Rational& p,
                            std::span<const SampleFunction> samples, bool include_necessity = true);

enum class SplitCase { kChildren, kUnitBase, kPushDown, kHeightSplit };
const char* to_string(SplitCase c);

struct Split {
  SplitCase case_tag = SplitCase::kChildren;
  std::vector<Trapezoid> pieces;
};

/// Partition of a non-singleton admissible trapezoid into admissible pieces.
Split split_trapezoid(const TruncatedTree& t, Beta b, const Trapezoid& r);

struct SplitCheck {
  bool disjoint = false;
  bool exact_union = false;
  bool all_admissible = false;
  bool all_fit = false;
  Rational min_ratio{1};
  bool ok() const { return disjoint && exact_union && all_admissible && all_fit; }
};
/// Verifies a split against member sets. An empty `w` means w = 1.
SplitCheck check_split(const FlowMeasure& m, Beta b, const Trapezoid& parent, const Split& s,
                       std::span<const Rational> w = {});

struct SplitRule {
  Rational c_d{1};  // min mu(piece)/mu(parent)
  int n = 0;        // max piece count
  Trapezoid worst_parent{};
  Trapezoid worst_piece{};
  SplitCase worst_case = SplitCase::kChildren;
  std::size_t splits_checked = 0;
  Rational d_cz() const { return 1 / c_d; }
};
/// Exhaustive over in-window non-singleton admissible trapezoids. With a
/// weight, ratios use w mu and c_d is the floor delta of the weighted rule.
SplitRule compute_split_rule(const FlowMeasure& m, Beta b, const Weight* w = nullptr);

struct CzFamily {
  Rational lambda;
  Trapezoid start{};
  std::vector<Trapezoid> pieces;
  Rational d_cz;
  std::vector<Rational> averages;
  bool averages_above = false;  // i)
  bool averages_below = false;  // ii)
  bool residual_ok = false;     // iii)
  bool disjoint = false;
  bool partitions_exact = false;
  std::size_t splits = 0;
  std::optional<VertexId> residual_witness;
  bool certified() const { return averages_above && averages_below && residual_ok && disjoint && partitions_exact; }
};

/// Stopping time below r0 at height lambda. `rule` supplies D_CZ; when absent
/// it is computed for the window.
CzFamily cz_decompose(const FlowMeasure& m, Beta b, std::span<const Rational> f, const Rational& lambda,
                      const Trapezoid& r0, const SplitRule* rule = nullptr);

struct Assumption1Report {
  Rational c_d;
  Rational eta{0};  // max w_mu(S)/w_mu(R) over samples with mu(S) <= (1 - C_D) mu(R)
  Rational margin;
  bool passes = true;
  std::optional<SubsetSample> witness;
  std::size_t samples = 0;
  // Contrapositive form: w_mu(S) < alpha w_mu(R) implies mu(S) < beta mu(R).
  Rational alpha;
  Rational beta;
};
inline const Rational kDefaultAssumptionMargin{1, 100};

/// Samples subsets of every in-window trapezoid (or the first
/// `max_trapezoids` in enumeration order when nonzero), including the
/// complements of split pieces.
Assumption1Report assumption1_check(const Weight& w, const FlowMeasure& m, Beta b, int samples_per_trapezoid,
                                    std::uint64_t seed, const Rational& margin = kDefaultAssumptionMargin,
                                    std::size_t max_trapezoids = 0, const SplitRule* rule = nullptr);

/// Weighted stopping time. Throws Inapplicable, naming the witness pair, when
/// the weight fails assumption1_check.
CzFamily cz_decompose_weighted(const Weight& w, const FlowMeasure& m, Beta b, std::span<const Rational> f,
                               const Rational& lambda, const Trapezoid& r0, int assumption_samples = 2,
                               std::uint64_t seed = 1);
/// Same with the assumption report and the weighted split rule supplied.
CzFamily cz_decompose_weighted(const Weight& w, const FlowMeasure& m, Beta b, std::span<const Rational> f,
                               const Rational& lambda, const Trapezoid& r0, const Assumption1Report& a,
                               const SplitRule& weighted_rule);

/// Reverse Hoelder for w^{-1} under w mu on the grid eps = 2^{-k}:
/// C(eps) = sup_R (w_mu(R)^{-1} sum_R w^{-eps} mu)^{1/(1+eps)} w_mu(R) / mu(R).
ReverseHolderResult weighted_reverse_holder(const Weight& w, const FlowMeasure& m, Beta b, int k_min, int k_max,
                                            const Rational& cap = kDefaultReverseHolderCap);

/// Constants of the stopping-time proof of reverse Hoelder: with
/// eta = 1 - (1 - gamma)^p / [w]_{A_p} and K = D_CZ / gamma, any eps with
/// K^eps eta < 1 works, with reverse Hoelder constant at most
/// (1 + K^eps / (1 - K^eps eta))^{1/(1+eps)}.
struct ReverseHolderProof {
  Interval eta{0.0};
  Interval eps_limit{0.0};  // log(1/eta) / log K
  Rational eps;             // half the limit, rounded down to a dyadic
  Interval contraction{0.0};  // K^eps eta
  Interval constant{1.0};
  bool valid = false;
};
ReverseHolderProof reverse_holder_proof(const Rational& d_cz, const Rational& gamma, const Interval& ap_constant,
                                        const Rational& p);

}  // namespace flowtree
