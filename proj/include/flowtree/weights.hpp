#pragma once

#include "flowtree/flow_measure.hpp"
#include "flowtree/kernels.hpp"
#include "flowtree/numeric.hpp"
#include "flowtree/trapezoid.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace flowtree {

/// Positive vertex function.
class Weight {
 public:
  Weight(const TruncatedTree& t, std::vector<Rational> values);

  const TruncatedTree& tree() const { return *tree_; }
  const Rational& operator[](VertexId x) const { return values_[x]; }
  std::span<const Rational> values() const { return values_; }
  bool is_constant() const;

 private:
  const TruncatedTree* tree_;
  std::vector<Rational> values_;
};

/// Weight depending on the level only: w(x) = W(l(x)).
class LevelWeight {
 public:
  LevelWeight(std::function<Rational(int)> fn, std::string name);

  static LevelWeight constant(const Rational& c);
  /// W(l) = pattern[l mod period], with nonnegative remainder.
  static LevelWeight periodic(std::vector<Rational> pattern);
  /// W(l) = base^l.
  static LevelWeight exponential(const Rational& base);

  Rational operator()(int level) const { return fn_(level); }
  const std::string& name() const { return name_; }

 private:
  std::function<Rational(int)> fn_;
  std::string name_;
};

Weight constant_weight(const TruncatedTree& t, const Rational& c);
Weight level_weight(const TruncatedTree& t, const LevelWeight& W);
/// w^s for an integer s (kept exact).
Weight power_weight(const Weight& w, long s);
Weight scaled_weight(const Weight& w, const Rational& c);

Rational weighted_measure(const Weight& w, const FlowMeasure& m, std::span<const VertexId> set);

struct Window {
  int level_top = 0;
  int level_bot = 0;
  bool envelopes_in_window = false;
  std::size_t family_size = 0;
};

Window describe_window(const TruncatedTree& t, EnumerationOptions opt, std::size_t family_size);

struct ApReport {
  Rational p;
  std::optional<Rational> p_conj;         // empty for p = 1
  bool exact = false;
  std::optional<Rational> constant_exact;  // set when exact
  Interval constant{1.0};                  // certified enclosure
  Trapezoid argmax{};
  Window window;
};

/// (avg_R w)(avg_R w^{-1/(p-1)})^{p-1} for one trapezoid.
Rational ap_product_exact(const Weight& w, const FlowMeasure& m, const Trapezoid& r);  // p = 2
Interval ap_product(const Weight& w, const FlowMeasure& m, const Rational& p, const Trapezoid& r);

/// Sup over the enumerated family. p = 2 is exact; other p > 1 use the
/// interval backend.
ApReport ap_constant(const Weight& w, const FlowMeasure& m, Beta b, const Rational& p, EnumerationOptions opt = {});
/// Always runs the interval backend, including p = 2.
ApReport ap_constant_float(const Weight& w, const FlowMeasure& m, Beta b, const Rational& p,
                           EnumerationOptions opt = {});

ApReport a1_constant(const Weight& w, const FlowMeasure& m, Beta b, EnumerationOptions opt = {});

/// (avg_R |f|)^p <= [w]_{A_p} (1 / w_mu(R)) sum_R |f|^p w mu. Returns whether
/// the inequality holds; throws Inapplicable when f vanishes on R.
struct DualityCheck {
  bool holds = false;
  Interval lhs{0.0};
  Interval rhs{0.0};
};
/// `ap_bound` is an upper bound for [w]_{A_p}; p = 2 is decided exactly.
DualityCheck ap_duality_characterization_check(const Weight& w, const FlowMeasure& m, const Rational& p,
                                               const Rational& ap_bound, std::span<const Rational> f,
                                               const Trapezoid& r);
/// With f = w^{-p'/p} = w^{-1} and p = 2, the left side times w_mu(R) / sum
/// |f|^2 w mu equals the A_2 product on R. Exact.
bool a2_extremal_identity(const Weight& w, const FlowMeasure& m, const Trapezoid& r);

// Level weights on Z with counting measure.
struct LevelApResult {
  Rational constant{1};
  int a = 0;
  int b = 0;
};
LevelApResult level_ap_constant(const LevelWeight& W, int lo, int hi, int max_length);  // p = 2
Interval level_ap_product(const LevelWeight& W, const Rational& p, int a, int b);

struct Th01Certificate {
  bool per_trapezoid_equal = true;
  std::optional<Trapezoid> mismatch;
  Rational tree_constant{1};
  Rational interval_constant{1};
  bool suprema_equal = false;
  std::size_t trapezoids_checked = 0;
  std::size_t intervals_matched = 0;
  std::size_t intervals_excluded = 0;
  std::pair<int, int> interval_argmax{0, 0};
  Trapezoid tree_argmax{};
};

/// Smallest root level l > b with l + 1 - a <= beta (l - b); the ratio is
/// then also >= 2.
int witness_root_level(int a, int b, Beta beta);

/// Transfer to intervals on T_q slabs, p = 2, exact.
Th01Certificate theorem_th01_check(const LevelWeight& W, int q, int level_top, int level_bot, Beta b = Beta{});

struct CoverConstants {
  Rational linear;     // multiplies [w]_{A_p}
  Rational quadratic;  // multiplies [w]_{A_p}^2
};
/// Constants of the covering chain for one trapezoid; integer p only.
CoverConstants cover_constants(Beta b, const Trapezoid& r, long p);

struct Th1Certificate {
  Rational ap_constant{1};
  Rational c_cover{0};
  Rational worst_ratio{0};
  Trapezoid worst_ratio_trapezoid{};
  Rational worst_slack{0};  // max ratio(R) / bound(R)
  Trapezoid worst_slack_trapezoid{};
  bool per_trapezoid_holds = true;
  bool global_holds = false;
  std::size_t trapezoids_checked = 0;
};

/// Envelope-to-trapezoid weighted ratio against C_cover ([w] + [w]^2), p = 2.
Th1Certificate theorem_th1_check(const Weight& w, const FlowMeasure& m, Beta b);

// Subset sampling for inequalities of the form w_mu(S) <= eta w_mu(R).
struct SubsetSample {
  Trapezoid r{};
  std::vector<VertexId> s;
  Rational mu_ratio;
  Rational w_ratio;
};

/// Subsets S of members of R with mu(S) <= xi mu(R): greedy by weight, random
/// orders, subtree pieces and single layers. Deterministic for a seed.
std::vector<SubsetSample> sample_subsets(const Weight& w, const FlowMeasure& m, const Trapezoid& r,
                                         const Rational& xi, int random_samples, std::uint64_t seed);

struct SubsetBound {
  Rational worst_ratio{0};
  std::optional<SubsetSample> witness;
  std::size_t samples = 0;
  bool holds = true;
};

/// w_mu(S) <= (1 - (1 - xi)^2 / [w]_{A_2}) w_mu(R) on sampled (R, S).
SubsetBound lemma_pre_reverse_check(const Weight& w, const FlowMeasure& m, Beta b, const Rational& xi,
                                    const Rational& a2_constant, int samples_per_trapezoid, std::uint64_t seed,
                                    std::size_t max_trapezoids = 0);

struct ReverseHolderRow {
  Rational epsilon;
  Interval constant{1.0};
  Trapezoid argmax{};
};

struct ReverseHolderResult {
  std::optional<Rational> epsilon;  // largest grid value with C <= cap
  Interval constant{1.0};
  Rational cap;
  std::vector<ReverseHolderRow> rows;
  Window window;
};

inline const Rational kDefaultReverseHolderCap{2};

/// Grid eps = 2^{-k}, k = k_min..k_max.
ReverseHolderResult reverse_holder_search(const Weight& w, const FlowMeasure& m, Beta b, int k_min, int k_max,
                                          const Rational& cap = kDefaultReverseHolderCap);

/// [w^delta]_{A_s} <= [w]_{A_p}^delta with delta = 1/(1+eps), s = (p+eps)/(1+eps).
struct OpennessCheck {
  Interval lhs{1.0};
  Interval rhs{1.0};
  bool holds = false;
};
OpennessCheck openness_check(const Weight& w, const FlowMeasure& m, Beta b, const Rational& p, const Rational& eps);

struct AinftyReport {
  Interval constant{1.0};
  Trapezoid argmax{};
  Window window;
};
AinftyReport ainfty_constant(const Weight& w, const FlowMeasure& m, Beta b, EnumerationOptions opt = {});

struct ConditionIiiRow {
  Rational gamma;
  Rational delta{0};
  Trapezoid argmax{};
  Interval bound{1.0};  // log(1 + [w]_inf) / log(1 + (gamma [w]_inf)^{-1})
  bool within_bound = true;
};
ConditionIiiRow thAinf_condition_iii_check(const Weight& w, const FlowMeasure& m, Beta b, const Rational& gamma,
                                           const Interval& ainfty);

/// Max w_mu(S)/w_mu(R) over sampled S with mu(S) <= xi mu(R).
SubsetBound thAinf_condition_iv_check(const Weight& w, const FlowMeasure& m, Beta b, const Rational& xi,
                                      int samples_per_trapezoid, std::uint64_t seed, std::size_t max_trapezoids = 0);

struct BmoReport {
  Interval norm{0.0};
  Trapezoid argmax{};
  Window window;
};
BmoReport bmo_norm(std::span<const Rational> f, const FlowMeasure& m, Beta b);
/// `key`, when given, holds exact values with key(x) = key(y) => f(x) = f(y);
/// trapezoids where the key is constant get oscillation exactly 0.
BmoReport bmo_norm(std::span<const Interval> f, const FlowMeasure& m, Beta b, std::span<const Rational> key = {});
/// f = log w.
std::vector<Interval> log_weight(const Weight& w);

struct BmoToAinftyRow {
  Rational lambda;
  Interval ap_constant{1.0};
  Interval exp_moment{1.0};  // sup_R avg_R e^{eta |f - f_R|}, eta = lambda max(1, 1/(p-1))
  bool workable = false;
};
struct BmoToAinftyReport {
  std::vector<BmoToAinftyRow> rows;
  std::optional<Rational> smallest_workable;
  std::optional<Rational> largest_workable;
  Rational cap;
};
BmoToAinftyReport bmo_to_ainfty(std::span<const Interval> f, const FlowMeasure& m, Beta b,
                                std::span<const Rational> lambda_grid, const Rational& p, const Rational& cap,
                                std::span<const Rational> key = {});

/// [v]_{A_p} for a weight known only through enclosures, p > 1. `key` as in
/// bmo_norm.
ApReport ap_constant_values(std::span<const Interval> v, const FlowMeasure& m, Beta b, const Rational& p,
                            EnumerationOptions opt = {}, std::span<const Rational> key = {});

}  // namespace flowtree
