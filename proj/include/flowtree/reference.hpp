#pragma once

// Serial brute-force implementations that walk explicit member lists. They
// share no code with the tabulated kernels and serve as test oracles and
// benchmark baselines.

#include "flowtree/flow_measure.hpp"
#include "flowtree/trapezoid.hpp"

#include <span>
#include <vector>

namespace flowtree::reference {

Rational weighted_sum(std::span<const Rational> values, const FlowMeasure& m, const Trapezoid& r);

struct RefSup {
  Rational value{0};
  Trapezoid argmax{};
};

/// [w]_{A_2} over every admissible trapezoid that fits.
RefSup a2_constant(std::span<const Rational> w, const FlowMeasure& m, Beta b);
RefSup a1_constant(std::span<const Rational> w, const FlowMeasure& m, Beta b);

/// Noncentred maximal function by enumerating the trapezoids containing each
/// vertex. An empty `w` means w = 1.
std::vector<Rational> maximal_function(std::span<const Rational> f, const FlowMeasure& m, Beta b,
                                       std::span<const Rational> w = {});
Rational maximal_at(std::span<const Rational> f, const FlowMeasure& m, Beta b, VertexId x,
                    std::span<const Rational> w = {});

/// Mean oscillation sup for an exact function.
Rational bmo_norm(std::span<const Rational> f, const FlowMeasure& m, Beta b);

}  // namespace flowtree::reference
