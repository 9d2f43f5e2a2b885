#pragma once

// Number types shared by every module: exact rationals (GMP) and certified
// double intervals (Boost.Interval with outward-widened transcendentals).

#include <gmpxx.h>

#include <boost/numeric/interval.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

namespace flowtree {

// Values handed to the library must be canonical (GMP requires it for
// arithmetic); parse_rational and every library result already are.
using Rational = mpq_class;
using Interval = boost::numeric::interval<double>;

/// Parses "p/q", "p" or a decimal literal such as "0.25" into an exact rational.
Rational parse_rational(std::string_view text);

/// Always emits "p/q" (integers as "p/1") so that consumers can split on '/'.
std::string to_string(const Rational& value);

Rational pow_int(const Rational& base, long exponent);

/// Smallest interval of doubles containing the exact rational.
Interval to_interval(const Rational& value);

inline double to_double(const Rational& value) { return value.get_d(); }
inline double to_double(double value) { return value; }
inline double to_double(const Interval& value) { return boost::numeric::median(value); }

// Transcendental bounds. libm results are correct to within one ulp in
// round-to-nearest; each endpoint is pushed outward by kTranscendentalUlps.
inline constexpr int kTranscendentalUlps = 4;

double round_down(double value, int ulps = kTranscendentalUlps);
double round_up(double value, int ulps = kTranscendentalUlps);

Interval exp(const Interval& x);
Interval log(const Interval& x);          // requires x > 0
Interval pow(const Interval& base, const Interval& exponent);  // requires base > 0
Interval pow(const Interval& base, const Rational& exponent);

/// Certified test a <= b. Returns false when the intervals overlap in a way
/// that does not decide the comparison.
inline bool certainly_le(const Interval& a, const Interval& b) { return a.upper() <= b.lower(); }
inline bool certainly_lt(const Interval& a, const Interval& b) { return a.upper() < b.lower(); }
inline bool possibly_le(const Interval& a, const Interval& b) { return a.lower() <= b.upper(); }

// Generic helpers so kernels can be written once for Rational, double and
// Interval values.
inline Rational abs_value(const Rational& v) { return abs(v); }
inline double abs_value(double v) { return std::fabs(v); }
inline Interval abs_value(const Interval& v) { return boost::numeric::abs(v); }

template <class T>
T from_rational(const Rational& v);
template <>
inline Rational from_rational<Rational>(const Rational& v) { return v; }
template <>
inline double from_rational<double>(const Rational& v) { return v.get_d(); }
template <>
inline Interval from_rational<Interval>(const Rational& v) { return to_interval(v); }

/// Order used for suprema: plain comparison for scalars, upper endpoint for
/// intervals (the enclosure of a sup keeps both endpoint maxima separately).
inline bool sup_greater(const Rational& a, const Rational& b) { return a > b; }
inline bool sup_greater(double a, double b) { return a > b; }
inline bool sup_greater(const Interval& a, const Interval& b) { return a.upper() > b.upper(); }
inline bool sup_equal(const Rational& a, const Rational& b) { return a == b; }
inline bool sup_equal(double a, double b) { return a == b; }
inline bool sup_equal(const Interval& a, const Interval& b) { return a.upper() == b.upper(); }

/// Accumulates `value` into the running supremum `acc`.
inline void sup_merge(Rational& acc, const Rational& value) {
  if (value > acc) acc = value;
}
inline void sup_merge(double& acc, double value) {
  if (value > acc) acc = value;
}
inline void sup_merge(Interval& acc, const Interval& value) {
  acc = Interval(std::max(acc.lower(), value.lower()), std::max(acc.upper(), value.upper()));
}

}  // namespace flowtree
