#include "flowtree/numeric.hpp"

#include "flowtree/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace flowtree {

Rational parse_rational(std::string_view text) {
  std::string s(text);
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  if (s.empty()) throw InvalidInput("empty rational literal");
  auto dot = s.find('.');
  if (dot != std::string::npos && s.find('/') == std::string::npos) {
    // Decimal literal: exact conversion of the written digits.
    bool negative = s[0] == '-';
    std::string digits = s.substr(negative ? 1 : 0);
    dot = digits.find('.');
    std::string whole = digits.substr(0, dot);
    std::string frac = digits.substr(dot + 1);
    if (whole.empty()) whole = "0";
    if (frac.empty()) frac = "0";
    for (char c : whole + frac)
      if (!std::isdigit(static_cast<unsigned char>(c))) throw InvalidInput("bad decimal literal: " + s);
    mpz_class num(whole + frac, 10);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
    Rational r(num, den);
    r.canonicalize();
    return negative ? Rational(-r) : r;
  }
  Rational r;
  if (r.set_str(s, 10) != 0) throw InvalidInput("bad rational literal: " + s);
  if (r.get_den() == 0) throw InvalidInput("zero denominator: " + s);
  r.canonicalize();
  return r;
}

std::string to_string(const Rational& value) {
  return value.get_num().get_str() + "/" + value.get_den().get_str();
}

Rational pow_int(const Rational& base, long exponent) {
  if (exponent < 0) {
    if (base == 0) throw InvalidInput("zero to a negative power");
    return pow_int(Rational(1) / base, -exponent);
  }
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), static_cast<unsigned long>(exponent));
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), static_cast<unsigned long>(exponent));
  Rational r(num, den);
  r.canonicalize();
  return r;
}

Interval to_interval(const Rational& value) {
  // mpq_get_d truncates toward zero.
  const double d = value.get_d();
  if (Rational(d) == value) return Interval(d, d);
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (value > 0) return Interval(d, std::nextafter(d, inf));
  return Interval(std::nextafter(d, -inf), d);
}

double round_down(double value, int ulps) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ulps; ++i) value = std::nextafter(value, -inf);
  return value;
}

double round_up(double value, int ulps) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ulps; ++i) value = std::nextafter(value, inf);
  return value;
}

namespace {

// exp and log are monotone, so endpoint images bound the range; exact
// special values keep constant-weight computations degenerate intervals.
double exp_down(double x) { return x == 0.0 ? 1.0 : std::max(0.0, round_down(std::exp(x))); }
double exp_up(double x) { return x == 0.0 ? 1.0 : round_up(std::exp(x)); }
double log_down(double x) { return x == 1.0 ? 0.0 : round_down(std::log(x)); }
double log_up(double x) { return x == 1.0 ? 0.0 : round_up(std::log(x)); }

}  // namespace

Interval exp(const Interval& x) { return Interval(exp_down(x.lower()), exp_up(x.upper())); }

Interval log(const Interval& x) {
  if (!(x.lower() > 0.0)) throw InvalidInput("log of a non-positive interval");
  return Interval(log_down(x.lower()), log_up(x.upper()));
}

Interval pow(const Interval& base, const Interval& exponent) {
  if (!(base.lower() > 0.0)) throw InvalidInput("pow with non-positive base");
  // On base > 0, b^e is monotone in each argument, so the four corners bound it.
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double b : {base.lower(), base.upper()}) {
    for (double e : {exponent.lower(), exponent.upper()}) {
      const double v = std::pow(b, e);
      const bool exact = (b == 1.0 || e == 0.0 || e == 1.0);
      lo = std::min(lo, exact ? v : round_down(v));
      hi = std::max(hi, exact ? v : round_up(v));
    }
  }
  return Interval(std::max(lo, 0.0), hi);
}

Interval pow(const Interval& base, const Rational& exponent) {
  if (exponent.get_den() == 1 && exponent.get_num().fits_slong_p()) {
    const long k = exponent.get_num().get_si();
    if (k == 1) return base;
    if (k >= 0 && k <= 64) return boost::numeric::pow(base, static_cast<int>(k));
  }
  return pow(base, to_interval(exponent));
}

}  // namespace flowtree
