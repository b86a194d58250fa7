#include "benfordseq/scinum.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "benfordseq/errors.hpp"

namespace benfordseq {

namespace {

constexpr double kCancelRel = 1e-12;
constexpr std::int64_t kGapLimit = 17;
constexpr double kLogRange = 9007199254740992.0;  // 2^53

std::int64_t checked_add_exp(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("decimal exponent overflow");
  return r;
}

// Renormalize a nonzero (sign, mantissa, exponent) so mantissa lands in [1,10).
SciNum normalized(int sign, double m, std::int64_t e) {
  if (m == 0.0) return sci_zero();
  while (m >= 10.0) {
    m /= 10.0;
    e = checked_add_exp(e, 1);
  }
  while (m < 1.0) {
    m *= 10.0;
    e = checked_add_exp(e, -1);
  }
  return SciNum{sign, m, e};
}

}  // namespace

SciNum sci_zero() { return SciNum{0, 1.0, 0}; }

SciNum from_real(double v) {
  if (!std::isfinite(v)) throw DomainError("non-finite value");
  if (v == 0.0) return sci_zero();
  int sign = v < 0 ? -1 : 1;
  double av = std::fabs(v);
  auto e = static_cast<std::int64_t>(std::floor(std::log10(av)));
  double m = av / std::pow(10.0, static_cast<double>(e));
  // log10 rounding can land m just outside [1,10); normalized() repairs it.
  return normalized(sign, m, e);
}

double to_double(const SciNum& a) {
  if (a.sign == 0) return 0.0;
  if (a.exponent > 308) return a.sign > 0 ? std::numeric_limits<double>::infinity()
                                          : -std::numeric_limits<double>::infinity();
  if (a.exponent < -324) return a.sign > 0 ? 0.0 : -0.0;
  return a.sign * a.mantissa * std::pow(10.0, static_cast<double>(a.exponent));
}

SciNum neg(const SciNum& a) { return SciNum{-a.sign, a.mantissa, a.exponent}; }

SciNum abs_val(const SciNum& a) { return SciNum{a.sign == 0 ? 0 : 1, a.mantissa, a.exponent}; }

int compare_magnitude(const SciNum& a, const SciNum& b) {
  if (a.sign == 0 && b.sign == 0) return 0;
  if (a.sign == 0) return -1;
  if (b.sign == 0) return 1;
  if (a.exponent != b.exponent) return a.exponent < b.exponent ? -1 : 1;
  if (a.mantissa != b.mantissa) return a.mantissa < b.mantissa ? -1 : 1;
  return 0;
}

SciNum mul(const SciNum& a, const SciNum& b) {
  if (a.sign == 0 || b.sign == 0) return sci_zero();
  std::int64_t e = checked_add_exp(a.exponent, b.exponent);
  double m = a.mantissa * b.mantissa;  // [1, 100)
  return normalized(a.sign * b.sign, m, e);
}

SciNum add(const SciNum& a, const SciNum& b, std::int64_t* cancellations) {
  if (a.sign == 0) return b;
  if (b.sign == 0) return a;
  const SciNum& big = compare_magnitude(a, b) >= 0 ? a : b;
  const SciNum& sml = (&big == &a) ? b : a;
  std::int64_t gap = big.exponent - sml.exponent;  // >= 0
  if (gap > kGapLimit) return big;
  double aligned = sml.mantissa * std::pow(10.0, -static_cast<double>(gap));
  double m = big.mantissa + (big.sign == sml.sign ? aligned : -aligned);
  if (m == 0.0) return sci_zero();
  if (big.sign != sml.sign && std::fabs(m) < kCancelRel * big.mantissa && cancellations)
    ++*cancellations;
  return normalized(m < 0 ? -big.sign : big.sign, std::fabs(m), big.exponent);
}

SciNum sub(const SciNum& a, const SciNum& b, std::int64_t* cancellations) {
  return add(a, neg(b), cancellations);
}

SciNum pow_real(const SciNum& a, double e) {
  if (a.sign != 1) throw DomainError("pow_real requires a positive base");
  if (!std::isfinite(e)) throw DomainError("pow_real requires a finite exponent");
  // 80-bit accumulation keeps the fractional part of e*log10(a) honest for
  // exponents well past the binary64 integer range.
  long double l = static_cast<long double>(e) *
                  (std::log10(static_cast<long double>(a.mantissa)) +
                   static_cast<long double>(a.exponent));
  long double fl = std::floor(l);
  if (fl > 9.2e18L || fl < -9.2e18L) throw OverflowError("pow_real exponent overflow");
  auto exp10 = static_cast<std::int64_t>(fl);
  double m = static_cast<double>(std::pow(10.0L, l - fl));
  return normalized(1, m, exp10);
}

double log10_frac(const SciNum& a) {
  if (a.sign == 0) throw DomainError("log10_frac of zero");
  return std::log10(a.mantissa);
}

int first_digit(const SciNum& a) {
  if (a.sign == 0) throw DomainError("first_digit of zero");
  return static_cast<int>(a.mantissa);
}

double log10_abs(const SciNum& a) {
  if (a.sign == 0) throw DomainError("log10_abs of zero");
  return static_cast<double>(a.exponent) + std::log10(a.mantissa);
}

SciNum from_log10(double l, int sign) {
  if (sign == 0) return sci_zero();
  if (!std::isfinite(l) || std::fabs(l) >= kLogRange)
    throw OverflowError("log10 magnitude exceeds the exactly representable integer range");
  double fl = std::floor(l);
  double m = std::pow(10.0, l - fl);
  return normalized(sign < 0 ? -1 : 1, m, static_cast<std::int64_t>(fl));
}

std::string to_string(const SciNum& a) {
  if (a.sign == 0) return "0";
  char mant[40];
  std::snprintf(mant, sizeof mant, "%.16e", a.mantissa);
  // mantissa is in [1,10), so the printed exponent field is always e+00.
  char* e = mant;
  while (*e && *e != 'e') ++e;
  *e = '\0';
  char out[64];
  std::snprintf(out, sizeof out, "%c%se%+lld", a.sign < 0 ? '-' : '+', mant,
                static_cast<long long>(a.exponent));
  return out;
}

SciNum sci_from_string(std::string_view s) {
  if (s == "0") return sci_zero();
  if (s.size() < 4 || (s[0] != '+' && s[0] != '-'))
    throw ParseError("malformed scientific triple", 0);
  int sign = s[0] == '-' ? -1 : 1;
  std::string body(s.substr(1));
  std::size_t epos = body.find('e');
  if (epos == std::string::npos) throw ParseError("missing exponent marker", s.size());
  // The mantissa is cut off before 'e': strtod would otherwise swallow the
  // decimal exponent too and misread the triple.
  std::string mant_text = body.substr(0, epos);
  char* end = nullptr;
  double m = std::strtod(mant_text.c_str(), &end);
  if (end != mant_text.c_str() + mant_text.size() || mant_text.empty())
    throw ParseError("malformed mantissa", 1);
  errno = 0;
  long long e = std::strtoll(body.c_str() + epos + 1, &end, 10);
  if (*end != '\0' || errno == ERANGE) throw ParseError("malformed exponent", epos + 2);
  if (!(m >= 1.0 && m < 10.0)) throw ParseError("mantissa outside [1,10)", 1);
  return SciNum{sign, m, static_cast<std::int64_t>(e)};
}

}  // namespace benfordseq
