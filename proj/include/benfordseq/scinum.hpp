#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace benfordseq {

// Sign/mantissa/exponent triple: value = sign * mantissa * 10^exponent.
// Nonzero values keep mantissa in [1, 10); zero is canonically (0, 1.0, 0).
// The decimal exponent is an int64, so magnitudes far beyond binary64
// range stay exact in the exponent while the mantissa carries ~16 digits.
struct SciNum {
  int sign = 0;            // -1, 0, +1
  double mantissa = 1.0;   // [1, 10) when sign != 0
  std::int64_t exponent = 0;

  bool is_zero() const { return sign == 0; }
  friend bool operator==(const SciNum&, const SciNum&) = default;
};

SciNum sci_zero();
SciNum from_real(double v);          // v finite; 0 -> canonical zero
double to_double(const SciNum& a);   // saturates to +/-inf, underflows to 0

SciNum neg(const SciNum& a);
SciNum abs_val(const SciNum& a);

// -1/0/+1 comparing |a| with |b|.
int compare_magnitude(const SciNum& a, const SciNum& b);

SciNum mul(const SciNum& a, const SciNum& b);

// Addition aligns exponents. When the exponent gap exceeds 17 the smaller
// operand is below the mantissa's resolution and the larger operand is
// returned unchanged, so dominance measurements saturate rather than lie.
// Opposite-sign inputs that cancel below 1e-12 of the aligned magnitude
// bump *cancellations (when given); exact cancellation yields canonical zero.
SciNum add(const SciNum& a, const SciNum& b, std::int64_t* cancellations = nullptr);
SciNum sub(const SciNum& a, const SciNum& b, std::int64_t* cancellations = nullptr);

// a^e for positive a (sign must be +1) and finite real e.
SciNum pow_real(const SciNum& a, double e);

// log10|a| mod 1 == log10(mantissa), in [0, 1). Requires a nonzero.
double log10_frac(const SciNum& a);

// Leading decimal digit of |a|, 1..9. Requires a nonzero.
int first_digit(const SciNum& a);

// Full log10|a| as a double (exponent + log10(mantissa)); requires nonzero.
double log10_abs(const SciNum& a);

// Materialize sign * 10^l. |l| must stay within 2^53: beyond that the
// fractional part of l is not resolvable in binary64 and the mantissa
// would silently read 1.0.
SciNum from_log10(double l, int sign);

// "<sign><17 significant digits>e<sign><decimal exponent>", e.g.
// "+1.5511210043330985e+25"; canonical zero serializes as "0".
// 17 digits guarantee the mantissa round-trips bit-exactly.
std::string to_string(const SciNum& a);
SciNum sci_from_string(std::string_view s);

}  // namespace benfordseq
