#include "benfordseq/presets.hpp"

#include <cmath>
#include <limits>

#include "benfordseq/decompose.hpp"
#include "benfordseq/errors.hpp"

namespace benfordseq {

const std::vector<Preset>& list_presets() {
  // sqrt(2) and log10(e) as 17-digit literals; the nearest rationals to the
  // resulting binary64 values have astronomically large denominators, so
  // desk-scale equidistribution is unaffected.
  static const std::vector<Preset> presets{
      {"fibonacci", "a(n+1) = a(n) + a(n-1), a1 = a2 = 1", PresetKind::recurrence,
       RecKind::linear, {"1", "1"}, {1, 1}, "", 1.0, 10000, 0, "benford"},
      {"power100", "a(n+1) = 100 a(n), a1 = 1: every term leads with 1",
       PresetKind::recurrence, RecKind::linear, {"100"}, {1}, "", 1.0, 1000, 0,
       "not_benford"},
      {"factorial", "r(n) = n!", PresetKind::main_term, RecKind::linear, {}, {}, "n",
       1.0, 10000, 0, "benford"},
      {"factorial_pow", "r(n) = (n!)^sqrt(2)", PresetKind::main_term, RecKind::linear,
       {}, {}, "n^1.4142135623730951", 1.0, 10000, 0, "benford"},
      {"exp_poly", "r(n) = exp(sqrt(2) sum k^2): mu in log10 form",
       PresetKind::main_term_log10, RecKind::linear, {}, {},
       "1.4142135623730951*0.43429448190325182*n^2", 1.0, 10000, 0, "benford"},
      {"uniform_chain", "r(n) = prod k*U_k with U_k uniform on [0,1)",
       PresetKind::main_term, RecKind::linear, {}, {}, "n*uniform(0,1)", 1.0, 10000, 0,
       "benford"},
      {"mult_fib", "A(n+1) = A(n) A(n-1), A1 = A2 = 2: A(n) = 2^Fib(n)",
       PresetKind::recurrence, RecKind::multiplicative, {"1", "1"}, {2, 2}, "", 1.0,
       78, 78, "benford"},
      {"depth3_smooth", "a(n+1) = n a(n) + a(n-1) + a(n-2), a1 = a2 = a3 = 1",
       PresetKind::recurrence, RecKind::linear, {"n", "1", "1"}, {1, 1, 1}, "", 1.0,
       500, 0, "benford"},
      {"smooth", "a(n+1) = n a(n) + a(n-1), a1 = a2 = 1", PresetKind::recurrence,
       RecKind::linear, {"n", "1"}, {1, 1}, "", 1.0, 10000, 0, "benford"},
  };
  return presets;
}

const Preset* find_preset(std::string_view name) {
  for (const auto& p : list_presets())
    if (p.name == name) return &p;
  return nullptr;
}

SequenceSample product_sequence(const std::string& mu_text, double b1,
                                std::int64_t n_terms, std::uint64_t seed,
                                bool log10_domain) {
  if (n_terms < 1) throw UsageError("need at least one term");
  if (b1 == 0.0) throw UsageError("b1 must be nonzero");
  if (log10_domain && b1 < 0.0)
    throw UsageError("log10-domain products need a positive b1");

  Expr mu = parse_expr(mu_text);
  SequenceSample out;
  out.spec.kind = RecKind::linear;
  out.spec.depth = 1;
  out.spec.coeff_text = {mu_text};
  out.spec.coeffs = {mu};
  out.spec.initial = {from_real(b1)};
  out.spec.horizon = n_terms;
  out.spec.seed = seed;
  out.meta.spec_hash = spec_hash(out.spec);
  out.meta.seed = seed;
  out.meta.label = "main-term";
  if (has_random(mu)) out.meta.generator = kGeneratorId;

  out.values.reserve(static_cast<std::size_t>(n_terms));
  out.log10_frac.reserve(static_cast<std::size_t>(n_terms));
  CoeffFn mu_fn(mu, seed, 0);

  if (!log10_domain) {
    SciNum r = from_real(b1);
    for (std::int64_t i = 1; i <= n_terms; ++i) {
      double m = mu_fn(i);
      if (!std::isfinite(m))
        throw OverflowError("mu overflowed at i=" + std::to_string(i) +
                            "; consider the log10-domain form");
      r = mul(r, from_real(m));
      out.values.push_back(r);
      if (r.is_zero()) {
        ++out.meta.zero_terms;
        out.log10_frac.push_back(std::numeric_limits<double>::quiet_NaN());
      } else {
        out.log10_frac.push_back(log10_frac(r));
      }
    }
  } else {
    // Integer exponent and fractional part advance separately: the fraction
    // only ever sees O(1) additions, so mod-1 precision never degrades even
    // when the exponent reaches 1e11 and beyond.
    double l0 = std::log10(b1);
    std::int64_t e = static_cast<std::int64_t>(std::floor(l0));
    double frac = l0 - std::floor(l0);
    for (std::int64_t i = 1; i <= n_terms; ++i) {
      double step = mu_fn(i);
      if (!std::isfinite(step))
        throw OverflowError("log10 mu overflowed at i=" + std::to_string(i));
      double si = std::floor(step);
      if (std::fabs(si) > 9.0e15)
        throw OverflowError("exponent step too large at i=" + std::to_string(i));
      frac += step - si;
      std::int64_t carry = static_cast<std::int64_t>(std::floor(frac));
      frac -= static_cast<double>(carry);
      std::int64_t de = static_cast<std::int64_t>(si);
      if (__builtin_add_overflow(e, de, &e) || __builtin_add_overflow(e, carry, &e))
        throw OverflowError("accumulated exponent overflowed at i=" + std::to_string(i));
      SciNum v;
      v.sign = 1;
      v.mantissa = std::pow(10.0, frac);
      v.exponent = e;
      // pow can round frac = 1 - ulp up to exactly 10; stay inside [1, 10).
      if (v.mantissa >= 10.0) v.mantissa = std::nextafter(10.0, 0.0);
      out.values.push_back(v);
      out.log10_frac.push_back(frac);
    }
  }
  return out;
}

SequenceSample run_preset(const Preset& p, std::int64_t horizon, std::uint64_t seed) {
  std::int64_t n = horizon > 0 ? horizon : p.default_horizon;
  bool clamped = p.max_horizon > 0 && n > p.max_horizon;
  if (clamped) n = p.max_horizon;

  SequenceSample out;
  if (p.kind == PresetKind::recurrence) {
    RecurrenceSpec spec = make_spec(p.rec_kind, p.coeff_text, p.initial, n, seed);
    out = p.rec_kind == RecKind::linear ? iterate_linear(spec)
                                        : iterate_multiplicative(spec);
  } else {
    out = product_sequence(p.mu_text, p.b1, n, seed,
                           p.kind == PresetKind::main_term_log10);
  }
  out.meta.label = "preset:" + p.name;
  if (clamped) {
    out.meta.clamped_horizon = p.max_horizon;
    out.meta.label += "; horizon clamped to " + std::to_string(p.max_horizon) +
                      " (exponent precision limit)";
  }
  return out;
}

}  // namespace benfordseq
