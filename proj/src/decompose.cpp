#include "benfordseq/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "benfordseq/errors.hpp"

namespace benfordseq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kDegeneracyFloor = 1e-8;
constexpr double kRatioGuard = 1e-12;   // |c - a2/a1| closer than this zeroes b1
constexpr double kQTailLimit = 1e-3;
constexpr std::int64_t kMinimalPad = 48;   // backward-start padding, depth 2
constexpr std::int64_t kDepth3Pad = 96;    // outer extension so the inner pad fits

double eval_at(const CoeffFn& fn, std::int64_t n, const char* what) {
  double v = fn(n);
  if (!std::isfinite(v))
    throw OverflowError(std::string(what) + " is not finite at n=" + std::to_string(n));
  return v;
}

// |x - y| / |y| through exponent-safe logs.
double rel_diff(const SciNum& x, const SciNum& y) {
  SciNum d = sub(x, y);
  if (d.is_zero()) return 0.0;
  if (y.is_zero()) return std::numeric_limits<double>::infinity();
  return std::pow(10.0, log10_abs(d) - log10_abs(y));
}

std::int64_t tail_start(std::int64_t lo, std::int64_t hi) {
  std::int64_t len = std::max<std::int64_t>(1, (hi - lo + 1) / 5);
  return hi - len + 1;
}

// Candidate constants: the data-derived ratio shift first, then small-height
// rationals p/q ordered by |p| + q, positives first, integers before
// fractions within a height. The visible prefix is pinned: 1, 2, 3, -1, 1/2.
std::vector<double> candidate_list(double a1, double a2) {
  std::vector<double> out;
  auto push = [&out](double v) {
    for (double u : out)
      if (u == v) return;
    out.push_back(v);
  };
  if (a1 != 0.0) push(a2 / a1 + 1.0);
  push(1.0);
  push(2.0);
  push(3.0);
  push(-1.0);
  push(0.5);
  for (std::int64_t h = 2; out.size() < 64; ++h) {
    for (std::int64_t q = 1; q < h && out.size() < 64; ++q) {
      std::int64_t p = h - q;
      if (std::gcd(p, q) != 1) continue;
      double v = static_cast<double>(p) / static_cast<double>(q);
      push(v);
      if (out.size() < 64) push(-v);
    }
  }
  return out;
}

// Floor test against the stored seed pair: the denominator of every
// lambda_c(k), k <= N, must clear the relative degeneracy floor.
// Returns the first offending k, or 0 when c is admissible.
std::int64_t floor_violation(const AuxSeeds& seeds, double c, std::int64_t n_terms) {
  for (std::int64_t k = 1; k <= n_terms; ++k) {
    double ac = seeds.alpha[static_cast<std::size_t>(k)] * c;
    double s = ac + seeds.beta[static_cast<std::size_t>(k)];
    double scale = std::max({std::fabs(ac), std::fabs(seeds.beta[static_cast<std::size_t>(k)]), 1.0});
    if (!(std::fabs(s) >= kDegeneracyFloor * scale)) return k;
  }
  return 0;
}

void check_initials(double a1, double a2) {
  if (a1 == 0.0 && a2 == 0.0)
    throw ConstructionError("both leading initial values are zero; b1 cannot be nonzero");
}

}  // namespace

CoeffFn::CoeffFn(Expr e, std::uint64_t seed, std::uint64_t slot)
    : expr_(std::move(e)), stream_(substream(seed, slot)) {}

CoeffFn::CoeffFn(std::function<double(std::int64_t)> fn) : fn_(std::move(fn)) {}

double CoeffFn::operator()(std::int64_t n) const {
  if (expr_) {
    EvalContext ctx{n, stream_, 0};
    return eval(expr_, ctx);
  }
  if (fn_) return fn_(n);
  throw UsageError("empty coefficient function");
}

std::vector<CoeffFn> coeff_fns(const RecurrenceSpec& spec) {
  std::vector<CoeffFn> out;
  out.reserve(spec.coeffs.size());
  for (std::size_t i = 0; i < spec.coeffs.size(); ++i)
    out.emplace_back(spec.coeffs[i], spec.seed, static_cast<std::uint64_t>(i));
  return out;
}

AuxSeeds aux_seeds(const CoeffFn& f, const CoeffFn& g, std::int64_t n_terms) {
  if (n_terms < 2) throw UsageError("need at least two terms for the seed pair");
  AuxSeeds s;
  s.alpha.assign(static_cast<std::size_t>(n_terms) + 2, kNaN);
  s.beta.assign(static_cast<std::size_t>(n_terms) + 2, kNaN);
  s.alpha[1] = 0.0; s.alpha[2] = 1.0;
  s.beta[1] = 1.0; s.beta[2] = 0.0;
  for (std::int64_t n = 2; n <= n_terms; ++n) {
    double fn = eval_at(f, n, "f");
    double gn = eval_at(g, n, "g");
    auto i = static_cast<std::size_t>(n);
    double an = fn * s.alpha[i] + gn * s.alpha[i - 1];
    double bn = fn * s.beta[i] + gn * s.beta[i - 1];
    double m = std::max({std::fabs(an), std::fabs(bn), std::fabs(s.alpha[i]),
                         std::fabs(s.beta[i])});
    if (!std::isfinite(m))
      throw OverflowError("seed pair overflowed at n=" + std::to_string(n));
    if (m > 1e100) {
      // Common power of 10 over the rolling window; ratios are untouched.
      double scale = std::pow(10.0, -std::floor(std::log10(m)));
      an *= scale; bn *= scale;
      s.alpha[i] *= scale; s.beta[i] *= scale;
    }
    s.alpha[i + 1] = an;
    s.beta[i + 1] = bn;
  }
  return s;
}

const char* lambda_mode_name(LambdaMode m) {
  return m == LambdaMode::scan ? "scan" : "minimal";
}

namespace {

// Forward construction from lambda(1) = c per the defining identities:
// mu(n) := -g(n)/lambda(n-1), lambda(n) := f(n) - mu(n).
void build_forward(AuxiliaryDecomposition& dec, const CoeffFn& f, const CoeffFn& g,
                   std::int64_t n_terms) {
  for (std::int64_t n = 2; n <= n_terms; ++n) {
    double fn = eval_at(f, n, "f");
    double gn = eval_at(g, n, "g");
    if (gn == 0.0)
      throw ConstructionError("g vanishes at n=" + std::to_string(n) +
                              "; the decomposition needs g(n) != 0");
    auto i = static_cast<std::size_t>(n);
    double prev = dec.lambda[i - 1];
    double mun = -gn / prev;
    double lam = fn - mun;
    if (!std::isfinite(mun) || !std::isfinite(lam))
      throw ConstructionError("ratio sequence degenerated at n=" + std::to_string(n));
    dec.mu[i] = mun;
    dec.lambda[i] = lam;
    dec.max_f_residual = std::max(
        dec.max_f_residual, std::fabs(fn - lam - mun) / std::max(1.0, std::fabs(fn)));
    dec.max_g_residual = std::max(
        dec.max_g_residual, std::fabs(gn + prev * mun) / std::max(1.0, std::fabs(gn)));
  }
}

void fill_mu_from_lambda(AuxiliaryDecomposition& dec, const CoeffFn& f, const CoeffFn& g,
                         std::int64_t n_terms) {
  for (std::int64_t n = 2; n <= n_terms; ++n) {
    double fn = eval_at(f, n, "f");
    double gn = eval_at(g, n, "g");
    if (gn == 0.0)
      throw ConstructionError("g vanishes at n=" + std::to_string(n) +
                              "; the decomposition needs g(n) != 0");
    auto i = static_cast<std::size_t>(n);
    double mun = -gn / dec.lambda[i - 1];
    dec.mu[i] = mun;
    dec.max_f_residual =
        std::max(dec.max_f_residual, std::fabs(fn - dec.lambda[i] - mun) /
                                         std::max(1.0, std::fabs(fn)));
    dec.max_g_residual =
        std::max(dec.max_g_residual,
                 std::fabs(gn + dec.lambda[i - 1] * mun) / std::max(1.0, std::fabs(gn)));
  }
}

}  // namespace

std::vector<double> scan_candidates(double a1, double a2) {
  return candidate_list(a1, a2);
}

AuxiliaryDecomposition build_lambda_mu(const CoeffFn& f, const CoeffFn& g, double a1,
                                       double a2, std::int64_t n_terms, LambdaMode mode,
                                       std::optional<double> c_fixed) {
  if (n_terms < 2) throw UsageError("decomposition needs at least two terms");
  check_initials(a1, a2);

  AuxiliaryDecomposition dec;
  dec.mode = mode;
  dec.n_terms = n_terms;
  dec.lambda.assign(static_cast<std::size_t>(n_terms) + 1, kNaN);
  dec.mu.assign(static_cast<std::size_t>(n_terms) + 1, kNaN);

  const bool have_ratio = a1 != 0.0;
  const double ratio = have_ratio ? a2 / a1 : 0.0;
  auto too_close_to_ratio = [&](double c) {
    return have_ratio && std::fabs(c - ratio) < kRatioGuard * std::max(1.0, std::fabs(ratio));
  };

  if (mode == LambdaMode::minimal) {
    if (c_fixed)
      throw UsageError("a fixed c pins lambda(1); use scan mode for that");
    // Backward map lambda(k-1) = g(k)/(lambda(k) - f(k)) contracts onto the
    // recessive direction; the padded start leaves the transient behind.
    std::int64_t start = n_terms + kMinimalPad;
    double lam = eval_at(f, start, "f") + 1.0;
    for (std::int64_t k = start; k >= 2; --k) {
      double fk = eval_at(f, k, "f");
      double gk = eval_at(g, k, "g");
      if (gk == 0.0)
        throw ConstructionError("g vanishes at n=" + std::to_string(k) +
                                "; the decomposition needs g(n) != 0");
      double den = lam - fk;
      if (std::fabs(den) < 1e-300) den = std::copysign(1e-300, den == 0.0 ? -1.0 : den);
      lam = gk / den;
      if (!std::isfinite(lam))
        throw ConstructionError("backward ratio iteration degenerated at n=" +
                                std::to_string(k));
      if (k - 1 <= n_terms) dec.lambda[static_cast<std::size_t>(k - 1)] = lam;
    }
    dec.c = dec.lambda[1];
    if (too_close_to_ratio(dec.c))
      throw ConstructionError(
          "the initial data lies on the recessive direction (c = a2/a1), so b1 "
          "vanishes; use scan mode");
    fill_mu_from_lambda(dec, f, g, n_terms);
  } else {
    AuxSeeds seeds = aux_seeds(f, g, n_terms);
    std::string rejected;
    auto admit = [&](double c) -> bool {
      if (too_close_to_ratio(c)) {
        if (!rejected.empty()) rejected += ", ";
        rejected += "c=" + std::to_string(c) + " (matches a2/a1)";
        return false;
      }
      std::int64_t k = floor_violation(seeds, c, n_terms);
      if (k != 0) {
        ++dec.forbidden_hits;
        if (!rejected.empty()) rejected += ", ";
        rejected += "c=" + std::to_string(c) + " (degenerate denominator at k=" +
                    std::to_string(k) + ")";
        return false;
      }
      return true;
    };

    bool found = false;
    if (c_fixed) {
      if (!admit(*c_fixed))
        throw ConstructionError("the requested c is inadmissible: " + rejected);
      dec.c = *c_fixed;
      found = true;
    } else {
      for (double cand : candidate_list(a1, a2)) {
        if (admit(cand)) { dec.c = cand; found = true; break; }
        double retry = cand + 1.0 / 64.0;
        if (admit(retry)) { dec.c = retry; found = true; break; }
      }
    }
    if (!found)
      throw ConstructionError("no admissible c in the scan set; rejected: " + rejected);
    dec.lambda[1] = dec.c;
    build_forward(dec, f, g, n_terms);
  }

  dec.b1 = a2 - dec.c * a1;
  if (dec.b1 == 0.0)
    throw ConstructionError("b1 = a2 - c*a1 vanished; the chosen c equals a2/a1");
  return dec;
}

SciNum closed_form_eval(const AuxiliaryDecomposition& dec, double a2, std::int64_t n) {
  if (n < 2) throw UsageError("closed form is defined for n >= 2");
  if (n > dec.n_terms) throw UsageError("closed form index beyond the decomposition");
  SciNum s = from_real(a2);
  SciNum bk = from_real(dec.b1);
  for (std::int64_t k = 2; k <= n; ++k) {
    auto i = static_cast<std::size_t>(k);
    bk = mul(bk, from_real(dec.mu[i]));
    s = add(mul(from_real(dec.lambda[i]), s), bk);
  }
  return s;
}

SequenceSample main_term_sequence(const AuxiliaryDecomposition& dec,
                                  std::int64_t n_terms) {
  if (n_terms < 1) throw UsageError("need at least one term");
  if (n_terms > dec.n_terms) throw UsageError("main term beyond the decomposition");
  SequenceSample out;
  out.spec.kind = RecKind::linear;
  out.spec.depth = 1;
  out.spec.initial = {from_real(dec.b1)};
  out.spec.horizon = n_terms;
  out.meta.label = "main-term";
  out.values.reserve(static_cast<std::size_t>(n_terms));
  out.log10_frac.reserve(static_cast<std::size_t>(n_terms));
  SciNum r = from_real(dec.b1);
  out.values.push_back(r);
  for (std::int64_t n = 2; n <= n_terms; ++n) {
    r = mul(r, from_real(dec.mu[static_cast<std::size_t>(n)]));
    out.values.push_back(r);
  }
  for (const SciNum& v : out.values)
    out.log10_frac.push_back(v.is_zero() ? kNaN : log10_frac(v));
  return out;
}

DominanceReport dominance_check(const AuxiliaryDecomposition& dec, const CoeffFn& f,
                                const CoeffFn& g, const SequenceSample& sample) {
  std::int64_t n_max = std::min<std::int64_t>(dec.n_terms, sample.size() - 1);
  if (n_max < 2) throw UsageError("sample too short for a dominance check");

  DominanceReport rep;
  rep.n_terms = n_max;
  auto sz = static_cast<std::size_t>(n_max) + 1;
  rep.p.assign(sz, kNaN);
  rep.q.assign(sz, kNaN);
  rep.gf2.assign(sz, kNaN);
  rep.rel_error.assign(sz, kNaN);
  rep.main_term_benford_input.assign(sz, kNaN);

  rep.f_nondecreasing = true;
  double prev_f = eval_at(f, 2, "f");
  SciNum r = from_real(dec.b1);
  for (std::int64_t n = 2; n <= n_max; ++n) {
    auto i = static_cast<std::size_t>(n);
    double fn = eval_at(f, n, "f");
    double gn = eval_at(g, n, "g");
    if (n > 2 && fn < prev_f - 1e-12 * std::max(1.0, std::fabs(prev_f)))
      rep.f_nondecreasing = false;
    prev_f = fn;

    rep.p[i] = dec.lambda[i] / dec.mu[i];
    rep.q[i] = n == 2 ? std::fabs(rep.p[i]) : std::fabs(rep.p[i]) * (1.0 + rep.q[i - 1]);
    rep.gf2[i] = std::fabs(gn) / (fn * fn);

    r = mul(r, from_real(dec.mu[i]));
    rep.rel_error[i] = rel_diff(sample.values[i], r);
    rep.main_term_benford_input[i] = r.is_zero() ? kNaN : log10_frac(r);
  }

  std::int64_t t0 = tail_start(2, n_max);
  rep.rel_error_tail_nonincreasing = true;
  for (std::int64_t n = t0; n <= n_max; ++n) {
    auto i = static_cast<std::size_t>(n);
    rep.q_tail_max = std::max(rep.q_tail_max, rep.q[i]);
    rep.gf2_tail_max = std::max(rep.gf2_tail_max, rep.gf2[i]);
    if (n > t0 &&
        rep.rel_error[i] > rep.rel_error[i - 1] * (1.0 + 1e-9) + 1e-15)
      rep.rel_error_tail_nonincreasing = false;
  }
  rep.rel_error_last = rep.rel_error[static_cast<std::size_t>(n_max)];
  rep.main_term_dominates =
      rep.q_tail_max < kQTailLimit && rep.rel_error_tail_nonincreasing;
  return rep;
}

namespace {

struct Depth3Arrays {
  // Extended past n_terms so the inner minimal iteration has room.
  std::shared_ptr<std::vector<double>> lambda, g1, g2;
  std::int64_t extent = 0;
};

// Derived inner coefficients from an outer lambda: for n = 2..extent-1,
//   g2(n) = -f3(n+1)/lambda(n-1),  g1(n) = (g2(n) - f2(n+1))/lambda(n).
// Past validate_to the lambda tail is backward-iteration transient that no
// consumer reads; non-finite values there stay NaN instead of throwing.
void derive_inner(Depth3Arrays& a, const std::vector<CoeffFn>& f, std::int64_t extent,
                  std::int64_t validate_to) {
  a.g1 = std::make_shared<std::vector<double>>(static_cast<std::size_t>(extent), kNaN);
  a.g2 = std::make_shared<std::vector<double>>(static_cast<std::size_t>(extent), kNaN);
  for (std::int64_t n = 2; n + 1 <= extent; ++n) {
    auto i = static_cast<std::size_t>(n);
    double lp = (*a.lambda)[i - 1], ln = (*a.lambda)[i];
    double g2n = -eval_at(f[2], n + 1, "f3") / lp;
    double g1n = (g2n - eval_at(f[1], n + 1, "f2")) / ln;
    if (!std::isfinite(g2n) || !std::isfinite(g1n)) {
      if (n <= validate_to)
        throw ConstructionError("depth-3 inner coefficients degenerated at n=" +
                                std::to_string(n));
      continue;
    }
    (*a.g2)[i] = g2n;
    (*a.g1)[i] = g1n;
  }
}

// Backward three-term window renormalized by powers of two (exact on ratios);
// lambda(n) = u_{n+1}/u_n of the most recessive solution. Ratios are only
// trusted (and checked) up to validate_to; the tail is start transient.
void minimal_lambda3(Depth3Arrays& a, const std::vector<CoeffFn>& f, std::int64_t extent,
                     std::int64_t validate_to) {
  a.lambda = std::make_shared<std::vector<double>>(static_cast<std::size_t>(extent) + 1, kNaN);
  std::int64_t m = extent;
  double u2 = 1.0, u1 = 1.0, u0 = 1.0;  // u_{n+1}, u_n, u_{n-1} at n = m
  for (std::int64_t n = m; n >= 3; --n) {
    (*a.lambda)[static_cast<std::size_t>(n)] = u2 / u1;
    double f3 = eval_at(f[2], n, "f3");
    if (f3 == 0.0)
      throw ConstructionError("f3 vanishes at n=" + std::to_string(n) +
                              "; the depth-3 reduction needs f3(n) != 0");
    double unew = (u2 - eval_at(f[0], n, "f1") * u1 - eval_at(f[1], n, "f2") * u0) / f3;
    if (!std::isfinite(unew))
      throw ConstructionError("backward window degenerated at n=" + std::to_string(n));
    u2 = u1; u1 = u0; u0 = unew;
    int e = std::ilogb(std::max({std::fabs(u2), std::fabs(u1), std::fabs(u0)}));
    if (e > 64 || e < -64) {
      u2 = std::scalbn(u2, -e);
      u1 = std::scalbn(u1, -e);
      u0 = std::scalbn(u0, -e);
    }
  }
  (*a.lambda)[2] = u2 / u1;
  (*a.lambda)[1] = u1 / u0;
  for (std::int64_t n = 1; n <= validate_to; ++n)
    if (!std::isfinite((*a.lambda)[static_cast<std::size_t>(n)]))
      throw ConstructionError("minimal ratio sequence degenerated at n=" +
                              std::to_string(n));
}

// Forward lambda from a pinned (c, d): lambda(n+1) = f1(n+1) - g1(n), with
// the relative degeneracy floor on every divisor. Returns false on rejection.
bool forward_lambda3(Depth3Arrays& a, const std::vector<CoeffFn>& f, double c, double d,
                     std::int64_t extent, std::string* why) {
  a.lambda = std::make_shared<std::vector<double>>(static_cast<std::size_t>(extent) + 1, kNaN);
  (*a.lambda)[1] = c;
  (*a.lambda)[2] = d;
  for (std::int64_t n = 2; n + 1 <= extent; ++n) {
    auto i = static_cast<std::size_t>(n);
    double lp = (*a.lambda)[i - 1], ln = (*a.lambda)[i];
    double f1n = eval_at(f[0], n + 1, "f1");
    double floor_scale = std::max(1.0, std::fabs(f1n));
    if (std::fabs(lp) < kDegeneracyFloor * floor_scale ||
        std::fabs(ln) < kDegeneracyFloor * floor_scale) {
      if (why) *why = "degenerate lambda at n=" + std::to_string(n);
      return false;
    }
    double g2n = -eval_at(f[2], n + 1, "f3") / lp;
    double g1n = (g2n - eval_at(f[1], n + 1, "f2")) / ln;
    double next = f1n - g1n;
    if (!std::isfinite(next)) {
      if (why) *why = "overflow at n=" + std::to_string(n);
      return false;
    }
    (*a.lambda)[i + 1] = next;
  }
  return true;
}

}  // namespace

Depth3Reduction reduce_depth3(const std::vector<CoeffFn>& f, const SequenceSample& sample,
                              std::int64_t n_terms, LambdaMode mode,
                              std::optional<std::pair<double, double>> cd) {
  if (f.size() != 3) throw UsageError("depth-3 reduction needs exactly three coefficients");
  if (n_terms < 4) throw UsageError("depth-3 reduction needs at least four terms");
  if (sample.size() < n_terms + 1)
    throw UsageError("sample must reach a_{N+1} for the b-sequence");

  Depth3Reduction red;
  red.mode = mode;
  red.n_terms = n_terms;

  Depth3Arrays arrays;
  std::int64_t extent = mode == LambdaMode::minimal ? n_terms + kDepth3Pad : n_terms;

  if (mode == LambdaMode::minimal) {
    if (cd) throw UsageError("a fixed (c, d) pins lambda; use scan mode for that");
    minimal_lambda3(arrays, f, extent, n_terms + kMinimalPad);
  } else if (cd) {
    std::string why;
    if (!forward_lambda3(arrays, f, cd->first, cd->second, extent, &why))
      throw ConstructionError("the requested (c, d) is inadmissible: " + why);
  } else {
    double a1 = to_double(sample.values[0]);
    double a2 = to_double(sample.values[1]);
    double a3 = to_double(sample.values[2]);
    std::vector<double> c_list{1.0, 2.0, 3.0, -1.0, 0.5, 1.5, -2.0};
    std::vector<double> d_list = c_list;
    if (a1 != 0.0) c_list.insert(c_list.begin(), a2 / a1 + 1.0);
    if (a2 != 0.0) d_list.insert(d_list.begin(), a3 / a2 + 1.0);
    c_list.resize(8);
    d_list.resize(8);
    bool found = false;
    std::string rejected;
    for (double c : c_list) {
      for (double d : d_list) {
        std::string why;
        if (forward_lambda3(arrays, f, c, d, extent, &why)) {
          red.c = c; red.d = d; found = true; break;
        }
        if (forward_lambda3(arrays, f, c + 1.0 / 64.0, d + 1.0 / 64.0, extent, &why)) {
          red.c = c + 1.0 / 64.0; red.d = d + 1.0 / 64.0; found = true; break;
        }
        if (rejected.size() < 256) {
          if (!rejected.empty()) rejected += ", ";
          rejected += "(c=" + std::to_string(c) + ", d=" + std::to_string(d) + ") " + why;
        }
      }
      if (found) break;
    }
    if (!found)
      throw ConstructionError("no admissible (c, d) in the grid; rejected: " + rejected);
  }
  derive_inner(arrays, f, extent,
               mode == LambdaMode::minimal ? n_terms + kMinimalPad : extent);
  red.c = (*arrays.lambda)[1];
  red.d = (*arrays.lambda)[2];

  red.lambda.assign(static_cast<std::size_t>(n_terms) + 1, kNaN);
  red.g1.assign(static_cast<std::size_t>(n_terms) + 1, kNaN);
  red.g2.assign(static_cast<std::size_t>(n_terms) + 1, kNaN);
  for (std::int64_t n = 1; n <= n_terms; ++n)
    red.lambda[static_cast<std::size_t>(n)] = (*arrays.lambda)[static_cast<std::size_t>(n)];
  for (std::int64_t n = 2; n <= n_terms - 1; ++n) {
    red.g1[static_cast<std::size_t>(n)] = (*arrays.g1)[static_cast<std::size_t>(n)];
    red.g2[static_cast<std::size_t>(n)] = (*arrays.g2)[static_cast<std::size_t>(n)];
  }

  red.b.assign(static_cast<std::size_t>(n_terms) + 1, sci_zero());
  for (std::int64_t n = 1; n <= n_terms; ++n) {
    auto i = static_cast<std::size_t>(n);
    red.b[i] = sub(sample.values[i], mul(from_real(red.lambda[i]), sample.values[i - 1]));
  }
  if (red.b[1].is_zero() || red.b[2].is_zero())
    throw ConstructionError("a reduced seed b1/b2 vanished; pick a different (c, d)");
  red.b1 = to_double(red.b[1]);
  red.b2 = to_double(red.b[2]);

  // Inner decomposition of the b-sequence on the extended coefficient range.
  auto g1p = arrays.g1;
  auto g2p = arrays.g2;
  auto table = [](std::shared_ptr<std::vector<double>> t, const char* what) {
    return CoeffFn([t = std::move(t), what](std::int64_t n) -> double {
      if (n < 2 || n >= static_cast<std::int64_t>(t->size()))
        throw UsageError(std::string(what) + " index out of the derived range");
      return (*t)[static_cast<std::size_t>(n)];
    });
  };
  red.inner = build_lambda_mu(table(g1p, "g1"), table(g2p, "g2"), red.b1, red.b2,
                              n_terms - 1, mode);

  for (std::int64_t n = 3; n <= n_terms; ++n) {
    auto i = static_cast<std::size_t>(n);
    double f1n = eval_at(f[0], n, "f1");
    red.max_f_residual =
        std::max(red.max_f_residual, std::fabs(f1n - red.lambda[i] - red.g1[i - 1]) /
                                         std::max(1.0, std::fabs(f1n)));
  }
  for (std::int64_t n = 2; n <= n_terms - 1; ++n) {
    auto i = static_cast<std::size_t>(n);
    SciNum pred = add(mul(from_real(red.g1[i]), red.b[i]),
                      mul(from_real(red.g2[i]), red.b[i - 1]));
    if (!red.b[i + 1].is_zero())
      red.max_b_residual = std::max(red.max_b_residual, rel_diff(pred, red.b[i + 1]));
  }
  std::int64_t t0 = tail_start(3, n_terms);
  for (std::int64_t n = t0; n <= n_terms; ++n) {
    double f1n = eval_at(f[0], n, "f1");
    double f2n = eval_at(f[1], n, "f2");
    double f3n = eval_at(f[2], n, "f3");
    red.f2_ratio_tail = std::max(red.f2_ratio_tail, std::fabs(f2n) / (f1n * f1n));
    red.f3_ratio_tail = std::max(red.f3_ratio_tail, std::fabs(f3n) / (f1n * f1n * f1n));
  }
  return red;
}

const char* depth3_variant_name(Depth3Variant v) {
  switch (v) {
    case Depth3Variant::exact_b: return "exact-b";
    case Depth3Variant::outer_b1_km1: return "outer-b1-to-k-1";
    case Depth3Variant::outer_b1_k: return "outer-b1-to-k";
    case Depth3Variant::b2_km1: return "b2-to-k-1";
    case Depth3Variant::inner_bt1_km1: return "inner-bt1-to-k-1";
  }
  return "?";
}

SciNum depth3_closed_form(const Depth3Reduction& red, double a2, std::int64_t n,
                          Depth3Variant variant) {
  if (n < 2) throw UsageError("closed form is defined for n >= 2");
  if (n > red.n_terms - 1)
    throw UsageError("closed form index beyond the reduced range");
  SciNum s = from_real(a2);
  double prefactor = red.b1;
  if (variant == Depth3Variant::b2_km1) prefactor = red.b2;
  if (variant == Depth3Variant::inner_bt1_km1) prefactor = red.inner.b1;
  SciNum prod = from_real(prefactor);
  for (std::int64_t k = 2; k <= n; ++k) {
    auto i = static_cast<std::size_t>(k);
    SciNum bk_hat;
    if (variant == Depth3Variant::exact_b) {
      bk_hat = red.b[i];
    } else if (variant == Depth3Variant::outer_b1_k) {
      prod = mul(prod, from_real(red.inner.mu[i]));
      bk_hat = prod;
    } else {
      bk_hat = prod;  // prefactor * prod_{j=2..k-1} mu2(j)
    }
    s = add(mul(from_real(red.lambda[i]), s), bk_hat);
    if (variant != Depth3Variant::exact_b && variant != Depth3Variant::outer_b1_k &&
        k < n)
      prod = mul(prod, from_real(red.inner.mu[i]));
  }
  return s;
}

namespace {

nlohmann::json head20(const std::vector<double>& v, std::int64_t lo, std::int64_t hi) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::int64_t n = lo; n <= std::min<std::int64_t>(hi, lo + 19); ++n)
    arr.push_back(v[static_cast<std::size_t>(n)]);
  return arr;
}

}  // namespace

nlohmann::json decomposition_to_json(const AuxiliaryDecomposition& dec) {
  return nlohmann::json{{"c", dec.c},
                        {"b1", dec.b1},
                        {"mode", lambda_mode_name(dec.mode)},
                        {"n_terms", dec.n_terms},
                        {"forbidden_hits", dec.forbidden_hits},
                        {"max_f_residual", dec.max_f_residual},
                        {"max_g_residual", dec.max_g_residual},
                        {"lambda_head", head20(dec.lambda, 1, dec.n_terms)},
                        {"mu_head", head20(dec.mu, 2, dec.n_terms)}};
}

nlohmann::json dominance_to_json(const DominanceReport& rep) {
  return nlohmann::json{{"n_terms", rep.n_terms},
                        {"f_nondecreasing", rep.f_nondecreasing},
                        {"q_tail_max", rep.q_tail_max},
                        {"gf2_tail_max", rep.gf2_tail_max},
                        {"rel_error_last", rep.rel_error_last},
                        {"rel_error_tail_nonincreasing", rep.rel_error_tail_nonincreasing},
                        {"main_term_dominates", rep.main_term_dominates},
                        {"p_head", head20(rep.p, 2, rep.n_terms)},
                        {"q_head", head20(rep.q, 2, rep.n_terms)},
                        {"rel_error_head", head20(rep.rel_error, 2, rep.n_terms)}};
}

nlohmann::json depth3_to_json(const Depth3Reduction& red) {
  return nlohmann::json{{"c", red.c},
                        {"d", red.d},
                        {"mode", lambda_mode_name(red.mode)},
                        {"n_terms", red.n_terms},
                        {"b1", red.b1},
                        {"b2", red.b2},
                        {"max_f_residual", red.max_f_residual},
                        {"max_b_residual", red.max_b_residual},
                        {"f2_ratio_tail", red.f2_ratio_tail},
                        {"f3_ratio_tail", red.f3_ratio_tail},
                        {"lambda_head", head20(red.lambda, 1, red.n_terms)},
                        {"g1_head", head20(red.g1, 2, red.n_terms - 1)},
                        {"g2_head", head20(red.g2, 2, red.n_terms - 1)},
                        {"inner", decomposition_to_json(red.inner)}};
}

void write_dominance_csv(const DominanceReport& rep, std::ostream& out) {
  out << "n,p,q,gf2,rel_error\n";
  char line[192];
  for (std::int64_t n = 2; n <= rep.n_terms; ++n) {
    auto i = static_cast<std::size_t>(n);
    std::snprintf(line, sizeof line, "%lld,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(n), rep.p[i], rep.q[i], rep.gf2[i],
                  rep.rel_error[i]);
    out << line;
  }
}

}  // namespace benfordseq
