#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "benfordseq/expr.hpp"
#include "benfordseq/recurrence.hpp"
#include "benfordseq/scinum.hpp"

namespace benfordseq {

// Coefficient function f_i(n). Expression-backed instances bind the same draw
// substream the iteration engine uses, so a decomposition sees the exact
// realization the sampled sequence was built from. Table-backed instances
// wrap derived coefficient arrays (the depth-3 inner pair).
class CoeffFn {
 public:
  CoeffFn() = default;
  CoeffFn(Expr e, std::uint64_t seed, std::uint64_t slot);
  explicit CoeffFn(std::function<double(std::int64_t)> fn);

  double operator()(std::int64_t n) const;
  bool valid() const { return static_cast<bool>(expr_) || static_cast<bool>(fn_); }

 private:
  Expr expr_;
  std::uint64_t stream_ = 0;
  std::function<double(std::int64_t)> fn_;
};

// One CoeffFn per slot of a spec.
std::vector<CoeffFn> coeff_fns(const RecurrenceSpec& spec);

// Basis solutions of the recurrence itself: alpha seeded (0, 1), beta (1, 0),
// so that s_n = alpha_n c + beta_n solves it with s_1 = 1, s_2 = c. Stored
// jointly rescaled by a common power of 10 whenever the window grows past
// 1e100 (only the ratios ever matter). gamma joins for depth 3, seeds
// (0,0,cd-slot) per the three unit initializations.
struct AuxSeeds {
  std::vector<double> alpha;  // [n], n = 1..N+1; [0] is NaN
  std::vector<double> beta;
  std::vector<double> gamma;  // depth-3 only, empty otherwise
};

AuxSeeds aux_seeds(const CoeffFn& f, const CoeffFn& g, std::int64_t n_terms);

// How the leading ratio sequence is produced.
//   scan:    lambda(1) = c from the fixed candidate scan (or a caller-pinned
//            c). Generic c locks lambda onto the dominant direction, so the
//            mu-product is a valid decomposition but not a main term.
//   minimal: backward iteration lambda(n-1) = g(n)/(lambda(n) - f(n)) from a
//            padded start; converges onto the recessive direction, the one
//            choice of c that can make the mu-product dominate.
enum class LambdaMode { scan, minimal };
const char* lambda_mode_name(LambdaMode m);

// Reduction a_{n+1} = lambda(n) a_n + b_n with b_n = mu(n) b_{n-1}:
// f(n) = lambda(n) + mu(n), g(n) = -lambda(n-1) mu(n), b_1 = a_2 - c a_1.
// Arrays are indexed by n directly; slots outside the stated range hold NaN.
struct AuxiliaryDecomposition {
  double c = 0.0;  // the free constant lambda(1)
  double b1 = 0.0;
  LambdaMode mode = LambdaMode::scan;
  std::int64_t n_terms = 0;
  std::vector<double> lambda;        // lambda[n], n = 1..N
  std::vector<double> mu;            // mu[n],     n = 2..N
  std::int64_t forbidden_hits = 0;   // near-degenerate denominators avoided
  double max_f_residual = 0.0;  // max |f(n) - lambda(n) - mu(n)| / max(1, |f(n)|)
  double max_g_residual = 0.0;  // max |g(n) + lambda(n-1) mu(n)| / max(1, |g(n)|)
};

// Construction order per the defining identities: mu(n) := -g(n)/lambda(n-1),
// lambda(n) := f(n) - mu(n), from lambda(1) = c. Scan mode picks c from
// {a2/a1 + 1, 1, 2, 3, -1, 1/2, ...} (64 small-height rationals, each retried
// once at c + 1/64), rejecting c when |alpha_k c + beta_k| dips under
// 1e-8 * max(|alpha_k c|, |beta_k|, 1) for some k <= N or when c is within
// 1e-12 of a2/a1 (that choice would zero b_1).
AuxiliaryDecomposition build_lambda_mu(const CoeffFn& f, const CoeffFn& g, double a1,
                                       double a2, std::int64_t n_terms, LambdaMode mode,
                                       std::optional<double> c_fixed = std::nullopt);

// The scan-mode candidate constants in trial order, for callers that want to
// compare decompositions across several admissible c.
std::vector<double> scan_candidates(double a1, double a2);

// Exact telescoped form, evaluated incrementally in SciNum:
//   a_{n+1} = b_1 sum_{k=2..n} (prod_{i=k+1..n} lambda(i)) (prod_{j=2..k} mu(j))
//           + a_2 prod_{i=2..n} lambda(i)
// via S(k) = lambda(k) S(k-1) + b_k, S(1) = a_2, b_k = mu(k) b_{k-1}. O(n).
SciNum closed_form_eval(const AuxiliaryDecomposition& dec, double a2, std::int64_t n);

// Main-term candidate r(n) = b_1 prod_{i=2..n} mu(i); values[i] = r(i+1),
// ready for direct Benford analysis of its log10_frac column.
SequenceSample main_term_sequence(const AuxiliaryDecomposition& dec,
                                  std::int64_t n_terms);

// Size of the correction against the mu-product. p(n) = lambda(n)/mu(n);
// q(2) = |p(2)|, q(n) = |p(n)| (1 + q(n-1)) bounds |a_{n+1}/r(n) - 1|.
// main_term_dominates needs the q tail under 1e-3 and a non-increasing
// rel_error over the last fifth of the horizon.
struct DominanceReport {
  std::int64_t n_terms = 0;       // n ranges over 2..n_terms
  std::vector<double> p;          // p[n]
  std::vector<double> q;          // q[n]
  std::vector<double> gf2;        // |g(n)| / f(n)^2
  std::vector<double> rel_error;  // |a_{n+1} - r(n)| / |r(n)|
  std::vector<double> main_term_benford_input;  // log10 |r(n)| mod 1
  bool f_nondecreasing = false;
  double q_tail_max = 0.0;
  double gf2_tail_max = 0.0;
  double rel_error_last = 0.0;
  bool rel_error_tail_nonincreasing = false;
  bool main_term_dominates = false;
};

DominanceReport dominance_check(const AuxiliaryDecomposition& dec, const CoeffFn& f,
                                const CoeffFn& g, const SequenceSample& sample);

// Depth-3 reduction: lambda peels one order, leaving
//   b_n = a_{n+1} - lambda(n) a_n,   b_{n+1} = g1(n) b_n + g2(n) b_{n-1}
// tied to the inputs by
//   f1(n) = lambda(n) + g1(n-1)
//   f2(n) = -g1(n-1) lambda(n-1) + g2(n-1)
//   f3(n) = -g2(n-1) lambda(n-2)
// The b-sequence is then decomposed in turn with build_lambda_mu; `inner`
// holds that result (its lambda is mu1, its mu is mu2, its b1 the reduced
// seed btilde1 = b_2 - mu1(1) b_1).
struct Depth3Reduction {
  double c = 0.0;  // lambda(1)
  double d = 0.0;  // lambda(2)
  LambdaMode mode = LambdaMode::minimal;
  std::int64_t n_terms = 0;
  std::vector<double> lambda;  // n = 1..N
  std::vector<double> g1, g2;  // n = 2..N-1
  std::vector<SciNum> b;       // b[n], n = 1..N (needs a_{N+1} in the sample)
  double b1 = 0.0, b2 = 0.0;
  AuxiliaryDecomposition inner;
  double max_f_residual = 0.0;      // |f1(n) - lambda(n) - g1(n-1)| / max(1, |f1(n)|)
  double max_b_residual = 0.0;      // |b_{n+1} - g1 b_n - g2 b_{n-1}| / |b_{n+1}|
  double f2_ratio_tail = 0.0;       // max |f2(n)| / f1(n)^2 over the tail
  double f3_ratio_tail = 0.0;       // max |f3(n)| / f1(n)^3 over the tail
};

// `f` holds the three coefficient functions; the sample supplies a_1..a_{N+1}
// on the same realization. Scan mode grids (c, d) over candidate pairs with
// the same degeneracy floor unless `cd` pins them.
Depth3Reduction reduce_depth3(const std::vector<CoeffFn>& f, const SequenceSample& sample,
                              std::int64_t n_terms, LambdaMode mode,
                              std::optional<std::pair<double, double>> cd = std::nullopt);

// How b_k is fed into the telescoped sum. exact_b reproduces the iteration to
// rounding; the approximate variants substitute a pure mu2-product and differ
// only in prefactor and product range. inner_bt1_km1, the one the inner
// decomposition justifies, is the converging choice; the others are kept for
// the cross-check that pinned the index range.
enum class Depth3Variant { exact_b, outer_b1_km1, outer_b1_k, b2_km1, inner_bt1_km1 };
const char* depth3_variant_name(Depth3Variant v);

SciNum depth3_closed_form(const Depth3Reduction& red, double a2, std::int64_t n,
                          Depth3Variant variant);

// JSON keeps the first 20 lambda/mu values plus the scalars; the CSV carries
// the full per-n diagnostic columns n, p, q, gf2, rel_error.
nlohmann::json decomposition_to_json(const AuxiliaryDecomposition& dec);
nlohmann::json dominance_to_json(const DominanceReport& rep);
nlohmann::json depth3_to_json(const Depth3Reduction& red);
void write_dominance_csv(const DominanceReport& rep, std::ostream& out);

}  // namespace benfordseq
