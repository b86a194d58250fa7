#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "benfordseq/scinum.hpp"

namespace benfordseq {

// Monic characteristic polynomial of a constant-coefficient linear
// recurrence a_{n+1} = c_1 a_n + ... + c_L a_{n-L+1}:
//   r^L - c_1 r^{L-1} - ... - c_L.
// c_L must be nonzero (no zero roots). Degree is capped at 10.
struct CharPoly {
  std::vector<double> c;  // c[0] = c_1, ..., c[L-1] = c_L
  int degree() const { return static_cast<int>(c.size()); }
};

struct RootInfo {
  std::complex<double> value;
  int multiplicity = 1;
};

// a_n = sum_k (sum_{j=1..m_k} gamma_{k,j} n^{m_k - j}) r_k^n.
// gamma[k][j-1] multiplies n^{m_k - j} r_k^n.
struct BinetSolution {
  CharPoly poly;
  std::vector<RootInfo> roots;  // sorted by modulus, descending
  std::vector<std::vector<std::complex<double>>> gamma;
  double condition = 0.0;  // condition estimate of the coefficient solve
};

// Companion-matrix eigensolve (balanced), Newton-polished, then clustered
// with radius 1e-8 * max(1, |r|); cluster size becomes the multiplicity.
std::vector<RootInfo> char_roots(const CharPoly& p);

// Solve the confluent Vandermonde system against initial terms a_1..a_L.
// Condition estimates above 1e12 raise ConstructionError.
BinetSolution binet_coeffs(const CharPoly& p, const std::vector<double>& initial);

// Evaluate the closed form at n. Real sequences should come out real: when
// |Im|/|Re| >= 1e-6 *imag_warn is set (result uses the real part either way).
SciNum reconstruct(const BinetSolution& sol, std::int64_t n, bool* imag_warn = nullptr);

// Continued-fraction rational scan of x: convergents p/q with q <= 1e6;
// declared rational iff |x - p/q| < max(1e-15, 1e-12/q). The q-scaled
// threshold keeps root-finding noise near small rationals (0.5 +/- 1e-13
// still reads 1/2) without declaring every real rational, which an absolute
// cutoff does once convergent errors fall below it near q ~ 1e6.
struct RationalScan {
  bool rational = false;
  std::int64_t p = 0, q = 1;
  double error = 0.0;
};
RationalScan rational_scan(double x);

enum class PredictStatus { benford, not_benford, inconclusive };
const char* predict_status_name(PredictStatus s);

// One hypothesis check of the dominant-root first-digit criterion.
struct PredictCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct BenfordPrediction {
  PredictStatus status = PredictStatus::inconclusive;
  std::vector<PredictCheck> checks;  // distinct_dominant, modulus_not_one,
                                     // gamma1_nonzero, log10_irrationality
  double dominant_modulus = 0.0;
  double log10_dominant = 0.0;
};

// Verdict for the sequence the solution reconstructs: benford iff the
// dominant root is real, unique, simple, off the unit circle, carries a
// nonzero coefficient, and log10|r_1| scans as irrational. A rational scan
// hit yields not_benford; everything ambiguous yields inconclusive.
BenfordPrediction predict_benford(const BinetSolution& sol);

nlohmann::json prediction_to_json(const BinetSolution& sol, const BenfordPrediction& p);

}  // namespace benfordseq
