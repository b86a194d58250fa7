#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace benfordseq {

// Decision thresholds for the first-digit law diagnostics. Defaults are the
// pinned acceptance values; the CLI can override each of them.
struct Thresholds {
  double digit_dev = 0.01;      // max per-digit frequency deviation
  double dstar = 0.02;          // star discrepancy bound
  double weyl = 0.05;           // max |S_m| over m = 1..weyl_m
  int weyl_m = 10;
  std::int64_t min_points = 1000;  // below this: insufficient_sample
};

struct DigitHistogram {
  std::array<std::int64_t, 9> counts{};  // first digit 1..9
  std::int64_t total = 0;
  std::int64_t excluded_zeros = 0;
};

enum class Verdict { consistent, inconsistent, insufficient_sample };

const char* verdict_name(Verdict v);
std::optional<Verdict> verdict_from_name(std::string_view name);

struct BenfordReport {
  DigitHistogram hist;
  std::array<double, 9> freq{};      // observed frequencies
  std::array<double, 9> expected{};  // log10(1 + 1/d)
  double max_digit_dev = 0.0;
  double chi2 = 0.0;  // df = 8; p-value only computed for aggregate reports
  double ks_significand = 0.0;
  double star_discrepancy = 0.0;
  std::vector<double> weyl;  // |S_m|, m = 1..M
  Verdict verdict = Verdict::insufficient_sample;
  Thresholds thresholds;
};

// First digit d of a point x = log10|a| mod 1: the unique d with
// log10 d <= x < log10(d+1). x must lie in [0, 1).
int digit_of_frac(double x);

// points are log10|a_n| mod 1 values; NaN entries stand for zero terms and
// are excluded (and counted). Throws DomainError when nothing remains.
BenfordReport analyze_points(std::span<const double> points, const Thresholds& thr = {});

// Exact star discrepancy of points in [0,1):
// D*_N = max_i max(i/N - u_(i), u_(i) - (i-1)/N) over the sorted sample.
double star_discrepancy(std::span<const double> points);

// |S_m| = |N^-1 sum_n exp(2 pi i m y_n)| for m = 1..M.
std::vector<double> weyl_sums(std::span<const double> points, int M);

// Smallest n <= n_max with |frac(n*alpha) - target| < eps, or nullopt.
// frac computed as fmod(n*alpha, 1.0) per n: no iteration drift.
std::optional<std::int64_t> kronecker_probe(double alpha, double target, double eps,
                                            std::int64_t n_max = 10'000'000);

// P(Chi2_8 > x), closed form for even df: exp(-t) * sum_{j<4} t^j/j!, t = x/2.
double chi2_pvalue_df8(double x);

nlohmann::json report_to_json(const BenfordReport& r);

}  // namespace benfordseq
