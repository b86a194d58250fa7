#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "benfordseq/benford.hpp"
#include "benfordseq/errors.hpp"
#include "doctest.h"

using namespace benfordseq;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Definitional D*: sorted sample against the uniform CDF at both one-sided
// extremes of each order statistic. Independent of the library routine.
double dstar_brute(std::vector<double> pts) {
  std::sort(pts.begin(), pts.end());
  const double n = static_cast<double>(pts.size());
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double hi = (static_cast<double>(i) + 1.0) / n - pts[i];
    double lo = pts[i] - static_cast<double>(i) / n;
    d = std::max(d, std::max(hi, lo));
  }
  return d;
}

std::vector<double> uniform_grid(int n) {
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pts.push_back((static_cast<double>(i) + 0.5) / n);
  return pts;
}

}  // namespace

TEST_CASE("digit_of_frac respects the log-scale bin boundaries") {
  for (int d = 1; d <= 9; ++d) {
    CHECK(digit_of_frac(std::log10(static_cast<double>(d))) == d);
    double mid = 0.5 * (std::log10(static_cast<double>(d)) + std::log10(d + 1.0));
    CHECK(digit_of_frac(mid) == d);
    CHECK(digit_of_frac(std::log10(d + 1.0) - 1e-12) == d);
  }
  CHECK(digit_of_frac(0.0) == 1);
  CHECK(digit_of_frac(1.0 - 1e-12) == 9);
}

TEST_CASE("star discrepancy hand-computed pins") {
  std::vector<double> quarters{0.0, 0.25, 0.5, 0.75};
  CHECK(star_discrepancy(quarters) == doctest::Approx(0.25).epsilon(1e-15));

  std::vector<double> left_grid;
  for (int i = 0; i < 50; ++i) left_grid.push_back(i / 50.0);
  CHECK(star_discrepancy(left_grid) == doctest::Approx(1.0 / 50.0).epsilon(1e-12));

  CHECK(star_discrepancy(uniform_grid(200)) == doctest::Approx(1.0 / 400.0).epsilon(1e-12));

  // Frozen random sample, value computed with an independent implementation.
  std::vector<double> frozen{
      0.013114189588902203, 0.029005228283614737, 0.11320596465314436, 0.24657283261983032,
      0.46562265437810535,  0.46906904778216374,  0.5437608592359304,  0.5739411879281008,
      0.6229016948897019,   0.6489745531369242,   0.7398985747399307,  0.7417869892607294,
      0.7951935655656966,   0.9009004917506227,   0.922324996665417,   0.9424502837770503,
      0.9433567169983137};
  CHECK(star_discrepancy(frozen) == doctest::Approx(0.23032853673104653).epsilon(1e-14));
}

TEST_CASE("star discrepancy agrees with the definitional computation") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 1 + static_cast<int>(rng() % 200);
    std::vector<double> pts;
    for (int i = 0; i < n; ++i) pts.push_back(u(rng));
    CAPTURE(trial);
    CHECK(star_discrepancy(pts) == doctest::Approx(dstar_brute(pts)).epsilon(1e-13));
  }
}

TEST_CASE("weyl sums: constant, full grid, and rational period") {
  std::vector<double> constant(128, 0.37);
  auto sc = weyl_sums(constant, 10);
  REQUIRE(sc.size() == 10);
  for (double s : sc) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<double> grid;
  for (int k = 0; k < 32; ++k) grid.push_back(k / 32.0);
  auto sg = weyl_sums(grid, 10);
  for (double s : sg) CHECK(s < 1e-12);

  // y_n = n/7 over exactly 100 periods: S_m vanishes except at m = 7.
  std::vector<double> sevenths;
  for (int n = 1; n <= 700; ++n) sevenths.push_back(std::fmod(n / 7.0, 1.0));
  auto s7 = weyl_sums(sevenths, 10);
  for (int m = 1; m <= 10; ++m) {
    CAPTURE(m);
    if (m == 7)
      CHECK(s7[6] == doctest::Approx(1.0).epsilon(1e-10));
    else
      CHECK(s7[static_cast<std::size_t>(m - 1)] < 1e-10);
  }
}

TEST_CASE("analyze_points on a perfect uniform grid is consistent") {
  auto rep = analyze_points(uniform_grid(1000));
  CHECK(rep.verdict == Verdict::consistent);
  CHECK(rep.hist.total == 1000);
  CHECK(rep.hist.excluded_zeros == 0);
  CHECK(rep.max_digit_dev < 0.01);
  CHECK(rep.star_discrepancy == doctest::Approx(0.0005).epsilon(1e-12));
  CHECK(rep.ks_significand == doctest::Approx(rep.star_discrepancy).epsilon(1e-12));
  for (int d = 0; d < 9; ++d)
    CHECK(rep.expected[static_cast<std::size_t>(d)] ==
          doctest::Approx(std::log10(1.0 + 1.0 / (d + 1))).epsilon(1e-15));
  std::int64_t total = 0;
  for (auto c : rep.hist.counts) total += c;
  CHECK(total == 1000);
}

TEST_CASE("analyze_points flags a degenerate sample") {
  std::vector<double> ones(1000, 0.0);  // every first digit is 1
  auto rep = analyze_points(ones);
  CHECK(rep.verdict == Verdict::inconsistent);
  CHECK(rep.freq[0] == 1.0);
  CHECK(rep.max_digit_dev == doctest::Approx(1.0 - std::log10(2.0)).epsilon(1e-12));
  CHECK(rep.weyl[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sample size gate and zero exclusion") {
  CHECK(analyze_points(uniform_grid(999)).verdict == Verdict::insufficient_sample);
  CHECK(analyze_points(uniform_grid(1000)).verdict == Verdict::consistent);

  auto pts = uniform_grid(1000);
  pts.push_back(kNaN);
  pts.push_back(kNaN);
  auto rep = analyze_points(pts);
  CHECK(rep.hist.total == 1000);
  CHECK(rep.hist.excluded_zeros == 2);
  CHECK(rep.verdict == Verdict::consistent);

  std::vector<double> all_nan(10, kNaN);
  CHECK_THROWS_AS(analyze_points(all_nan), DomainError);
  std::vector<double> empty;
  CHECK_THROWS_AS(analyze_points(empty), DomainError);

  // A 100-point grid still resolves digit frequencies to within 1%.
  Thresholds lax;
  lax.min_points = 50;
  CHECK(analyze_points(uniform_grid(100), lax).verdict == Verdict::consistent);
}

TEST_CASE("digit deviation is bounded by twice the star discrepancy") {
  // Each digit bin is an interval in [0,1), so its empirical measure is off
  // by at most D* at each endpoint.
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Thresholds lax;
  lax.min_points = 1;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> pts;
    for (int i = 0; i < 500; ++i) pts.push_back(u(rng));
    auto rep = analyze_points(pts, lax);
    CHECK(rep.max_digit_dev <= 2.0 * rep.star_discrepancy + 1e-12);
  }
}

TEST_CASE("chi-square survival function for eight degrees of freedom") {
  CHECK(chi2_pvalue_df8(0.0) == 1.0);
  CHECK(chi2_pvalue_df8(8.0) == doctest::Approx(0.43347012036670884).epsilon(1e-12));
  CHECK(chi2_pvalue_df8(15.507) == doctest::Approx(0.05).epsilon(1e-3));
  double prev = 1.0;
  for (double x = 0.5; x < 50.0; x += 0.5) {
    double q = chi2_pvalue_df8(x);
    CHECK(q < prev);
    prev = q;
  }
}

TEST_CASE("kronecker probe finds the first hitting index") {
  auto hit = kronecker_probe(0.5, 0.5, 1e-9, 100);
  REQUIRE(hit.has_value());
  CHECK(*hit == 1);

  // {n/3} never comes near 0.5
  CHECK(!kronecker_probe(1.0 / 3.0, 0.5, 0.1, 10000).has_value());

  auto log2_hit = kronecker_probe(std::log10(2.0), 0.5, 1e-4);
  REQUIRE(log2_hit.has_value());
  CHECK(*log2_hit == 1068);
  double frac = std::fmod(static_cast<double>(*log2_hit) * std::log10(2.0), 1.0);
  CHECK(std::fabs(frac - 0.5) < 1e-4);
}

TEST_CASE("verdict names round trip") {
  CHECK(verdict_name(Verdict::consistent) == std::string("consistent"));
  CHECK(verdict_name(Verdict::inconsistent) == std::string("inconsistent"));
  CHECK(verdict_name(Verdict::insufficient_sample) == std::string("insufficient_sample"));
  CHECK(verdict_from_name("consistent") == Verdict::consistent);
  CHECK(verdict_from_name("inconsistent") == Verdict::inconsistent);
  CHECK(verdict_from_name("insufficient_sample") == Verdict::insufficient_sample);
  CHECK(!verdict_from_name("bogus").has_value());
}

TEST_CASE("report JSON carries the full diagnostic set") {
  auto rep = analyze_points(uniform_grid(1000));
  auto j = report_to_json(rep);
  for (const char* key : {"chi2_df8", "digit_counts", "digit_expected", "digit_freq",
                          "excluded_zeros", "ks_significand", "max_digit_dev", "points",
                          "star_discrepancy", "thresholds", "verdict", "weyl"}) {
    CAPTURE(key);
    CHECK(j.contains(key));
  }
  CHECK(j["verdict"] == "consistent");
  CHECK(j["points"] == 1000);
  CHECK(j["weyl"].size() == 10);
}
