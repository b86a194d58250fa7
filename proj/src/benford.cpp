#include "benfordseq/benford.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string_view>

#include <nlohmann/json.hpp>

#include "benfordseq/errors.hpp"

namespace benfordseq {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

const std::array<double, 10>& digit_edges() {
  static const std::array<double, 10> edges = [] {
    std::array<double, 10> e{};
    for (int d = 0; d <= 9; ++d) e[static_cast<std::size_t>(d)] = std::log10(d + 1.0);
    return e;  // log10(1)=0 .. log10(10)=1
  }();
  return edges;
}

}  // namespace

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::consistent: return "consistent";
    case Verdict::inconsistent: return "inconsistent";
    case Verdict::insufficient_sample: return "insufficient_sample";
  }
  return "?";
}

std::optional<Verdict> verdict_from_name(std::string_view name) {
  if (name == "consistent") return Verdict::consistent;
  if (name == "inconsistent") return Verdict::inconsistent;
  if (name == "insufficient_sample") return Verdict::insufficient_sample;
  return std::nullopt;
}

int digit_of_frac(double x) {
  if (!(x >= 0.0 && x < 1.0)) throw DomainError("digit_of_frac input outside [0,1)");
  const auto& edges = digit_edges();
  // First edge strictly above x; its predecessor is the digit bucket.
  auto it = std::upper_bound(edges.begin() + 1, edges.end(), x);
  return static_cast<int>(it - edges.begin());
}

BenfordReport analyze_points(std::span<const double> points, const Thresholds& thr) {
  BenfordReport r;
  r.thresholds = thr;
  std::vector<double> pts;
  pts.reserve(points.size());
  for (double x : points) {
    if (std::isnan(x)) {
      ++r.hist.excluded_zeros;
      continue;
    }
    if (!(x >= 0.0 && x < 1.0)) throw DomainError("analysis point outside [0,1)");
    pts.push_back(x);
  }
  if (pts.empty()) throw DomainError("no nonzero terms to analyze");

  r.hist.total = static_cast<std::int64_t>(pts.size());
  for (double x : pts) ++r.hist.counts[static_cast<std::size_t>(digit_of_frac(x) - 1)];

  const double n = static_cast<double>(r.hist.total);
  r.chi2 = 0.0;
  r.max_digit_dev = 0.0;
  for (int d = 1; d <= 9; ++d) {
    auto i = static_cast<std::size_t>(d - 1);
    r.expected[i] = std::log10(1.0 + 1.0 / d);
    r.freq[i] = static_cast<double>(r.hist.counts[i]) / n;
    r.max_digit_dev = std::max(r.max_digit_dev, std::fabs(r.freq[i] - r.expected[i]));
    const double exp_count = n * r.expected[i];
    const double diff = static_cast<double>(r.hist.counts[i]) - exp_count;
    r.chi2 += diff * diff / exp_count;
  }

  r.star_discrepancy = star_discrepancy(pts);
  // The significand CDF on [1,10) is log10 s, so the KS statistic equals the
  // sup distance of the point ECDF from the identity on [0,1); evaluate it
  // through the significand transform to keep the two routes independent.
  {
    std::vector<double> sig(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) sig[i] = std::pow(10.0, pts[i]);
    std::sort(sig.begin(), sig.end());
    const auto m = static_cast<double>(sig.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < sig.size(); ++i) {
      double cdf = std::log10(sig[i]);
      ks = std::max(ks, std::max((static_cast<double>(i) + 1.0) / m - cdf,
                                 cdf - static_cast<double>(i) / m));
    }
    r.ks_significand = ks;
  }
  r.weyl = weyl_sums(pts, thr.weyl_m);

  if (r.hist.total < thr.min_points) {
    r.verdict = Verdict::insufficient_sample;
  } else {
    double weyl_max = r.weyl.empty() ? 0.0 : *std::max_element(r.weyl.begin(), r.weyl.end());
    bool ok = r.max_digit_dev < thr.digit_dev && r.star_discrepancy < thr.dstar &&
              weyl_max < thr.weyl;
    r.verdict = ok ? Verdict::consistent : Verdict::inconsistent;
  }
  return r;
}

double star_discrepancy(std::span<const double> points) {
  if (points.empty()) throw DomainError("star discrepancy of an empty set");
  std::vector<double> u(points.begin(), points.end());
  std::sort(u.begin(), u.end());
  const auto n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    d = std::max(d, std::max((static_cast<double>(i) + 1.0) / n - u[i],
                             u[i] - static_cast<double>(i) / n));
  }
  return d;
}

std::vector<double> weyl_sums(std::span<const double> points, int M) {
  if (points.empty()) throw DomainError("Weyl sums of an empty set");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(M));
  const double n = static_cast<double>(points.size());
  for (int m = 1; m <= M; ++m) {
    std::complex<double> s{0.0, 0.0};
    for (double y : points) {
      double t = kTwoPi * m * y;
      s += std::complex<double>(std::cos(t), std::sin(t));
    }
    out.push_back(std::abs(s) / n);
  }
  return out;
}

std::optional<std::int64_t> kronecker_probe(double alpha, double target, double eps,
                                            std::int64_t n_max) {
  if (eps <= 0.0) throw DomainError("kronecker probe needs eps > 0");
  for (std::int64_t n = 1; n <= n_max; ++n) {
    double fr = std::fmod(static_cast<double>(n) * alpha, 1.0);
    if (fr < 0.0) fr += 1.0;
    if (std::fabs(fr - target) < eps) return n;
  }
  return std::nullopt;
}

double chi2_pvalue_df8(double x) {
  if (x < 0.0) throw DomainError("chi-square statistic must be nonnegative");
  double t = x / 2.0;
  double term = 1.0, sum = 0.0;
  for (int j = 0; j < 4; ++j) {
    sum += term;
    term *= t / (j + 1);
  }
  return std::exp(-t) * sum;
}

nlohmann::json report_to_json(const BenfordReport& r) {
  nlohmann::json j;
  j["points"] = r.hist.total;
  j["excluded_zeros"] = r.hist.excluded_zeros;
  j["digit_counts"] = r.hist.counts;
  j["digit_freq"] = r.freq;
  j["digit_expected"] = r.expected;
  j["max_digit_dev"] = r.max_digit_dev;
  j["chi2_df8"] = r.chi2;
  j["ks_significand"] = r.ks_significand;
  j["star_discrepancy"] = r.star_discrepancy;
  j["weyl"] = r.weyl;
  j["verdict"] = verdict_name(r.verdict);
  j["thresholds"] = {{"digit_dev", r.thresholds.digit_dev},
                     {"dstar", r.thresholds.dstar},
                     {"weyl", r.thresholds.weyl},
                     {"weyl_m", r.thresholds.weyl_m},
                     {"min_points", r.thresholds.min_points}};
  return j;
}

}  // namespace benfordseq
