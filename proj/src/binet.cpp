#include "benfordseq/binet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "benfordseq/errors.hpp"

namespace benfordseq {

namespace {

constexpr int kDegreeCap = 10;
constexpr double kClusterRadius = 1e-8;
constexpr double kConditionLimit = 1e12;

using cplx = std::complex<double>;

// Monic coefficients [1, -c_1, ..., -c_L] for Horner evaluation.
std::vector<double> monic(const CharPoly& p) {
  std::vector<double> m;
  m.reserve(p.c.size() + 1);
  m.push_back(1.0);
  for (double ci : p.c) m.push_back(-ci);
  return m;
}

cplx horner(const std::vector<double>& m, cplx x, cplx* dp = nullptr) {
  cplx v{m[0], 0.0}, d{0.0, 0.0};
  for (std::size_t i = 1; i < m.size(); ++i) {
    d = d * x + v;
    v = v * x + m[i];
  }
  if (dp) *dp = d;
  return v;
}

// Diagonal similarity scaling by powers of two; keeps eigenvalues exact while
// evening out row/column norms before the Schur iteration.
void balance(Eigen::MatrixXd& a) {
  const auto n = a.rows();
  for (bool converged = false; !converged;) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double r = a.row(i).lpNorm<1>() - std::fabs(a(i, i));
      double c = a.col(i).lpNorm<1>() - std::fabs(a(i, i));
      if (r == 0.0 || c == 0.0) continue;
      double f = 1.0;
      while (c < r / 2.0) { c *= 2.0; r /= 2.0; f *= 2.0; }
      while (c > r * 2.0) { c /= 2.0; r *= 2.0; f /= 2.0; }
      if (f != 1.0) {
        converged = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

cplx cpow_int(cplx base, std::int64_t e) {
  cplx out{1.0, 0.0};
  while (e > 0) {
    if (e & 1) out *= base;
    base *= base;
    e >>= 1;
  }
  return out;
}

bool modulus_order(const RootInfo& x, const RootInfo& y) {
  double ax = std::abs(x.value), ay = std::abs(y.value);
  if (ax != ay) return ax > ay;
  if (x.value.real() != y.value.real()) return x.value.real() > y.value.real();
  return x.value.imag() > y.value.imag();
}

}  // namespace

std::vector<RootInfo> char_roots(const CharPoly& p) {
  const int deg = p.degree();
  if (deg < 1) throw ConstructionError("empty characteristic polynomial");
  if (deg > kDegreeCap)
    throw ConstructionError("characteristic degree " + std::to_string(deg) +
                            " exceeds the supported cap of " + std::to_string(kDegreeCap));
  if (p.c.back() == 0.0)
    throw ConstructionError("trailing coefficient is zero (zero root): lower the depth");

  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
  for (int j = 0; j < deg; ++j) comp(0, j) = p.c[static_cast<std::size_t>(j)];
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  balance(comp);

  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw ConstructionError("eigensolver did not converge");

  const auto m = monic(p);
  std::vector<cplx> roots;
  roots.reserve(static_cast<std::size_t>(deg));
  for (int i = 0; i < deg; ++i) {
    cplx r = es.eigenvalues()(i);
    // Newton polish; repeated roots keep the Schur estimate (derivative ~ 0).
    for (int it = 0; it < 4; ++it) {
      cplx d;
      cplx v = horner(m, r, &d);
      if (std::abs(d) < 1e-300) break;
      cplx next = r - v / d;
      if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) break;
      if (std::abs(horner(m, next)) >= std::abs(v)) break;
      r = next;
    }
    roots.push_back(r);
  }

  // Conjugate symmetry of real polynomials leaves real roots with stray
  // imaginary dust; snap anything within the cluster radius onto the axis.
  for (auto& r : roots)
    if (std::fabs(r.imag()) <= kClusterRadius * std::max(1.0, std::abs(r))) r = {r.real(), 0.0};

  std::vector<RootInfo> clusters;
  for (const cplx& r : roots) {
    bool merged = false;
    for (auto& cl : clusters) {
      if (std::abs(r - cl.value) <= kClusterRadius * std::max(1.0, std::abs(cl.value))) {
        // Running centroid keeps the cluster representative stable.
        double w = cl.multiplicity;
        cl.value = (cl.value * w + r) / (w + 1.0);
        ++cl.multiplicity;
        merged = true;
        break;
      }
    }
    if (!merged) clusters.push_back(RootInfo{r, 1});
  }
  std::sort(clusters.begin(), clusters.end(), modulus_order);
  return clusters;
}

BinetSolution binet_coeffs(const CharPoly& p, const std::vector<double>& initial) {
  if (initial.size() != static_cast<std::size_t>(p.degree()))
    throw ConstructionError("initial values must match the characteristic degree");
  BinetSolution sol;
  sol.poly = p;
  sol.roots = char_roots(p);

  const int l = p.degree();
  Eigen::MatrixXcd vand(l, l);
  for (int row = 0; row < l; ++row) {
    const double n = row + 1.0;
    int col = 0;
    for (const auto& root : sol.roots) {
      cplx rn = cpow_int(root.value, row + 1);
      for (int j = 1; j <= root.multiplicity; ++j)
        vand(row, col++) = std::pow(n, root.multiplicity - j) * rn;
    }
  }
  Eigen::VectorXcd rhs(l);
  for (int i = 0; i < l; ++i) rhs(i) = initial[static_cast<std::size_t>(i)];

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(vand, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double smin = sv(sv.size() - 1);
  sol.condition = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  if (!(sol.condition < kConditionLimit))
    throw ConstructionError("coefficient solve is ill-conditioned (estimate " +
                            std::to_string(sol.condition) + "); roots are too close");
  Eigen::VectorXcd gamma = svd.solve(rhs);

  int col = 0;
  for (const auto& root : sol.roots) {
    std::vector<cplx> g;
    for (int j = 0; j < root.multiplicity; ++j) g.push_back(gamma(col++));
    sol.gamma.push_back(std::move(g));
  }
  return sol;
}

SciNum reconstruct(const BinetSolution& sol, std::int64_t n, bool* imag_warn) {
  if (n < 1) throw UsageError("reconstruction index must be positive");
  cplx acc{0.0, 0.0};
  for (std::size_t k = 0; k < sol.roots.size(); ++k) {
    cplx rn = cpow_int(sol.roots[k].value, n);
    const int mult = sol.roots[k].multiplicity;
    for (int j = 1; j <= mult; ++j)
      acc += sol.gamma[k][static_cast<std::size_t>(j - 1)] *
             std::pow(static_cast<double>(n), mult - j) * rn;
  }
  if (!std::isfinite(acc.real()) || !std::isfinite(acc.imag()))
    throw OverflowError("closed-form value overflowed at n=" + std::to_string(n));
  if (imag_warn)
    *imag_warn = std::fabs(acc.imag()) >= 1e-6 * std::max(std::fabs(acc.real()), 1e-300);
  return from_real(acc.real());
}

RationalScan rational_scan(double x) {
  RationalScan best;
  best.error = std::numeric_limits<double>::infinity();
  // Continued-fraction convergents h_i = a_i h_{i-1} + h_{i-2}.
  std::int64_t hm1 = 1, km1 = 0, hm2 = 0, km2 = 1;
  double t = x;
  for (int iter = 0; iter < 64; ++iter) {
    double fa = std::floor(t);
    if (fa > 9.0e18 || fa < -9.0e18) break;
    auto a = static_cast<std::int64_t>(fa);
    std::int64_t h, k;
    if (__builtin_mul_overflow(a, hm1, &h) || __builtin_add_overflow(h, hm2, &h)) break;
    if (__builtin_mul_overflow(a, km1, &k) || __builtin_add_overflow(k, km2, &k)) break;
    hm2 = hm1; km2 = km1; hm1 = h; km1 = k;
    if (k > 1'000'000) break;
    if (k > 0) {
      double err = std::fabs(x - static_cast<double>(h) / static_cast<double>(k));
      if (err < best.error) {
        best.error = err;
        best.p = h;
        best.q = k;
      }
      if (err < std::max(1e-15, 1e-12 / static_cast<double>(k))) {
        best.rational = true;
        return best;
      }
    }
    double frac = t - fa;
    if (frac < 1e-18) break;  // terminated: exact up to representation
    t = 1.0 / frac;
  }
  return best;
}

const char* predict_status_name(PredictStatus s) {
  switch (s) {
    case PredictStatus::benford: return "benford";
    case PredictStatus::not_benford: return "not_benford";
    case PredictStatus::inconclusive: return "inconclusive";
  }
  return "?";
}

BenfordPrediction predict_benford(const BinetSolution& sol) {
  BenfordPrediction out;
  const RootInfo& r1 = sol.roots.front();
  const double a1 = std::abs(r1.value);
  out.dominant_modulus = a1;
  out.log10_dominant = std::log10(a1);

  PredictCheck distinct{"distinct_dominant", true, ""};
  if (r1.multiplicity != 1) {
    distinct.passed = false;
    distinct.detail = "dominant root has multiplicity " + std::to_string(r1.multiplicity);
  } else if (sol.roots.size() > 1) {
    double a2 = std::abs(sol.roots[1].value);
    if (!(a1 - a2 > kClusterRadius * std::max(1.0, a1))) {
      distinct.passed = false;
      distinct.detail = "modulus tie within tolerance (" + std::to_string(a1) + " vs " +
                        std::to_string(a2) + ")";
    }
  }
  if (distinct.passed && std::fabs(r1.value.imag()) > 0.0) {
    distinct.passed = false;
    distinct.detail = "dominant root is complex";
  }
  if (distinct.passed) distinct.detail = "unique simple dominant root";

  PredictCheck mod_one{"modulus_not_one", std::fabs(a1 - 1.0) > kClusterRadius, ""};
  mod_one.detail = mod_one.passed ? "|r1| away from 1" : "|r1| within tolerance of 1";

  // Presence of the dominant term. Scale-free: multiplying every initial
  // value by s scales every gamma by s, so compare against the gamma norm.
  double gmax = 0.0;
  for (const auto& g : sol.gamma)
    for (const auto& v : g) gmax = std::max(gmax, std::abs(v));
  double g1 = std::abs(sol.gamma.front().front());
  PredictCheck gnz{"gamma1_nonzero", g1 > 1e-10 * std::max(gmax, 1e-300), ""};
  gnz.detail = gnz.passed ? "dominant coefficient present"
                          : "dominant coefficient vanishes against the others";

  RationalScan scan = rational_scan(out.log10_dominant);
  PredictCheck irr{"log10_irrationality", !scan.rational, ""};
  std::string pq = scan.q == 1 ? std::to_string(scan.p)
                               : std::to_string(scan.p) + "/" + std::to_string(scan.q);
  if (scan.rational) {
    irr.detail = "log10|r1| = " + pq + " rational";
  } else {
    char miss[48];
    std::snprintf(miss, sizeof miss, "%.3g", scan.error);
    irr.detail = "no rational with denominator <= 1e6; presumed irrational (best convergent " +
                 pq + " misses by " + miss + ")";
  }

  out.checks = {distinct, mod_one, gnz, irr};
  if (!distinct.passed || !mod_one.passed || !gnz.passed)
    out.status = PredictStatus::inconclusive;
  else if (scan.rational)
    out.status = PredictStatus::not_benford;
  else
    out.status = PredictStatus::benford;
  return out;
}

nlohmann::json prediction_to_json(const BinetSolution& sol, const BenfordPrediction& p) {
  nlohmann::json roots = nlohmann::json::array();
  for (std::size_t k = 0; k < sol.roots.size(); ++k) {
    nlohmann::json g = nlohmann::json::array();
    for (const auto& v : sol.gamma[k]) g.push_back({{"re", v.real()}, {"im", v.imag()}});
    roots.push_back({{"re", sol.roots[k].value.real()},
                     {"im", sol.roots[k].value.imag()},
                     {"multiplicity", sol.roots[k].multiplicity},
                     {"gamma", g}});
  }
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : p.checks)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return nlohmann::json{{"roots", roots},
                        {"condition", sol.condition},
                        {"dominant_modulus", p.dominant_modulus},
                        {"log10_dominant", p.log10_dominant},
                        {"checks", checks},
                        {"status", predict_status_name(p.status)}};
}

}  // namespace benfordseq
