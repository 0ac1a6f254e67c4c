#pragma once

// Test-only helpers: extended-precision series oracles kept independent of
// the library's evaluation paths, plus the statistical tests the sampler and
// calibration checks need.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "cncdir/specfun.hpp"

namespace testsupport {

// --------------------------- series oracles --------------------------------

// pFq partial sums in long double, by direct term products (no recursion
// shared with the library code path).
inline long double pfq_oracle(std::vector<long double> upper,
                              std::vector<long double> lower, long double x,
                              int terms = 200) {
  long double sum = 0.0L;
  for (int n = 0; n < terms; ++n) {
    long double t = 1.0L;
    for (long double a : upper)
      for (int k = 0; k < n; ++k) t *= (a + k);
    for (long double b : lower)
      for (int k = 0; k < n; ++k) t /= (b + k);
    for (int k = 1; k <= n; ++k) t *= x / k;
    sum += t;
  }
  return sum;
}

inline long double f01_oracle(long double b, long double x, int terms = 200) {
  return pfq_oracle({}, {b}, x, terms);
}

inline long double f11_oracle(long double a, long double b, long double x,
                              int terms = 300) {
  return pfq_oracle({a}, {b}, x, terms);
}

// Brute-force triple sum of the three-variable Humbert series. Per-index
// factors are tabulated first; the summation itself is the literal triple sum.
inline long double psi2_3_oracle(long double a, long double b1, long double b2,
                                 long double b3, long double x1, long double x2,
                                 long double x3, int bound = 60) {
  auto poch_table = [](long double v, int n) {
    std::vector<long double> t(n + 1, 1.0L);
    for (int k = 1; k <= n; ++k) t[k] = t[k - 1] * (v + k - 1);
    return t;
  };
  auto power_table = [](long double x, int n) {
    std::vector<long double> t(n + 1, 1.0L);
    for (int k = 1; k <= n; ++k) t[k] = t[k - 1] * x / k;  // x^k / k!
    return t;
  };
  auto A = poch_table(a, 3 * bound);
  auto B1 = poch_table(b1, bound), B2 = poch_table(b2, bound),
       B3 = poch_table(b3, bound);
  auto P1 = power_table(x1, bound), P2 = power_table(x2, bound),
       P3 = power_table(x3, bound);
  long double sum = 0.0L;
  for (int j1 = 0; j1 <= bound; ++j1)
    for (int j2 = 0; j2 <= bound; ++j2)
      for (int j3 = 0; j3 <= bound; ++j3)
        sum += A[j1 + j2 + j3] / (B1[j1] * B2[j2] * B3[j3]) * P1[j1] * P2[j2] *
               P3[j3];
  return sum;
}

// ------------------------- distribution helpers ----------------------------

// Regularized incomplete beta via the standard continued fraction.
inline double betainc(double x, double a, double b) {
  if (x <= 0) return 0.0;
  if (x >= 1) return 1.0;
  auto cf = [](double x_, double a_, double b_) {
    const double tiny = 1e-300;
    double c = 1.0, d = 1.0 - (a_ + b_) * x_ / (a_ + 1.0);
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
      int m2 = 2 * m;
      double num = m * (b_ - m) * x_ / ((a_ + m2 - 1.0) * (a_ + m2));
      d = 1.0 + num * d;
      if (std::abs(d) < tiny) d = tiny;
      c = 1.0 + num / c;
      if (std::abs(c) < tiny) c = tiny;
      d = 1.0 / d;
      h *= d * c;
      num = -(a_ + m) * (a_ + b_ + m) * x_ / ((a_ + m2) * (a_ + m2 + 1.0));
      d = 1.0 + num * d;
      if (std::abs(d) < tiny) d = tiny;
      c = 1.0 + num / c;
      if (std::abs(c) < tiny) c = tiny;
      d = 1.0 / d;
      double del = d * c;
      h *= del;
      if (std::abs(del - 1.0) < 1e-14) break;
    }
    return h;
  };
  double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  double front = std::exp(a * std::log(x) + b * std::log(1.0 - x) - lbeta);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * cf(x, a, b) / a;
  return 1.0 - std::exp(b * std::log(1.0 - x) + a * std::log(x) - lbeta) *
                   cf(1.0 - x, b, a) / b;
}

inline double beta_cdf(double x, double a, double b) { return betainc(x, a, b); }

// ----------------------------- test statistics -----------------------------

// Kolmogorov asymptotic survival function.
inline double kolmogorov_sf(double t) {
  if (t <= 0) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k)
    s += (k % 2 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * t * t);
  return std::clamp(2.0 * s, 0.0, 1.0);
}

// One-sample KS test against a cdf; returns the p-value.
inline double ks_test(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double f = cdf(xs[i]);
    d = std::max(d, std::abs(f - (i + 1) / n));
    d = std::max(d, std::abs(f - i / n));
  }
  double ne = std::sqrt(n);
  return kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d);
}

// Two-sample KS test; returns the p-value.
inline double ks2_test(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                             static_cast<double>(j) / b.size()));
  }
  double ne = std::sqrt(static_cast<double>(a.size()) * b.size() /
                        (a.size() + b.size()));
  return kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d);
}

// Chi-squared goodness of fit from observed counts and expected
// probabilities; bins with expected count below min_expected are pooled.
inline double chisq_gof_pvalue(const std::vector<long>& observed,
                               const std::vector<double>& expected_prob,
                               long n_total, double min_expected = 5.0) {
  double stat = 0.0;
  int bins = 0;
  double pool_obs = 0.0, pool_exp = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    double e = expected_prob[i] * n_total;
    if (e < min_expected) {
      pool_obs += observed[i];
      pool_exp += e;
      continue;
    }
    stat += (observed[i] - e) * (observed[i] - e) / e;
    ++bins;
  }
  if (pool_exp >= min_expected) {
    stat += (pool_obs - pool_exp) * (pool_obs - pool_exp) / pool_exp;
    ++bins;
  }
  if (bins < 2) return 1.0;
  return cncdir::chisq_sf(bins - 1, stat);
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& xs) {
  double s = 0.0, q = 0.0;
  for (double x : xs) s += x;
  double m = s / xs.size();
  for (double x : xs) q += (x - m) * (x - m);
  return {m, std::sqrt(q / (xs.size() - 1.0) / xs.size())};
}

}  // namespace testsupport
