#pragma once

#include <array>
#include <cmath>
#include <cstdlib>
#include <span>
#include <utility>
#include <vector>

#include "cncdir/common.hpp"

namespace cncdir {

// ---------------------------------------------------------------------------
// Ascending factorials
// ---------------------------------------------------------------------------

inline double log_pochhammer(double a, long l) {
  if (!(a > 0)) throw DomainError("log_pochhammer: a must be > 0");
  if (l < 0) throw DomainError("log_pochhammer: l must be >= 0");
  if (l == 0) return 0.0;
  return std::lgamma(a + static_cast<double>(l)) - std::lgamma(a);
}

// (a)_l by direct product for small l, log-gamma differences otherwise.
inline double pochhammer(double a, long l) {
  if (!(a > 0)) throw DomainError("pochhammer: a must be > 0");
  if (l < 0) throw DomainError("pochhammer: l must be >= 0");
  if (l > 150) return std::exp(log_pochhammer(a, l));
  double p = 1.0;
  for (long k = 0; k < l; ++k) p *= a + static_cast<double>(k);
  return p;
}

// (a)_{l1+l2}; the split identity (a)_{l1} (a+l1)_{l2} is exercised in tests.
inline double poch_sum_split(double a, long l1, long l2) {
  return pochhammer(a, l1 + l2);
}

inline double log_factorial(long n) {
  return std::lgamma(static_cast<double>(n) + 1.0);
}

inline double log_binomial(long n, long k) {
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

// ---------------------------------------------------------------------------
// Generalized hypergeometric series pFq
// ---------------------------------------------------------------------------

namespace detail {

inline bool is_nonpositive_integer(double b) {
  return b <= 1e-12 && std::abs(b - std::round(b)) < 1e-12;
}

// Direct summation of Eq-style pFq partial sums with multiplicative term
// updates. Stops when two consecutive terms change the partial sum by less
// than tol relatively (tol == 0: until the sum stops changing).
inline SeriesResult pfq_series(std::span<const double> upper,
                               std::span<const double> lower, double x,
                               const SeriesControl& ctl) {
  double sum = 1.0;
  double term = 1.0;
  int small_streak = 0;
  for (int n = 0; n < ctl.maxiter; ++n) {
    double ratio = 1.0;
    for (double a : upper) ratio *= a + n;
    for (double b : lower) ratio /= b + n;
    term *= ratio * x / (n + 1);
    sum += term;
    bool small = ctl.tol > 0 ? std::abs(term) <= ctl.tol * std::abs(sum)
                             : sum + term == sum;
    small_streak = small ? small_streak + 1 : 0;
    if (small_streak >= 2) return {sum, n + 1, true};
  }
  return {sum, ctl.maxiter, false};
}

}  // namespace detail

// pFq(upper; lower; x). Alternating 1F1 sums with x < -30 are routed through
// Kummer's transformation to avoid cancellation.
inline SeriesResult genhypergeo(std::span<const double> upper,
                                std::span<const double> lower, double x,
                                const SeriesControl& ctl = {}) {
  ctl.validate();
  for (double b : lower)
    if (detail::is_nonpositive_integer(b))
      throw DomainError("genhypergeo: lower parameter is a nonpositive integer");
  if (upper.size() == 1 && lower.size() == 1 && x < -30.0 &&
      !detail::is_nonpositive_integer(lower[0] - upper[0])) {
    const double transformed[1] = {lower[0] - upper[0]};
    SeriesResult r = detail::pfq_series(transformed, lower, -x, ctl);
    r.value *= std::exp(x);
    return r;
  }
  return detail::pfq_series(upper, lower, x, ctl);
}

inline SeriesResult genhypergeo(std::initializer_list<double> upper,
                                std::initializer_list<double> lower, double x,
                                const SeriesControl& ctl = {}) {
  return genhypergeo(std::span<const double>(upper.begin(), upper.size()),
                     std::span<const double>(lower.begin(), lower.size()), x,
                     ctl);
}

namespace detail {

inline double escalate(const SeriesResult& r, const char* what) {
  if (!r.converged) throw NonConvergence(std::string(what) + " did not converge");
  return r.value;
}

}  // namespace detail

inline double f01(double b, double x, const SeriesControl& ctl = {}) {
  return detail::escalate(genhypergeo({}, {&b, 1}, x, ctl), "0F1");
}

inline double f11(double a, double b, double x, const SeriesControl& ctl = {}) {
  return detail::escalate(genhypergeo({&a, 1}, {&b, 1}, x, ctl), "1F1");
}

// ---------------------------------------------------------------------------
// Log-space series (the path density code always takes)
// ---------------------------------------------------------------------------

namespace detail {

// Positive-term series with on-the-fly rescaling; returns the log of the sum.
// ratio(n) must give term_{n+1}/term_n for n = 0,1,...
template <class Ratio>
double log_positive_series(Ratio ratio, const SeriesControl& ctl,
                           const char* what, int* terms_out = nullptr) {
  double sum = 1.0;
  double term = 1.0;
  double log_scale = 0.0;
  int small_streak = 0;
  for (int n = 0; n < ctl.maxiter; ++n) {
    term *= ratio(n);
    sum += term;
    if (sum > 1e280) {
      sum *= 1e-280;
      term *= 1e-280;
      log_scale += 280.0 * std::log(10.0);
    }
    bool small =
        ctl.tol > 0 ? term <= ctl.tol * sum : sum + term == sum;
    small_streak = small ? small_streak + 1 : 0;
    if (small_streak >= 2) {
      if (terms_out) *terms_out = n + 1;
      return std::log(sum) + log_scale;
    }
  }
  throw NonConvergence(std::string(what) + " did not converge");
}

}  // namespace detail

// log 0F1(b; x) for x >= 0, overflow-safe for the large series arguments the
// fitted non-centralities produce.
inline double log_f01(double b, double x, const SeriesControl& ctl = {}) {
  ctl.validate();
  if (!(b > 0)) throw DomainError("log_f01: b must be > 0");
  if (x < 0) throw DomainError("log_f01: x must be >= 0");
  if (x == 0) return 0.0;
  return detail::log_positive_series(
      [b, x](int n) { return x / ((b + n) * (n + 1)); }, ctl, "0F1");
}

// log 1F1(a; b; x) with a, b > 0. Negative x is rewritten through Kummer's
// transformation so the summed series stays positive-term.
inline double log_f11(double a, double b, double x,
                      const SeriesControl& ctl = {}) {
  ctl.validate();
  if (!(a > 0) || !(b > 0)) throw DomainError("log_f11: a, b must be > 0");
  if (x == 0) return 0.0;
  if (x < 0) {
    if (!(b - a > 0))
      throw DomainError("log_f11: Kummer transform needs b - a > 0");
    return x + log_f11(b - a, b, -x, ctl);
  }
  return detail::log_positive_series(
      [a, b, x](int n) { return (a + n) * x / ((b + n) * (n + 1)); }, ctl,
      "1F1");
}

// ---------------------------------------------------------------------------
// Identity helpers
// ---------------------------------------------------------------------------

// Both sides of Kummer's First Theorem, each summed independently.
inline std::pair<double, double> kummer_transform_check(
    double a, double b, double x, const SeriesControl& ctl = {}) {
  if (!(b > 0)) throw DomainError("kummer_transform_check: b must be > 0");
  double lhs = detail::escalate(detail::pfq_series({&a, 1}, {&b, 1}, x, ctl),
                                "1F1 (lhs)");
  const double ba = b - a;
  double rhs = std::exp(x) * detail::escalate(detail::pfq_series(
                                 {&ba, 1}, {&b, 1}, -x, ctl),
                                 "1F1 (rhs)");
  return {lhs, rhs};
}

// (0F1(b;x), 0F1(b+1;x), 0F1(b+2;x)); the consecutive-denominator recurrence
// 0F1(b;x) = 0F1(b+1;x) + x/(b(b+1)) 0F1(b+2;x) is asserted by the tests.
inline std::array<double, 3> f01_recurrence_check(double b, double x,
                                                  const SeriesControl& ctl = {}) {
  if (!(b > 0)) throw DomainError("f01_recurrence_check: b must be > 0");
  return {f01(b, x, ctl), f01(b + 1, x, ctl), f01(b + 2, x, ctl)};
}

// ---------------------------------------------------------------------------
// Humbert Psi2 in three variables
// ---------------------------------------------------------------------------

namespace detail {

// Streaming log-sum-exp accumulator for positive-term series given in logs.
struct LogSumAcc {
  double max_log = kNegInf;
  double mantissa = 0.0;

  // Returns the relative contribution of the added term.
  double add(double log_term) {
    if (log_term == kNegInf) return 0.0;
    if (log_term <= max_log) {
      double t = std::exp(log_term - max_log);
      mantissa += t;
      return t / mantissa;
    }
    mantissa = mantissa * std::exp(max_log - log_term) + 1.0;
    max_log = log_term;
    return 1.0 / mantissa;
  }

  double log_sum() const { return max_log + std::log(mantissa); }
};

// log Psi2[a; b2, b3; x2, x3]: single infinite sum of weighted 1F1 values,
// coefficients updated multiplicatively in log space.
inline double log_psi2_2(double a, double b2, double b3, double x2, double x3,
                         const SeriesControl& ctl) {
  double log_f = log_f11(a, b3, x3, ctl);
  if (x2 == 0.0) return log_f;
  LogSumAcc acc;
  acc.add(log_f);
  double log_coef = 0.0;
  int small_streak = 0;
  for (int m = 1; m <= ctl.maxiter; ++m) {
    log_coef += std::log((a + m - 1) / (b2 + m - 1) * x2 / m);
    double rel = acc.add(log_coef + log_f11(a + m, b3, x3, ctl));
    bool small = ctl.tol > 0 ? rel <= ctl.tol : rel == 0.0;
    small_streak = small ? small_streak + 1 : 0;
    if (small_streak >= 2) return acc.log_sum();
  }
  throw NonConvergence("psi2_3: middle series did not converge");
}

struct Psi23Log {
  double log_value = 0.0;
  int outer_terms = 0;
};

inline Psi23Log log_psi2_3_impl(double a, double b1, double b2, double b3,
                                double x1, double x2, double x3,
                                const SeriesControl& ctl,
                                std::vector<double>* trace) {
  ctl.validate();
  if (!(a > 0) || !(b1 > 0) || !(b2 > 0) || !(b3 > 0))
    throw DomainError("psi2_3: parameters must be > 0");
  if (x1 < 0 || x2 < 0 || x3 < 0)
    throw DomainError("psi2_3: arguments must be >= 0");
  double first = log_psi2_2(a, b2, b3, x2, x3, ctl);
  if (x1 == 0.0) return {first, 0};
  LogSumAcc acc;
  acc.add(first);
  if (trace) trace->push_back(std::exp(first));
  double log_coef = 0.0;
  int small_streak = 0;
  for (int n = 1; n <= ctl.maxiter; ++n) {
    log_coef += std::log((a + n - 1) / (b1 + n - 1) * x1 / n);
    double log_term = log_coef + log_psi2_2(a + n, b2, b3, x2, x3, ctl);
    double rel = acc.add(log_term);
    if (trace) trace->push_back(std::exp(log_term));
    bool small = ctl.tol > 0 ? rel <= ctl.tol : rel == 0.0;
    small_streak = small ? small_streak + 1 : 0;
    if (small_streak >= 2) return {acc.log_sum(), n};
  }
  throw NonConvergence("psi2_3: outer series did not converge");
}

}  // namespace detail

// log Psi2^(3)[a; b1,b2,b3; x1,x2,x3], the production path of the NcDir
// density. Nested scheme: outer sum over the first argument, middle sum over
// the second, innermost 1F1 in the third.
inline double log_psi2_3(double a, double b1, double b2, double b3, double x1,
                         double x2, double x3, const SeriesControl& ctl = {}) {
  return detail::log_psi2_3_impl(a, b1, b2, b3, x1, x2, x3, ctl, nullptr)
      .log_value;
}

// Linear-space Psi2^(3) with optional outer-term trace for debugging.
inline SeriesResult psi2_3(double a, double b1, double b2, double b3,
                           double x1, double x2, double x3,
                           const SeriesControl& ctl = {}, bool debug = false,
                           std::vector<double>* trace = nullptr) {
  std::vector<double> local;
  std::vector<double>* sink = debug ? (trace ? trace : &local) : nullptr;
  auto r = detail::log_psi2_3_impl(a, b1, b2, b3, x1, x2, x3, ctl, sink);
  return {std::exp(r.log_value), r.outer_terms, true};
}

// ---------------------------------------------------------------------------
// Regularized incomplete gamma (chi-squared tail machinery)
// ---------------------------------------------------------------------------

namespace detail {

inline double gamma_series_lower(double s, double x) {
  double ap = s;
  double del = 1.0 / s;
  double sum = del;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16)
      return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
  }
  throw NonConvergence("regularized gamma: series did not converge");
}

inline double gamma_cf_upper(double s, double x) {
  const double fpmin = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16)
      return std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
  }
  throw NonConvergence("regularized gamma: continued fraction did not converge");
}

}  // namespace detail

// Q(s, x) = Gamma(s, x) / Gamma(s): series branch below s + 1, Lentz-style
// continued fraction above.
inline double regularized_gamma_upper(double s, double x) {
  if (!(s > 0)) throw DomainError("regularized_gamma_upper: s must be > 0");
  if (x < 0) throw DomainError("regularized_gamma_upper: x must be >= 0");
  if (x == 0) return 1.0;
  if (x < s + 1.0) return 1.0 - detail::gamma_series_lower(s, x);
  return detail::gamma_cf_upper(s, x);
}

inline double regularized_gamma_lower(double s, double x) {
  if (!(s > 0)) throw DomainError("regularized_gamma_lower: s must be > 0");
  if (x < 0) throw DomainError("regularized_gamma_lower: x must be >= 0");
  if (x == 0) return 0.0;
  if (x < s + 1.0) return detail::gamma_series_lower(s, x);
  return 1.0 - detail::gamma_cf_upper(s, x);
}

// Survival function of the chi-squared distribution with df degrees of
// freedom; backs the Wilks p-values.
inline double chisq_sf(double df, double x) {
  return regularized_gamma_upper(df / 2.0, x / 2.0);
}

inline double chisq_cdf(double df, double x) {
  return regularized_gamma_lower(df / 2.0, x / 2.0);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace cncdir
