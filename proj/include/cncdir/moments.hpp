#pragma once

#include <cmath>
#include <utility>

#include "cncdir/common.hpp"
#include "cncdir/mixture_weight.hpp"
#include "cncdir/params.hpp"
#include "cncdir/specfun.hpp"

namespace cncdir {

struct MomentOrder {
  long r1 = 0;
  long r2 = 0;

  MomentOrder(long a, long b) : r1(a), r2(b) {
    if (r1 < 0 || r2 < 0) throw DomainError("MomentOrder: orders must be >= 0");
  }
  long total() const { return r1 + r2; }
};

namespace detail {

inline long double binom(long n, long k) {
  if (k < 0 || k > n) return 0.0L;
  long double b = 1.0L;
  for (long i = 0; i < k; ++i) b = b * (n - i) / (i + 1);
  return b;
}

inline void check_bivariate(const CNcDirParams& p, const char* what) {
  if (p.dim() != 2)
    throw DomainError(std::string(what) +
                      ": needs D = 2 (take a bivariate marginal first)");
}

}  // namespace detail

// Closed-form mixed raw moment of the bivariate CNcDir: a doubly finite sum
// of binomial-weighted quarter-lambda powers against a ratio of 0F1 values.
// All factors accumulate in log space (every term is positive).
inline double cncdir_mixed_moment(const CNcDirParams& p, const MomentOrder& r,
                                  const SeriesControl& ctl = {}) {
  detail::check_bivariate(p, "cncdir_mixed_moment");
  if (r.total() == 0) return 1.0;
  const double aplus = p.alpha_plus();
  const double lplus = p.lambda_plus();
  const double log_pref = log_pochhammer(p.alpha[0], r.r1) +
                          log_pochhammer(p.alpha[1], r.r2) -
                          log_pochhammer(aplus, r.total());
  const double log_norm = log_f01(aplus, lplus / 4.0, ctl);
  detail::LogSumAcc acc;
  const long j1max = p.lambda[0] == 0.0 ? 0 : r.r1;
  const long j2max = p.lambda[1] == 0.0 ? 0 : r.r2;
  for (long j1 = 0; j1 <= j1max; ++j1) {
    for (long j2 = 0; j2 <= j2max; ++j2) {
      double lt = log_binomial(r.r1, j1) + log_binomial(r.r2, j2) -
                  log_pochhammer(p.alpha[0], j1) - log_pochhammer(p.alpha[1], j2) -
                  log_pochhammer(aplus + r.total(), j1 + j2) +
                  log_f01(aplus + r.total() + j1 + j2, lplus / 4.0, ctl) - log_norm;
      if (j1 > 0) lt += j1 * std::log(p.lambda[0] / 4.0);
      if (j2 > 0) lt += j2 * std::log(p.lambda[1] / 4.0);
      acc.add(lt);
    }
  }
  return std::exp(log_pref + acc.log_sum());
}

struct MomentOracleResult {
  double mw_series = 0.0;   // mixture-weighted Dirichlet-moment series
  double f12_series = 0.0;  // doubly infinite 1F2 form
  double tail_bound = 0.0;  // mixing mass beyond the truncation
};

// Independent oracles for the mixed raw moment. The first sums the
// mixture-weight law against Dirichlet moments over j+ <= truncation; the
// second evaluates the doubly infinite sum of 1F2 values. Both are
// verification routes, never production paths.
inline MomentOracleResult cncdir_moment_series_oracle(const CNcDirParams& p,
                                                      const MomentOrder& r,
                                                      long truncation = 150,
                                                      const SeriesControl& ctl = {}) {
  detail::check_bivariate(p, "cncdir_moment_series_oracle");
  if (truncation < 1) throw DomainError("cncdir_moment_series_oracle: truncation >= 1");
  MwParams mw(p.alpha_plus(), p.lambda);
  MomentOracleResult out;

  // Neglected mixing mass at the requested truncation, and the box size the
  // terms actually need (the component-sum masses decay super-factorially).
  double cdf = 0.0;
  long effective = truncation;
  bool pinned = false;
  for (long s = 0; s <= truncation; ++s) {
    cdf += std::exp(mw_sum_logpmf(mw, s, ctl));
    if (!pinned && cdf > 1.0 - 1e-16) {
      effective = s;
      pinned = true;
    }
  }
  out.tail_bound = std::max(0.0, 1.0 - cdf);

  // Eq-form A: direct mixture of Dirichlet moments over j+ <= truncation.
  double sum = 0.0;
  for (long j1 = 0; j1 <= effective; ++j1) {
    if (p.lambda[0] == 0.0 && j1 > 0) break;
    for (long j2 = 0; j1 + j2 <= effective; ++j2) {
      if (p.lambda[1] == 0.0 && j2 > 0) break;
      for (long j3 = 0; j1 + j2 + j3 <= effective; ++j3) {
        if (p.lambda[2] == 0.0 && j3 > 0) break;
        double lw = mw_logpmf(mw, CountVector({j1, j2, j3}), ctl);
        double mom = std::exp(log_pochhammer(p.alpha[0] + j1, r.r1) +
                              log_pochhammer(p.alpha[1] + j2, r.r2) -
                              log_pochhammer(p.alpha_plus() + j1 + j2 + j3, r.total()));
        sum += std::exp(lw) * mom;
      }
    }
  }
  out.mw_series = sum;

  // Eq-form B: 1F2-based doubly infinite sum.
  const double aplus = p.alpha_plus();
  const double lplus = p.lambda_plus();
  const double norm = std::exp(log_f01(aplus, lplus / 4.0, ctl));
  const double pref = std::exp(log_pochhammer(p.alpha[0], r.r1) +
                               log_pochhammer(p.alpha[1], r.r2) -
                               log_pochhammer(aplus, r.total()));
  double total = 0.0;
  for (long j2 = 0; j2 <= truncation; ++j2) {
    if (p.lambda[1] == 0.0 && j2 > 0) break;
    double row = 0.0;
    for (long j3 = 0; j3 <= truncation; ++j3) {
      if (p.lambda[2] == 0.0 && j3 > 0) break;
      double lt = log_pochhammer(p.alpha[1] + r.r2, j2) -
                  log_pochhammer(p.alpha[1], j2) -
                  log_pochhammer(aplus + r.total(), j2 + j3) - log_factorial(j2) -
                  log_factorial(j3);
      if (j2 > 0) lt += j2 * std::log(p.lambda[1] / 4.0);
      if (j3 > 0) lt += j3 * std::log(p.lambda[2] / 4.0);
      double f12 = detail::escalate(
          genhypergeo({p.alpha[0] + r.r1},
                      {p.alpha[0], aplus + r.total() + j2 + j3}, p.lambda[0] / 4.0,
                      ctl),
          "1F2 (moment oracle)");
      double term = std::exp(lt) * f12;
      row += term;
      if (term < 1e-18 * (total + row) && j3 > p.lambda[2] / 4.0) break;
    }
    total += row;
    if (row < 1e-18 * total && j2 > p.lambda[1] / 4.0) break;
  }
  out.f12_series = pref * total / norm;
  return out;
}

struct Moment11Result {
  double three_term = 0.0;  // direct (1,1) specialization
  double reduced = 0.0;     // two-term form via the 0F1 recurrence
};

// Mixed raw moment of order (1,1), in both published forms.
inline Moment11Result cncdir_moment_11(const CNcDirParams& p,
                                       const SeriesControl& ctl = {}) {
  detail::check_bivariate(p, "cncdir_moment_11");
  const double a1 = p.alpha[0], a2 = p.alpha[1];
  const double l1 = p.lambda[0], l2 = p.lambda[1];
  const double aplus = p.alpha_plus();
  const double lplus = p.lambda_plus();
  const double log_norm = log_f01(aplus, lplus / 4.0, ctl);
  auto ratio = [&](int k) {
    return std::exp(log_f01(aplus + k, lplus / 4.0, ctl) - log_norm);
  };
  const double r2 = ratio(2), r3 = ratio(3), r4 = ratio(4);
  const double p2 = aplus * (aplus + 1.0);
  const double p3 = p2 * (aplus + 2.0);
  const double p4 = p3 * (aplus + 3.0);

  Moment11Result out;
  out.three_term = a1 * a2 / p2 * r2 + (a1 * l2 / 4.0 + a2 * l1 / 4.0) / p3 * r3 +
                   (l1 / 4.0) * (l2 / 4.0) / p4 * r4;
  if (lplus == 0.0) {
    out.reduced = a1 * a2 / p2;
    return out;
  }
  const double cross = l1 * l2 / (4.0 * lplus);
  out.reduced = (a1 * a2 + cross) / p2 * r2 +
                (a1 * l2 / 4.0 + a2 * l1 / 4.0 - cross * (aplus + 2.0)) / p3 * r3;
  return out;
}

// Both sides of Ljunggren's binomial identity; a helper behind the moment
// derivation, exercised directly by tests.
inline std::pair<double, double> ljunggren_identity_check(long alpha, long n,
                                                          double x, double y) {
  if (alpha < 0 || n < 0) throw DomainError("ljunggren_identity_check: negative order");
  long double lhs = 0.0L, rhs = 0.0L;
  const long double xl = x, yl = y;
  for (long k = 0; k <= n; ++k) {
    lhs += detail::binom(alpha + k, k) * detail::binom(n, k) *
           powl(xl - yl, n - k) * powl(yl, k);
    rhs += detail::binom(alpha, k) * detail::binom(n, k) * powl(xl, n - k) *
           powl(yl, k);
  }
  return {static_cast<double>(lhs), static_cast<double>(rhs)};
}

}  // namespace cncdir
