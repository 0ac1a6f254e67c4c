#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "cncdir/common.hpp"
#include "cncdir/mixture_weight.hpp"
#include "cncdir/params.hpp"
#include "cncdir/simplex.hpp"
#include "cncdir/specfun.hpp"

namespace cncdir {

namespace detail {

// All D+1 barycentric coordinates of a simplex point.
inline std::vector<double> full_coords(const SimplexPoint& x) {
  std::vector<double> z = x.coords();
  z.push_back(x.remainder());
  return z;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dirichlet
// ---------------------------------------------------------------------------

inline double dir_logpdf(const DirParams& p, const SimplexPoint& x) {
  if (x.dim() != p.dim())
    throw DomainError("dir_logpdf: dimension mismatch");
  double lp = std::lgamma(p.alpha_plus());
  const std::vector<double> z = detail::full_coords(x);
  for (std::size_t i = 0; i < z.size(); ++i)
    lp += (p.alpha[i] - 1.0) * std::log(z[i]) - std::lgamma(p.alpha[i]);
  return lp;
}

// Mixed raw moment of order (r1, r2) of the bivariate Dirichlet.
inline double dir_mixed_moment(const DirParams& p, long r1, long r2) {
  if (p.dim() != 2) throw DomainError("dir_mixed_moment: needs D = 2");
  if (r1 < 0 || r2 < 0) throw DomainError("dir_mixed_moment: negative order");
  return pochhammer(p.alpha[0], r1) * pochhammer(p.alpha[1], r2) /
         pochhammer(p.alpha_plus(), r1 + r2);
}

// ---------------------------------------------------------------------------
// Bivariate Kummer-Beta
// ---------------------------------------------------------------------------

inline double kb2_logpdf(const Kb2Params& p, const SimplexPoint& x,
                         const SeriesControl& ctl = {}) {
  if (x.dim() != 2) throw DomainError("kb2_logpdf: needs D = 2");
  DirParams dir(p.alpha);
  return dir_logpdf(dir, x) - (x[0] + x[1]) * p.delta -
         log_f11(p.alpha[0] + p.alpha[1], p.alpha_plus(), -p.delta, ctl);
}

// Mixture-of-Dirichlets form, summed directly; cross-check oracle only.
inline double kb2_logpdf_mixture(const Kb2Params& p, const SimplexPoint& x,
                                 int truncation = 200,
                                 const SeriesControl& ctl = {}) {
  if (x.dim() != 2) throw DomainError("kb2_logpdf_mixture: needs D = 2");
  const double aplus = p.alpha_plus();
  double norm = detail::escalate(
      genhypergeo({p.alpha[2]}, {aplus}, p.delta, ctl), "1F1 (KB2 weights)");
  double coef = 1.0;
  double sum = 0.0;
  for (int j = 0; j <= truncation; ++j) {
    DirParams shifted({p.alpha[0], p.alpha[1], p.alpha[2] + j});
    sum += coef * std::exp(dir_logpdf(shifted, x));
    coef *= (p.alpha[2] + j) / (aplus + j) * p.delta / (j + 1);
  }
  return std::log(sum / norm);
}

// ---------------------------------------------------------------------------
// Non-central chi-squared
// ---------------------------------------------------------------------------

// Poisson-weighted chi-squared series, accumulated by log-sum-exp.
inline double ncchisq_logpdf(const NcChisqParams& p, double y,
                             const SeriesControl& ctl = {}) {
  ctl.validate();
  if (!(y > 0)) throw DomainError("ncchisq_logpdf: y must be > 0");
  if (!(p.g > 0)) throw DomainError("ncchisq_logpdf: needs g > 0");
  const double h = p.g / 2.0;
  double log_term = -p.lambda / 2.0 + (h - 1.0) * std::log(y) - y / 2.0 -
                    std::lgamma(h) - h * std::log(2.0);
  if (p.lambda == 0.0) return log_term;
  detail::LogSumAcc acc;
  acc.add(log_term);
  int small_streak = 0;
  for (int i = 0; i < ctl.maxiter; ++i) {
    log_term += std::log(p.lambda / 2.0) - std::log(i + 1.0) +
                std::log(y / 2.0) - std::log(h + i);
    double rel = acc.add(log_term);
    bool small = ctl.tol > 0 ? rel <= ctl.tol : rel == 0.0;
    small_streak = small ? small_streak + 1 : 0;
    if (small_streak >= 2) return acc.log_sum();
  }
  throw NonConvergence("ncchisq_logpdf: series did not converge");
}

// ---------------------------------------------------------------------------
// Non-central Dirichlet
// ---------------------------------------------------------------------------

// Perturbation form (D = 2): Dirichlet density times the three-variable
// Humbert factor.
inline double ncdir_logpdf(const NcDirParams& p, const SimplexPoint& x,
                           const SeriesControl& ctl = {}) {
  if (p.dim() != 2 || x.dim() != 2)
    throw DomainError("ncdir_logpdf: needs D = 2 (use the mixture form otherwise)");
  DirParams dir(p.alpha);
  double lp = dir_logpdf(dir, x) - p.lambda_plus() / 2.0;
  return lp + log_psi2_3(p.alpha_plus(), p.alpha[0], p.alpha[1], p.alpha[2],
                         p.lambda[0] / 2.0 * x[0], p.lambda[1] / 2.0 * x[1],
                         p.lambda[2] / 2.0 * x.remainder(), ctl);
}

struct MixtureDensityResult {
  double logpdf = kNegInf;
  // Mixing-law mass outside the truncation box (the neglected weight).
  double tail_mass = 0.0;
};

namespace detail {

// Shared driver for the mixture-form oracles: sums weight(j) * Dir(x; a + j)
// over the box |j_i| <= bound via per-index log-weight tables. The innermost
// loop breaks once terms fall 45 e-folds below the running peak.
template <class IndexWeight>
MixtureDensityResult mixture_logpdf(const std::vector<double>& alpha,
                                    const std::vector<double>& lambda,
                                    const SimplexPoint& x, int bound,
                                    IndexWeight index_weight, double coupling_sign,
                                    double log_const) {
  const std::size_t k = alpha.size();
  const std::vector<double> z = full_coords(x);
  double aplus = 0.0;
  for (double a : alpha) aplus += a;

  std::vector<std::vector<double>> w(k);
  for (std::size_t i = 0; i < k; ++i) {
    int bi = lambda[i] == 0.0 ? 0 : bound;
    w[i].resize(bi + 1);
    for (int j = 0; j <= bi; ++j)
      w[i][j] = index_weight(i, j) + (alpha[i] + j - 1.0) * std::log(z[i]) -
                std::lgamma(alpha[i] + j);
  }
  std::size_t smax = 0;
  for (auto& wi : w) smax += wi.size() - 1;
  std::vector<double> coupling(smax + 1);
  for (std::size_t s = 0; s <= smax; ++s)
    coupling[s] = std::lgamma(aplus + s) +
                  coupling_sign * log_pochhammer(aplus, static_cast<long>(s));

  detail::LogSumAcc acc;
  std::vector<int> idx(k, 0);
  // Nested iteration over the box, innermost index recursed explicitly.
  auto recurse = [&](auto&& self, std::size_t level, double partial,
                     long jsum) -> void {
    if (level + 1 == k) {
      for (int j = 0; j < static_cast<int>(w[level].size()); ++j) {
        double lt = partial + w[level][j] + coupling[jsum + j];
        acc.add(lt);
        if (lt < acc.max_log - 45.0 && j > lambda[level] / 2.0) break;
      }
      return;
    }
    for (int j = 0; j < static_cast<int>(w[level].size()); ++j)
      self(self, level + 1, partial + w[level][j], jsum + j);
  };
  recurse(recurse, 0, log_const, 0);
  return {acc.log_sum(), 0.0};
}

}  // namespace detail

// Mixture form of the NcDir density (any D): Multi-Poisson weighted Dirichlet
// series over a truncation box, with the neglected Poisson mass reported.
// Exists as an oracle, not a production path.
inline MixtureDensityResult ncdir_logpdf_mixture(const NcDirParams& p,
                                                 const SimplexPoint& x,
                                                 int bound = 80) {
  if (x.dim() != p.dim())
    throw DomainError("ncdir_logpdf_mixture: dimension mismatch");
  if (bound < 1) throw DomainError("ncdir_logpdf_mixture: bound must be >= 1");
  auto poisson_logweight = [&](std::size_t i, int j) {
    const double mean = p.lambda[i] / 2.0;
    if (mean == 0.0) return j == 0 ? 0.0 : kNegInf;
    return -mean + j * std::log(mean) - log_factorial(j);
  };
  auto r = detail::mixture_logpdf(p.alpha, p.lambda, x, bound,
                                  poisson_logweight, 0.0, 0.0);
  for (std::size_t i = 0; i <= p.dim(); ++i)
    if (p.lambda[i] > 0.0)
      r.tail_mass += regularized_gamma_lower(bound + 1.0, p.lambda[i] / 2.0);
  return r;
}

// ---------------------------------------------------------------------------
// Conditional Non-central Dirichlet
// ---------------------------------------------------------------------------

// Perturbation form (any D): Dirichlet density perturbed by a product of D+1
// 0F1 factors over a single 0F1 normalizer. D = 1 gives the conditional
// doubly non-central Beta.
inline double cncdir_logpdf(const CNcDirParams& p, const SimplexPoint& x,
                            const SeriesControl& ctl = {}) {
  if (x.dim() != p.dim())
    throw DomainError("cncdir_logpdf: dimension mismatch");
  DirParams dir(p.alpha);
  double lp = dir_logpdf(dir, x);
  const std::vector<double> z = detail::full_coords(x);
  for (std::size_t i = 0; i < z.size(); ++i)
    lp += log_f01(p.alpha[i], p.lambda[i] / 4.0 * z[i], ctl);
  return lp - log_f01(p.alpha_plus(), p.lambda_plus() / 4.0, ctl);
}

// Mixture form (any D): Mixture-Weight weighted Dirichlet series over a
// truncation box; neglected mass reported through the component-sum law.
inline MixtureDensityResult cncdir_logpdf_mixture(const CNcDirParams& p,
                                                  const SimplexPoint& x,
                                                  int bound = 80,
                                                  const SeriesControl& ctl = {}) {
  if (x.dim() != p.dim())
    throw DomainError("cncdir_logpdf_mixture: dimension mismatch");
  if (bound < 1) throw DomainError("cncdir_logpdf_mixture: bound must be >= 1");
  const double lf01 = log_f01(p.alpha_plus(), p.lambda_plus() / 4.0, ctl);
  auto mw_logweight = [&](std::size_t i, int j) {
    if (p.lambda[i] == 0.0) return j == 0 ? 0.0 : kNegInf;
    // The 1/(alpha+)_{j+} coupling and the 0F1 normalizer enter elsewhere.
    return j * std::log(p.lambda[i] / 4.0) - log_factorial(j);
  };
  auto r = detail::mixture_logpdf(p.alpha, p.lambda, x, bound, mw_logweight,
                                  -1.0, -lf01);
  if (p.lambda_plus() > 0.0) {
    MwParams mw(p.alpha_plus(), p.lambda);
    double cdf = 0.0;
    for (long s = 0; s <= bound; ++s) cdf += std::exp(mw_sum_logpmf(mw, s, ctl));
    r.tail_mass = std::max(0.0, 1.0 - cdf);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Vertex limits (D = 2)
// ---------------------------------------------------------------------------

namespace detail {

constexpr double kCaseTol = 1e-9;

template <class FiniteExpr>
std::array<VertexLimit, 3> vertex_limits_2d(const std::vector<double>& alpha,
                                            FiniteExpr finite_expr) {
  std::array<VertexLimit, 3> out;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    const double others = alpha[j] + alpha[k];
    if (others < 2.0 - kCaseTol) {
      out[i] = VertexLimit::infinite();
    } else if (others > 2.0 + kCaseTol) {
      out[i] = VertexLimit::zero();
    } else if (std::abs(alpha[j] - 1.0) <= kCaseTol &&
               std::abs(alpha[k] - 1.0) <= kCaseTol) {
      out[i] = VertexLimit::finite(finite_expr(i, j, k));
    } else {
      out[i] = VertexLimit::non_existent();
    }
  }
  return out;
}

}  // namespace detail

// Limits of the bivariate NcDir density at the three simplex vertices.
inline std::array<VertexLimit, 3> ncdir_vertex_limits(const NcDirParams& p) {
  if (p.dim() != 2) throw DomainError("ncdir_vertex_limits: needs D = 2");
  return detail::vertex_limits_2d(p.alpha, [&](int i, int j, int k) {
    const double half = p.lambda[i] / 2.0;
    return std::exp(-(p.lambda[j] + p.lambda[k]) / 2.0) *
           (half * half + (p.alpha[i] + 1.0) * (p.alpha[i] + p.lambda[i]));
  });
}

// Limits of the bivariate CNcDir density at the three simplex vertices.
inline std::array<VertexLimit, 3> cncdir_vertex_limits(
    const CNcDirParams& p, const SeriesControl& ctl = {}) {
  if (p.dim() != 2) throw DomainError("cncdir_vertex_limits: needs D = 2");
  return detail::vertex_limits_2d(p.alpha, [&](int i, int, int) {
    return p.alpha[i] * (p.alpha[i] + 1.0) * f01(p.alpha[i], p.lambda[i] / 4.0, ctl) /
           f01(p.alpha[i] + 2.0, p.lambda_plus() / 4.0, ctl);
  });
}

// ---------------------------------------------------------------------------
// Structural operations
// ---------------------------------------------------------------------------

// Aggregation: block-summed shapes and non-centralities over a partition of
// the D+1 component indices (0-based).
inline CNcDirParams cncdir_aggregate(const CNcDirParams& p,
                                     const std::vector<std::vector<int>>& partition) {
  const std::size_t k = p.alpha.size();
  if (partition.size() < 2 || partition.size() > k)
    throw DomainError("cncdir_aggregate: partition must have 2..D+1 blocks");
  std::vector<char> seen(k, 0);
  std::vector<double> a(partition.size(), 0.0), l(partition.size(), 0.0);
  for (std::size_t b = 0; b < partition.size(); ++b) {
    if (partition[b].empty()) throw DomainError("cncdir_aggregate: empty block");
    for (int idx : partition[b]) {
      if (idx < 0 || static_cast<std::size_t>(idx) >= k || seen[idx])
        throw DomainError("cncdir_aggregate: invalid or repeated index");
      seen[idx] = 1;
      a[b] += p.alpha[idx];
      l[b] += p.lambda[idx];
    }
  }
  for (char s : seen)
    if (!s) throw DomainError("cncdir_aggregate: partition does not cover all indices");
  return CNcDirParams(std::move(a), std::move(l));
}

// Univariate marginal of component i (a conditional doubly non-central Beta).
inline CNcDirParams cncdir_marginal(const CNcDirParams& p, int i) {
  if (i < 0 || static_cast<std::size_t>(i) >= p.dim())
    throw DomainError("cncdir_marginal: index out of range");
  std::vector<std::vector<int>> part(2);
  part[0] = {i};
  for (int idx = 0; idx < static_cast<int>(p.alpha.size()); ++idx)
    if (idx != i) part[1].push_back(idx);
  return cncdir_aggregate(p, part);
}

// Bivariate marginal of components (i, j).
inline CNcDirParams cncdir_bivariate_marginal(const CNcDirParams& p, int i, int j) {
  if (i == j) throw DomainError("cncdir_bivariate_marginal: indices must differ");
  if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= p.dim() ||
      static_cast<std::size_t>(j) >= p.dim())
    throw DomainError("cncdir_bivariate_marginal: index out of range");
  std::vector<std::vector<int>> part(3);
  part[0] = {i};
  part[1] = {j};
  for (int idx = 0; idx < static_cast<int>(p.alpha.size()); ++idx)
    if (idx != i && idx != j) part[2].push_back(idx);
  return cncdir_aggregate(p, part);
}

// Law of the sum of all D components.
inline CNcDirParams cncdir_component_sum(const CNcDirParams& p) {
  std::vector<std::vector<int>> part(2);
  for (int idx = 0; idx + 1 < static_cast<int>(p.alpha.size()); ++idx)
    part[0].push_back(idx);
  part[1] = {static_cast<int>(p.alpha.size()) - 1};
  return cncdir_aggregate(p, part);
}

// Closure under normalized conditioning: fixing the first k coordinates
// leaves the trailing shapes untouched and scales the trailing
// non-centralities by the unconsumed mass.
inline CNcDirParams cncdir_normalized_conditional(const CNcDirParams& p,
                                                  const std::vector<double>& fixed) {
  const std::size_t k = fixed.size();
  if (k < 1 || k > p.dim() - 1)
    throw DomainError("cncdir_normalized_conditional: need 1 <= k <= D-1");
  double sum = 0.0;
  for (double v : fixed) {
    if (!(v > 0.0 && v < 1.0))
      throw DomainError("cncdir_normalized_conditional: fixed coordinate outside (0,1)");
    sum += v;
  }
  if (!(sum < 1.0))
    throw DomainError("cncdir_normalized_conditional: fixed coordinates sum to >= 1");
  const double scale = 1.0 - sum;
  std::vector<double> a(p.alpha.begin() + k, p.alpha.end());
  std::vector<double> l(p.lambda.begin() + k, p.lambda.end());
  for (double& v : l) v *= scale;
  return CNcDirParams(std::move(a), std::move(l));
}

}  // namespace cncdir
