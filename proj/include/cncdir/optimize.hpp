#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "cncdir/common.hpp"

namespace cncdir {

struct NelderMeadOptions {
  double rel_tol = 1e-8;  // relative spread of simplex function values
  int max_iter = 5000;
  double init_step = 0.25;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = kInf;
  int evals = 0;
  bool converged = false;
};

// Derivative-free simplex descent (reflection / expansion / contraction /
// shrink) minimizing f.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x0,
                                    const NelderMeadOptions& opts = {}) {
  const std::size_t n = x0.size();
  NelderMeadResult res;
  if (n == 0) {
    res.x = x0;
    res.f = f(x0);
    res.evals = 1;
    res.converged = true;
    return res;
  }

  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i < n; ++i)
    pts[i + 1][i] += opts.init_step * (std::abs(x0[i]) > 1.0 ? std::abs(x0[i]) : 1.0);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(pts[i]);
  res.evals = static_cast<int>(n + 1);

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
  };

  for (int it = 0; it < opts.max_iter; ++it) {
    sort_simplex();
    const double fbest = fv[order[0]];
    const double fworst = fv[order[n]];
    if (std::isfinite(fbest) && std::isfinite(fworst)) {
      double spread = fworst - fbest;
      double scale = 0.5 * (std::abs(fbest) + std::abs(fworst)) + 1e-12;
      if (spread <= opts.rel_tol * scale) {
        res.converged = true;
        break;
      }
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[order[i]][d] / n;

    auto blend = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t d = 0; d < n; ++d)
        p[d] = centroid[d] + t * (pts[order[n]][d] - centroid[d]);
      return p;
    };

    std::vector<double> xr = blend(-1.0);
    double fr = f(xr);
    ++res.evals;
    if (fr < fv[order[0]]) {
      std::vector<double> xe = blend(-2.0);
      double fe = f(xe);
      ++res.evals;
      if (fe < fr) {
        pts[order[n]] = std::move(xe);
        fv[order[n]] = fe;
      } else {
        pts[order[n]] = std::move(xr);
        fv[order[n]] = fr;
      }
      continue;
    }
    if (fr < fv[order[n - 1]]) {
      pts[order[n]] = std::move(xr);
      fv[order[n]] = fr;
      continue;
    }
    bool outside = fr < fv[order[n]];
    std::vector<double> xc = blend(outside ? -0.5 : 0.5);
    double fc = f(xc);
    ++res.evals;
    if (fc < (outside ? fr : fv[order[n]])) {
      pts[order[n]] = std::move(xc);
      fv[order[n]] = fc;
      continue;
    }
    // shrink toward the best vertex
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t d = 0; d < n; ++d)
        pts[order[i]][d] = pts[order[0]][d] + 0.5 * (pts[order[i]][d] - pts[order[0]][d]);
      fv[order[i]] = f(pts[order[i]]);
      ++res.evals;
    }
  }

  sort_simplex();
  res.x = pts[order[0]];
  res.f = fv[order[0]];
  return res;
}

// Symmetric positive-definite solve by Cholesky; returns false when the
// matrix is not PD. a is row-major n x n, overwritten with the inverse.
inline bool invert_spd(std::vector<double>& a, std::size_t n) {
  std::vector<double> l(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      if (i == j) {
        if (!(s > 0.0)) return false;
        l[i * n + i] = std::sqrt(s);
      } else {
        l[i * n + j] = s / l[j * n + j];
      }
    }
  }
  // invert L in place, then form (L^-T L^-1)
  std::vector<double> inv(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    inv[i * n + i] = 1.0 / l[i * n + i];
    for (std::size_t j = 0; j < i; ++j) {
      double s = 0.0;
      for (std::size_t k = j; k < i; ++k) s -= l[i * n + k] * inv[k * n + j];
      inv[i * n + j] = s / l[i * n + i];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = std::max(i, j); k < n; ++k)
        s += inv[k * n + i] * inv[k * n + j];
      a[i * n + j] = s;
    }
  return true;
}

}  // namespace cncdir
