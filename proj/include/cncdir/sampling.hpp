#pragma once

#include <vector>

#include "cncdir/common.hpp"
#include "cncdir/mixture_weight.hpp"
#include "cncdir/params.hpp"
#include "cncdir/rng.hpp"
#include "cncdir/simplex.hpp"

namespace cncdir {

inline double sample_chisq(double g, RandomStream& rng) {
  if (!(g > 0)) throw DomainError("sample_chisq: g must be > 0");
  return sample_gamma(g / 2.0, 2.0, rng);
}

// Central part plus a Poisson-counted sum of 2-dof blocks.
inline double sample_ncchisq(const NcChisqParams& p, RandomStream& rng) {
  double y = p.g > 0 ? sample_chisq(p.g, rng) : 0.0;
  long m = sample_poisson(p.lambda / 2.0, rng);
  for (long j = 0; j < m; ++j) y += sample_chisq(2.0, rng);
  return y;
}

inline SimplexPoint sample_dirichlet(const DirParams& p, RandomStream& rng) {
  std::vector<double> y(p.alpha.size());
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = sample_chisq(2.0 * p.alpha[i], rng);
    total += y[i];
  }
  std::vector<double> x(p.dim());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = y[i] / total;
  return SimplexPoint(std::move(x));
}

inline SimplexPoint sample_ncdir(const NcDirParams& p, RandomStream& rng) {
  std::vector<double> y(p.alpha.size());
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = sample_ncchisq(NcChisqParams(2.0 * p.alpha[i], p.lambda[i]), rng);
    total += y[i];
  }
  std::vector<double> x(p.dim());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = y[i] / total;
  return SimplexPoint(std::move(x));
}

// Mixture representation: draw the mixture-weight counts, then a Dirichlet
// with shifted shapes.
inline SimplexPoint sample_cncdir_mixture(const CNcDirParams& p, RandomStream& rng) {
  MwParams mw(p.alpha_plus(), p.lambda);
  CountVector n = mw_sample(mw, rng);
  std::vector<double> shifted(p.alpha);
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] += n[i];
  return sample_dirichlet(DirParams(std::move(shifted)), rng);
}

struct CncdirCompositionDraw {
  SimplexPoint point;
  CountVector counts;
  double z_plus = 0.0;
};

// Unconditional composition representation: chi-squared blocks with
// mixture-weight-counted 2-dof additions, then normalization. Distributionally
// identical to the mixture sampler.
inline CncdirCompositionDraw sample_cncdir_composition_detail(
    const CNcDirParams& p, RandomStream& rng) {
  MwParams mw(p.alpha_plus(), p.lambda);
  CountVector n = mw_sample(mw, rng);
  std::vector<double> z(p.alpha.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = sample_chisq(2.0 * p.alpha[i], rng);
    for (long j = 0; j < n[i]; ++j) z[i] += sample_chisq(2.0, rng);
    total += z[i];
  }
  std::vector<double> x(p.dim());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = z[i] / total;
  return {SimplexPoint(std::move(x)), std::move(n), total};
}

inline SimplexPoint sample_cncdir_composition(const CNcDirParams& p,
                                              RandomStream& rng) {
  return sample_cncdir_composition_detail(p, rng).point;
}

// Uniform draw on the open 2-simplex (reflection of the unit square).
inline SimplexPoint sample_uniform_simplex2(RandomStream& rng) {
  double u = rng.uniform01(), v = rng.uniform01();
  if (u + v >= 1.0) {
    u = 1.0 - u;
    v = 1.0 - v;
  }
  if (u <= 0.0 || v <= 0.0 || u + v >= 1.0) return sample_uniform_simplex2(rng);
  return SimplexPoint({u, v});
}

}  // namespace cncdir
