#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "cncdir/common.hpp"
#include "cncdir/params.hpp"
#include "cncdir/rng.hpp"
#include "cncdir/specfun.hpp"

namespace cncdir {

// Mixing law of the CNcDir mixture form: a (D+1)-variate discrete
// distribution driven by one shape total and a non-centrality vector.
// lambda = 0 degenerates the law at the zero vector.
struct MwParams {
  double alpha_plus = 0.0;
  std::vector<double> lambda;

  MwParams(double aplus, std::vector<double> l)
      : alpha_plus(aplus), lambda(std::move(l)) {
    if (!(alpha_plus > 0)) throw DomainError("MwParams: alpha_plus must be > 0");
    detail::check_nonnegative(lambda, "MwParams.lambda");
    if (lambda.empty()) throw DomainError("MwParams: empty lambda");
  }

  double lambda_plus() const { return detail::vec_sum(lambda); }
};

struct CountVector {
  std::vector<long> counts;

  CountVector() = default;
  explicit CountVector(std::vector<long> c) : counts(std::move(c)) {
    for (long v : counts)
      if (v < 0) throw DomainError("CountVector: counts must be >= 0");
  }
  CountVector(std::initializer_list<long> c) : CountVector(std::vector<long>(c)) {}

  long total() const { return std::accumulate(counts.begin(), counts.end(), 0L); }
  std::size_t size() const { return counts.size(); }
  long operator[](std::size_t i) const { return counts[i]; }
};

// Joint log-pmf. Components with lambda_i = 0 are structurally pinned to
// count 0: positive counts there carry zero mass (-inf), not NaN.
inline double mw_logpmf(const MwParams& p, const CountVector& j,
                        const SeriesControl& ctl = {}) {
  if (j.size() != p.lambda.size())
    throw DomainError("mw_logpmf: count/lambda dimension mismatch");
  double lp = -log_f01(p.alpha_plus, p.lambda_plus() / 4.0, ctl) -
              log_pochhammer(p.alpha_plus, j.total());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i] == 0) continue;
    if (p.lambda[i] == 0.0) return kNegInf;
    lp += j[i] * std::log(p.lambda[i] / 4.0) - log_factorial(j[i]);
  }
  return lp;
}

// Marginal log-pmf of the first m components.
inline double mw_marginal_logpmf(const MwParams& p, const CountVector& j,
                                 const SeriesControl& ctl = {}) {
  const std::size_t m = j.size();
  if (m < 1 || m > p.lambda.size())
    throw DomainError("mw_marginal_logpmf: bad subset size");
  double dropped = p.lambda_plus();
  double lp = -log_pochhammer(p.alpha_plus, j.total());
  for (std::size_t i = 0; i < m; ++i) {
    dropped -= p.lambda[i];
    if (j[i] == 0) continue;
    if (p.lambda[i] == 0.0) return kNegInf;
    lp += j[i] * std::log(p.lambda[i] / 4.0) - log_factorial(j[i]);
  }
  lp += log_f01(p.alpha_plus + j.total(), dropped / 4.0, ctl) -
        log_f01(p.alpha_plus, p.lambda_plus() / 4.0, ctl);
  return lp;
}

// Conditioning on the last components shifts the shape total by their sum
// and restricts lambda to the remaining block.
inline MwParams mw_conditional_params(const MwParams& p, const CountVector& given) {
  if (given.size() >= p.lambda.size())
    throw DomainError("mw_conditional_params: too many conditioned components");
  const std::size_t m = p.lambda.size() - given.size();
  return MwParams(p.alpha_plus + given.total(),
                  std::vector<double>(p.lambda.begin(), p.lambda.begin() + m));
}

// log-pmf of the component sum, a univariate member of the same family.
inline double mw_sum_logpmf(const MwParams& p, long s,
                            const SeriesControl& ctl = {}) {
  if (s < 0) throw DomainError("mw_sum_logpmf: s must be >= 0");
  const double lplus = p.lambda_plus();
  if (lplus == 0.0) return s == 0 ? 0.0 : kNegInf;
  return -log_f01(p.alpha_plus, lplus / 4.0, ctl) -
         log_pochhammer(p.alpha_plus, s) + s * std::log(lplus / 4.0) -
         log_factorial(s);
}

struct MultinomialParams {
  long n = 0;
  std::vector<double> probs;  // first D category probabilities

  double remainder_prob() const {
    return 1.0 - std::accumulate(probs.begin(), probs.end(), 0.0);
  }
};

// Conditional law of the first D components given the sum: Multinomial with
// cell probabilities lambda_i / lambda_plus.
inline MultinomialParams mw_conditional_multinomial(const MwParams& p, long n_plus) {
  if (n_plus < 0) throw DomainError("mw_conditional_multinomial: n_plus < 0");
  const double lplus = p.lambda_plus();
  std::vector<double> probs(p.lambda.size() - 1, 0.0);
  if (lplus == 0.0) {
    if (n_plus > 0)
      throw DomainError("mw_conditional_multinomial: impossible event (lambda = 0)");
    return {0, probs};
  }
  for (std::size_t i = 0; i + 1 < p.lambda.size(); ++i)
    probs[i] = p.lambda[i] / lplus;
  return {n_plus, probs};
}

inline double multinomial_logpmf(const MultinomialParams& m, const CountVector& j) {
  if (j.size() != m.probs.size())
    throw DomainError("multinomial_logpmf: dimension mismatch");
  long rest = m.n - j.total();
  if (rest < 0) return kNegInf;
  double lp = log_factorial(m.n) - log_factorial(rest);
  double rem_prob = m.remainder_prob();
  for (std::size_t i = 0; i < j.size(); ++i) {
    lp -= log_factorial(j[i]);
    if (j[i] > 0) {
      if (m.probs[i] == 0.0) return kNegInf;
      lp += j[i] * std::log(m.probs[i]);
    }
  }
  if (rest > 0) {
    if (rem_prob <= 0.0) return kNegInf;
    lp += rest * std::log(rem_prob);
  }
  return lp;
}

// Exact draw: inverse transform on the component-sum law, then multinomial
// allocation by sequential binomial splitting. The cdf accumulation runs in
// log space for the term recursion and compensated summation for the masses,
// since early masses are tiny when lambda_plus is large.
inline CountVector mw_sample(const MwParams& p, RandomStream& rng,
                             long mass_cap = 1000000L) {
  const std::size_t k = p.lambda.size();
  const double lplus = p.lambda_plus();
  std::vector<long> counts(k, 0);
  if (lplus == 0.0) return CountVector(std::move(counts));

  const double u = rng.uniform01();
  double log_term = -log_f01(p.alpha_plus, lplus / 4.0);
  double cdf = std::exp(log_term);
  double comp = 0.0;  // Kahan compensation
  long s = 0;
  while (cdf < u) {
    ++s;
    if (s > mass_cap)
      throw IterationCap("mw_sample: cdf accumulation exceeded mass cap");
    log_term += std::log(lplus / 4.0) - std::log(static_cast<double>(s)) -
                std::log(p.alpha_plus + s - 1);
    double y = std::exp(log_term) - comp;
    double t = cdf + y;
    comp = (t - cdf) - y;
    cdf = t;
  }

  long rem = s;
  double rest = lplus;
  for (std::size_t i = 0; i + 1 < k && rem > 0; ++i) {
    double pi = p.lambda[i] / rest;
    long ni = pi <= 0.0 ? 0 : (pi >= 1.0 ? rem : sample_binomial(rem, pi, rng));
    counts[i] = ni;
    rem -= ni;
    rest -= p.lambda[i];
  }
  counts[k - 1] = rem;
  return CountVector(std::move(counts));
}

}  // namespace cncdir
