#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "cncdir/mixture_weight.hpp"
#include "cncdir/rng.hpp"
#include "support/test_support.hpp"

using namespace cncdir;
using Catch::Approx;

TEST_CASE("mw joint pmf", "[mw]") {
  SeriesControl ctl;
  // degenerate law at zero
  CHECK(mw_logpmf(MwParams(2.0, {0, 0, 0}), CountVector({0, 0, 0}), ctl) == 0.0);
  // only the normalizer survives at j = 0
  CHECK(mw_logpmf(MwParams(3.0, {1, 1, 2}), CountVector({0, 0, 0}), ctl) ==
        Approx(-std::log(f01(3.0, 1.0, ctl))).epsilon(1e-13));
  // direct formula with an oracle normalizer
  double lp = mw_logpmf(MwParams(3.0, {4, 0, 4}), CountVector({1, 0, 2}), ctl);
  long double norm = testsupport::f01_oracle(3.0L, 2.0L);
  long double expect = 1.0L / (norm * (3.0L * 4.0L * 5.0L)) * 1.0L / 2.0L;
  CHECK(lp == Approx(static_cast<double>(logl(expect))).epsilon(1e-12));
  // structurally pinned component
  CHECK(mw_logpmf(MwParams(3.0, {4, 0, 4}), CountVector({0, 1, 0}), ctl) ==
        kNegInf);
  CHECK_THROWS_AS(mw_logpmf(MwParams(3.0, {1, 1}), CountVector({0, 0, 0}), ctl),
                  DomainError);
}

TEST_CASE("mw marginal pmf", "[mw]") {
  SeriesControl ctl;
  MwParams p(2.5, {1, 2, 3});
  // full-index marginal equals the joint pmf
  CountVector j({1, 2, 0});
  CHECK(mw_marginal_logpmf(p, j, ctl) == Approx(mw_logpmf(p, j, ctl)).epsilon(1e-13));
  // degenerate law
  CHECK(mw_marginal_logpmf(MwParams(2.0, {0, 0, 0}), CountVector({0}), ctl) == 0.0);
  // single-component marginal vs exhaustive summation over the dropped pair
  double marg = mw_marginal_logpmf(p, CountVector({2}), ctl);
  double sum = 0.0;
  for (long j2 = 0; j2 <= 80; ++j2)
    for (long j3 = 0; j3 <= 80; ++j3)
      sum += std::exp(mw_logpmf(p, CountVector({2, j2, j3}), ctl));
  CHECK(marg == Approx(std::log(sum)).epsilon(1e-10));
}

TEST_CASE("mw conditional parameters", "[mw]") {
  MwParams p(2.0, {1.0, 0.5, 2.0});
  auto same = mw_conditional_params(p, CountVector({0}));
  CHECK(same.alpha_plus == 2.0);
  CHECK(same.lambda == std::vector<double>{1.0, 0.5});
  auto shifted = mw_conditional_params(p, CountVector({3}));
  CHECK(shifted.alpha_plus == 5.0);
  CHECK(shifted.lambda == std::vector<double>{1.0, 0.5});

  SeriesControl ctl;
  // conditional pmf is a proper distribution
  double total = 0.0;
  for (long j1 = 0; j1 <= 100; ++j1)
    for (long j2 = 0; j2 + j1 <= 100; ++j2)
      total += std::exp(mw_logpmf(shifted, CountVector({j1, j2}), ctl));
  CHECK(total == Approx(1.0).epsilon(1e-10));
}

TEST_CASE("mw component-sum law", "[mw]") {
  SeriesControl ctl;
  CHECK(mw_sum_logpmf(MwParams(1.5, {0, 0}), 0, ctl) == 0.0);
  CHECK(mw_sum_logpmf(MwParams(1.5, {0, 0}), 2, ctl) == kNegInf);

  MwParams p(3.0, {1, 1, 2});
  double total = 0.0;
  for (long s = 0; s <= 200; ++s) total += std::exp(mw_sum_logpmf(p, s, ctl));
  CHECK(total == Approx(1.0).epsilon(1e-12));

  // s = 2 equals the enumeration of the six compositions
  double direct = 0.0;
  for (long j1 = 0; j1 <= 2; ++j1)
    for (long j2 = 0; j1 + j2 <= 2; ++j2)
      direct += std::exp(mw_logpmf(p, CountVector({j1, j2, 2 - j1 - j2}), ctl));
  CHECK(std::exp(mw_sum_logpmf(p, 2, ctl)) == Approx(direct).epsilon(1e-12));
}

TEST_CASE("mw tail mass beyond 200 is negligible for lambda_plus <= 60", "[mw]") {
  SeriesControl ctl;
  for (double lp : {10.0, 30.0, 60.0}) {
    MwParams p(1.2, {lp / 3, lp / 3, lp / 3});
    double cdf = 0.0;
    for (long s = 0; s <= 200; ++s) cdf += std::exp(mw_sum_logpmf(p, s, ctl));
    CHECK(1.0 - cdf < 1e-12);
  }
}

TEST_CASE("mw conditional given the sum is multinomial", "[mw]") {
  SeriesControl ctl;
  MwParams p(3.0, {1, 1, 2});
  auto degenerate = mw_conditional_multinomial(p, 0);
  CHECK(degenerate.n == 0);

  auto m = mw_conditional_multinomial(p, 4);
  CHECK(m.probs == std::vector<double>{0.25, 0.25});
  CHECK(m.remainder_prob() == Approx(0.5));

  CHECK_THROWS_AS(mw_conditional_multinomial(MwParams(2.0, {0, 0, 0}), 1),
                  DomainError);

  // chain rule: joint = sum-law x multinomial, exactly
  for (long s = 0; s <= 6; ++s) {
    auto mult = mw_conditional_multinomial(p, s);
    for (long j1 = 0; j1 <= s; ++j1)
      for (long j2 = 0; j1 + j2 <= s; ++j2) {
        CountVector full({j1, j2, s - j1 - j2});
        double lhs = mw_logpmf(p, full, ctl);
        double rhs = mw_sum_logpmf(p, s, ctl) +
                     multinomial_logpmf(mult, CountVector({j1, j2}));
        CHECK(lhs == Approx(rhs).epsilon(1e-12));
      }
  }
}

TEST_CASE("mw sampler hits the exact pmf", "[mw][slow]") {
  SeriesControl ctl;
  MwParams p(3.0, {1, 1, 2});
  RandomStream rng(2024);

  // degenerate law
  MwParams z(3.0, {0, 0, 0});
  for (int i = 0; i < 10; ++i) CHECK(mw_sample(z, rng).total() == 0);

  const long n = 200000;
  std::map<std::vector<long>, long> counts;
  std::vector<double> nplus(n);
  for (long i = 0; i < n; ++i) {
    CountVector c = mw_sample(p, rng);
    ++counts[c.counts];
    nplus[i] = static_cast<double>(c.total());
  }

  // chi-squared GOF over all cells with pmf >= 1e-4
  std::vector<long> observed;
  std::vector<double> expected;
  double covered = 0.0;
  long covered_obs = 0;
  for (long j1 = 0; j1 <= 20; ++j1)
    for (long j2 = 0; j2 <= 20; ++j2)
      for (long j3 = 0; j3 <= 20; ++j3) {
        double prob = std::exp(mw_logpmf(p, CountVector({j1, j2, j3}), ctl));
        if (prob < 1e-4) continue;
        auto it = counts.find(std::vector<long>{j1, j2, j3});
        long obs = it == counts.end() ? 0 : it->second;
        observed.push_back(obs);
        expected.push_back(prob);
        covered += prob;
        covered_obs += obs;
      }
  observed.push_back(n - covered_obs);
  expected.push_back(1.0 - covered);
  CHECK(testsupport::chisq_gof_pvalue(observed, expected, n) > 0.001);

  // E[N+] against the truncated series
  double mean_exact = 0.0;
  for (long s = 1; s <= 200; ++s)
    mean_exact += s * std::exp(mw_sum_logpmf(p, s, ctl));
  auto ms = testsupport::mean_se(nplus);
  CHECK(std::abs(ms.mean - mean_exact) < 3 * ms.se);
}

TEST_CASE("mw sampler iteration cap", "[mw]") {
  MwParams p(1.0, {400.0, 300.0, 300.0});
  RandomStream rng(5);
  CHECK_THROWS_AS(mw_sample(p, rng, 3), IterationCap);
}
