#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cncdir/models.hpp"
#include "cncdir/moments.hpp"
#include "cncdir/rng.hpp"
#include "cncdir/sampling.hpp"
#include "support/test_support.hpp"

using namespace cncdir;
using Catch::Approx;

TEST_CASE("closed-form mixed moment", "[moments]") {
  SeriesControl ctl;
  // zero non-centrality: exactly the Dirichlet moment
  CNcDirParams z({1.7, 0.8, 2.4}, {0, 0, 0});
  CHECK(cncdir_mixed_moment(z, MomentOrder(2, 1), ctl) ==
        Approx(dir_mixed_moment(DirParams(z.alpha), 2, 1)).epsilon(1e-13));
  CHECK(cncdir_mixed_moment(z, MomentOrder(0, 0), ctl) == 1.0);

  CNcDirParams p({1, 1, 1}, {2, 3, 1});
  double v = cncdir_mixed_moment(p, MomentOrder(2, 1), ctl);
  CHECK(v == Approx(0.034592270023028).epsilon(1e-11));  // frozen oracle value
  auto oracle = cncdir_moment_series_oracle(p, MomentOrder(2, 1), 150, ctl);
  CHECK(v == Approx(oracle.mw_series).epsilon(1e-10));
}

TEST_CASE("moment oracles agree with the closed form and each other", "[moments]") {
  SeriesControl ctl;
  RandomStream rng(41);
  for (int i = 0; i < 8; ++i) {
    std::vector<double> a = {0.3 + 2.7 * rng.uniform01(), 0.3 + 2.7 * rng.uniform01(),
                             0.3 + 2.7 * rng.uniform01()};
    std::vector<double> l = {13 * rng.uniform01(), 13 * rng.uniform01(),
                             13 * rng.uniform01()};
    CNcDirParams p(a, l);
    long r1 = static_cast<long>(rng.uniform01() * 3);
    long r2 = static_cast<long>(rng.uniform01() * (5 - r1));
    if (r1 + r2 == 0) r1 = 1;
    MomentOrder r(r1, r2);
    double closed = cncdir_mixed_moment(p, r, ctl);
    auto oracle = cncdir_moment_series_oracle(p, r, 150, ctl);
    CHECK(oracle.tail_bound < 1e-10);
    CHECK(std::abs(closed - oracle.mw_series) / closed < 1e-8);
    CHECK(std::abs(oracle.f12_series - oracle.mw_series) /
              oracle.mw_series < 1e-8);
  }

  // single-term collapse at zero non-centrality
  CNcDirParams z({1.3, 2.0, 0.9}, {0, 0, 0});
  auto zo = cncdir_moment_series_oracle(z, MomentOrder(1, 2), 150, ctl);
  CHECK(zo.mw_series ==
        Approx(dir_mixed_moment(DirParams(z.alpha), 1, 2)).epsilon(1e-12));
  CHECK(zo.tail_bound == 0.0);
}

TEST_CASE("order-(1,1) moment in both published forms", "[moments]") {
  SeriesControl ctl;
  CNcDirParams z({1.4, 2.2, 0.9}, {0, 0, 0});
  auto mz = cncdir_moment_11(z, ctl);
  double ap = z.alpha_plus();
  CHECK(mz.three_term ==
        Approx(1.4 * 2.2 / (ap * (ap + 1))).epsilon(1e-13));
  CHECK(mz.reduced == Approx(mz.three_term).epsilon(1e-13));

  RandomStream rng(42);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> a = {0.3 + 3 * rng.uniform01(), 0.3 + 3 * rng.uniform01(),
                             0.3 + 3 * rng.uniform01()};
    std::vector<double> l = {40 * rng.uniform01(), 40 * rng.uniform01(),
                             40 * rng.uniform01()};
    CNcDirParams p(a, l);
    auto m = cncdir_moment_11(p, ctl);
    CHECK(std::abs(m.three_term - m.reduced) <= 1e-12 * m.three_term);
    CHECK(cncdir_mixed_moment(p, MomentOrder(1, 1), ctl) ==
          Approx(m.three_term).epsilon(1e-12));
  }
}

TEST_CASE("Ljunggren's identity", "[moments]") {
  // alpha = 0 reduces both sides to x^n
  auto [l0, r0] = ljunggren_identity_check(0, 4, 1.3, 0.4);
  CHECK(l0 == Approx(std::pow(1.3, 4)).epsilon(1e-13));
  CHECK(r0 == Approx(std::pow(1.3, 4)).epsilon(1e-13));
  auto [ln, rn] = ljunggren_identity_check(5, 0, 0.8, 0.2);
  CHECK(ln == 1.0);
  CHECK(rn == 1.0);
  auto [l, r] = ljunggren_identity_check(3, 5, 1.3, 0.4);
  CHECK(l == Approx(r).epsilon(1e-12));

  // positive regime (x > y >= 0): both sides are positive-term sums
  RandomStream rng(43);
  for (int i = 0; i < 40; ++i) {
    long alpha = static_cast<long>(rng.uniform01() * 10);
    long n = static_cast<long>(rng.uniform01() * 25);
    double y = 0.55 * rng.uniform01();
    double x = y + 0.1 + rng.uniform01();
    auto [lhs, rhs] = ljunggren_identity_check(alpha, n, x, y);
    CHECK(std::abs(lhs - rhs) / std::abs(rhs) < 1e-10);
  }
  // sign-mixed spot checks at a looser tolerance (inherent cancellation)
  for (auto [alpha, n, x, y] : {std::tuple{4L, 12L, 0.3, 0.9},
                                std::tuple{7L, 18L, -0.2, 0.6}}) {
    auto [lhs, rhs] = ljunggren_identity_check(alpha, n, x, y);
    double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
    CHECK(std::abs(lhs - rhs) / scale < 1e-9);
  }
}

TEST_CASE("moment monotonicity and range", "[moments]") {
  SeriesControl ctl;
  double prev = 0.0;
  for (double l1 : {0.0, 1.0, 5.0, 20.0}) {
    CNcDirParams p({1, 1, 1}, {l1, 2.0, 2.0});
    double m = cncdir_mixed_moment(p, MomentOrder(1, 0), ctl);
    CHECK(m > prev);  // E[X1] grows with lambda_1
    prev = m;
  }

  RandomStream rng(44);
  for (int i = 0; i < 20; ++i) {
    CNcDirParams p({0.3 + 3 * rng.uniform01(), 0.3 + 3 * rng.uniform01(),
                    0.3 + 3 * rng.uniform01()},
                   {30 * rng.uniform01(), 30 * rng.uniform01(), 30 * rng.uniform01()});
    long r1 = 1 + static_cast<long>(rng.uniform01() * 2);
    long r2 = static_cast<long>(rng.uniform01() * 3);
    double m = cncdir_mixed_moment(p, MomentOrder(r1, r2), ctl);
    CHECK(m > 0.0);
    CHECK(m < 1.0);
  }
}

TEST_CASE("marginal moments match Monte Carlo from the higher-dimensional sampler",
          "[moments][slow]") {
  SeriesControl ctl;
  CNcDirParams p({1.2, 0.9, 1.6, 1.1}, {2.0, 3.5, 1.0, 0.5});
  auto biv = cncdir_bivariate_marginal(p, 0, 1);
  RandomStream rng(45);
  const int n = 150000;
  std::vector<double> vals(n);
  for (int i = 0; i < n; ++i) {
    SimplexPoint s = sample_cncdir_mixture(p, rng);
    vals[i] = s[0] * s[0] * s[1];
  }
  auto ms = testsupport::mean_se(vals);
  CHECK(std::abs(ms.mean - cncdir_mixed_moment(biv, MomentOrder(2, 1), ctl)) <
        3 * ms.se);
}
