#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cncdir/bench.hpp"

using namespace cncdir;
using Catch::Approx;

TEST_CASE("stratum validation", "[bench]") {
  CHECK_THROWS_AS(BenchStratum({1, 1}, {1, 1, 1}, 25, 30), DomainError);
  CHECK_THROWS_AS(BenchStratum({1, 1, 1}, {1, 1, 1}, 1, 30), DomainError);
  CHECK(table4_strata().size() == 12);
  CHECK(table4_strata(10, {25}).size() == 4);
}

TEST_CASE("mock timer: identical streams give a null result", "[bench]") {
  BenchStratum s({1.8, 1.2, 1.5}, {0.7, 1.0, 0.9}, 25, 30);
  BenchOptions opts;
  opts.timer_override = [](bool, int rep) { return 1.0 + 0.01 * (rep % 7); };
  BenchResult r = run_stratum(s, 1, opts);
  CHECK(r.mean_cncdir == Approx(r.mean_ncdir));
  CHECK(r.z_stat == Approx(0.0).margin(1e-12));
  CHECK(r.p_value == Approx(0.5).margin(1e-12));
  CHECK(r.speedup_ratio == Approx(1.0));
  CHECK(r.valid);
}

TEST_CASE("mock timer: a clear gap is detected", "[bench]") {
  BenchStratum s({1.8, 1.2, 1.5}, {0.7, 1.0, 0.9}, 25, 30);
  BenchOptions opts;
  opts.timer_override = [](bool is_cncdir, int rep) {
    double noise = 0.02 * ((rep * 13) % 5);
    return is_cncdir ? 0.1 + noise : 1.5 + noise;
  };
  BenchResult r = run_stratum(s, 1, opts);
  CHECK(r.mean_ncdir > r.mean_cncdir);
  CHECK(r.speedup_ratio > 10.0);
  CHECK(r.p_value < 1e-6);
  CHECK(r.z_stat < -4.0);
}

TEST_CASE("micro benchmark run", "[bench][slow]") {
  BenchStratum s({1.8, 1.2, 1.5}, {0.7, 1.0, 0.9}, 25, 2);
  BenchOptions opts;
  opts.fit.starts = 2;
  BenchResult r = run_stratum(s, 99, opts);
  CHECK(r.valid);
  CHECK(r.mean_cncdir > 0.0);
  CHECK(r.mean_ncdir > 0.0);
  CHECK(r.speedup_ratio == Approx(r.mean_ncdir / r.mean_cncdir));
  // direction: the conditional model fits faster
  CHECK(r.mean_ncdir > r.mean_cncdir);
}

TEST_CASE("deterministic seed regenerates identical series", "[bench]") {
  // data generation is separated from timing: same seed, same draws
  CNcDirParams p({1.8, 1.2, 1.5}, {0.7, 1.0, 0.9});
  RandomStream a = RandomStream(7).split(4);
  RandomStream b = RandomStream(7).split(4);
  for (int i = 0; i < 20; ++i) {
    SimplexPoint xa = sample_cncdir_mixture(p, a);
    SimplexPoint xb = sample_cncdir_mixture(p, b);
    CHECK(xa[0] == xb[0]);
    CHECK(xa[1] == xb[1]);
  }
}
