#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "cncdir/common.hpp"
#include "cncdir/inference.hpp"
#include "cncdir/params.hpp"
#include "cncdir/rng.hpp"
#include "cncdir/sampling.hpp"

namespace cncdir {

struct BenchStratum {
  std::vector<double> alpha;   // 3 shapes
  std::vector<double> lambda;  // 3 non-centralities
  int series_size = 25;        // N
  int replications = 30;       // n

  BenchStratum(std::vector<double> a, std::vector<double> l, int n_size, int reps)
      : alpha(std::move(a)), lambda(std::move(l)), series_size(n_size),
        replications(reps) {
    detail::check_positive(alpha, "BenchStratum.alpha");
    detail::check_nonnegative(lambda, "BenchStratum.lambda");
    if (alpha.size() != 3 || lambda.size() != 3)
      throw DomainError("BenchStratum: needs 3 shapes and 3 non-centralities");
    if (series_size < 2 || replications < 2)
      throw DomainError("BenchStratum: series size and replications must be >= 2");
  }
};

struct BenchResult {
  BenchStratum stratum;
  double mean_cncdir = 0.0;
  double sd_cncdir = 0.0;
  double mean_ncdir = 0.0;
  double sd_ncdir = 0.0;
  double z_stat = 0.0;
  double p_value = 1.0;
  double speedup_ratio = 0.0;  // mean_ncdir / mean_cncdir
  int failed = 0;
  bool valid = false;
};

struct BenchOptions {
  FitOptions fit;  // shared verbatim by both models; only the kernel differs
  // Test hook: when set, replaces wall-clock measurement (model, replication)
  // and skips the actual fits.
  std::function<double(bool is_cncdir, int rep)> timer_override;

  BenchOptions() {
    fit.starts = 4;
    fit.compute_std_errors = false;  // the measured quantity is the maximization
  }
};

namespace detail {

struct RunningStats {
  double sum = 0.0, sumsq = 0.0;
  int n = 0;
  void add(double x) {
    sum += x;
    sumsq += x * x;
    ++n;
  }
  double mean() const { return n > 0 ? sum / n : 0.0; }
  double sd() const {
    if (n < 2) return 0.0;
    double v = (sumsq - sum * sum / n) / (n - 1);
    return v > 0 ? std::sqrt(v) : 0.0;
  }
};

}  // namespace detail

// One stratum of the paired timing study. For each replication a series is
// generated from each model and the matching model is fitted to its own
// series; wall-clock time covers the maximization only. One warmup fit per
// model is run and discarded. Failed fits drop the replication pairwise.
inline BenchResult run_stratum(const BenchStratum& s, std::uint64_t seed,
                               const BenchOptions& opts = {}) {
  BenchResult out{s};
  CNcDirParams cpar(s.alpha, s.lambda);
  NcDirParams npar(s.alpha, s.lambda);
  const ModelSpec cspec(ModelFamily::CNcDir2);
  const ModelSpec nspec(ModelFamily::NcDir2);

  auto generate = [&](bool cncdir, int rep) {
    RandomStream rng =
        RandomStream(seed).split(static_cast<std::uint64_t>(rep) * 2 + (cncdir ? 0 : 1));
    std::vector<SimplexPoint> pts;
    pts.reserve(s.series_size);
    for (int i = 0; i < s.series_size; ++i)
      pts.push_back(cncdir ? sample_cncdir_mixture(cpar, rng)
                           : sample_ncdir(npar, rng));
    return Dataset2D(std::move(pts));
  };

  using clock = std::chrono::steady_clock;
  auto timed_fit = [&](const ModelSpec& spec, const Dataset2D& d, bool& ok) {
    auto t0 = clock::now();
    FitReport r = fit_ml(spec, d, opts.fit);
    auto t1 = clock::now();
    ok = r.converged;
    return std::chrono::duration<double>(t1 - t0).count();
  };

  detail::RunningStats tc, tn;
  if (opts.timer_override) {
    for (int rep = 0; rep < s.replications; ++rep) {
      tc.add(opts.timer_override(true, rep));
      tn.add(opts.timer_override(false, rep));
    }
  } else {
    bool ok = false;
    timed_fit(cspec, generate(true, -1), ok);   // warmup, discarded
    timed_fit(nspec, generate(false, -1), ok);  // warmup, discarded
    for (int rep = 0; rep < s.replications; ++rep) {
      Dataset2D dc = generate(true, rep);
      Dataset2D dn = generate(false, rep);
      bool okc = false, okn = false;
      double sc = timed_fit(cspec, dc, okc);
      double sn = timed_fit(nspec, dn, okn);
      if (!okc || !okn) {
        ++out.failed;  // pairwise exclusion keeps the samples comparable
        continue;
      }
      tc.add(sc);
      tn.add(sn);
    }
  }

  out.mean_cncdir = tc.mean();
  out.sd_cncdir = tc.sd();
  out.mean_ncdir = tn.mean();
  out.sd_ncdir = tn.sd();
  out.speedup_ratio = out.mean_cncdir > 0 ? out.mean_ncdir / out.mean_cncdir : 0.0;
  // Unpooled two-sample Z for H0: mu_cncdir - mu_ncdir >= 0 (one-tailed).
  double se = std::sqrt(out.sd_cncdir * out.sd_cncdir / std::max(1, tc.n) +
                        out.sd_ncdir * out.sd_ncdir / std::max(1, tn.n));
  out.z_stat = se > 0 ? (out.mean_cncdir - out.mean_ncdir) / se : 0.0;
  out.p_value = normal_cdf(out.z_stat);
  out.valid = out.failed * 10 <= s.replications;
  return out;
}

// The published parameter grid: four strata crossed with series sizes.
inline std::vector<BenchStratum> table4_strata(int replications = 30,
                                               std::vector<int> sizes = {25, 50, 100}) {
  const std::vector<std::pair<std::vector<double>, std::vector<double>>> grid = {
      {{1.8, 1.2, 1.5}, {0.7, 1.0, 0.9}},
      {{0.7, 1.3, 1.9}, {4.6, 0.5, 3.8}},
      {{2.1, 0.2, 0.6}, {0.8, 2.9, 4.2}},
      {{0.8, 0.9, 0.4}, {2.4, 1.7, 2.8}},
  };
  std::vector<BenchStratum> out;
  for (const auto& [a, l] : grid)
    for (int n : sizes) out.emplace_back(a, l, n, replications);
  return out;
}

// Strata run strictly sequentially; parallel strata would skew the clocks.
inline std::vector<BenchResult> run_table4(std::uint64_t seed,
                                           const BenchOptions& opts = {},
                                           int replications = 30,
                                           std::vector<int> sizes = {25, 50, 100}) {
  std::vector<BenchResult> out;
  std::uint64_t k = 0;
  for (const auto& s : table4_strata(replications, std::move(sizes))) {
    out.push_back(run_stratum(s, seed + k * 0x9e3779b97f4a7c15ULL, opts));
    ++k;
  }
  return out;
}

}  // namespace cncdir
