#pragma once

#include <cmath>
#include <cstdint>

#include "cncdir/common.hpp"

namespace cncdir {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Deterministic 64-bit generator (PCG XSL-RR 128/64). Identical seeds yield
// identical draw sequences; independent streams come from split(), which
// derives a distinct increment so parallel workers never share state.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t s = seed;
    std::uint64_t hi = detail::splitmix64(s);
    std::uint64_t lo = detail::splitmix64(s);
    s ^= 0xda3e39cb94b95bdbULL + stream * 0x9e3779b97f4a7c15ULL;
    std::uint64_t ihi = detail::splitmix64(s);
    std::uint64_t ilo = detail::splitmix64(s);
    state_ = (static_cast<u128>(hi) << 64) | lo;
    inc_ = ((static_cast<u128>(ihi) << 64) | ilo) | 1;
    seed_ = seed;
    next_u64();
  }

  std::uint64_t seed() const { return seed_; }

  RandomStream split(std::uint64_t k) const {
    return RandomStream(seed_ ^ (0x5851f42d4c957f2dULL * (k + 1)), k + 1);
  }

  std::uint64_t next_u64() {
    state_ = state_ * kMultiplier + inc_;
    std::uint64_t xored = static_cast<std::uint64_t>(state_ >> 64) ^
                          static_cast<std::uint64_t>(state_);
    unsigned rot = static_cast<unsigned>(state_ >> 122);
    return (xored >> rot) | (xored << ((-rot) & 63u));
  }

  // Uniform on (0, 1): 53-bit mantissa, zero excluded.
  double uniform01() {
    double u = (next_u64() >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  double exponential(double scale) { return -scale * std::log(uniform01()); }

 private:
  using u128 = unsigned __int128;
  static constexpr u128 kMultiplier =
      (static_cast<u128>(2549297995355413924ULL) << 64) | 4865540595714422341ULL;

  u128 state_ = 0;
  u128 inc_ = 0;
  std::uint64_t seed_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Gamma(shape, scale) via Marsaglia-Tsang; shapes below one use the
// boost-by-one draw with the uniform-power correction.
inline double sample_gamma(double shape, double scale, RandomStream& rng) {
  if (!(shape > 0) || !(scale > 0))
    throw DomainError("sample_gamma: shape and scale must be > 0");
  if (shape < 1.0) {
    double u = rng.uniform01();
    return sample_gamma(shape + 1.0, scale, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    double u = rng.uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
  }
}

// Poisson draw: exact inversion up to mean 30, exact arrival counting above
// (log-space product of uniforms, so no normal approximation and no
// underflow).
inline long sample_poisson(double mean, RandomStream& rng) {
  if (mean < 0) throw DomainError("sample_poisson: mean must be >= 0");
  if (mean == 0) return 0;
  if (mean <= 30.0) {
    double p = std::exp(-mean);
    double cdf = p;
    double u = rng.uniform01();
    long k = 0;
    while (u > cdf) {
      ++k;
      p *= mean / k;
      cdf += p;
      if (k > 10000) break;
    }
    return k;
  }
  long k = 0;
  double acc = 0.0;
  for (;;) {
    acc += -std::log(rng.uniform01());
    if (acc >= mean) return k;
    ++k;
  }
}

// Binomial(n, p) by counting Bernoulli trials; n stays small in this library
// (multinomial splitting of mixture-weight counts).
inline long sample_binomial(long n, double p, RandomStream& rng) {
  if (n < 0 || p < 0.0 || p > 1.0) throw DomainError("sample_binomial: bad arguments");
  long k = 0;
  for (long i = 0; i < n; ++i)
    if (rng.uniform01() < p) ++k;
  return k;
}

}  // namespace cncdir
