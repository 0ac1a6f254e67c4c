#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace cncdir {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Thrown when an argument falls outside a function's domain (bad simplex
// point, nonpositive shape, poisoned lower parameter, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when an infinite series fails its stopping rule within maxiter.
// Callers that can continue (grid export) catch it; fitting code converts
// it into a rejected parameter point.
class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown by the inverse-transform sampler when the cdf accumulation cap is
// exceeded before reaching the target uniform.
class IterationCap : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Stopping rule shared by every infinite-series evaluation. tol is a
// relative tolerance on the partial-sum change; tol == 0 means iterate
// until additional terms no longer change the partial sum.
struct SeriesControl {
  double tol = 1e-10;
  int maxiter = 2000;

  void validate() const {
    if (!(tol >= 0)) throw DomainError("SeriesControl: tol must be >= 0");
    if (maxiter < 1) throw DomainError("SeriesControl: maxiter must be >= 1");
  }
};

struct SeriesResult {
  double value = 0.0;
  int terms_used = 0;
  bool converged = false;
};

inline SeriesControl default_series_control() { return SeriesControl{}; }

}  // namespace cncdir
