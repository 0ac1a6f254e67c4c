#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "cncdir/common.hpp"

namespace cncdir {

namespace detail {

inline void check_positive(const std::vector<double>& v, const char* what) {
  if (v.empty()) throw DomainError(std::string(what) + ": empty vector");
  for (double x : v)
    if (!(x > 0)) throw DomainError(std::string(what) + ": entries must be > 0");
}

inline void check_nonnegative(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!(x >= 0)) throw DomainError(std::string(what) + ": entries must be >= 0");
}

inline double vec_sum(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

}  // namespace detail

// Dirichlet over the D-simplex: D+1 positive shapes.
struct DirParams {
  std::vector<double> alpha;

  explicit DirParams(std::vector<double> a) : alpha(std::move(a)) {
    detail::check_positive(alpha, "DirParams.alpha");
    if (alpha.size() < 2) throw DomainError("DirParams: need at least 2 shapes");
  }

  std::size_t dim() const { return alpha.size() - 1; }
  double alpha_plus() const { return detail::vec_sum(alpha); }
};

// Bivariate Kummer-Beta: three shapes plus the real perturbation parameter.
struct Kb2Params {
  std::vector<double> alpha;  // exactly 3
  double delta = 0.0;

  Kb2Params(std::vector<double> a, double d) : alpha(std::move(a)), delta(d) {
    detail::check_positive(alpha, "Kb2Params.alpha");
    if (alpha.size() != 3) throw DomainError("Kb2Params: needs exactly 3 shapes");
  }

  double alpha_plus() const { return detail::vec_sum(alpha); }
};

// Non-central chi-squared; g = 0 with lambda > 0 is the purely non-central
// case.
struct NcChisqParams {
  double g = 0.0;
  double lambda = 0.0;

  NcChisqParams(double dof, double noncentrality) : g(dof), lambda(noncentrality) {
    if (!(g >= 0)) throw DomainError("NcChisqParams: g must be >= 0");
    if (!(lambda >= 0)) throw DomainError("NcChisqParams: lambda must be >= 0");
    if (g == 0 && lambda == 0)
      throw DomainError("NcChisqParams: g = 0 requires lambda > 0");
  }
};

// Non-central Dirichlet: D+1 shapes and D+1 non-centralities.
struct NcDirParams {
  std::vector<double> alpha;
  std::vector<double> lambda;

  NcDirParams(std::vector<double> a, std::vector<double> l)
      : alpha(std::move(a)), lambda(std::move(l)) {
    detail::check_positive(alpha, "NcDirParams.alpha");
    detail::check_nonnegative(lambda, "NcDirParams.lambda");
    if (alpha.size() != lambda.size() || alpha.size() < 2)
      throw DomainError("NcDirParams: alpha/lambda size mismatch");
  }

  std::size_t dim() const { return alpha.size() - 1; }
  double alpha_plus() const { return detail::vec_sum(alpha); }
  double lambda_plus() const { return detail::vec_sum(lambda); }
};

// Conditional Non-central Dirichlet: same parameter layout as NcDirParams,
// different law.
struct CNcDirParams {
  std::vector<double> alpha;
  std::vector<double> lambda;

  CNcDirParams(std::vector<double> a, std::vector<double> l)
      : alpha(std::move(a)), lambda(std::move(l)) {
    detail::check_positive(alpha, "CNcDirParams.alpha");
    detail::check_nonnegative(lambda, "CNcDirParams.lambda");
    if (alpha.size() != lambda.size() || alpha.size() < 2)
      throw DomainError("CNcDirParams: alpha/lambda size mismatch");
  }

  std::size_t dim() const { return alpha.size() - 1; }
  double alpha_plus() const { return detail::vec_sum(alpha); }
  double lambda_plus() const { return detail::vec_sum(lambda); }
};

// Limiting value of a bivariate density at a simplex vertex. NonExistent
// marks the direction-dependent case, kept distinct from NaN on purpose.
struct VertexLimit {
  enum class Kind { Finite, Infinite, Zero, NonExistent };

  Kind kind;
  double value = 0.0;

  static VertexLimit finite(double v) {
    if (!(v > 0)) throw DomainError("VertexLimit: finite value must be > 0");
    return {Kind::Finite, v};
  }
  static VertexLimit infinite() { return {Kind::Infinite, kInf}; }
  static VertexLimit zero() { return {Kind::Zero, 0.0}; }
  static VertexLimit non_existent() { return {Kind::NonExistent, kNaN}; }

  bool is_finite() const { return kind == Kind::Finite; }
  bool is_infinite() const { return kind == Kind::Infinite; }
  bool is_zero() const { return kind == Kind::Zero; }
  bool is_non_existent() const { return kind == Kind::NonExistent; }
};

}  // namespace cncdir
