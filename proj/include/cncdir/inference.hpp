#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cncdir/common.hpp"
#include "cncdir/models.hpp"
#include "cncdir/optimize.hpp"
#include "cncdir/params.hpp"
#include "cncdir/rng.hpp"
#include "cncdir/simplex.hpp"
#include "cncdir/specfun.hpp"

namespace cncdir {

enum class ModelFamily { Dir2, Kb2, NcDir2, CNcDir2 };

inline const char* family_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::Dir2: return "dir";
    case ModelFamily::Kb2: return "kb2";
    case ModelFamily::NcDir2: return "ncdir";
    case ModelFamily::CNcDir2: return "cncdir";
  }
  return "?";
}

inline ModelFamily family_from_name(const std::string& s) {
  if (s == "dir") return ModelFamily::Dir2;
  if (s == "kb2") return ModelFamily::Kb2;
  if (s == "ncdir") return ModelFamily::NcDir2;
  if (s == "cncdir") return ModelFamily::CNcDir2;
  throw DomainError("unknown model family: " + s);
}

// One of the four bivariate families plus the set of shape indices (1-based)
// pinned to 1 under the hypothesis at hand.
struct ModelSpec {
  ModelFamily family = ModelFamily::Dir2;
  std::set<int> constraints;

  ModelSpec(ModelFamily f, std::set<int> pinned = {})
      : family(f), constraints(std::move(pinned)) {
    for (int c : constraints)
      if (c < 1 || c > 3)
        throw DomainError("ModelSpec: constraint indices must be in {1,2,3}");
  }

  std::size_t full_size() const {
    switch (family) {
      case ModelFamily::Dir2: return 3;
      case ModelFamily::Kb2: return 4;
      default: return 6;
    }
  }
  std::size_t free_size() const { return full_size() - constraints.size(); }

  std::vector<std::string> param_names() const {
    std::vector<std::string> n = {"a1", "a2", "a3"};
    if (family == ModelFamily::Kb2) n.push_back("delta");
    if (family == ModelFamily::NcDir2 || family == ModelFamily::CNcDir2) {
      n.push_back("l1");
      n.push_back("l2");
      n.push_back("l3");
    }
    return n;
  }

  bool pinned(std::size_t idx) const {
    return idx < 3 && constraints.count(static_cast<int>(idx) + 1) > 0;
  }
  bool is_lambda(std::size_t idx) const {
    return (family == ModelFamily::NcDir2 || family == ModelFamily::CNcDir2) &&
           idx >= 3;
  }
  bool is_delta(std::size_t idx) const {
    return family == ModelFamily::Kb2 && idx == 3;
  }
};

// Observed bivariate sample plus the sufficient statistics of the Dirichlet
// block, so the central part of every log-likelihood is O(1) per evaluation.
class Dataset2D {
 public:
  explicit Dataset2D(std::vector<SimplexPoint> pts) : points_(std::move(pts)) {
    if (points_.empty()) throw DomainError("Dataset2D: empty sample");
    for (const auto& p : points_) {
      if (p.dim() != 2) throw DomainError("Dataset2D: points must be bivariate");
      s1_ += std::log(p[0]);
      s2_ += std::log(p[1]);
      s3_ += std::log(p.remainder());
      sx_ += p[0] + p[1];
    }
  }

  std::size_t n() const { return points_.size(); }
  const std::vector<SimplexPoint>& points() const { return points_; }
  double sum_log_x1() const { return s1_; }
  double sum_log_x2() const { return s2_; }
  double sum_log_rem() const { return s3_; }
  double sum_x1_plus_x2() const { return sx_; }

 private:
  std::vector<SimplexPoint> points_;
  double s1_ = 0, s2_ = 0, s3_ = 0, sx_ = 0;
};

// ---------------------------------------------------------------------------
// Log-likelihoods
// ---------------------------------------------------------------------------

namespace detail {

inline double dir_block_loglik(std::span<const double> a, const Dataset2D& d) {
  const double n = static_cast<double>(d.n());
  return n * (std::lgamma(a[0] + a[1] + a[2]) - std::lgamma(a[0]) -
              std::lgamma(a[1]) - std::lgamma(a[2])) +
         (a[0] - 1.0) * d.sum_log_x1() + (a[1] - 1.0) * d.sum_log_x2() +
         (a[2] - 1.0) * d.sum_log_rem();
}

}  // namespace detail

// Log-likelihood of a full parameter vector (layout per ModelSpec) on the
// data. Series failures carry the offending observation index.
inline double loglik(ModelFamily family, std::span<const double> theta,
                     const Dataset2D& data, const SeriesControl& ctl = {}) {
  for (int i = 0; i < 3; ++i)
    if (!(theta[i] > 0)) throw DomainError("loglik: shapes must be > 0");
  const double aplus = theta[0] + theta[1] + theta[2];
  double lp = detail::dir_block_loglik(theta.first(3), data);
  const double n = static_cast<double>(data.n());

  switch (family) {
    case ModelFamily::Dir2:
      return lp;
    case ModelFamily::Kb2: {
      const double delta = theta[3];
      return lp - delta * data.sum_x1_plus_x2() -
             n * log_f11(theta[0] + theta[1], aplus, -delta, ctl);
    }
    case ModelFamily::NcDir2: {
      const double l1 = theta[3], l2 = theta[4], l3 = theta[5];
      if (l1 < 0 || l2 < 0 || l3 < 0)
        throw DomainError("loglik: non-centralities must be >= 0");
      lp -= n * (l1 + l2 + l3) / 2.0;
      std::size_t i = 0;
      try {
        for (; i < data.n(); ++i) {
          const SimplexPoint& x = data.points()[i];
          lp += log_psi2_3(aplus, theta[0], theta[1], theta[2],
                           l1 / 2.0 * x[0], l2 / 2.0 * x[1],
                           l3 / 2.0 * x.remainder(), ctl);
        }
      } catch (const NonConvergence& e) {
        throw NonConvergence(std::string(e.what()) + " at observation " +
                             std::to_string(i));
      }
      return lp;
    }
    case ModelFamily::CNcDir2: {
      const double l1 = theta[3], l2 = theta[4], l3 = theta[5];
      if (l1 < 0 || l2 < 0 || l3 < 0)
        throw DomainError("loglik: non-centralities must be >= 0");
      std::size_t i = 0;
      try {
        for (; i < data.n(); ++i) {
          const SimplexPoint& x = data.points()[i];
          lp += log_f01(theta[0], l1 / 4.0 * x[0], ctl) +
                log_f01(theta[1], l2 / 4.0 * x[1], ctl) +
                log_f01(theta[2], l3 / 4.0 * x.remainder(), ctl);
        }
      } catch (const NonConvergence& e) {
        throw NonConvergence(std::string(e.what()) + " at observation " +
                             std::to_string(i));
      }
      return lp - n * log_f01(aplus, (l1 + l2 + l3) / 4.0, ctl);
    }
  }
  throw DomainError("loglik: unknown family");
}

inline double loglik(const ModelSpec& spec, std::span<const double> theta,
                     const Dataset2D& data, const SeriesControl& ctl = {}) {
  return loglik(spec.family, theta, data, ctl);
}

// ---------------------------------------------------------------------------
// Maximum-likelihood fitting
// ---------------------------------------------------------------------------

struct FitOptions {
  int starts = 8;
  std::uint64_t seed = 20240801;  // start dispersion only; fits are deterministic
  NelderMeadOptions nm;
  SeriesControl ctl;
  double lambda_floor = 1e-8;
  double snap_tol = 1e-6;
  bool compute_std_errors = true;
};

struct FitReport {
  ModelFamily family = ModelFamily::Dir2;
  std::set<int> constraints;
  std::vector<std::pair<std::string, double>> estimates;   // full vector, pinned included
  std::vector<std::pair<std::string, double>> std_errors;  // free parameters only
  double loglik = kNegInf;
  bool converged = false;
  bool singular_information = false;
  int n_evals = 0;
  int starts_used = 0;

  double estimate(const std::string& name) const {
    for (const auto& [k, v] : estimates)
      if (k == name) return v;
    throw DomainError("FitReport: no estimate named " + name);
  }
  std::optional<double> std_error(const std::string& name) const {
    for (const auto& [k, v] : std_errors)
      if (k == name) return v;
    return std::nullopt;
  }
};

namespace detail {

// Mapping between the free optimization vector (log shapes, log
// non-centralities with an inclusive floor, raw delta) and the full
// original-scale parameter vector.
struct FreeMap {
  const ModelSpec& spec;
  double lambda_floor;
  std::vector<std::size_t> free_idx;

  FreeMap(const ModelSpec& s, double floor) : spec(s), lambda_floor(floor) {
    for (std::size_t i = 0; i < s.full_size(); ++i)
      if (!s.pinned(i)) free_idx.push_back(i);
  }

  std::vector<double> to_theta(const std::vector<double>& u) const {
    std::vector<double> theta(spec.full_size(), 1.0);
    for (std::size_t k = 0; k < free_idx.size(); ++k) {
      std::size_t i = free_idx[k];
      if (spec.is_delta(i)) {
        theta[i] = u[k];
      } else if (spec.is_lambda(i)) {
        theta[i] = std::max(std::exp(u[k]), lambda_floor);
      } else {
        theta[i] = std::exp(u[k]);
      }
    }
    return theta;
  }

  std::vector<double> from_theta(const std::vector<double>& theta) const {
    std::vector<double> u(free_idx.size());
    for (std::size_t k = 0; k < free_idx.size(); ++k) {
      std::size_t i = free_idx[k];
      u[k] = spec.is_delta(i) ? theta[i]
                              : std::log(std::max(theta[i], lambda_floor));
    }
    return u;
  }
};

// Method-of-moments-flavored center for the shape block.
inline std::vector<double> mom_shapes(const Dataset2D& d) {
  double m1 = 0, m2 = 0, q1 = 0;
  for (const auto& p : d.points()) {
    m1 += p[0];
    m2 += p[1];
    q1 += p[0] * p[0];
  }
  const double n = static_cast<double>(d.n());
  m1 /= n;
  m2 /= n;
  double v1 = q1 / n - m1 * m1;
  double total = v1 > 1e-12 ? m1 * (1.0 - m1) / v1 - 1.0 : 3.0;
  total = std::clamp(total, 0.5, 100.0);
  auto clampa = [](double a) { return std::clamp(a, 0.1, 50.0); };
  return {clampa(m1 * total), clampa(m2 * total),
          clampa((1.0 - m1 - m2) * total)};
}

}  // namespace detail

// Multi-start Nelder-Mead maximization of the log-likelihood in the
// reparameterized space, with standard errors from the inverse observed
// information (central finite differences on the original scale).
inline FitReport fit_ml(const ModelSpec& spec, const Dataset2D& data,
                        const FitOptions& opts = {}) {
  detail::FreeMap map(spec, opts.lambda_floor);
  FitReport report;
  report.family = spec.family;
  report.constraints = spec.constraints;
  report.starts_used = opts.starts;

  auto objective = [&](const std::vector<double>& u) -> double {
    try {
      double ll = loglik(spec, map.to_theta(u), data, opts.ctl);
      return std::isfinite(ll) ? -ll : 1e100;
    } catch (const NonConvergence&) {
      return 1e100;
    } catch (const DomainError&) {
      return 1e100;
    }
  };

  // Dispersed deterministic starts around a method-of-moments-flavored
  // center: log-space factors 1/4 .. 4 with seeded jitter.
  std::vector<double> center(spec.full_size(), 1.0);
  {
    auto shapes = detail::mom_shapes(data);
    for (int i = 0; i < 3; ++i) center[i] = shapes[i];
    for (std::size_t i = 3; i < spec.full_size(); ++i)
      center[i] = spec.is_delta(i) ? 0.0 : 2.0;
  }

  RandomStream rng(opts.seed);
  NelderMeadResult best;
  bool any_converged = false;
  for (int s = 0; s < std::max(1, opts.starts); ++s) {
    std::vector<double> theta0 = center;
    if (s > 0) {
      double t = opts.starts > 2 ? static_cast<double>(s - 1) / (opts.starts - 2) : 0.5;
      double factor = std::pow(4.0, 2.0 * t - 1.0);
      for (std::size_t i = 0; i < theta0.size(); ++i) {
        if (spec.pinned(i)) continue;
        if (spec.is_delta(i)) {
          theta0[i] = 0.5 * rng.normal();
        } else {
          theta0[i] = theta0[i] * factor * std::exp(0.35 * rng.normal());
        }
      }
    }
    NelderMeadResult run = nelder_mead(objective, map.from_theta(theta0), opts.nm);
    report.n_evals += run.evals;
    if (run.f < best.f) best = std::move(run);
    any_converged = any_converged || run.converged;
  }
  report.converged = any_converged && best.f < 1e99;

  std::vector<double> theta = map.to_theta(best.x);

  // Snap near-floor non-centralities to exactly zero when the profile
  // improvement over lambda = 0 is negligible.
  if (report.converged) {
    double ll_best = -best.f;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      if (!spec.is_lambda(i) || theta[i] == 0.0 || theta[i] > 1e-3) continue;
      std::vector<double> theta0 = theta;
      theta0[i] = 0.0;
      try {
        double ll0 = loglik(spec, theta0, data, opts.ctl);
        if (ll_best - ll0 < opts.snap_tol) {
          theta = theta0;
          ll_best = std::max(ll0, ll_best - opts.snap_tol);
        }
      } catch (...) {
      }
    }
  }

  try {
    report.loglik = loglik(spec, theta, data, opts.ctl);
  } catch (...) {
    report.loglik = -best.f;
  }

  auto names = spec.param_names();
  for (std::size_t i = 0; i < theta.size(); ++i)
    report.estimates.emplace_back(names[i], theta[i]);

  if (!report.converged || !opts.compute_std_errors) return report;

  // Observed information over the free coordinates that sit strictly inside
  // the parameter space; boundary coordinates (snapped lambdas) carry no SE.
  std::vector<std::size_t> se_idx;
  std::vector<double> h;
  for (std::size_t i : map.free_idx) {
    double hi = std::max(1e-4, 1e-4 * std::abs(theta[i]));
    bool lower_bounded = !spec.is_delta(i);
    if (lower_bounded && theta[i] - hi <= 0.0) continue;
    se_idx.push_back(i);
    h.push_back(hi);
  }
  if (se_idx.empty()) return report;

  auto ll_at = [&](const std::vector<double>& th) -> double {
    return loglik(spec, th, data, opts.ctl);
  };
  const std::size_t m = se_idx.size();
  std::vector<double> info(m * m, 0.0);
  try {
    double f0 = ll_at(theta);
    for (std::size_t a = 0; a < m; ++a) {
      std::vector<double> tp = theta, tm = theta;
      tp[se_idx[a]] += h[a];
      tm[se_idx[a]] -= h[a];
      info[a * m + a] = -(ll_at(tp) - 2.0 * f0 + ll_at(tm)) / (h[a] * h[a]);
      for (std::size_t b = a + 1; b < m; ++b) {
        std::vector<double> tpp = theta, tpm = theta, tmp = theta, tmm = theta;
        tpp[se_idx[a]] += h[a];
        tpp[se_idx[b]] += h[b];
        tpm[se_idx[a]] += h[a];
        tpm[se_idx[b]] -= h[b];
        tmp[se_idx[a]] -= h[a];
        tmp[se_idx[b]] += h[b];
        tmm[se_idx[a]] -= h[a];
        tmm[se_idx[b]] -= h[b];
        double mixed = -(ll_at(tpp) - ll_at(tpm) - ll_at(tmp) + ll_at(tmm)) /
                       (4.0 * h[a] * h[b]);
        info[a * m + b] = info[b * m + a] = mixed;
      }
    }
  } catch (...) {
    report.singular_information = true;
    return report;
  }

  if (!invert_spd(info, m)) {
    report.singular_information = true;
    return report;
  }
  for (std::size_t a = 0; a < m; ++a)
    report.std_errors.emplace_back(names[se_idx[a]], std::sqrt(info[a * m + a]));
  return report;
}

// ---------------------------------------------------------------------------
// Likelihood-ratio testing and model selection
// ---------------------------------------------------------------------------

struct LrReport {
  double w = 0.0;
  int df = 0;
  double p_value = 1.0;
  double l0 = kNegInf;
  double l1 = kNegInf;
  bool optimizer_warning = false;  // raw w negative beyond slack
};

inline LrReport lr_test(const ModelSpec& spec, const Dataset2D& data,
                        const FitOptions& opts = {}) {
  if (spec.constraints.empty())
    throw DomainError("lr_test: constraint set must be nonempty");
  FitReport constrained = fit_ml(spec, data, opts);
  FitReport unconstrained = fit_ml(ModelSpec(spec.family), data, opts);
  LrReport out;
  out.l0 = constrained.loglik;
  out.l1 = unconstrained.loglik;
  out.df = static_cast<int>(spec.constraints.size());
  double raw = -2.0 * (out.l0 - out.l1);
  out.optimizer_warning = raw < -1e-6;
  out.w = std::max(0.0, raw);
  out.p_value = chisq_sf(out.df, out.w);
  return out;
}

struct HypothesisResult {
  ModelSpec spec;
  LrReport lr;
};

// The four-hypothesis battery: all three shapes pinned, then each pair.
inline std::vector<HypothesisResult> lr_battery(ModelFamily family,
                                                const Dataset2D& data,
                                                const FitOptions& opts = {}) {
  FitReport unconstrained = fit_ml(ModelSpec(family), data, opts);
  const std::vector<std::set<int>> hypotheses = {
      {1, 2, 3}, {1, 2}, {1, 3}, {2, 3}};
  std::vector<HypothesisResult> out;
  for (const auto& h : hypotheses) {
    ModelSpec spec(family, h);
    FitReport constrained = fit_ml(spec, data, opts);
    LrReport lr;
    lr.l0 = constrained.loglik;
    lr.l1 = unconstrained.loglik;
    lr.df = static_cast<int>(h.size());
    double raw = -2.0 * (lr.l0 - lr.l1);
    lr.optimizer_warning = raw < -1e-6;
    lr.w = std::max(0.0, raw);
    lr.p_value = chisq_sf(lr.df, lr.w);
    out.push_back({std::move(spec), lr});
  }
  return out;
}

// Selection rule: reject-all picks the unconstrained model; otherwise the
// non-rejected hypothesis with fewest free parameters, ties broken by the
// highest p-value.
inline ModelSpec select_model(ModelFamily family,
                              const std::vector<HypothesisResult>& results,
                              double alpha = 0.05) {
  if (results.empty()) throw DomainError("select_model: no hypotheses");
  const HypothesisResult* chosen = nullptr;
  for (const auto& r : results) {
    if (r.lr.p_value < alpha) continue;
    if (!chosen || r.spec.free_size() < chosen->spec.free_size() ||
        (r.spec.free_size() == chosen->spec.free_size() &&
         r.lr.p_value > chosen->lr.p_value))
      chosen = &r;
  }
  return chosen ? chosen->spec : ModelSpec(family);
}

// ---------------------------------------------------------------------------
// Data ingestion
// ---------------------------------------------------------------------------

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row)
      : std::runtime_error(what + " (row " + std::to_string(row) + ")"),
        row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class EmptyAfterFilter : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IngestResult {
  std::vector<SimplexPoint> points;
  std::size_t rows_read = 0;
  std::size_t dropped_boundary = 0;
  std::size_t dropped_lower_triangle = 0;

  Dataset2D dataset() const { return Dataset2D(points); }
};

namespace detail {

inline bool parse_two_numbers(const std::string& line, double& a, double& b) {
  std::string s = line;
  for (char& c : s)
    if (c == ',' || c == ';' || c == '\t') c = ' ';
  std::istringstream in(s);
  std::string rest;
  if (!(in >> a >> b)) return false;
  if (in >> rest) return false;  // extra fields
  return true;
}

}  // namespace detail

// Reads a two-column CSV of square coordinates, optionally rescaled by a
// "# bbox xmin ymin xmax ymax" comment line, keeps the points strictly inside
// the upper triangle and maps them onto the simplex via
// (x1, x2) -> (1 - x2, 1 - x1). Lower-triangle and boundary points are
// dropped and counted.
inline IngestResult ingest_square_csv(std::istream& in) {
  IngestResult out;
  std::string line;
  std::size_t row = 0;
  bool first_data_line = true;
  bool have_bbox = false;
  double bx0 = 0, by0 = 0, bx1 = 1, by1 = 1;

  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string tag;
      if (hs >> tag && tag == "bbox") {
        if (!(hs >> bx0 >> by0 >> bx1 >> by1) || !(bx1 > bx0) || !(by1 > by0))
          throw ParseError("malformed bbox header", row);
        have_bbox = true;
      }
      continue;
    }
    double a = 0, b = 0;
    if (!detail::parse_two_numbers(line, a, b)) {
      if (first_data_line) {  // a column-name header row
        first_data_line = false;
        continue;
      }
      throw ParseError("expected two numeric columns", row);
    }
    first_data_line = false;
    ++out.rows_read;
    if (have_bbox) {
      a = (a - bx0) / (bx1 - bx0);
      b = (b - by0) / (by1 - by0);
    }
    if (a < 0 || a > 1 || b < 0 || b > 1)
      throw ParseError("coordinate outside the unit square", row);
    if (a + b < 1.0) {
      ++out.dropped_lower_triangle;
      continue;
    }
    if (a + b == 1.0 || a >= 1.0 || b >= 1.0) {
      ++out.dropped_boundary;
      continue;
    }
    out.points.emplace_back(std::vector<double>{1.0 - b, 1.0 - a});
  }
  if (out.points.empty())
    throw EmptyAfterFilter("ingest_square_csv: no points retained");
  return out;
}

inline IngestResult ingest_square_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DomainError("ingest_square_csv: cannot open " + path);
  return ingest_square_csv(f);
}

// Reads an already-on-the-simplex two-column CSV; boundary-touching rows are
// rejected with their row number rather than silently adjusted.
inline std::vector<SimplexPoint> read_simplex_csv(std::istream& in) {
  std::vector<SimplexPoint> pts;
  std::string line;
  std::size_t row = 0;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    if (line[0] == '#') continue;
    double a = 0, b = 0;
    if (!detail::parse_two_numbers(line, a, b)) {
      if (first_data_line) {
        first_data_line = false;
        continue;
      }
      throw ParseError("expected two numeric columns", row);
    }
    first_data_line = false;
    if (!(a > 0 && b > 0 && a + b < 1))
      throw ParseError("point not strictly inside the simplex", row);
    pts.emplace_back(std::vector<double>{a, b});
  }
  if (pts.empty()) throw EmptyAfterFilter("read_simplex_csv: no data rows");
  return pts;
}

inline std::vector<SimplexPoint> read_simplex_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DomainError("read_simplex_csv: cannot open " + path);
  return read_simplex_csv(f);
}

}  // namespace cncdir
