// Command-line front end: density grids, sampling, moments, ML fitting,
// LR batteries, the timing benchmark, and square-to-simplex ingestion.
//
// Exit codes: 0 success, 2 domain/input errors, 3 series or fit
// non-convergence.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cncdir/cncdir.hpp"

namespace {

using namespace cncdir;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitDomain = 2;
constexpr int kExitNonConvergence = 3;

// Environment overrides for the default series contract.
SeriesControl env_series_control() {
  SeriesControl ctl;
  if (const char* t = std::getenv("CNCDIR_TOL")) ctl.tol = std::atof(t);
  if (const char* m = std::getenv("CNCDIR_MAXITER")) ctl.maxiter = std::atoi(m);
  ctl.validate();
  return ctl;
}

void write_text(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream f(path);
  if (!f) throw DomainError("cannot open output file: " + path);
  f << body;
}

void write_json(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

struct GridArgs {
  std::string model = "cncdir";
  std::string params_path;
  double step = 1.0 / 200.0;
  std::string out;
  int threads = 1;
};

int cmd_density_grid(const GridArgs& a, const SeriesControl& ctl) {
  GenericParams gp = load_params(a.params_path);
  ModelFamily fam = family_from_name(a.model);
  auto logpdf = [&](const SimplexPoint& x) -> double {
    switch (fam) {
      case ModelFamily::Dir2: return dir_logpdf(gp.dir(), x);
      case ModelFamily::Kb2: return kb2_logpdf(gp.kb2(), x, ctl);
      case ModelFamily::NcDir2: return ncdir_logpdf(gp.ncdir(), x, ctl);
      case ModelFamily::CNcDir2: return cncdir_logpdf(gp.cncdir(), x, ctl);
    }
    return kNaN;
  };

  if (!(a.step > 0 && a.step < 0.5)) throw DomainError("step must be in (0, 0.5)");
  const double h = a.step;
  std::vector<std::pair<double, double>> nodes;
  for (double x1 = h / 2; x1 < 1.0; x1 += h)
    for (double x2 = h / 2; x1 + x2 <= 1.0 - h / 2; x2 += h)
      nodes.emplace_back(x1, x2);

  std::vector<double> pdf(nodes.size(), kNaN);
  std::atomic<long> bad{0};
  auto worker = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      try {
        pdf[i] = std::exp(logpdf(SimplexPoint({nodes[i].first, nodes[i].second})));
      } catch (const NonConvergence&) {
        ++bad;  // flagged row; the run continues
      }
    }
  };
  int nthreads = std::max(1, a.threads);
  if (nthreads == 1) {
    worker(0, nodes.size());
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (nodes.size() + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
      std::size_t lo = t * chunk, hi = std::min(nodes.size(), lo + chunk);
      if (lo < hi) pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  std::ostringstream os;
  os << csv_metadata_header(0, ctl);
  os << "# model=" << a.model << " step=" << h << "\n";
  os << "x1,x2,pdf\n";
  char buf[96];
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.12g\n", nodes[i].first,
                  nodes[i].second, pdf[i]);
    os << buf;
  }
  if (bad > 0) os << "# nonconvergent_rows=" << bad << "\n";
  write_text(a.out, os.str());
  if (bad > 0)
    std::cerr << "warning: " << bad << " grid rows failed to converge\n";
  return kExitOk;
}

struct SampleArgs {
  std::string model = "cncdir";
  std::string params_path;
  long n = 100;
  std::uint64_t seed = 1;
  std::string representation = "mixture";
  std::string out;
};

int cmd_sample(const SampleArgs& a, const SeriesControl& ctl) {
  (void)ctl;
  GenericParams gp = load_params(a.params_path);
  ModelFamily fam = family_from_name(a.model);
  if (a.n < 1) throw DomainError("sample: n must be >= 1");
  RandomStream rng(a.seed);

  auto draw = [&]() -> SimplexPoint {
    switch (fam) {
      case ModelFamily::Dir2: return sample_dirichlet(gp.dir(), rng);
      case ModelFamily::NcDir2: return sample_ncdir(gp.ncdir(), rng);
      case ModelFamily::CNcDir2:
        return a.representation == "composition"
                   ? sample_cncdir_composition(gp.cncdir(), rng)
                   : sample_cncdir_mixture(gp.cncdir(), rng);
      default:
        throw DomainError("sample: model must be dir, ncdir or cncdir");
    }
  };

  std::ostringstream os;
  os << csv_metadata_header(a.seed, ctl);
  os << "# model=" << a.model << " representation=" << a.representation << "\n";
  std::size_t dim = gp.alpha.size() - 1;
  for (std::size_t d = 0; d < dim; ++d) os << (d ? ",x" : "x") << d + 1;
  os << "\n";
  char buf[64];
  for (long i = 0; i < a.n; ++i) {
    SimplexPoint x = draw();
    for (std::size_t d = 0; d < x.dim(); ++d) {
      std::snprintf(buf, sizeof buf, "%.12g", x[d]);
      os << (d ? "," : "") << buf;
    }
    os << "\n";
  }
  write_text(a.out, os.str());
  return kExitOk;
}

struct FitArgs {
  std::string model = "cncdir";
  std::string constrain;
  std::string data_path;
  std::string out;
  std::uint64_t seed = 20240801;
  int starts = 8;
  bool ingest_square = false;
};

std::set<int> parse_constraints(const std::string& s) {
  std::set<int> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    if (tok.size() == 2 && tok[0] == 'a' && tok[1] >= '1' && tok[1] <= '3')
      out.insert(tok[1] - '0');
    else
      throw DomainError("bad constraint token (expected a1,a2,a3): " + tok);
  }
  return out;
}

Dataset2D load_dataset(const std::string& path, bool ingest_square) {
  if (ingest_square) {
    IngestResult r = ingest_square_csv(path);
    std::cerr << "ingest: " << r.rows_read << " rows, kept " << r.points.size()
              << ", dropped " << r.dropped_lower_triangle << " lower-triangle + "
              << r.dropped_boundary << " boundary\n";
    return r.dataset();
  }
  return Dataset2D(read_simplex_csv(path));
}

int cmd_fit(const FitArgs& a, const SeriesControl& ctl) {
  Dataset2D data = load_dataset(a.data_path, a.ingest_square);
  ModelSpec spec(family_from_name(a.model), parse_constraints(a.constrain));
  FitOptions opts;
  opts.ctl = ctl;
  opts.seed = a.seed;
  opts.starts = a.starts;
  FitReport r = fit_ml(spec, data, opts);
  json j = to_json(r);
  j["n"] = data.n();
  j["meta"] = run_metadata(a.seed, ctl);
  write_json(a.out, j);
  return r.converged ? kExitOk : kExitNonConvergence;
}

struct LrArgs {
  std::string model = "cncdir";
  std::string data_path;
  std::string out;
  std::string format = "json";
  std::uint64_t seed = 20240801;
  int starts = 8;
  double alpha_level = 0.05;
  bool ingest_square = false;
};

int cmd_lr(const LrArgs& a, const SeriesControl& ctl) {
  Dataset2D data = load_dataset(a.data_path, a.ingest_square);
  ModelFamily fam = family_from_name(a.model);
  FitOptions opts;
  opts.ctl = ctl;
  opts.seed = a.seed;
  opts.starts = a.starts;
  auto battery = lr_battery(fam, data, opts);
  ModelSpec chosen = select_model(fam, battery, a.alpha_level);

  auto hname = [](const std::set<int>& c) {
    std::string s;
    for (int i : c) s += (s.empty() ? "a" : "=a") + std::to_string(i);
    return s + "=1";
  };

  if (a.format == "md") {
    std::ostringstream os;
    os << "| H0 | l0 | l1 | w | df | p |\n|---|---|---|---|---|---|\n";
    char buf[160];
    for (const auto& h : battery) {
      std::snprintf(buf, sizeof buf, "| %s | %.4f | %.4f | %.4f | %d | %.4f |\n",
                    hname(h.spec.constraints).c_str(), h.lr.l0, h.lr.l1, h.lr.w,
                    h.lr.df, h.lr.p_value);
      os << buf;
    }
    os << "\nselected: " << family_name(fam) << " with "
       << (chosen.constraints.empty() ? std::string("no constraints")
                                      : hname(chosen.constraints))
       << "\n";
    write_text(a.out, os.str());
  } else {
    json j;
    j["family"] = family_name(fam);
    j["meta"] = run_metadata(a.seed, ctl);
    j["hypotheses"] = json::array();
    for (const auto& h : battery) {
      json hj = to_json(h.lr);
      hj["constraints"] =
          std::vector<int>(h.spec.constraints.begin(), h.spec.constraints.end());
      j["hypotheses"].push_back(hj);
    }
    j["selected_constraints"] =
        std::vector<int>(chosen.constraints.begin(), chosen.constraints.end());
    write_json(a.out, j);
  }
  return kExitOk;
}

struct MomentsArgs {
  std::string params_path;
  long r1 = 1;
  long r2 = 1;
  std::string out;
};

int cmd_moments(const MomentsArgs& a, const SeriesControl& ctl) {
  GenericParams gp = load_params(a.params_path);
  CNcDirParams p = gp.cncdir();
  MomentOrder order(a.r1, a.r2);
  json j;
  j["order"] = {order.r1, order.r2};
  j["closed_form"] = cncdir_mixed_moment(p, order, ctl);
  auto oracle = cncdir_moment_series_oracle(p, order, 150, ctl);
  j["oracle"] = {{"mw_series", oracle.mw_series},
                 {"f12_series", oracle.f12_series},
                 {"tail_bound", oracle.tail_bound}};
  auto m11 = cncdir_moment_11(p, ctl);
  j["reduced_11"] = {{"three_term", m11.three_term}, {"reduced", m11.reduced}};
  j["meta"] = run_metadata(0, ctl);
  write_json(a.out, j);
  return kExitOk;
}

struct BenchArgs {
  std::string grid = "table4";
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "json";
  int reps = 30;
};

int cmd_bench(const BenchArgs& a, const SeriesControl& ctl) {
  BenchOptions opts;
  opts.fit.ctl = ctl;
  std::vector<BenchResult> results;
  if (a.grid == "table4") {
    results = run_table4(a.seed, opts, a.reps);
  } else {
    std::ifstream f(a.grid);
    if (!f) throw DomainError("cannot open bench grid file: " + a.grid);
    json spec;
    f >> spec;
    std::uint64_t k = 0;
    for (const auto& row : spec.at("strata")) {
      BenchStratum s(row.at("alpha").get<std::vector<double>>(),
                     row.at("lambda").get<std::vector<double>>(),
                     row.at("N").get<int>(),
                     row.value("replications", a.reps));
      results.push_back(run_stratum(s, a.seed + 0x9e3779b97f4a7c15ULL * k++, opts));
    }
  }

  if (a.format == "md") {
    std::ostringstream os;
    os << "| alpha | lambda | N | mean CNcDir (s) | mean NcDir (s) | ratio | p |\n"
       << "|---|---|---|---|---|---|---|\n";
    char buf[256];
    for (const auto& r : results) {
      std::snprintf(buf, sizeof buf,
                    "| %.1f,%.1f,%.1f | %.1f,%.1f,%.1f | %d | %.4f (%.4f) | "
                    "%.4f (%.4f) | %.1f | %.2e |\n",
                    r.stratum.alpha[0], r.stratum.alpha[1], r.stratum.alpha[2],
                    r.stratum.lambda[0], r.stratum.lambda[1], r.stratum.lambda[2],
                    r.stratum.series_size, r.mean_cncdir, r.sd_cncdir,
                    r.mean_ncdir, r.sd_ncdir, r.speedup_ratio, r.p_value);
      os << buf;
    }
    write_text(a.out, os.str());
  } else {
    json j;
    j["meta"] = run_metadata(a.seed, ctl);
    j["results"] = json::array();
    for (const auto& r : results) j["results"].push_back(to_json(r));
    write_json(a.out, j);
  }
  return kExitOk;
}

struct IngestArgs {
  std::string in_path;
  std::string out;
};

int cmd_ingest(const IngestArgs& a, const SeriesControl& ctl) {
  IngestResult r = ingest_square_csv(a.in_path);
  std::ostringstream os;
  os << csv_metadata_header(0, ctl);
  os << "# rows_read=" << r.rows_read << " kept=" << r.points.size()
     << " dropped_lower_triangle=" << r.dropped_lower_triangle
     << " dropped_boundary=" << r.dropped_boundary << "\n";
  os << "x1,x2\n";
  char buf[64];
  for (const auto& p : r.points) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", p[0], p[1]);
    os << buf;
  }
  write_text(a.out, os.str());
  std::cerr << "ingest: kept " << r.points.size() << " of " << r.rows_read
            << " rows\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional Non-central Dirichlet toolkit"};
  app.require_subcommand(1);

  GridArgs grid;
  auto* cg = app.add_subcommand("density-grid", "evaluate a density on a simplex lattice");
  cg->add_option("--model", grid.model, "dir|kb2|ncdir|cncdir")->capture_default_str();
  cg->add_option("--params", grid.params_path, "params JSON file")->required();
  cg->add_option("--step", grid.step, "lattice step")->capture_default_str();
  cg->add_option("--out", grid.out, "output CSV ('-' for stdout)");
  cg->add_option("--threads", grid.threads, "evaluation threads")->capture_default_str();

  SampleArgs sample;
  auto* cs = app.add_subcommand("sample", "draw from a model");
  cs->add_option("--model", sample.model, "dir|ncdir|cncdir")->capture_default_str();
  cs->add_option("--params", sample.params_path, "params JSON file")->required();
  cs->add_option("--n", sample.n, "number of draws")->capture_default_str();
  cs->add_option("--seed", sample.seed, "RNG seed")->capture_default_str();
  cs->add_option("--representation", sample.representation, "mixture|composition")
      ->capture_default_str();
  cs->add_option("--out", sample.out, "output CSV ('-' for stdout)");

  FitArgs fit;
  auto* cf = app.add_subcommand("fit", "maximum-likelihood fit");
  cf->add_option("--model", fit.model, "dir|kb2|ncdir|cncdir")->capture_default_str();
  cf->add_option("--constrain", fit.constrain, "comma list of shapes pinned to 1 (a1,a2,a3)");
  cf->add_option("--data", fit.data_path, "two-column CSV of simplex points")->required();
  cf->add_option("--out", fit.out, "report JSON ('-' for stdout)");
  cf->add_option("--seed", fit.seed, "multi-start seed")->capture_default_str();
  cf->add_option("--starts", fit.starts, "number of starts")->capture_default_str();
  cf->add_flag("--ingest-square", fit.ingest_square,
               "treat --data as raw square coordinates and ingest first");

  LrArgs lr;
  auto* cl = app.add_subcommand("lr", "four-hypothesis LR battery");
  cl->add_option("--model", lr.model, "dir|kb2|ncdir|cncdir")->capture_default_str();
  cl->add_option("--data", lr.data_path, "two-column CSV of simplex points")->required();
  cl->add_option("--out", lr.out, "output file ('-' for stdout)");
  cl->add_option("--format", lr.format, "json|md")->capture_default_str();
  cl->add_option("--seed", lr.seed, "multi-start seed")->capture_default_str();
  cl->add_option("--starts", lr.starts, "number of starts")->capture_default_str();
  cl->add_option("--alpha", lr.alpha_level, "selection level")->capture_default_str();
  cl->add_flag("--ingest-square", lr.ingest_square,
               "treat --data as raw square coordinates and ingest first");

  MomentsArgs mom;
  auto* cm = app.add_subcommand("moments", "closed-form and oracle mixed moments");
  cm->add_option("--params", mom.params_path, "params JSON file")->required();
  cm->add_option("--r1", mom.r1, "first order")->capture_default_str();
  cm->add_option("--r2", mom.r2, "second order")->capture_default_str();
  cm->add_option("--out", mom.out, "output JSON ('-' for stdout)");

  BenchArgs bench;
  auto* cb = app.add_subcommand("bench", "paired fitting-time study");
  cb->add_option("--grid", bench.grid, "table4 or a custom JSON grid file")
      ->capture_default_str();
  cb->add_option("--seed", bench.seed, "data seed")->capture_default_str();
  cb->add_option("--out", bench.out, "output file ('-' for stdout)");
  cb->add_option("--format", bench.format, "json|md")->capture_default_str();
  cb->add_option("--reps", bench.reps, "replications per stratum")->capture_default_str();

  IngestArgs ingest;
  auto* ci = app.add_subcommand("ingest", "square CSV -> simplex CSV");
  ci->add_option("--in", ingest.in_path, "input CSV")->required();
  ci->add_option("--out", ingest.out, "output CSV ('-' for stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    const SeriesControl ctl = env_series_control();
    if (*cg) return cmd_density_grid(grid, ctl);
    if (*cs) return cmd_sample(sample, ctl);
    if (*cf) return cmd_fit(fit, ctl);
    if (*cl) return cmd_lr(lr, ctl);
    if (*cm) return cmd_moments(mom, ctl);
    if (*cb) return cmd_bench(bench, ctl);
    if (*ci) return cmd_ingest(ingest, ctl);
  } catch (const NonConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const IterationCap& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitOk;
}
