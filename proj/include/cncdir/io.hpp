#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cncdir/bench.hpp"
#include "cncdir/common.hpp"
#include "cncdir/inference.hpp"
#include "cncdir/params.hpp"

namespace cncdir {

inline constexpr const char* kToolVersion = "0.1.0";

// Family-agnostic parameter bundle matching the shared JSON schema
// {"alpha": [...], "lambda": [...], "delta": ...}.
struct GenericParams {
  std::vector<double> alpha;
  std::vector<double> lambda;  // empty when absent
  std::optional<double> delta;

  DirParams dir() const { return DirParams(alpha); }
  Kb2Params kb2() const { return Kb2Params(alpha, delta.value_or(0.0)); }
  NcDirParams ncdir() const {
    return NcDirParams(alpha, lambda.empty()
                                  ? std::vector<double>(alpha.size(), 0.0)
                                  : lambda);
  }
  CNcDirParams cncdir() const {
    return CNcDirParams(alpha, lambda.empty()
                                   ? std::vector<double>(alpha.size(), 0.0)
                                   : lambda);
  }
};

inline nlohmann::json to_json(const GenericParams& p) {
  nlohmann::json j;
  j["alpha"] = p.alpha;
  if (!p.lambda.empty()) j["lambda"] = p.lambda;
  if (p.delta) j["delta"] = *p.delta;
  return j;
}

// Accepts either a bare params object or any report that embeds one under
// "params" (fit reports round-trip into the other subcommands unchanged).
inline GenericParams params_from_json(const nlohmann::json& j) {
  const nlohmann::json* src = &j;
  if (!j.contains("alpha") && j.contains("params")) src = &j.at("params");
  if (!src->contains("alpha"))
    throw DomainError("params JSON: missing \"alpha\"");
  GenericParams p;
  p.alpha = src->at("alpha").get<std::vector<double>>();
  if (src->contains("lambda"))
    p.lambda = src->at("lambda").get<std::vector<double>>();
  if (src->contains("delta")) p.delta = src->at("delta").get<double>();
  return p;
}

inline GenericParams load_params(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DomainError("cannot open params file: " + path);
  nlohmann::json j;
  f >> j;
  return params_from_json(j);
}

inline GenericParams params_from_report(const FitReport& r) {
  GenericParams p;
  p.alpha = {r.estimate("a1"), r.estimate("a2"), r.estimate("a3")};
  if (r.family == ModelFamily::NcDir2 || r.family == ModelFamily::CNcDir2)
    p.lambda = {r.estimate("l1"), r.estimate("l2"), r.estimate("l3")};
  if (r.family == ModelFamily::Kb2) p.delta = r.estimate("delta");
  return p;
}

inline nlohmann::json to_json(const FitReport& r) {
  nlohmann::json j;
  j["family"] = family_name(r.family);
  j["constraints"] = std::vector<int>(r.constraints.begin(), r.constraints.end());
  nlohmann::json est, se;
  for (const auto& [k, v] : r.estimates) est[k] = v;
  for (const auto& [k, v] : r.std_errors) se[k] = v;
  j["estimates"] = est;
  j["std_errors"] = se;
  j["loglik"] = r.loglik;
  j["converged"] = r.converged;
  j["singular_information"] = r.singular_information;
  j["n_evals"] = r.n_evals;
  j["starts_used"] = r.starts_used;
  j["params"] = to_json(params_from_report(r));
  return j;
}

inline nlohmann::json to_json(const LrReport& lr) {
  return {{"w", lr.w},           {"df", lr.df},
          {"p", lr.p_value},     {"l0", lr.l0},
          {"l1", lr.l1},         {"optimizer_warning", lr.optimizer_warning}};
}

inline nlohmann::json to_json(const BenchResult& r) {
  nlohmann::json j;
  j["alpha"] = r.stratum.alpha;
  j["lambda"] = r.stratum.lambda;
  j["N"] = r.stratum.series_size;
  j["replications"] = r.stratum.replications;
  j["mean_cncdir_s"] = r.mean_cncdir;
  j["sd_cncdir_s"] = r.sd_cncdir;
  j["mean_ncdir_s"] = r.mean_ncdir;
  j["sd_ncdir_s"] = r.sd_ncdir;
  j["z"] = r.z_stat;
  j["p"] = r.p_value;
  j["speedup_ratio"] = r.speedup_ratio;
  j["failed"] = r.failed;
  j["valid"] = r.valid;
  return j;
}

// Reproducibility metadata stamped on every output.
inline nlohmann::json run_metadata(std::uint64_t seed, const SeriesControl& ctl) {
  return {{"tool", "cncdir"},
          {"version", kToolVersion},
          {"seed", seed},
          {"tol", ctl.tol},
          {"maxiter", ctl.maxiter}};
}

inline std::string csv_metadata_header(std::uint64_t seed, const SeriesControl& ctl) {
  std::string h;
  h += "# tool=cncdir version=";
  h += kToolVersion;
  h += "\n# seed=" + std::to_string(seed) + " tol=" + std::to_string(ctl.tol) +
       " maxiter=" + std::to_string(ctl.maxiter) + "\n";
  return h;
}

}  // namespace cncdir
