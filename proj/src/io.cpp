// Copyright 2026 rsjam contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rsjam/harness.hpp"

#include <fmt/core.h>
#include <fmt/os.h>

#include <cmath>
#include <filesystem>
#include <initializer_list>

namespace rsjam {

namespace {

template <class T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char c : s) {
    if (c == '"') o += '"';
    o += c == '\n' ? ' ' : c;
  }
  return o + "\"";
}

int b(bool v) { return v ? 1 : 0; }

// Misspelled keys would otherwise fall back to defaults without notice.
void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
  }
}

}  // namespace

SolverConfig solver_from_json(const json& j) {
  SolverConfig s;
  reject_unknown(j,
                 {"zeta", "eps_r", "eps_a", "max_outer", "max_inner", "saa_samples", "randomization_count", "sdp_tol",
                  "sdp_max_iter", "multi_start", "dual_projection", "scheme"},
                 "solver");
  try {
    get_if(j, "zeta", s.zeta);
    get_if(j, "eps_r", s.eps_r);
    get_if(j, "eps_a", s.eps_a);
    get_if(j, "max_outer", s.max_outer);
    get_if(j, "max_inner", s.max_inner);
    get_if(j, "saa_samples", s.saa_samples);
    get_if(j, "randomization_count", s.randomization_count);
    get_if(j, "sdp_tol", s.sdp_tol);
    get_if(j, "sdp_max_iter", s.sdp_max_iter);
    get_if(j, "multi_start", s.multi_start);
    get_if(j, "dual_projection", s.dual_projection);
    if (j.contains("scheme")) s.scheme = scheme_from_string(j.at("scheme").get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  s.validate();
  return s;
}

json solver_to_json(const SolverConfig& s) {
  return json{{"zeta", s.zeta},
              {"eps_r", s.eps_r},
              {"eps_a", s.eps_a},
              {"max_outer", s.max_outer},
              {"max_inner", s.max_inner},
              {"saa_samples", s.saa_samples},
              {"randomization_count", s.randomization_count},
              {"sdp_tol", s.sdp_tol},
              {"sdp_max_iter", s.sdp_max_iter},
              {"multi_start", s.multi_start},
              {"dual_projection", s.dual_projection},
              {"scheme", to_string(s.scheme)}};
}

ExperimentSpec experiment_from_json(const json& doc) {
  ExperimentSpec e;
  reject_unknown(doc,
                 {"Nt", "K", "L", "M", "Nr", "N", "Sp", "Np", "Pt_bar", "N0", "mu", "alpha_i", "alpha_p", "rho", "Rth",
                  "scheme", "delay_spread", "subcarrier_spacing", "seed", "au_correlation", "au_covariance_samples",
                  "solver", "experiment", "ber"},
                 "config");
  e.scenario = scenario_from_json(doc);
  e.solver = solver_from_json(doc.value("solver", json::object()));
  e.solver.scheme = e.scenario.scheme;
  const json j = doc.value("experiment", json::object());
  reject_unknown(j, {"sweep", "grid", "realizations", "schemes", "jamming", "interference_constraints", "output_dir"},
                 "experiment");
  try {
    if (j.contains("sweep")) e.sweep = sweep_kind_from_string(j.at("sweep").get<std::string>());
    get_if(j, "grid", e.grid);
    get_if(j, "realizations", e.realizations);
    if (j.contains("schemes")) {
      e.schemes.clear();
      for (const auto& s : j.at("schemes")) e.schemes.push_back(scheme_from_string(s.get<std::string>()));
    }
    if (j.contains("jamming")) e.jamming = jamming_mode_from_string(j.at("jamming").get<std::string>());
    get_if(j, "interference_constraints", e.interference_constraints);
    get_if(j, "output_dir", e.output_dir);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("experiment: ") + ex.what());
  }
  e.validate();
  return e;
}

json experiment_to_json(const ExperimentSpec& e) {
  json schemes = json::array();
  for (Scheme s : e.schemes) schemes.push_back(to_string(s));
  return json{{"sweep", to_string(e.sweep)},
              {"grid", e.grid},
              {"realizations", e.realizations},
              {"schemes", schemes},
              {"jamming", to_string(e.jamming)},
              {"interference_constraints", e.interference_constraints}};
}

BerSpec ber_from_json(const json& j) {
  BerSpec b;
  reject_unknown(j,
                 {"Es_grid", "Es_dB", "bits_per_point", "flat_channel_model", "sigma_exponent", "perfect_estimate",
                  "Pt_dBW"},
                 "ber");
  try {
    if (j.contains("Es_grid") && j.contains("Es_dB")) throw ConfigError("ber: give Es_grid or Es_dB, not both");
    get_if(j, "Es_grid", b.Es_grid);
    if (j.contains("Es_dB"))
      for (double db : j.at("Es_dB").get<std::vector<double>>()) b.Es_grid.push_back(std::pow(10.0, db / 10.0));
    if (b.Es_grid.empty())
      for (double db = 0.0; db <= 30.0; db += 5.0) b.Es_grid.push_back(std::pow(10.0, db / 10.0));
    get_if(j, "bits_per_point", b.bits_per_point);
    if (j.contains("flat_channel_model")) {
      auto m = j.at("flat_channel_model").get<std::string>();
      if (m == "rayleigh")
        b.flat_channel_model = FlatChannelModel::rayleigh;
      else if (m == "unit")
        b.flat_channel_model = FlatChannelModel::unit;
      else
        throw ConfigError("ber: flat_channel_model must be rayleigh or unit");
    }
    get_if(j, "sigma_exponent", b.sigma_exponent);
    get_if(j, "perfect_estimate", b.perfect_estimate);
    if (j.contains("Pt_dBW")) b.Pt_dBW = j.at("Pt_dBW").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("ber: ") + e.what());
  }
  b.validate();
  return b;
}

json ber_to_json(const BerSpec& b) {
  json j{{"Es_grid", b.Es_grid},
         {"bits_per_point", b.bits_per_point},
         {"flat_channel_model", b.flat_channel_model == FlatChannelModel::unit ? "unit" : "rayleigh"},
         {"sigma_exponent", b.sigma_exponent},
         {"perfect_estimate", b.perfect_estimate}};
  if (b.Pt_dBW) j["Pt_dBW"] = *b.Pt_dBW;
  return j;
}

void write_sweep_csv(const SweepTable& t, const std::string& path) {
  std::size_t K = 0;
  for (const auto& r : t.rows) K = std::max(K, r.R_user.size());
  auto out = fmt::output_file(path);
  out.print("grid_value,realization,scheme,status,R_sum,R_common");
  for (std::size_t k = 0; k < K; ++k) out.print(",R_user_{}", k + 1);
  out.print(
      ",jamming_ok,interference_ok,power_ok,qos_ok,shares_ok,jamming_margin,interference_margin,power_margin,"
      "qos_margin,outer_iterations,outer_converged,inner_converged,final_r,final_q,noma_common_user,start,message\n");
  for (const auto& r : t.rows) {
    out.print("{:.12g},{},{},{},{:.12g},{:.12g}", r.grid_value, r.realization, to_string(r.scheme), r.status, r.R_sum,
              r.R_common);
    for (std::size_t k = 0; k < K; ++k) out.print(",{:.12g}", k < r.R_user.size() ? r.R_user[k] : 0.0);
    const auto& a = r.audit;
    out.print(",{},{},{},{},{},{:.12g},{:.12g},{:.12g},{:.12g},{},{},{},{:.12g},{:.12g},{},{},{}\n", b(a.jamming_ok),
              b(a.interference_ok), b(a.power_ok), b(a.qos_ok), b(a.shares_ok), a.jamming_margin,
              a.interference_margin, a.power_margin, a.qos_margin, r.outer_iterations, b(r.outer_converged),
              b(r.inner_converged), r.final_r, r.final_q,
              r.noma_common_user < 0 ? 0 : r.noma_common_user + 1, r.start, csv_escape(r.message));
  }
}

void write_sweep_summary_csv(const SweepTable& t, const std::string& path) {
  auto out = fmt::output_file(path);
  out.print("grid_value,scheme,solved,audited_ok,mean_R_sum\n");
  for (const auto& s : t.summary)
    out.print("{:.12g},{},{},{},{:.12g}\n", s.grid_value, to_string(s.scheme), s.solved, s.audited_ok, s.mean_R_sum);
}

void write_profile_csv(const std::vector<ProfileRow>& rows, const std::string& value_name,
                       const std::string& threshold_name, const std::string& index_name, const std::string& path) {
  auto out = fmt::output_file(path);
  out.print("{},n,{},{},constrained,ok\n", index_name, value_name, threshold_name);
  for (const auto& r : rows)
    out.print("{},{},{:.12g},{:.12g},{},{}\n", r.index + 1, r.n + 1, r.value, r.threshold, b(r.constrained), b(r.ok));
}

void write_ber_csv(const std::vector<std::pair<std::string, std::vector<BerPoint>>>& curves, const std::string& path) {
  auto out = fmt::output_file(path);
  out.print("curve,Es,Es_dB,bits,errors,ber,se\n");
  for (const auto& [name, pts] : curves)
    for (const auto& p : pts)
      out.print("{},{:.12g},{:.12g},{},{},{:.12g},{:.12g}\n", name, p.Es, 10.0 * std::log10(p.Es), p.bits, p.errors,
                p.ber, p.se);
}

json make_manifest(const std::string& command, const ScenarioConfig& cfg, const json& extra) {
  json m;
  m["command"] = command;
  m["version"] = "0.1.0";
  m["seed"] = cfg.seed;
  m["scenario"] = scenario_to_json(cfg);
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
  return m;
}

void emit_reports(const SweepTable& t, const ExperimentSpec& spec, const std::string& output_dir) {
  if (t.rows.empty()) throw std::invalid_argument("emit_reports: empty table");
  std::filesystem::create_directories(output_dir);
  const std::filesystem::path dir(output_dir);
  write_sweep_csv(t, (dir / "sweep.csv").string());
  write_sweep_summary_csv(t, (dir / "sweep_summary.csv").string());
  bool all_ok = true;
  for (const auto& r : t.rows) all_ok = all_ok && r.status == "ok" && r.audit.all_ok();
  json extra{{"solver", solver_to_json(spec.solver)}, {"experiment", experiment_to_json(spec)}, {"all_rows_valid", all_ok}};
  write_json_file(make_manifest("sweep", spec.scenario, extra), (dir / "manifest.json").string());
}

}  // namespace rsjam
