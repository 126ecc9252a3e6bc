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

#include <CLI11.hpp>
#include <fmt/core.h>

#include <cmath>
#include <filesystem>
#include <optional>

using namespace rsjam;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::string scheme;
  std::string jamming;
  bool no_interference = false;
  bool verbose = false;
};

void add_common(CLI::App* sub, Common& c, bool with_scheme) {
  sub->add_option("--config", c.config, "scenario JSON");
  sub->add_option("--seed", c.seed, "override the scenario seed");
  sub->add_option("--out", c.out, "output directory");
  if (with_scheme) sub->add_option("--scheme", c.scheme, "RSMA, SDMA or NOMA");
  sub->add_option("--jamming", c.jamming, "pilot, barrage or off")->check(CLI::IsMember({"pilot", "barrage", "off"}));
  sub->add_flag("--no-interference-constraints", c.no_interference, "drop the PU interference constraints");
  sub->add_flag("--verbose", c.verbose, "progress on stderr and an SDP iterate log");
}

struct Loaded {
  json doc = json::object();
  ExperimentSpec exp;
};

Loaded load(const Common& c) {
  Loaded l;
  if (!c.config.empty()) l.doc = read_json_file(c.config);
  if (c.seed) l.doc["seed"] = *c.seed;
  if (!c.scheme.empty()) l.doc["scheme"] = c.scheme;
  json& e = l.doc["experiment"];
  if (!e.is_object()) e = json::object();
  if (!c.jamming.empty()) e["jamming"] = c.jamming;
  if (c.no_interference) e["interference_constraints"] = false;
  l.exp = experiment_from_json(l.doc);
  l.exp.output_dir = c.out;
  fs::create_directories(c.out);
  if (c.verbose) l.exp.solver.sdp_dump_csv = (fs::path(c.out) / "sdp_iterates.csv").string();
  return l;
}

std::string path(const Common& c, const char* name) { return (fs::path(c.out) / name).string(); }

json audit_json(const ConstraintAudit& a) {
  return json{{"jamming_ok", a.jamming_ok},         {"interference_ok", a.interference_ok},
              {"power_ok", a.power_ok},             {"qos_ok", a.qos_ok},
              {"shares_ok", a.shares_ok},           {"jamming_margin", a.jamming_margin},
              {"interference_margin", a.interference_margin}, {"power_margin", a.power_margin},
              {"qos_margin", a.qos_margin}};
}

struct Instance {
  ScenarioConfig cfg;
  ChannelSet cs;
};

Instance instance(const ExperimentSpec& e) {
  Instance in;
  in.cfg = e.scenario;
  in.cfg.resolve();
  RandomStream rng(in.cfg.seed);
  in.cs = generate_channel_set(in.cfg, rng);
  return in;
}

int cmd_thresholds(const Common& c) {
  Loaded l = load(c);
  Instance in = instance(l.exp);
  ThresholdSet thr = assemble_thresholds(in.cfg, in.cs, l.exp.jamming, l.exp.interference_constraints);
  write_thresholds_csv(thr, path(c, "thresholds.csv"));
  write_json_file(make_manifest("thresholds", in.cfg, {{"experiment", experiment_to_json(l.exp)}}),
                  path(c, "manifest.json"));
  return 0;
}

int cmd_optimize(const Common& c) {
  Loaded l = load(c);
  Instance in = instance(l.exp);
  ThresholdSet thr = assemble_thresholds(in.cfg, in.cs, l.exp.jamming, l.exp.interference_constraints);
  SolveResult res = solve_one(in.cfg, in.cs, thr, l.exp.solver);
  ConstraintAudit a = audit_solution(in.cfg, in.cs, thr, res.P, l.exp.solver.saa_samples);
  write_thresholds_csv(thr, path(c, "thresholds.csv"));
  write_rate_report_csv(res.report, path(c, "rates.csv"));
  write_trace_csv(res.trace, path(c, "trace.csv"));
  save_precoders(res.P, path(c, "precoders.bin"));
  write_profile_csv(interference_profile(in.cfg, in.cs, thr, res.P), "Psi_bar", "I_thr", "m",
                    path(c, "interference_profile.csv"));
  write_profile_csv(jamming_profile(in.cfg, in.cs, thr, res.P), "Lambda_bar", "J_thr", "l",
                    path(c, "jamming_profile.csv"));
  json extra{{"solver", solver_to_json(l.exp.solver)},
             {"experiment", experiment_to_json(l.exp)},
             {"result",
              {{"scheme", to_string(res.scheme)},
               {"R_sum", res.report.R_sum},
               {"outer_iterations", res.outer_iterations},
               {"outer_converged", res.outer_converged},
               {"inner_converged", res.final_inner_converged},
               {"noma_common_user", res.noma_common_user + 1},
               {"start", res.start},
               {"projections",
                {{"shortcut", res.projections_shortcut},
                 {"certified", res.projections_certified},
                 {"sdp", res.projections_sdp}}},
               {"audit", audit_json(a)}}}};
  write_json_file(make_manifest("optimize", in.cfg, extra), path(c, "manifest.json"));
  fmt::print("{} R_sum = {:.6f} bits/s/Hz, audit {}\n", to_string(res.scheme), res.report.R_sum,
             a.all_ok() ? "passed" : "FAILED");
  return a.all_ok() ? 0 : 3;
}

int cmd_sweep(const Common& c) {
  Loaded l = load(c);
  ProgressFn progress;
  if (c.verbose)
    progress = [](const SweepRow& r) {
      fmt::print(stderr, "grid {:g} realization {} {}: {} R_sum {:.4f}\n", r.grid_value, r.realization,
                 to_string(r.scheme), r.status, r.R_sum);
    };
  SweepTable t = run_sweep(l.exp, progress);
  emit_reports(t, l.exp, c.out);
  for (const auto& s : t.summary)
    fmt::print("{:>10g} {:<5} solved {:>3} audited {:>3} mean R_sum {:.4f}\n", s.grid_value, to_string(s.scheme),
               s.solved, s.audited_ok, s.mean_R_sum);
  return 0;
}

BerSpec ber_spec(const Loaded& l) { return ber_from_json(l.doc.value("ber", json::object())); }

int write_ber(const Common& c, const char* command, const char* csv, const BerExperiment& be, const BerSpec& spec,
              const ExperimentSpec& exp) {
  std::vector<std::pair<std::string, std::vector<BerPoint>>> curves;
  json solves = json::object();
  for (const auto& cv : be.curves) {
    curves.emplace_back(cv.name, cv.points);
    if (!cv.solved) continue;
    save_precoders(cv.P, path(c, ("precoders_" + cv.name + ".bin").c_str()));
    solves[cv.name] = {{"R_sum", cv.R_sum}};
    if (c.verbose) fmt::print(stderr, "{} solved, R_sum {:.4f}\n", cv.name, cv.R_sum);
  }
  write_ber_csv(curves, path(c, csv));
  write_json_file(make_manifest(command, be.cfg, {{"ber", ber_to_json(spec)}, {"solves", solves},
                                                  {"solver", solver_to_json(exp.solver)}}),
                  path(c, "manifest.json"));
  return 0;
}

int cmd_ber_au(const Common& c) {
  Loaded l = load(c);
  BerSpec spec = ber_spec(l);
  std::vector<JammingMode> modes{JammingMode::pilot, JammingMode::barrage, JammingMode::off};
  if (!c.jamming.empty()) modes = {l.exp.jamming};
  return write_ber(c, "ber-au", "ber_au.csv", run_ber_au(l.exp, spec, modes), spec, l.exp);
}

int cmd_ber_pu(const Common& c) {
  Loaded l = load(c);
  BerSpec spec = ber_spec(l);
  return write_ber(c, "ber-pu", "ber_pu.csv", run_ber_pu(l.exp, spec), spec, l.exp);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rsjam: precoder optimization with pilot jamming and primary-user protection"};
  app.require_subcommand(1);
  Common thr_c, opt_c, sw_c, au_c, pu_c;
  auto* s_thr = app.add_subcommand("thresholds", "jamming and interference thresholds of one realization");
  add_common(s_thr, thr_c, false);
  auto* s_opt = app.add_subcommand("optimize", "solve one realization");
  add_common(s_opt, opt_c, true);
  auto* s_sw = app.add_subcommand("sweep", "sweep over a parameter grid and realizations");
  add_common(s_sw, sw_c, false);
  auto* s_au = app.add_subcommand("ber-au", "AU uncoded BER under pilot, barrage and no jamming");
  add_common(s_au, au_c, true);
  auto* s_pu = app.add_subcommand("ber-pu", "PU uncoded BER with and without interference constraints");
  add_common(s_pu, pu_c, true);
  CLI11_PARSE(app, argc, argv);
  try {
    if (*s_thr) return cmd_thresholds(thr_c);
    if (*s_opt) return cmd_optimize(opt_c);
    if (*s_sw) return cmd_sweep(sw_c);
    if (*s_au) return cmd_ber_au(au_c);
    if (*s_pu) return cmd_ber_pu(pu_c);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  } catch (const DomainInfeasible& e) {
    fmt::print(stderr, "infeasible: {}\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
