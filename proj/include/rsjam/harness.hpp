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

#pragma once

#include "rsjam/channels.hpp"
#include "rsjam/config.hpp"
#include "rsjam/metrics.hpp"
#include "rsjam/solver.hpp"
#include "rsjam/thresholds.hpp"
#include "rsjam/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rsjam {

enum class SweepKind { snr, rho, qos, csit_alpha, none };
std::string to_string(SweepKind k);
SweepKind sweep_kind_from_string(const std::string& s);

// QoS floor schedule: 0.25 below 10 dB, 0.5 up to 25 dB, 1.0 from 25 dB.
double qos_preset(double snr_db);

struct ExperimentSpec {
  ScenarioConfig scenario;
  SolverConfig solver;
  SweepKind sweep = SweepKind::none;
  // snr and qos: SNR in dB; rho: rho; csit_alpha: alpha_i = alpha_p. Ignored for none.
  std::vector<double> grid;
  int realizations = 1;
  std::vector<Scheme> schemes{Scheme::RSMA, Scheme::SDMA, Scheme::NOMA};
  JammingMode jamming = JammingMode::pilot;
  bool interference_constraints = true;
  std::string output_dir = "out";
  void validate() const;
};

// Scenario of one grid point and realization.
ScenarioConfig scenario_for(const ExperimentSpec& spec, double grid_value, int realization);

struct SweepRow {
  double grid_value = 0.0;
  int realization = 0;
  Scheme scheme = Scheme::RSMA;
  std::string status = "ok";  // ok, infeasible, error
  std::string message;
  double R_sum = 0.0;
  double R_common = 0.0;
  std::vector<double> R_user;
  ConstraintAudit audit;
  int outer_iterations = 0;
  bool outer_converged = false;
  bool inner_converged = false;
  double final_r = 0.0, final_q = 0.0;
  int noma_common_user = -1;
  int start = 0;
};

struct SweepSummaryRow {
  double grid_value = 0.0;
  Scheme scheme = Scheme::RSMA;
  int solved = 0;
  int audited_ok = 0;
  double mean_R_sum = 0.0;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::vector<SweepSummaryRow> summary;
};

using ProgressFn = std::function<void(const SweepRow&)>;

SweepTable run_sweep(const ExperimentSpec& spec, const ProgressFn& progress = {});

struct SchemeOutcome {
  Scheme scheme = Scheme::RSMA;
  std::string status = "ok";  // ok, infeasible, error
  std::string message;
  SolveResult result;
};

// Solves one realization for the requested schemes, in the requested order.
// SDMA and NOMA run first so their solutions can seed RSMA.
std::vector<SchemeOutcome> solve_schemes(const ScenarioConfig& cfg, const ChannelSet& cs, const ThresholdSet& thr,
                                       const SolverConfig& scfg, const std::vector<Scheme>& schemes);

// Solves scfg.scheme. RSMA is seeded by SDMA (and NOMA when K = 2) when
// multi-start is on. Throws DomainInfeasible or runtime_error on failure.
SolveResult solve_one(const ScenarioConfig& cfg, const ChannelSet& cs, const ThresholdSet& thr,
                      const SolverConfig& scfg);

enum class FlatChannelModel { rayleigh, unit };

struct BerSpec {
  std::vector<double> Es_grid;  // total symbol energy, ascending
  long bits_per_point = 100000;
  FlatChannelModel flat_channel_model = FlatChannelModel::rayleigh;
  double sigma_exponent = 0.6;  // sigma_AU = min(1, mean pilot SINR^-exponent)
  bool perfect_estimate = false;  // force sigma_AU = 0
  std::optional<double> Pt_dBW;    // PU experiment: overrides Pt_bar
  void validate() const;
};

struct BerPoint {
  double Es = 0.0;
  long bits = 0;
  long errors = 0;
  double ber = 0.0;
  double se = 0.0;  // binomial standard error
};

// Uncoded QPSK over all N subcarriers of the AU link. g[n] is the true AU
// channel, pilots the AU's own pilot subcarriers.
std::vector<BerPoint> ber_au(const BerSpec& spec, const PrecoderSet& P, const std::vector<CVec>& g,
                             const ScenarioConfig& cfg, const std::vector<int>& pilots, const RandomStream& rng);

// PU link with perfect CSIR; m[n] is the interfering channel (first column of the true M).
std::vector<BerPoint> ber_pu(const BerSpec& spec, const PrecoderSet& P, const std::vector<CVec>& m,
                             const ScenarioConfig& cfg, const RandomStream& rng);

// Closed-form QPSK bit-error probability at per-symbol SNR: Q(sqrt(snr)).
double qpsk_awgn_ber(double snr);

struct BerCurve {
  std::string name;
  std::vector<BerPoint> points;
  bool solved = false;  // false for the baselines without secondary transmission
  double R_sum = 0.0;
  PrecoderSet P;
};

struct BerExperiment {
  ScenarioConfig cfg;  // resolved
  std::vector<BerCurve> curves;
};

// AU curves named after the jamming mode. "off" is the AU link without any
// secondary transmission.
BerExperiment run_ber_au(const ExperimentSpec& exp, const BerSpec& spec,
                         const std::vector<JammingMode>& modes = {JammingMode::pilot, JammingMode::barrage,
                                                                  JammingMode::off});
// PU curves: no_interference, constrained, unconstrained.
BerExperiment run_ber_pu(const ExperimentSpec& exp, const BerSpec& spec);

// Per-subcarrier interference and jamming audit tables.
struct ProfileRow {
  int index = 0;  // m or l
  int n = 0;
  double value = 0.0;      // Psi_bar or Lambda_bar
  double threshold = 0.0;  // I_thr or J_thr
  bool constrained = false;
  bool ok = true;
};
std::vector<ProfileRow> interference_profile(const ScenarioConfig& cfg, const ChannelSet& cs, const ThresholdSet& thr,
                                             const PrecoderSet& P, double tol = 1e-6);
std::vector<ProfileRow> jamming_profile(const ScenarioConfig& cfg, const ChannelSet& cs, const ThresholdSet& thr,
                                        const PrecoderSet& P, double tol = 1e-6);

// --- report emission (io.cpp) ---------------------------------------------

ExperimentSpec experiment_from_json(const json& j);
SolverConfig solver_from_json(const json& j);
BerSpec ber_from_json(const json& j);
json solver_to_json(const SolverConfig& s);
json experiment_to_json(const ExperimentSpec& e);
json ber_to_json(const BerSpec& b);

void write_sweep_csv(const SweepTable& t, const std::string& path);
void write_sweep_summary_csv(const SweepTable& t, const std::string& path);
void write_profile_csv(const std::vector<ProfileRow>& rows, const std::string& value_name,
                       const std::string& threshold_name, const std::string& index_name, const std::string& path);
void write_ber_csv(const std::vector<std::pair<std::string, std::vector<BerPoint>>>& curves, const std::string& path);

// Writes sweep.csv, sweep_summary.csv and manifest.json under output_dir.
void emit_reports(const SweepTable& t, const ExperimentSpec& spec, const std::string& output_dir);

// Manifest with the resolved configuration; extra is merged at top level.
json make_manifest(const std::string& command, const ScenarioConfig& cfg, const json& extra);

}  // namespace rsjam
