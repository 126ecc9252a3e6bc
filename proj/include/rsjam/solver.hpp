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
#include "rsjam/conic.hpp"
#include "rsjam/metrics.hpp"
#include "rsjam/thresholds.hpp"
#include "rsjam/types.hpp"

#include <string>
#include <vector>

namespace rsjam {

struct SolverConfig {
  double zeta = 10.0;
  double eps_r = 1e-3;
  double eps_a = 1e-3;
  int max_outer = 100;
  int max_inner = 500;
  int saa_samples = 32;
  Scheme scheme = Scheme::RSMA;
  int randomization_count = 20;
  double sdp_tol = 1e-8;
  int sdp_max_iter = 100;
  // RSMA is also started from the SDMA and NOMA solutions handed to solve_scheme.
  bool multi_start = true;
  bool dual_projection = true;  // certified dual fast path in the u-update
  std::string sdp_dump_csv;  // iterate log of the most recent u-update SDP
  void validate() const;
};

// Slot layout of one subcarrier block v_n. Rate shares X_k occupy complex
// slots with zero imaginary part, so 2 * size() real coordinates.
struct SlotLayout {
  int Nt = 0, K = 0, L = 0;
  std::vector<bool> x_active;  // [k]
  bool common_active = true;
  std::vector<bool> p_active;  // [k]

  int size() const { return K + Nt * (K + L + 1); }
  int x(int k) const { return k; }
  int pc() const { return K; }
  int p(int k) const { return K + Nt * (1 + k); }
  int f(int l) const { return K + Nt * (1 + K + l); }
  // Slot mask, true where the variable is free.
  std::vector<bool> mask() const;
};

// Conditional channel samples, weights and filters of one outer iteration,
// collapsed into the quadratic forms the subproblems need.
struct WeightSet {
  // Raw per-sample values [k][n][s].
  std::vector<std::vector<std::vector<cd>>> g_c, g_p;
  std::vector<std::vector<std::vector<double>>> w_c, w_p;
  // xi_c(k,n) = sum over streams x^H Qc x - 2 Re(cc^H p_c) + kc, and
  // xi_p(k,n) = sum over private and jamming streams x^H Qp x - 2 Re(cp^H p_k) + kp.
  std::vector<std::vector<CMat>> Qc, Qp;
  std::vector<std::vector<CVec>> cc, cp;
  std::vector<std::vector<double>> kc, kp;
};

struct SolverProblem {
  ScenarioConfig cfg;
  ThresholdSet thr;
  SolverConfig scfg;
  SlotLayout layout;
  Scheme scheme = Scheme::RSMA;
  int noma_common_user = -1;  // NOMA: user whose message rides on the common stream
  std::vector<std::vector<std::vector<CVec>>> samples;  // [k][n][s]
  std::vector<std::vector<CMat>> Phi;                   // [m][n]
  std::vector<std::vector<CMat>> R;                     // [l][n]
  std::vector<std::vector<CVec>> h_hat;                 // [k][n]
};

// NOMA requires K = 2 (ConfigError otherwise). noma_common_user < 0 picks the
// user with the smaller mean ||h_hat||.
SolverProblem build_problem(const ScenarioConfig& cfg, const ChannelSet& cs, const ThresholdSet& thr,
                            const SolverConfig& scfg, int noma_common_user = -1);

using Stack = std::vector<CVec>;  // one block per subcarrier

PrecoderSet decode(const SolverProblem& prob, const Stack& u);
Stack encode(const SolverProblem& prob, const PrecoderSet& P);

WeightSet update_weights_and_filters(const SolverProblem& prob, const Stack& u);

double xi_common(const SolverProblem& prob, const WeightSet& W, int k, int n, const CVec& block);
double xi_private(const SolverProblem& prob, const WeightSet& W, int k, int n, const CVec& block);

// Sum over n and k of (X + xi_private).
double wmse_objective(const SolverProblem& prob, const WeightSet& W, const Stack& v);

struct AdmmState {
  Stack v, u, w;
  Stack r, q;
  std::vector<double> r_norm, q_norm;  // per inner iteration, summed over n
  double zeta = 10.0;
  std::vector<double> multipliers;  // u-update dual warm start
  int inner_iter = 0;
  int outer_iter = 0;
};

// argmin f(v) + zeta/2 sum_n ||v_n - u_n + w_n||^2.
Stack v_update(const SolverProblem& prob, const WeightSet& W, const AdmmState& s);

// Domain violation summed over all constraint families (0 when inside).
struct DomainCheck {
  double common = 0.0, jamming = 0.0, interference = 0.0, power = 0.0, qos = 0.0, sign = 0.0;
  double total() const { return common + jamming + interference + power + qos + sign; }
  std::string worst() const;
};
DomainCheck domain_check(const SolverProblem& prob, const WeightSet& W, const Stack& u);

struct UUpdateInfo {
  bool shortcut = false;      // anchor already in the domain
  bool fallback = false;      // kept a point on the segment toward the previous iterate
  bool certified = false;     // solved through the Lagrangian dual, no SDP needed
  int dual_iterations = 0;
  SdpStatus sdp_status = SdpStatus::optimal;
  int sdp_iterations = 0;
  double violation = 0.0;
  double rank_quality = 0.0;
};

// Projection of v + w onto the domain via SDR. prev, when non-empty, must be
// in the domain and is used as the fallback. Throws DomainInfeasible when no
// feasible point is found.
//
// Before building the SDP, a projected Newton method on the Lagrangian dual
// is tried (warm started from *multipliers when given). Its point is accepted
// only with a global optimality certificate: positive definite Lagrangian
// Hessian, primal feasibility and zero duality gap. Such a point is the
// unique minimizer, so it is also what a tight relaxation returns.
Stack u_update(const SolverProblem& prob, const WeightSet& W, const Stack& anchor, const Stack& prev,
               RandomStream& rng, UUpdateInfo* info = nullptr, std::vector<double>* multipliers = nullptr);

// w += v - u; r = v - u; q = u - u_old; appends the summed norms.
void dual_update_and_residuals(AdmmState& s, const Stack& u_old);

struct TraceRow {
  int outer_iter = 0;
  int inner_iter = 0;
  double sum_rate = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

struct SolveResult {
  PrecoderSet P;
  RateReport report;
  std::vector<TraceRow> trace;
  Scheme scheme = Scheme::RSMA;
  int noma_common_user = -1;
  int outer_iterations = 0;
  bool outer_converged = false;
  bool inner_max_hit = false;     // some inner loop stopped at max_inner
  bool final_inner_converged = true;
  double final_r = 0.0, final_q = 0.0;
  int start = 0;                  // 0 = default initialization, i > 0 = warm start i
  int projections_shortcut = 0, projections_certified = 0, projections_sdp = 0;
  double sum_rate() const { return report.R_sum; }
};

// Initial domain point: maximum-ratio private/common precoders, witness
// jamming precoders, uniform power, then scaled into the domain.
Stack initial_point(const SolverProblem& prob, const ChannelSet& cs);

// One AO-ADMM run from the given start (empty = initial_point). start_id
// selects the randomization sub-stream and is reported back.
SolveResult ao_admm_solve(const SolverProblem& prob, const ChannelSet& cs, const Stack& start = {}, int start_id = 0);

// Scheme dispatch: NOMA solves both decoding orders; RSMA additionally starts
// from each warm start when scfg.multi_start is set.
SolveResult solve_scheme(const ScenarioConfig& cfg, const ChannelSet& cs, const ThresholdSet& thr,
                         const SolverConfig& scfg, const std::vector<PrecoderSet>& warm_starts = {});

struct ConstraintAudit {
  double jamming_margin = 0.0;       // min over pilots of Lambda - J_thr
  double interference_margin = 0.0;  // min over (m, n) of I_thr - Psi
  double power_margin = 0.0;         // Pt_bar - total power
  double qos_margin = 0.0;           // min over k of R_user - Rth
  double share_margin = 0.0;         // min over n of I_common_min - sum of shares
  bool jamming_ok = true, interference_ok = true, power_ok = true, qos_ok = true, shares_ok = true;
  bool all_ok() const { return jamming_ok && interference_ok && power_ok && qos_ok && shares_ok; }
};

ConstraintAudit audit_solution(const ScenarioConfig& cfg, const ChannelSet& cs, const ThresholdSet& thr,
                               const PrecoderSet& P, int saa_samples, double tol = 1e-6);

void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path);

// Binary precoder artifact: magic "RSJP", version, dimensions, then values.
void save_precoders(const PrecoderSet& P, const std::string& path);
PrecoderSet load_precoders(const std::string& path);

}  // namespace rsjam
