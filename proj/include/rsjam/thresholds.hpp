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
#include "rsjam/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rsjam {

// rho * Pt_bar * sigma_max(R) / (Np * L). Throws ConfigError for non-PSD R.
double jamming_threshold(double rho, double Pt_bar, int Np, int L, const CMat& R);

enum class PsiBranch { base, null_direction };

struct PsiDetail {
  double value = 0.0;
  double base = 0.0;         // value before the zero-error branch
  PsiBranch branch = PsiBranch::base;
  int null_index = -1;     // 0-based j whose null direction fired
  CVec null_direction;     // v_j when the branch fired
  double sigma_max = 0.0;
  CVec u_max;
  int n_g = 0;
  int n_m = 0;
};

// Interference threshold of one AU against one PU.
PsiDetail interference_threshold_psi_detail(double rho, double Pt_bar, int Np, int L, const CMat& R, const CMat& Phi,
                                            double mu, double sigma_pe);
double interference_threshold_psi(double rho, double Pt_bar, int Np, int L, const CMat& R, const CMat& Phi,
                                  double mu, double sigma_pe);

struct ClosedFormReport {
  std::optional<double> isotropic_value;  // rho sigma_pe2 Nr Pt_bar / (Np L), only when requested and valid
  double bound = 0.0;                 // Pt_bar lambda_max(Phi) / (Np L)
  double psi = 0.0;
  bool psi_within_bound = false;
};

// Phi is built from (M_hat, sigma_pe2, Nr). With want_isotropic the identity-R
// preconditions are enforced (R = I, Nt > Nr, rho < 1) and violations throw.
ClosedFormReport closed_form_checks(const CMat& R, const CMat& M_hat, double sigma_pe2, int Nr, double rho,
                                    double Pt_bar, int Np, int L, double mu, bool want_isotropic);
ClosedFormReport closed_form_checks(const CMat& R, const CMat& Phi, double rho, double Pt_bar, int Np, int L,
                                    double mu, double sigma_pe);

// min tr(S Phi) s.t. tr(S R) >= J_thr, tr(S) <= Pt_bar/(Np L), S >= 0, solved numerically.
struct WitnessSdpResult {
  double objective = 0.0;
  double jamming = 0.0;
  double power = 0.0;
  bool optimal = false;
};
WitnessSdpResult witness_sdp(double rho, double Pt_bar, int Np, int L, const CMat& R, const CMat& Phi);

// sqrt(rho Pt_bar / (Np L)) u_max.
CVec feasibility_witness(double rho, double Pt_bar, int Np, int L, const CMat& R);

// Witness that also meets the psi cap: the null direction when that branch
// fired, otherwise feasibility_witness.
CVec feasibility_witness(const PsiDetail& d, double rho, double Pt_bar, int Np, int L, const CMat& R);

struct ThresholdSet {
  double rho = 0.0;
  double mu = 0.0;
  bool jamming_active = true;
  bool interference_active = true;
  JammingMode mode = JammingMode::pilot;
  std::vector<std::vector<int>> pilots;          // effective 0-based pilot sets
  std::vector<std::vector<double>> J_thr;        // [l][n], 0 off the pilot set
  std::vector<std::vector<double>> I_thr;        // [m][n]
  std::vector<std::vector<std::string>> J_branch;
  std::vector<std::vector<std::string>> I_branch;

  bool is_pilot(int l, int n) const;
};

// Barrage mode replaces every pilot set by all subcarriers. Mode off keeps the
// interference thresholds of the configured pilot sets but drops jamming.
ThresholdSet assemble_thresholds(const ScenarioConfig& cfg, const ChannelSet& cs,
                                 JammingMode mode = JammingMode::pilot, bool interference_constraints = true);

// Jamming precoders f[l] on subcarrier n that meet J_thr and keep the
// interference within I_thr. Zero vectors for AUs without a pilot at n.
std::vector<CVec> joint_witness(const ScenarioConfig& cfg, const ChannelSet& cs, const ThresholdSet& t, int n);

// Columns: kind,index,n,threshold,branch (index and n 1-based).
void write_thresholds_csv(const ThresholdSet& t, const std::string& path);

}  // namespace rsjam
