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

#include "rsjam/thresholds.hpp"

#include "rsjam/conic.hpp"
#include "rsjam/metrics.hpp"

#include <fmt/core.h>
#include <fmt/os.h>

#include <algorithm>
#include <cmath>

namespace rsjam {

namespace {

constexpr double kPsdTol = 1e-8;
constexpr double kNullSlack = 1e-12;

EigResult psd_eig(const CMat& A, const char* what) {
  EigResult e = hermitian_eig(A);
  if (e.values.size() && e.values(e.values.size() - 1) < -kPsdTol * std::max(1.0, std::abs(e.values(0))))
    throw ConfigError(std::string(what) + " is not positive semidefinite");
  return e;
}

void check_common(double rho, int Np, int L) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("rho must be in [0,1]");
  if (Np < 1 || L < 1) throw ConfigError("Np and L must be >= 1");
}

}  // namespace

double jamming_threshold(double rho, double Pt_bar, int Np, int L, const CMat& R) {
  check_common(rho, Np, L);
  EigResult e = psd_eig(R, "R");
  return rho * Pt_bar * std::max(0.0, e.values(0)) / (Np * L);
}

PsiDetail interference_threshold_psi_detail(double rho, double Pt_bar, int Np, int L, const CMat& R, const CMat& Phi,
                                            double mu, double sigma_pe) {
  check_common(rho, Np, L);
  if (!(mu >= 0.0)) throw ConfigError("mu must be >= 0");
  if (R.rows() != Phi.rows()) throw std::invalid_argument("psi: R and Phi sizes differ");
  EigResult er = psd_eig(R, "R");
  EigResult ep = psd_eig(Phi, "Phi");
  const int Nt = static_cast<int>(R.rows());

  PsiDetail d;
  d.sigma_max = std::max(0.0, er.values(0));
  d.u_max = er.vectors.col(0);
  d.n_g = numerical_rank(er.values);
  d.n_m = numerical_rank(ep.values);

  double acc = 0.0;
  for (int i = 0; i < d.n_m; ++i) acc += ep.values(i) * std::norm(d.u_max.dot(ep.vectors.col(i)));
  d.base = rho * Pt_bar / (Np * L) * acc;
  d.value = d.base;

  if (sigma_pe == 0.0 && d.sigma_max > 0.0) {
    for (int j = d.n_m; j < Nt; ++j) {
      const CVec vj = ep.vectors.col(j);
      double s = 0.0;
      for (int i = 0; i < d.n_g; ++i) s += er.values(i) * std::norm(er.vectors.col(i).dot(vj));
      if (rho + kNullSlack < s / d.sigma_max) {
        d.value = mu;
        d.branch = PsiBranch::null_direction;
        d.null_index = j;
        d.null_direction = vj;
        break;
      }
    }
  }
  return d;
}

double interference_threshold_psi(double rho, double Pt_bar, int Np, int L, const CMat& R, const CMat& Phi,
                                  double mu, double sigma_pe) {
  return interference_threshold_psi_detail(rho, Pt_bar, Np, L, R, Phi, mu, sigma_pe).value;
}

ClosedFormReport closed_form_checks(const CMat& R, const CMat& Phi, double rho, double Pt_bar, int Np, int L,
                                    double mu, double sigma_pe) {
  ClosedFormReport r;
  EigResult ep = psd_eig(Phi, "Phi");
  r.bound = Pt_bar * std::max(0.0, ep.values(0)) / (Np * L);
  r.psi = interference_threshold_psi(rho, Pt_bar, Np, L, R, Phi, mu, sigma_pe);
  r.psi_within_bound = r.psi <= r.bound + 1e-12 * std::max(1.0, r.bound);
  return r;
}

ClosedFormReport closed_form_checks(const CMat& R, const CMat& M_hat, double sigma_pe2, int Nr, double rho,
                                    double Pt_bar, int Np, int L, double mu, bool want_isotropic) {
  const int Nt = static_cast<int>(R.rows());
  if (M_hat.rows() != Nt || M_hat.cols() != Nr) throw std::invalid_argument("closed_form_checks: M_hat size");
  CMat Phi = interference_matrix(M_hat, sigma_pe2, Nr);
  ClosedFormReport r = closed_form_checks(R, Phi, rho, Pt_bar, Np, L, mu, std::sqrt(sigma_pe2));
  if (want_isotropic) {
    if (!R.isApprox(CMat::Identity(Nt, Nt), 1e-12)) throw ConfigError("closed form: R must be the identity");
    if (Nt <= Nr) throw ConfigError("closed form: requires Nt > Nr");
    if (!(rho < 1.0)) throw ConfigError("closed form: requires rho < 1");
    r.isotropic_value = rho * sigma_pe2 * Nr * Pt_bar / (Np * L);
  }
  return r;
}

WitnessSdpResult witness_sdp(double rho, double Pt_bar, int Np, int L, const CMat& R, const CMat& Phi) {
  const int Nt = static_cast<int>(R.rows());
  SdpProblem p;
  p.C = 0.5 * (Phi + Phi.adjoint());
  p.constraints.push_back({0.5 * (R + R.adjoint()), Sense::ge, jamming_threshold(rho, Pt_bar, Np, L, R)});
  p.constraints.push_back({CMat::Identity(Nt, Nt), Sense::le, Pt_bar / (Np * L)});
  SdpSolution s = sdp_solve(p);
  WitnessSdpResult out;
  out.optimal = s.status == SdpStatus::optimal;
  out.objective = (s.S * Phi).trace().real();
  out.jamming = (s.S * R).trace().real();
  out.power = s.S.trace().real();
  return out;
}

CVec feasibility_witness(double rho, double Pt_bar, int Np, int L, const CMat& R) {
  check_common(rho, Np, L);
  EigResult e = psd_eig(R, "R");
  return std::sqrt(rho * Pt_bar / (Np * L)) * e.vectors.col(0);
}

CVec feasibility_witness(const PsiDetail& d, double rho, double Pt_bar, int Np, int L, const CMat& R) {
  if (d.branch == PsiBranch::null_direction) {
    const CVec& v = d.null_direction;
    double q = v.dot(R * v).real();
    return std::sqrt(rho * Pt_bar * d.sigma_max / (Np * L * q)) * v;
  }
  return feasibility_witness(rho, Pt_bar, Np, L, R);
}

bool ThresholdSet::is_pilot(int l, int n) const {
  const auto& p = pilots.at(l);
  return std::find(p.begin(), p.end(), n) != p.end();
}

namespace {

std::vector<std::vector<int>> effective_pilots(const ScenarioConfig& cfg, JammingMode mode) {
  std::vector<std::vector<int>> out;
  for (int l = 0; l < cfg.L; ++l) {
    if (mode == JammingMode::barrage) {
      std::vector<int> all(cfg.N);
      for (int n = 0; n < cfg.N; ++n) all[n] = n;
      out.push_back(all);
    } else {
      out.push_back(cfg.pilots(l));
    }
  }
  return out;
}

PsiDetail psi_for(const ScenarioConfig& cfg, const ChannelSet& cs, const ThresholdSet& t, int l, int m, int n) {
  CMat Phi = interference_matrix(cs.M_hat[m][n], cs.sigma_pe2, cfg.Nr[m]);
  return interference_threshold_psi_detail(cfg.rho, cfg.Pt_bar, static_cast<int>(t.pilots[l].size()), cfg.L,
                                           cs.R[l][n], Phi, cfg.mu, std::sqrt(cs.sigma_pe2));
}

}  // namespace

ThresholdSet assemble_thresholds(const ScenarioConfig& cfg, const ChannelSet& cs, JammingMode mode,
                                 bool interference_constraints) {
  cfg.validate();
  ThresholdSet t;
  t.rho = cfg.rho;
  t.mu = cfg.mu;
  t.mode = mode;
  t.jamming_active = mode != JammingMode::off && cfg.L > 0;
  t.interference_active = interference_constraints && cfg.M > 0;
  t.pilots = effective_pilots(cfg, mode);
  t.J_thr.assign(cfg.L, std::vector<double>(cfg.N, 0.0));
  t.J_branch.assign(cfg.L, std::vector<std::string>(cfg.N, "data"));
  t.I_thr.assign(cfg.M, std::vector<double>(cfg.N, 0.0));
  t.I_branch.assign(cfg.M, std::vector<std::string>(cfg.N, "data_mu"));

  for (int l = 0; l < cfg.L; ++l) {
    const int Np = static_cast<int>(t.pilots[l].size());
    for (int n : t.pilots[l]) {
      t.J_thr[l][n] = jamming_threshold(cfg.rho, cfg.Pt_bar, Np, cfg.L, cs.R[l][n]);
      t.J_branch[l][n] = "principal";
    }
  }
  for (int m = 0; m < cfg.M; ++m) {
    for (int n = 0; n < cfg.N; ++n) {
      double acc = 0.0;
      bool any_pilot = false;
      bool any_null = false;
      for (int l = 0; l < cfg.L; ++l) {
        if (t.is_pilot(l, n)) {
          PsiDetail d = psi_for(cfg, cs, t, l, m, n);
          acc += d.value;
          any_pilot = true;
          any_null = any_null || d.branch == PsiBranch::null_direction;
        } else {
          acc += cfg.mu;
        }
      }
      if (cfg.L == 0) acc = 0.0;
      t.I_thr[m][n] = acc;
      if (any_pilot) t.I_branch[m][n] = any_null ? "null_mu" : "psi_base";
    }
  }
  return t;
}

std::vector<CVec> joint_witness(const ScenarioConfig& cfg, const ChannelSet& cs, const ThresholdSet& t, int n) {
  std::vector<CVec> f(cfg.L, CVec::Zero(cfg.Nt));
  if (!t.jamming_active) return f;
  for (int l = 0; l < cfg.L; ++l) {
    if (!t.is_pilot(l, n)) continue;
    const int Np = static_cast<int>(t.pilots[l].size());
    // With several PUs the zero-error branch may fire for some of them only;
    // the principal direction is then certified against the base values alone.
    if (cfg.M == 1) {
      PsiDetail d = psi_for(cfg, cs, t, l, 0, n);
      f[l] = feasibility_witness(d, cfg.rho, cfg.Pt_bar, Np, cfg.L, cs.R[l][n]);
      continue;
    }
    f[l] = feasibility_witness(cfg.rho, cfg.Pt_bar, Np, cfg.L, cs.R[l][n]);
  }
  return f;
}

void write_thresholds_csv(const ThresholdSet& t, const std::string& path) {
  auto out = fmt::output_file(path);
  out.print("kind,index,n,threshold,branch\n");
  for (std::size_t l = 0; l < t.J_thr.size(); ++l)
    for (std::size_t n = 0; n < t.J_thr[l].size(); ++n)
      if (t.jamming_active && t.is_pilot(static_cast<int>(l), static_cast<int>(n)))
        out.print("l,{},{},{:.12g},{}\n", l + 1, n + 1, t.J_thr[l][n], t.J_branch[l][n]);
  for (std::size_t m = 0; m < t.I_thr.size(); ++m)
    for (std::size_t n = 0; n < t.I_thr[m].size(); ++n)
      out.print("m,{},{},{:.12g},{}\n", m + 1, n + 1, t.I_thr[m][n], t.I_branch[m][n]);
}

}  // namespace rsjam
