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

#include "rsjam/solver.hpp"

#include <fmt/core.h>
#include <fmt/os.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace rsjam {

void SolverConfig::validate() const {
  if (!(zeta > 0.0)) throw ConfigError("solver: zeta must be > 0");
  if (!(eps_r > 0.0) || !(eps_a > 0.0)) throw ConfigError("solver: tolerances must be > 0");
  if (max_outer < 1 || max_inner < 1) throw ConfigError("solver: iteration limits must be >= 1");
  if (saa_samples < 1) throw ConfigError("solver: saa_samples must be >= 1");
  if (randomization_count < 0) throw ConfigError("solver: randomization_count must be >= 0");
  if (!(sdp_tol > 0.0) || sdp_max_iter < 1) throw ConfigError("solver: bad SDP settings");
}

std::vector<bool> SlotLayout::mask() const {
  std::vector<bool> m(size(), true);
  for (int k = 0; k < K; ++k) m[x(k)] = x_active[k];
  for (int i = 0; i < Nt; ++i) m[pc() + i] = common_active;
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < Nt; ++i) m[p(k) + i] = p_active[k];
  return m;
}

SolverProblem build_problem(const ScenarioConfig& cfg, const ChannelSet& cs, const ThresholdSet& thr,
                            const SolverConfig& scfg, int noma_common_user) {
  cfg.validate();
  scfg.validate();
  SolverProblem prob;
  prob.cfg = cfg;
  prob.thr = thr;
  prob.scfg = scfg;
  prob.scheme = scfg.scheme;

  SlotLayout& lay = prob.layout;
  lay.Nt = cfg.Nt;
  lay.K = cfg.K;
  lay.L = cfg.L;
  lay.x_active.assign(cfg.K, true);
  lay.p_active.assign(cfg.K, true);
  lay.common_active = true;
  switch (scfg.scheme) {
    case Scheme::RSMA: break;
    case Scheme::SDMA:
      lay.common_active = false;
      lay.x_active.assign(cfg.K, false);
      break;
    case Scheme::NOMA: {
      if (cfg.K != 2) throw ConfigError("NOMA is supported for K = 2 only");
      int a = noma_common_user;
      if (a < 0) {
        double e[2] = {0.0, 0.0};
        for (int k = 0; k < 2; ++k)
          for (int n = 0; n < cfg.N; ++n) e[k] += cs.h_hat[k][n].norm() / cfg.N;
        a = e[0] <= e[1] ? 0 : 1;
      }
      if (a > 1) throw ConfigError("NOMA common user must be 0 or 1");
      prob.noma_common_user = a;
      lay.p_active[a] = false;
      lay.x_active[1 - a] = false;
      break;
    }
  }

  prob.samples.resize(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    prob.samples[k].resize(cfg.N);
    for (int n = 0; n < cfg.N; ++n) prob.samples[k][n] = saa_samples_for(cs, cfg.seed, k, n, scfg.saa_samples);
  }
  prob.Phi.resize(cfg.M);
  for (int m = 0; m < cfg.M; ++m)
    for (int n = 0; n < cfg.N; ++n) prob.Phi[m].push_back(interference_matrix(cs.M_hat[m][n], cs.sigma_pe2, cfg.Nr[m]));
  prob.R = cs.R;
  prob.h_hat = cs.h_hat;
  return prob;
}

PrecoderSet decode(const SolverProblem& prob, const Stack& u) {
  const auto& lay = prob.layout;
  const int N = prob.cfg.N;
  PrecoderSet P = PrecoderSet::zeros(lay.Nt, lay.K, lay.L, N);
  for (int n = 0; n < N; ++n) {
    const CVec& b = u.at(n);
    P.p_c[n] = b.segment(lay.pc(), lay.Nt);
    for (int k = 0; k < lay.K; ++k) {
      P.p[k][n] = b.segment(lay.p(k), lay.Nt);
      P.c_bar[k][n] = std::max(0.0, -b(lay.x(k)).real());
    }
    for (int l = 0; l < lay.L; ++l) P.f[l][n] = b.segment(lay.f(l), lay.Nt);
  }
  return P;
}

Stack encode(const SolverProblem& prob, const PrecoderSet& P) {
  const auto& lay = prob.layout;
  const auto mask = lay.mask();
  Stack u(prob.cfg.N, CVec::Zero(lay.size()));
  for (int n = 0; n < prob.cfg.N; ++n) {
    CVec& b = u[n];
    b.segment(lay.pc(), lay.Nt) = P.p_c.at(n);
    for (int k = 0; k < lay.K; ++k) {
      b.segment(lay.p(k), lay.Nt) = P.p.at(k).at(n);
      b(lay.x(k)) = -P.c_bar.at(k).at(n);
    }
    for (int l = 0; l < lay.L; ++l) b.segment(lay.f(l), lay.Nt) = P.f.at(l).at(n);
    for (int i = 0; i < lay.size(); ++i)
      if (!mask[i]) b(i) = 0.0;
  }
  return u;
}

namespace {

PrecoderSlice block_slice(const SlotLayout& lay, const CVec& b) {
  PrecoderSlice s;
  s.p_c = b.segment(lay.pc(), lay.Nt);
  for (int k = 0; k < lay.K; ++k) s.p.push_back(b.segment(lay.p(k), lay.Nt));
  for (int l = 0; l < lay.L; ++l) s.f.push_back(b.segment(lay.f(l), lay.Nt));
  return s;
}

// Quadratic form summed over the private and jamming streams, plus the common one if asked.
double stream_quadratic(const SlotLayout& lay, const CMat& Q, const CVec& b, bool with_common) {
  double acc = 0.0;
  auto q = [&](int off) {
    auto x = b.segment(off, lay.Nt);
    acc += x.dot(Q * x).real();
  };
  if (with_common) q(lay.pc());
  for (int k = 0; k < lay.K; ++k) q(lay.p(k));
  for (int l = 0; l < lay.L; ++l) q(lay.f(l));
  return acc;
}

double sum_re_x(const SlotLayout& lay, const CVec& b) {
  double s = 0.0;
  for (int k = 0; k < lay.K; ++k) s += b(lay.x(k)).real();
  return s;
}

}  // namespace

WeightSet update_weights_and_filters(const SolverProblem& prob, const Stack& u) {
  const auto& lay = prob.layout;
  const int K = lay.K, N = prob.cfg.N, Nt = lay.Nt;
  const double N0 = prob.cfg.N0;
  WeightSet W;
  auto alloc3c = [&](auto& x) { x.assign(K, std::vector<std::vector<cd>>(N)); };
  auto alloc3r = [&](auto& x) { x.assign(K, std::vector<std::vector<double>>(N)); };
  alloc3c(W.g_c);
  alloc3c(W.g_p);
  alloc3r(W.w_c);
  alloc3r(W.w_p);
  W.Qc.assign(K, std::vector<CMat>(N, CMat::Zero(Nt, Nt)));
  W.Qp = W.Qc;
  W.cc.assign(K, std::vector<CVec>(N, CVec::Zero(Nt)));
  W.cp = W.cc;
  W.kc.assign(K, std::vector<double>(N, 0.0));
  W.kp = W.kc;

  for (int n = 0; n < N; ++n) {
    PrecoderSlice s = block_slice(lay, u.at(n));
    for (int k = 0; k < K; ++k) {
      const auto& hs = prob.samples[k][n];
      const double S = static_cast<double>(hs.size());
      for (const CVec& h : hs) {
        MmseResult mc = mmse_equalizer_and_error(h, s, StreamTarget::common_stream(), N0);
        MmseResult mp = mmse_equalizer_and_error(h, s, StreamTarget::private_stream(k), N0);
        double wc = wmse_and_optimal_weights(std::max(mc.eps, kEpsFloor)).omega_opt;
        double wp = wmse_and_optimal_weights(std::max(mp.eps, kEpsFloor)).omega_opt;
        W.g_c[k][n].push_back(mc.g);
        W.g_p[k][n].push_back(mp.g);
        W.w_c[k][n].push_back(wc);
        W.w_p[k][n].push_back(wp);
        CMat hh = h * h.adjoint();
        W.Qc[k][n] += (wc * std::norm(mc.g) / S) * hh;
        W.Qp[k][n] += (wp * std::norm(mp.g) / S) * hh;
        W.cc[k][n] += (wc * std::conj(mc.g) / S) * h;
        W.cp[k][n] += (wp * std::conj(mp.g) / S) * h;
        W.kc[k][n] += (wc * (std::norm(mc.g) * N0 + 1.0) - std::log2(wc)) / S;
        W.kp[k][n] += (wp * (std::norm(mp.g) * N0 + 1.0) - std::log2(wp)) / S;
      }
      W.Qc[k][n] = 0.5 * (W.Qc[k][n] + W.Qc[k][n].adjoint()).eval();
      W.Qp[k][n] = 0.5 * (W.Qp[k][n] + W.Qp[k][n].adjoint()).eval();
    }
  }
  return W;
}

double xi_common(const SolverProblem& prob, const WeightSet& W, int k, int n, const CVec& b) {
  const auto& lay = prob.layout;
  return stream_quadratic(lay, W.Qc[k][n], b, true) -
         2.0 * W.cc[k][n].dot(b.segment(lay.pc(), lay.Nt)).real() + W.kc[k][n];
}

double xi_private(const SolverProblem& prob, const WeightSet& W, int k, int n, const CVec& b) {
  const auto& lay = prob.layout;
  return stream_quadratic(lay, W.Qp[k][n], b, false) -
         2.0 * W.cp[k][n].dot(b.segment(lay.p(k), lay.Nt)).real() + W.kp[k][n];
}

double wmse_objective(const SolverProblem& prob, const WeightSet& W, const Stack& v) {
  double acc = 0.0;
  for (int n = 0; n < prob.cfg.N; ++n)
    for (int k = 0; k < prob.layout.K; ++k) acc += v[n](prob.layout.x(k)).real() + xi_private(prob, W, k, n, v[n]);
  return acc;
}

Stack v_update(const SolverProblem& prob, const WeightSet& W, const AdmmState& s) {
  const auto& lay = prob.layout;
  const int N = prob.cfg.N, Nt = lay.Nt;
  const double zeta = s.zeta;
  const auto mask = lay.mask();
  Stack v(N);
  for (int n = 0; n < N; ++n) {
    CVec a = s.u.at(n) - s.w.at(n);
    CVec out = CVec::Zero(lay.size());
    CMat Q = CMat::Zero(Nt, Nt);
    for (int k = 0; k < lay.K; ++k) Q += W.Qp[k][n];
    const CMat H = 2.0 * Q;
    for (int k = 0; k < lay.K; ++k) out(lay.x(k)) = a(lay.x(k)).real() - 1.0 / zeta;
    out.segment(lay.pc(), Nt) = a.segment(lay.pc(), Nt);
    for (int k = 0; k < lay.K; ++k)
      out.segment(lay.p(k), Nt) =
          prox_quadratic_solve(H, CVec(-2.0 * W.cp[k][n]), CVec(a.segment(lay.p(k), Nt)), zeta);
    for (int l = 0; l < lay.L; ++l)
      out.segment(lay.f(l), Nt) = prox_quadratic_solve(H, CVec::Zero(Nt), CVec(a.segment(lay.f(l), Nt)), zeta);
    for (int i = 0; i < lay.size(); ++i)
      if (!mask[i]) out(i) = 0.0;
    v[n] = out;
  }
  return v;
}

std::string DomainCheck::worst() const {
  std::pair<double, const char*> c[] = {{common, "common-rate"}, {jamming, "jamming"},
                                        {interference, "interference"}, {power, "total-power"},
                                        {qos, "qos"}, {sign, "rate-share sign"}};
  auto it = std::max_element(std::begin(c), std::end(c), [](auto& a, auto& b) { return a.first < b.first; });
  return it->second;
}

DomainCheck domain_check(const SolverProblem& prob, const WeightSet& W, const Stack& u) {
  const auto& lay = prob.layout;
  const auto& cfg = prob.cfg;
  const auto& thr = prob.thr;
  const int N = cfg.N;
  DomainCheck d;
  double power = 0.0;
  std::vector<double> qos(lay.K, 0.0);
  for (int n = 0; n < N; ++n) {
    const CVec& b = u.at(n);
    PrecoderSlice s = block_slice(lay, b);
    power += s.power();
    const double sx = sum_re_x(lay, b);
    for (int k = 0; k < lay.K; ++k) {
      double x = b(lay.x(k)).real();
      d.sign += std::max(0.0, x) + std::abs(b(lay.x(k)).imag());
      if (lay.common_active) d.common += std::max(0.0, xi_common(prob, W, k, n, b) - 1.0 - sx);
      qos[k] += (x + xi_private(prob, W, k, n, b)) / N;
    }
    if (thr.jamming_active)
      for (int l = 0; l < lay.L; ++l)
        if (thr.is_pilot(l, n)) d.jamming += std::max(0.0, thr.J_thr[l][n] - jamming_power(prob.R[l][n], s));
    if (thr.interference_active)
      for (int m = 0; m < cfg.M; ++m)
        d.interference += std::max(0.0, precoder_quadratic_sum(prob.Phi[m][n], s) - thr.I_thr[m][n]);
  }
  d.power = std::max(0.0, power - cfg.Pt_bar);
  if (cfg.Rth > 0.0)
    for (int k = 0; k < lay.K; ++k) d.qos += std::max(0.0, qos[k] - (1.0 - cfg.Rth));
  return d;
}

void dual_update_and_residuals(AdmmState& s, const Stack& u_old) {
  const std::size_t N = s.u.size();
  s.r.assign(N, CVec());
  s.q.assign(N, CVec());
  double rn = 0.0, qn = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    s.r[n] = s.v[n] - s.u[n];
    s.w[n] += s.r[n];
    s.q[n] = s.u[n] - u_old.at(n);
    rn += s.r[n].norm();
    qn += s.q[n].norm();
  }
  s.r_norm.push_back(rn);
  s.q_norm.push_back(qn);
}

ConstraintAudit audit_solution(const ScenarioConfig& cfg, const ChannelSet& cs, const ThresholdSet& thr,
                               const PrecoderSet& P, int saa_samples, double tol) {
  ConstraintAudit a;
  const double inf = std::numeric_limits<double>::infinity();
  a.jamming_margin = inf;
  a.interference_margin = inf;
  a.qos_margin = inf;
  a.share_margin = inf;
  for (int n = 0; n < cfg.N; ++n) {
    PrecoderSlice s = P.slice(n);
    if (thr.jamming_active)
      for (int l = 0; l < cfg.L; ++l)
        if (thr.is_pilot(l, n)) a.jamming_margin = std::min(a.jamming_margin, jamming_power(cs.R[l][n], s) - thr.J_thr[l][n]);
    if (thr.interference_active)
      for (int m = 0; m < cfg.M; ++m)
        a.interference_margin = std::min(
            a.interference_margin, thr.I_thr[m][n] - interference_power(cs.M_hat[m][n], cs.sigma_pe2, cfg.Nr[m], s).Psi_bar);
  }
  a.power_margin = cfg.Pt_bar - P.total_power();
  PrecoderSet unshared = P;
  for (auto& row : unshared.c_bar) std::fill(row.begin(), row.end(), 0.0);
  RateReport rr = rate_report(cfg, cs, unshared, saa_samples);
  for (int n = 0; n < cfg.N; ++n) {
    double share = 0.0;
    for (int k = 0; k < cfg.K; ++k) share += P.c_bar[k][n];
    a.share_margin = std::min(a.share_margin, rr.I_common_min[n] - share);
  }
  for (int k = 0; k < cfg.K; ++k) {
    double ru = rr.R_private[k];
    for (int n = 0; n < cfg.N; ++n) ru += P.c_bar[k][n] / cfg.N;
    a.qos_margin = std::min(a.qos_margin, ru - cfg.Rth);
  }
  a.jamming_ok = a.jamming_margin >= -tol;
  a.interference_ok = a.interference_margin >= -tol;
  a.power_ok = a.power_margin >= -tol;
  a.qos_ok = a.qos_margin >= -tol;
  a.shares_ok = a.share_margin >= -1e-6;
  return a;
}

void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
  auto out = fmt::output_file(path);
  out.print("outer_iter,inner_iter,sum_rate,primal_residual,dual_residual\n");
  for (const auto& r : trace)
    out.print("{},{},{:.12g},{:.12g},{:.12g}\n", r.outer_iter, r.inner_iter, r.sum_rate, r.primal_residual,
              r.dual_residual);
}

namespace {

constexpr char kPrecoderMagic[4] = {'R', 'S', 'J', 'P'};
constexpr std::uint32_t kPrecoderVersion = 1;

template <class T>
void put(std::ofstream& o, const T& v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T take(std::ifstream& i) {
  T v{};
  i.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!i) throw std::runtime_error("precoder artifact truncated");
  return v;
}

}  // namespace

void save_precoders(const PrecoderSet& P, const std::string& path) {
  std::ofstream o(path, std::ios::binary);
  if (!o) throw std::runtime_error("cannot write " + path);
  o.write(kPrecoderMagic, 4);
  const std::int32_t Nt = P.N() ? static_cast<std::int32_t>(P.p_c[0].size()) : 0;
  put(o, kPrecoderVersion);
  put(o, Nt);
  put(o, static_cast<std::int32_t>(P.K()));
  put(o, static_cast<std::int32_t>(P.L()));
  put(o, static_cast<std::int32_t>(P.N()));
  auto vec = [&](const CVec& x) {
    for (Eigen::Index i = 0; i < x.size(); ++i) put(o, x(i));
  };
  for (const auto& x : P.p_c) vec(x);
  for (const auto& row : P.p)
    for (const auto& x : row) vec(x);
  for (const auto& row : P.f)
    for (const auto& x : row) vec(x);
  for (const auto& row : P.c_bar)
    for (double c : row) put(o, c);
  if (!o) throw std::runtime_error("write failed: " + path);
}

PrecoderSet load_precoders(const std::string& path) {
  std::ifstream i(path, std::ios::binary);
  if (!i) throw std::runtime_error("cannot open " + path);
  char magic[4];
  i.read(magic, 4);
  if (!i || std::memcmp(magic, kPrecoderMagic, 4) != 0) throw std::runtime_error(path + ": not a precoder artifact");
  if (take<std::uint32_t>(i) != kPrecoderVersion) throw std::runtime_error(path + ": unsupported version");
  const int Nt = take<std::int32_t>(i), K = take<std::int32_t>(i), L = take<std::int32_t>(i), N = take<std::int32_t>(i);
  if (Nt < 0 || K < 0 || L < 0 || N < 0) throw std::runtime_error(path + ": bad dimensions");
  PrecoderSet P = PrecoderSet::zeros(Nt, K, L, N);
  auto vec = [&](CVec& x) {
    for (int a = 0; a < Nt; ++a) x(a) = take<cd>(i);
  };
  for (auto& x : P.p_c) vec(x);
  for (auto& row : P.p)
    for (auto& x : row) vec(x);
  for (auto& row : P.f)
    for (auto& x : row) vec(x);
  for (auto& row : P.c_bar)
    for (double& c : row) c = take<double>(i);
  return P;
}

}  // namespace rsjam
