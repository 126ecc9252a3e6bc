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

#include "rsjam/metrics.hpp"

#include <fmt/core.h>
#include <fmt/os.h>

#include <algorithm>
#include <cmath>

namespace rsjam {

double PrecoderSlice::power() const {
  double e = p_c.squaredNorm();
  for (const auto& x : p) e += x.squaredNorm();
  for (const auto& x : f) e += x.squaredNorm();
  return e;
}

PrecoderSet PrecoderSet::zeros(int Nt, int K, int L, int N) {
  PrecoderSet P;
  P.p_c.assign(N, CVec::Zero(Nt));
  P.p.assign(K, std::vector<CVec>(N, CVec::Zero(Nt)));
  P.f.assign(L, std::vector<CVec>(N, CVec::Zero(Nt)));
  P.c_bar.assign(K, std::vector<double>(N, 0.0));
  return P;
}

PrecoderSlice PrecoderSet::slice(int n) const {
  PrecoderSlice s;
  s.p_c = p_c.at(n);
  for (const auto& pk : p) s.p.push_back(pk.at(n));
  for (const auto& fl : f) s.f.push_back(fl.at(n));
  return s;
}

double PrecoderSet::subcarrier_power(int n) const { return slice(n).power(); }

double PrecoderSet::total_power() const {
  double e = 0.0;
  for (int n = 0; n < N(); ++n) e += subcarrier_power(n);
  return e;
}

StreamPowers stream_powers(const CVec& h, const PrecoderSlice& s, StreamTarget t, double N0) {
  if (!(N0 > 0.0)) throw std::invalid_argument("stream power: N0 must be positive");
  const auto Nt = h.size();
  auto check = [&](const CVec& v) {
    if (v.size() != Nt) throw std::invalid_argument("stream power: dimension mismatch");
  };
  StreamPowers out;
  double z = 0.0;
  for (std::size_t i = 0; i < s.p.size(); ++i) {
    check(s.p[i]);
    if (!t.common && static_cast<int>(i) == t.k) continue;
    z += std::norm(h.dot(s.p[i]));
  }
  double j = 0.0;
  for (const auto& f : s.f) {
    check(f);
    j += std::norm(h.dot(f));
  }
  if (t.common) {
    check(s.p_c);
    out.signal = std::norm(h.dot(s.p_c));
  } else {
    if (t.k < 0 || t.k >= static_cast<int>(s.p.size())) throw std::invalid_argument("stream power: bad user");
    out.signal = std::norm(h.dot(s.p[t.k]));
  }
  out.interference_plus_noise = z + j + N0;
  return out;
}

double stream_sinr(const CVec& h, const PrecoderSlice& s, StreamTarget t, double N0) {
  auto pw = stream_powers(h, s, t, N0);
  return pw.signal / pw.interference_plus_noise;
}

MmseResult mmse_equalizer_and_error(const CVec& h, const PrecoderSlice& s, StreamTarget t, double N0) {
  auto pw = stream_powers(h, s, t, N0);
  const CVec& p = t.common ? s.p_c : s.p[t.k];
  const double T = pw.signal + pw.interference_plus_noise;
  MmseResult r;
  // p^H h = conj(h^H p)
  r.g = std::conj(h.dot(p)) / T;
  r.eps = pw.interference_plus_noise / T;
  return r;
}

double mse_with_equalizer(const CVec& h, const PrecoderSlice& s, StreamTarget t, double N0, cd g) {
  auto pw = stream_powers(h, s, t, N0);
  const CVec& p = t.common ? s.p_c : s.p[t.k];
  const double T = pw.signal + pw.interference_plus_noise;
  return std::norm(g) * T - 2.0 * (g * h.dot(p)).real() + 1.0;
}

double mutual_information_from_error(double eps) {
  if (!(eps > 0.0) || eps > 1.0 + 1e-12) throw std::domain_error("mutual information: eps outside (0,1]");
  return -std::log2(std::max(std::min(eps, 1.0), kEpsFloor));
}

WmseResult wmse_and_optimal_weights(double eps, std::optional<double> weight) {
  if (!(eps > 0.0) || eps > 1.0 + 1e-12) throw std::domain_error("wmse: eps outside (0,1]");
  WmseResult r;
  r.omega_opt = 1.0 / std::max(eps, kEpsFloor);
  double w = weight.value_or(r.omega_opt);
  if (!(w > 0.0)) throw std::invalid_argument("wmse: weight must be positive");
  r.xi = w * eps - std::log2(w);
  return r;
}

double precoder_quadratic_sum(const CMat& A, const PrecoderSlice& s) {
  auto q = [&](const CVec& x) {
    if (x.size() != A.rows() || A.rows() != A.cols()) throw std::invalid_argument("quadratic form: dimension mismatch");
    return x.dot(A * x).real();
  };
  double acc = q(s.p_c);
  for (const auto& x : s.p) acc += q(x);
  for (const auto& x : s.f) acc += q(x);
  return acc;
}

double jamming_power(const CMat& R, const PrecoderSlice& s) { return precoder_quadratic_sum(R, s); }

CMat interference_matrix(const CMat& M_hat, double sigma_pe2, int Nr) {
  CMat Phi = (1.0 - sigma_pe2) * (M_hat * M_hat.adjoint());
  Phi.diagonal().array() += sigma_pe2 * Nr;
  CMat out = 0.5 * (Phi + Phi.adjoint());
  return out;
}

InterferenceResult interference_power(const CMat& M_hat, double sigma_pe2, int Nr, const PrecoderSlice& s) {
  InterferenceResult r;
  r.Phi = interference_matrix(M_hat, sigma_pe2, Nr);
  r.Psi_bar = precoder_quadratic_sum(r.Phi, s);
  return r;
}

SaaEstimate saa_rate_estimates(const std::vector<CVec>& samples, const PrecoderSlice& s, int k, double N0) {
  SaaEstimate e;
  const double S = static_cast<double>(samples.size());
  double sc = 0, sc2 = 0, sp = 0, sp2 = 0;
  for (const auto& h : samples) {
    double ic = mutual_information_from_error(mmse_equalizer_and_error(h, s, StreamTarget::common_stream(), N0).eps);
    double ip = mutual_information_from_error(mmse_equalizer_and_error(h, s, StreamTarget::private_stream(k), N0).eps);
    sc += ic;
    sc2 += ic * ic;
    sp += ip;
    sp2 += ip * ip;
  }
  e.I_common = sc / S;
  e.I_private = sp / S;
  if (S > 1) {
    e.se_common = std::sqrt(std::max(0.0, (sc2 - S * e.I_common * e.I_common) / (S - 1)) / S);
    e.se_private = std::sqrt(std::max(0.0, (sp2 - S * e.I_private * e.I_private) / (S - 1)) / S);
  }
  return e;
}

SaaEstimate saa_rate_estimates(const CVec& h_hat, double sigma2, const PrecoderSlice& s, int k, int sample_count,
                               double N0, RandomStream& rng) {
  return saa_rate_estimates(conditional_samples(h_hat, sigma2, sample_count, rng), s, k, N0);
}

std::vector<CVec> saa_samples_for(const ChannelSet& cs, std::uint64_t seed, int k, int n, int count) {
  auto rng = RandomStream(seed).sub("saa", {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(n)});
  return conditional_samples(cs.h_hat.at(k).at(n), cs.sigma_ie2, count, rng);
}

RateReport rate_report(const ScenarioConfig& cfg, const ChannelSet& cs, const PrecoderSet& P, int sample_count) {
  const int K = cfg.K, N = cfg.N;
  RateReport r;
  r.R_private.assign(K, 0.0);
  r.R_user.assign(K, 0.0);
  r.I_common.assign(K, std::vector<double>(N, 0.0));
  r.I_private.assign(K, std::vector<double>(N, 0.0));
  r.I_common_min.assign(N, 0.0);
  for (int n = 0; n < N; ++n) {
    PrecoderSlice s = P.slice(n);
    double imin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
      auto e = saa_rate_estimates(saa_samples_for(cs, cfg.seed, k, n, sample_count), s, k, cfg.N0);
      r.I_common[k][n] = e.I_common;
      r.I_private[k][n] = e.I_private;
      imin = std::min(imin, e.I_common);
    }
    r.I_common_min[n] = imin;
    double share = 0.0;
    for (int k = 0; k < K; ++k) share += P.c_bar.at(k).at(n);
    if (share > imin + 1e-6)
      throw ShareViolation(n, fmt::format("common-rate shares {:.9g} exceed decodable rate {:.9g} on subcarrier {}",
                                          share, imin, n));
  }
  for (int n = 0; n < N; ++n) {
    r.R_common += r.I_common_min[n];
    for (int k = 0; k < K; ++k) {
      r.R_private[k] += r.I_private[k][n];
      r.R_user[k] += P.c_bar[k][n] + r.I_private[k][n];
    }
  }
  r.R_common /= N;
  r.R_sum = r.R_common;
  for (int k = 0; k < K; ++k) {
    r.R_private[k] /= N;
    r.R_user[k] /= N;
    r.R_sum += r.R_private[k];
  }
  return r;
}

void write_rate_report_csv(const RateReport& r, const std::string& path) {
  auto out = fmt::output_file(path);
  const int K = static_cast<int>(r.R_private.size());
  const auto N = r.I_common_min.size();
  out.print("n,I_common_min");
  for (int k = 0; k < K; ++k) out.print(",I_common_{}", k + 1);
  for (int k = 0; k < K; ++k) out.print(",I_private_{}", k + 1);
  out.print(",I_sum\n");
  std::vector<double> mean_c(K, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    double sum = r.I_common_min[n];
    out.print("{},{:.12g}", n + 1, r.I_common_min[n]);
    for (int k = 0; k < K; ++k) {
      out.print(",{:.12g}", r.I_common[k][n]);
      mean_c[k] += r.I_common[k][n] / static_cast<double>(N);
    }
    for (int k = 0; k < K; ++k) {
      out.print(",{:.12g}", r.I_private[k][n]);
      sum += r.I_private[k][n];
    }
    out.print(",{:.12g}\n", sum);
  }
  // summary row: column means, so I_common_min -> R_common, I_private_k -> R_private[k], I_sum -> R_sum
  out.print("mean,{:.12g}", r.R_common);
  for (int k = 0; k < K; ++k) out.print(",{:.12g}", mean_c[k]);
  for (int k = 0; k < K; ++k) out.print(",{:.12g}", r.R_private[k]);
  out.print(",{:.12g}\n", r.R_sum);
}

}  // namespace rsjam
