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

#include "rsjam/channels.hpp"

#include "rsjam/conic.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

namespace rsjam {

double csit_error_variance(double snr, double alpha) {
  if (alpha == 0.0) return 1.0;
  if (!(snr > 0.0)) return 1.0;
  return std::min(1.0, std::pow(snr, -alpha));
}

int tap_count(const ScenarioConfig& cfg) {
  double x = 6.0 * cfg.delay_spread * cfg.N * cfg.subcarrier_spacing;
  int taps = static_cast<int>(std::ceil(x - 1e-12));
  return std::max(taps, 1);
}

std::vector<double> power_delay_profile(const ScenarioConfig& cfg) {
  int taps = tap_count(cfg);
  if (taps > cfg.N)
    throw ConfigError("delay_spread * subcarrier_spacing implies " + std::to_string(taps) +
                      " taps, more than N = " + std::to_string(cfg.N));
  double ts = 1.0 / (cfg.N * cfg.subcarrier_spacing);
  std::vector<double> p(taps);
  double sum = 0.0;
  for (int i = 0; i < taps; ++i) {
    p[i] = std::exp(-i * ts / cfg.delay_spread);
    sum += p[i];
  }
  for (auto& x : p) x /= sum;
  return p;
}

std::vector<CVec> tdl_frequency_response(const std::vector<double>& pdp, int Nt, int N, RandomStream& rng) {
  std::vector<CVec> out(N, CVec::Zero(Nt));
  const int taps = static_cast<int>(pdp.size());
  for (int a = 0; a < Nt; ++a) {
    std::vector<cd> c(taps);
    for (int i = 0; i < taps; ++i) c[i] = std::sqrt(pdp[i]) * rng.cnormal();
    for (int n = 0; n < N; ++n) {
      cd acc = c[0];
      for (int i = 1; i < taps; ++i) {
        double ph = -2.0 * std::numbers::pi * static_cast<double>(i) * n / N;
        acc += c[i] * cd(std::cos(ph), std::sin(ph));
      }
      out[n](a) = acc;
    }
  }
  return out;
}

CVec compose_true_channel(const CVec& h_hat, double sigma2, RandomStream& rng) {
  if (sigma2 < 0.0 || sigma2 > 1.0) throw ConfigError("sigma2 outside [0,1]");
  CVec e = rng.cnormal_vector(static_cast<int>(h_hat.size()));
  if (sigma2 == 0.0) return h_hat;
  return std::sqrt(1.0 - sigma2) * h_hat + std::sqrt(sigma2) * e;
}

CMat compose_true_channel(const CMat& M_hat, double sigma2, RandomStream& rng) {
  if (sigma2 < 0.0 || sigma2 > 1.0) throw ConfigError("sigma2 outside [0,1]");
  CMat e = rng.cnormal_matrix(static_cast<int>(M_hat.rows()), static_cast<int>(M_hat.cols()));
  if (sigma2 == 0.0) return M_hat;
  return std::sqrt(1.0 - sigma2) * M_hat + std::sqrt(sigma2) * e;
}

CMat estimate_covariance(const std::vector<CVec>& samples) {
  if (samples.empty()) throw std::invalid_argument("estimate_covariance: no samples");
  const auto d = samples.front().size();
  CMat R = CMat::Zero(d, d);
  for (const auto& g : samples) {
    if (g.size() != d) throw std::invalid_argument("estimate_covariance: length mismatch");
    R.noalias() += g * g.adjoint();
  }
  R /= static_cast<double>(samples.size());
  CMat Rh = 0.5 * (R + R.adjoint());
  return Rh;
}

std::vector<CVec> conditional_samples(const CVec& h_hat, double sigma2, int count, RandomStream& rng) {
  if (count < 1) throw std::invalid_argument("conditional_samples: count < 1");
  std::vector<CVec> out;
  out.reserve(count);
  for (int s = 0; s < count; ++s) out.push_back(compose_true_channel(h_hat, sigma2, rng));
  return out;
}

bool is_hermitian_psd(const CMat& A, double tol, double herm_tol) {
  if (A.rows() != A.cols()) return false;
  double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.adjoint()).cwiseAbs().maxCoeff() > herm_tol * scale) return false;
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (A + A.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

namespace {

CMat au_transmit_correlation(int Nt, double a, double theta) {
  CMat C(Nt, Nt);
  for (int i = 0; i < Nt; ++i)
    for (int j = 0; j < Nt; ++j) {
      double mag = std::pow(a, std::abs(i - j));
      C(i, j) = mag * std::polar(1.0, theta * (i - j));
    }
  return C;
}

CMat psd_sqrt(const CMat& C) {
  Eigen::SelfAdjointEigenSolver<CMat> es(C);
  RVec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

ChannelSet generate_channel_set(const ScenarioConfig& cfg, RandomStream& rng) {
  cfg.validate();
  const auto pdp = power_delay_profile(cfg);
  ChannelSet cs;
  cs.Nt = cfg.Nt;
  cs.N = cfg.N;
  const double snr = cfg.snr();
  cs.sigma_ie2 = csit_error_variance(snr, cfg.alpha_i);
  cs.sigma_pe2 = csit_error_variance(snr, cfg.alpha_p);

  cs.h_hat.resize(cfg.K);
  cs.h.resize(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    auto r = rng.sub("su_hat", {static_cast<std::uint64_t>(k)});
    cs.h_hat[k] = tdl_frequency_response(pdp, cfg.Nt, cfg.N, r);
    cs.h[k].resize(cfg.N);
    for (int n = 0; n < cfg.N; ++n) {
      auto e = rng.sub("su_err", {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(n)});
      cs.h[k][n] = compose_true_channel(cs.h_hat[k][n], cs.sigma_ie2, e);
    }
  }

  cs.M_hat.resize(cfg.M);
  cs.M_true.resize(cfg.M);
  for (int m = 0; m < cfg.M; ++m) {
    const int nr = cfg.Nr[m];
    cs.M_hat[m].assign(cfg.N, CMat::Zero(cfg.Nt, nr));
    for (int r = 0; r < nr; ++r) {
      auto s = rng.sub("pu_hat", {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(r)});
      auto col = tdl_frequency_response(pdp, cfg.Nt, cfg.N, s);
      for (int n = 0; n < cfg.N; ++n) cs.M_hat[m][n].col(r) = col[n];
    }
    cs.M_true[m].resize(cfg.N);
    for (int n = 0; n < cfg.N; ++n) {
      auto e = rng.sub("pu_err", {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(n)});
      cs.M_true[m][n] = compose_true_channel(cs.M_hat[m][n], cs.sigma_pe2, e);
    }
  }

  cs.g.resize(cfg.L);
  cs.R.resize(cfg.L);
  for (int l = 0; l < cfg.L; ++l) {
    auto ang = rng.sub("au_angle", {static_cast<std::uint64_t>(l)});
    double theta = 2.0 * std::numbers::pi * ang.uniform();
    CMat S = psd_sqrt(au_transmit_correlation(cfg.Nt, cfg.au_correlation, theta));
    std::vector<std::vector<CVec>> per_n(cfg.N);
    for (int s = 0; s < cfg.au_covariance_samples; ++s) {
      auto r = rng.sub("au_cov", {static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(s)});
      auto w = tdl_frequency_response(pdp, cfg.Nt, cfg.N, r);
      for (int n = 0; n < cfg.N; ++n) per_n[n].push_back(S * w[n]);
    }
    cs.R[l].resize(cfg.N);
    for (int n = 0; n < cfg.N; ++n) cs.R[l][n] = estimate_covariance(per_n[n]);
    auto r = rng.sub("au_true", {static_cast<std::uint64_t>(l)});
    auto w = tdl_frequency_response(pdp, cfg.Nt, cfg.N, r);
    cs.g[l].resize(cfg.N);
    for (int n = 0; n < cfg.N; ++n) cs.g[l][n] = S * w[n];
  }
  return cs;
}

namespace {

constexpr char kMagic[4] = {'R', 'S', 'J', 'C'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("channel cache: truncated file");
  return v;
}

void put_mat(std::ofstream& os, const CMat& m) {
  put<std::int32_t>(os, static_cast<std::int32_t>(m.rows()));
  put<std::int32_t>(os, static_cast<std::int32_t>(m.cols()));
  os.write(reinterpret_cast<const char*>(m.data()), sizeof(cd) * m.size());
}

CMat get_mat(std::ifstream& is) {
  auto r = get<std::int32_t>(is);
  auto c = get<std::int32_t>(is);
  if (r < 0 || c < 0 || r > 100000 || c > 100000) throw std::runtime_error("channel cache: bad dims");
  CMat m(r, c);
  is.read(reinterpret_cast<char*>(m.data()), sizeof(cd) * m.size());
  if (!is) throw std::runtime_error("channel cache: truncated file");
  return m;
}

template <typename Mat>
void put_grid(std::ofstream& os, const std::vector<std::vector<Mat>>& grid) {
  put<std::int32_t>(os, static_cast<std::int32_t>(grid.size()));
  for (const auto& row : grid) {
    put<std::int32_t>(os, static_cast<std::int32_t>(row.size()));
    for (const auto& m : row) put_mat(os, CMat(m));
  }
}

template <typename Mat>
std::vector<std::vector<Mat>> get_grid(std::ifstream& is) {
  auto a = get<std::int32_t>(is);
  std::vector<std::vector<Mat>> grid(a);
  for (auto& row : grid) {
    auto b = get<std::int32_t>(is);
    row.resize(b);
    for (auto& m : row) m = get_mat(is);
  }
  return grid;
}

}  // namespace

void save_channel_set(const ChannelSet& cs, std::uint64_t seed, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write channel cache " + path);
  os.write(kMagic, 4);
  put(os, kVersion);
  put(os, seed);
  put<std::int32_t>(os, cs.Nt);
  put<std::int32_t>(os, cs.N);
  put(os, cs.sigma_ie2);
  put(os, cs.sigma_pe2);
  put_grid(os, cs.h);
  put_grid(os, cs.h_hat);
  put_grid(os, cs.M_true);
  put_grid(os, cs.M_hat);
  put_grid(os, cs.g);
  put_grid(os, cs.R);
}

ChannelSet load_channel_set(const std::string& path, std::uint64_t expected_seed) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read channel cache " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("channel cache: bad magic");
  if (get<std::uint32_t>(is) != kVersion) throw std::runtime_error("channel cache: version mismatch");
  if (get<std::uint64_t>(is) != expected_seed) throw std::runtime_error("channel cache: seed mismatch");
  ChannelSet cs;
  cs.Nt = get<std::int32_t>(is);
  cs.N = get<std::int32_t>(is);
  cs.sigma_ie2 = get<double>(is);
  cs.sigma_pe2 = get<double>(is);
  cs.h = get_grid<CVec>(is);
  cs.h_hat = get_grid<CVec>(is);
  cs.M_true = get_grid<CMat>(is);
  cs.M_hat = get_grid<CMat>(is);
  cs.g = get_grid<CVec>(is);
  cs.R = get_grid<CMat>(is);
  return cs;
}

}  // namespace rsjam
