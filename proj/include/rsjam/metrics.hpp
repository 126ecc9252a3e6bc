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
#include "rsjam/rng.hpp"
#include "rsjam/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rsjam {

// Precoders of one subcarrier.
struct PrecoderSlice {
  CVec p_c;
  std::vector<CVec> p;  // per SU
  std::vector<CVec> f;  // per AU
  double power() const;
};

struct PrecoderSet {
  std::vector<CVec> p_c;                 // [n]
  std::vector<std::vector<CVec>> p;      // [k][n]
  std::vector<std::vector<CVec>> f;      // [l][n]
  std::vector<std::vector<double>> c_bar;  // [k][n]

  static PrecoderSet zeros(int Nt, int K, int L, int N);
  int N() const { return static_cast<int>(p_c.size()); }
  int K() const { return static_cast<int>(p.size()); }
  int L() const { return static_cast<int>(f.size()); }
  PrecoderSlice slice(int n) const;
  double total_power() const;
  double subcarrier_power(int n) const;
};

struct StreamTarget {
  bool common = false;
  int k = 0;
  static StreamTarget common_stream() { return {true, 0}; }
  static StreamTarget private_stream(int k) { return {false, k}; }
};

// Received power of the desired stream, and interference-plus-noise Z + J + N0.
struct StreamPowers {
  double signal = 0.0;
  double interference_plus_noise = 0.0;
};

StreamPowers stream_powers(const CVec& h, const PrecoderSlice& s, StreamTarget t, double N0);

double stream_sinr(const CVec& h, const PrecoderSlice& s, StreamTarget t, double N0);

struct MmseResult {
  cd g;
  double eps = 1.0;
};

MmseResult mmse_equalizer_and_error(const CVec& h, const PrecoderSlice& s, StreamTarget t, double N0);

// MSE of an arbitrary scalar equalizer g: |g|^2 T - 2 Re(g h^H p) + 1.
double mse_with_equalizer(const CVec& h, const PrecoderSlice& s, StreamTarget t, double N0, cd g);

constexpr double kEpsFloor = 1e-15;

// -log2(eps), eps floored at 1e-15. Throws std::domain_error outside (0, 1].
double mutual_information_from_error(double eps);

struct WmseResult {
  double xi = 0.0;
  double omega_opt = 1.0;
};

// xi = omega * eps - log2(omega) with omega = weight or 1/eps.
WmseResult wmse_and_optimal_weights(double eps, std::optional<double> weight = std::nullopt);

double jamming_power(const CMat& R, const PrecoderSlice& s);

struct InterferenceResult {
  CMat Phi;
  double Psi_bar = 0.0;
};

CMat interference_matrix(const CMat& M_hat, double sigma_pe2, int Nr);
InterferenceResult interference_power(const CMat& M_hat, double sigma_pe2, int Nr, const PrecoderSlice& s);

// Sum of quadratic forms x^H A x over every precoder of the slice.
double precoder_quadratic_sum(const CMat& A, const PrecoderSlice& s);

struct SaaEstimate {
  double I_common = 0.0;
  double I_private = 0.0;
  double se_common = 0.0;  // standard error over samples
  double se_private = 0.0;
};

// SAA over conditional draws for user k: averages of I_c,k and I_k.
SaaEstimate saa_rate_estimates(const CVec& h_hat, double sigma2, const PrecoderSlice& s, int k, int sample_count,
                               double N0, RandomStream& rng);
SaaEstimate saa_rate_estimates(const std::vector<CVec>& samples, const PrecoderSlice& s, int k, double N0);

// The conditional samples for (k, n) shared by the solver and rate_report.
std::vector<CVec> saa_samples_for(const ChannelSet& cs, std::uint64_t seed, int k, int n, int count);

struct RateReport {
  std::vector<double> R_private;  // [k]
  double R_common = 0.0;
  std::vector<double> R_user;     // [k]
  double R_sum = 0.0;
  std::vector<double> I_common_min;                 // [n]
  std::vector<std::vector<double>> I_common;        // [k][n]
  std::vector<std::vector<double>> I_private;       // [k][n]
};

struct ShareViolation : std::runtime_error {
  int n;
  ShareViolation(int n_, const std::string& msg) : std::runtime_error(msg), n(n_) {}
};

// Rates with SAA over saa_samples_for(cs, cfg.seed, k, n, sample_count).
RateReport rate_report(const ScenarioConfig& cfg, const ChannelSet& cs, const PrecoderSet& P, int sample_count = 32);

// Per-subcarrier rows plus a summary row.
void write_rate_report_csv(const RateReport& r, const std::string& path);

}  // namespace rsjam
