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

#include "rsjam/rng.hpp"
#include "rsjam/types.hpp"

#include <string>
#include <vector>

namespace rsjam {

// One channel realization. Indexing is [user][subcarrier].
struct ChannelSet {
  int Nt = 0;
  int N = 0;
  std::vector<std::vector<CVec>> h;      // true SU channels
  std::vector<std::vector<CVec>> h_hat;  // SU estimates
  double sigma_ie2 = 0.0;
  std::vector<std::vector<CMat>> M_true; // Nt x Nr[m]
  std::vector<std::vector<CMat>> M_hat;
  double sigma_pe2 = 0.0;
  std::vector<std::vector<CVec>> g;      // true AU channels
  std::vector<std::vector<CMat>> R;      // AU covariances

  int K() const { return static_cast<int>(h.size()); }
  int L() const { return static_cast<int>(g.size()); }
  int M() const { return static_cast<int>(M_true.size()); }
};

// Error variance min(1, SNR^-alpha); SNR = 0 maps to 1.
double csit_error_variance(double snr, double alpha);

// Number of taps ceil(6 * delay_spread * N * subcarrier_spacing), at least 1.
int tap_count(const ScenarioConfig& cfg);

// Exponential power-delay profile over tap_count taps, normalized to unit sum.
std::vector<double> power_delay_profile(const ScenarioConfig& cfg);

// Frequency responses of one Nt-antenna TDL realization on N subcarriers.
// Columns are antennas. The expected energy per subcarrier is Nt.
std::vector<CVec> tdl_frequency_response(const std::vector<double>& pdp, int Nt, int N, RandomStream& rng);

ChannelSet generate_channel_set(const ScenarioConfig& cfg, RandomStream& rng);

// sqrt(1-sigma2) * h_hat + sqrt(sigma2) * e with e ~ CN(0, I).
CVec compose_true_channel(const CVec& h_hat, double sigma2, RandomStream& rng);
CMat compose_true_channel(const CMat& M_hat, double sigma2, RandomStream& rng);

CMat estimate_covariance(const std::vector<CVec>& samples);

std::vector<CVec> conditional_samples(const CVec& h_hat, double sigma2, int count, RandomStream& rng);

// Minimum eigenvalue >= -tol and Hermitian within herm_tol.
bool is_hermitian_psd(const CMat& A, double tol = 1e-10, double herm_tol = 1e-12);

// Binary cache. The file stores the seed; load fails on a seed mismatch.
void save_channel_set(const ChannelSet& cs, std::uint64_t seed, const std::string& path);
ChannelSet load_channel_set(const std::string& path, std::uint64_t expected_seed);

}  // namespace rsjam
