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

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsjam {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

enum class Scheme { RSMA, SDMA, NOMA };
enum class JammingMode { pilot, barrage, off };

std::string to_string(Scheme s);
std::string to_string(JammingMode m);
Scheme scheme_from_string(const std::string& s);
JammingMode jamming_mode_from_string(const std::string& s);

// Thrown for invalid configuration or violated preconditions.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when the projection domain of the u-update cannot be entered.
struct DomainInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
  int Nt = 4;                         // transmit antennas
  int K = 2;                          // secondary users
  int L = 1;                          // adversarial users
  int M = 1;                          // primary users
  std::vector<int> Nr{2};             // receive antennas per PU
  int N = 32;                         // subcarriers
  std::vector<std::vector<int>> Sp{}; // pilot subcarriers per AU, 0-based
  double Pt_bar = 100.0;              // total power budget [W]
  double N0 = 1.0 / 32.0;             // noise variance per subcarrier [W]
  double alpha_i = 0.6;
  double alpha_p = 0.6;
  double rho = 0.45;
  double mu = 0.125;                  // relaxation floor [W]
  bool mu_auto = false;               // resolve() sets mu = Pt_bar / (25 N)
  bool N0_auto = false;               // resolve() sets N0 = 1 / N
  double Rth = 0.0;                   // QoS floor [bit/s/Hz]
  Scheme scheme = Scheme::RSMA;
  double delay_spread = 1200e-9;      // [s]
  double subcarrier_spacing = 60e3;   // [Hz]
  std::uint64_t seed = 1;

  // Generator knobs for the synthetic AU channel, not part of the system model.
  double au_correlation = 0.7;        // exponential transmit correlation magnitude
  int au_covariance_samples = 128;    // realizations averaged into R

  double snr() const { return Pt_bar / (N0 * N); }
  // Sp[l], or the default layout with min(8, N) pilots when Sp is empty.
  std::vector<int> pilots(int l) const;
  int pilot_count(int l) const { return static_cast<int>(pilots(l).size()); }
  bool is_pilot(int l, int n) const;
  void resolve();
  void validate() const;
};

// Np evenly spaced pilots starting at subcarrier 0: {0, N/Np, ...}.
std::vector<int> default_pilots(int N, int Np);

}  // namespace rsjam
