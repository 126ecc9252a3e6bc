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

#include "oracles.hpp"
#include "rsjam/channels.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace rsjam;

TEST_SUITE("channels") {
  TEST_CASE("csit error variance follows the snr power law") {
    ScenarioConfig c;
    c.Pt_bar = 100;
    c.N0 = 1.0 / 32;
    c.N = 32;
    c.alpha_i = 0.6;
    CHECK(csit_error_variance(c.snr(), c.alpha_i) == doctest::Approx(std::pow(100.0, -0.6)).epsilon(1e-12));
    CHECK(csit_error_variance(c.snr(), 0.0) == 1.0);
    CHECK(csit_error_variance(1e-3, 0.6) == 1.0);
  }

  TEST_CASE("a single tap gives a flat response") {
    RandomStream rng(5);
    auto h = tdl_frequency_response({1.0}, 4, 16, rng);
    for (int n = 1; n < 16; ++n) CHECK((h[n] - h[0]).norm() == 0.0);
  }

  TEST_CASE("power delay profile is normalized and decaying") {
    ScenarioConfig c;
    c.N = 64;
    auto p = power_delay_profile(c);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      s += p[i];
      if (i) CHECK(p[i] < p[i - 1]);
    }
    CHECK(s == doctest::Approx(1.0));
    CHECK(static_cast<int>(p.size()) == tap_count(c));
  }

  TEST_CASE("frequency response has unit average gain") {
    ScenarioConfig c;
    c.N = 32;
    auto pdp = power_delay_profile(c);
    RandomStream rng(9);
    double acc = 0.0;
    const int reps = 400;
    for (int r = 0; r < reps; ++r) {
      auto h = tdl_frequency_response(pdp, 2, c.N, rng);
      for (const auto& v : h) acc += v.squaredNorm();
    }
    CHECK(acc / (reps * c.N * 2) == doctest::Approx(1.0).epsilon(0.03));
  }

  TEST_CASE("compose_true_channel limits") {
    RandomStream rng(1);
    CVec hh = rng.cnormal_vector(4);
    CHECK(compose_true_channel(hh, 0.0, rng) == hh);

    // Full error: the output is uncorrelated with the estimate.
    cd corr = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) corr += hh.dot(compose_true_channel(hh, 1.0, rng));
    CHECK(std::abs(corr) / n < 4.0 * hh.norm() / std::sqrt(double(n)));

    CHECK_THROWS_AS(compose_true_channel(hh, 1.5, rng), ConfigError);
  }

  TEST_CASE("compose_true_channel mean is scaled estimate") {
    RandomStream rng(2);
    CVec hh = rng.cnormal_vector(3);
    const int n = 100000;
    CVec mean = CVec::Zero(3);
    for (int i = 0; i < n; ++i) mean += compose_true_channel(hh, 0.25, rng);
    mean /= n;
    // Each coordinate of the mean has variance 0.25 / n.
    const double se = std::sqrt(0.25 / n / 2.0);
    CVec target = std::sqrt(0.75) * hh;
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(mean(i).real() - target(i).real()) < 3.0 * se);
      CHECK(std::abs(mean(i).imag() - target(i).imag()) < 3.0 * se);
    }
  }

  TEST_CASE("estimate_covariance small cases") {
    CVec e1 = CVec::Zero(2), e2 = CVec::Zero(2);
    e1(0) = 1.0;
    e2(1) = 1.0;
    CMat R1 = estimate_covariance({e1});
    CMat want = CMat::Zero(2, 2);
    want(0, 0) = 1.0;
    CHECK((R1 - want).norm() == 0.0);
    CHECK((estimate_covariance({e1, e2}) - 0.5 * CMat::Identity(2, 2)).norm() == 0.0);

    RandomStream rng(4);
    std::vector<CVec> s;
    for (int i = 0; i < 100000; ++i) s.push_back(rng.cnormal_vector(3));
    CHECK((estimate_covariance(s) - CMat::Identity(3, 3)).norm() < 0.05);
  }

  TEST_CASE("conditional samples") {
    RandomStream a(3), b(3);
    CVec hh = a.cnormal_vector(4);
    b.cnormal_vector(4);
    auto s0 = conditional_samples(hh, 0.0, 5, a);
    REQUIRE(s0.size() == 5);
    for (const auto& v : s0) CHECK(v == hh);

    RandomStream c(8), d(8);
    auto x = conditional_samples(hh, 0.3, 20, c);
    auto y = conditional_samples(hh, 0.3, 20, d);
    for (int i = 0; i < 20; ++i) CHECK(x[i] == y[i]);

    RandomStream e(10);
    auto z = conditional_samples(hh, 0.5, 10000, e);
    for (auto& v : z) v -= std::sqrt(0.5) * hh;
    CHECK((estimate_covariance(z) - 0.5 * CMat::Identity(4, 4)).norm() < 0.05);
  }

  TEST_CASE("generated channel set shapes and statistics") {
    ScenarioConfig c;
    c.N = 8;
    c.Sp = {{0, 4}};
    c.N0 = 1.0 / 8;
    c.resolve();
    RandomStream rng(c.seed);
    ChannelSet cs = generate_channel_set(c, rng);
    CHECK(cs.K() == c.K);
    CHECK(cs.L() == c.L);
    CHECK(cs.M() == c.M);
    CHECK(cs.sigma_ie2 == doctest::Approx(std::pow(c.snr(), -c.alpha_i)));
    for (int l = 0; l < c.L; ++l)
      for (int n = 0; n < c.N; ++n) CHECK(is_hermitian_psd(cs.R[l][n]));
    CHECK(cs.M_true[0][0].rows() == c.Nt);
    CHECK(cs.M_true[0][0].cols() == c.Nr[0]);

    RandomStream rng2(c.seed);
    ChannelSet cs2 = generate_channel_set(c, rng2);
    CHECK(cs2.h_hat[1][3] == cs.h_hat[1][3]);
    CHECK(cs2.R[0][5] == cs.R[0][5]);
  }

  TEST_CASE("channel set file round trip") {
    ScenarioConfig c;
    c.N = 8;
    RandomStream rng(c.seed);
    ChannelSet cs = generate_channel_set(c, rng);
    auto path = (std::filesystem::temp_directory_path() / "rsjam_cs_roundtrip.bin").string();
    save_channel_set(cs, 42, path);
    ChannelSet back = load_channel_set(path, 42);
    CHECK(back.h[0][2] == cs.h[0][2]);
    CHECK(back.M_hat[0][7] == cs.M_hat[0][7]);
    CHECK(back.sigma_pe2 == cs.sigma_pe2);
    CHECK_THROWS(load_channel_set(path, 43));
    std::filesystem::remove(path);
  }

  TEST_CASE("psd check") {
    CMat A = CMat::Identity(2, 2);
    CHECK(is_hermitian_psd(A));
    A(0, 0) = -1.0;
    CHECK_FALSE(is_hermitian_psd(A));
    CMat B = CMat::Identity(2, 2);
    B(0, 1) = cd(0.0, 0.5);
    CHECK_FALSE(is_hermitian_psd(B));
  }
}
