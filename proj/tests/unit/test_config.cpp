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

#include "rsjam/config.hpp"
#include "rsjam/harness.hpp"
#include "rsjam/rng.hpp"

#include <doctest.h>

using namespace rsjam;

TEST_SUITE("config") {
  TEST_CASE("random streams are reproducible and independent by name") {
    RandomStream a(7), b(7);
    for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
    RandomStream root(7);
    auto x = root.sub("x", {1});
    auto y = root.sub("x", {1});
    auto z = root.sub("x", {2});
    auto w = root.sub("y", {1});
    CHECK(x.key() == y.key());
    CHECK(x.key() != z.key());
    CHECK(x.key() != w.key());
  }

  TEST_CASE("complex normal has unit variance") {
    RandomStream r(3);
    double acc = 0.0, re2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      cd z = r.cnormal();
      acc += std::norm(z);
      re2 += z.real() * z.real();
    }
    CHECK(acc / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(re2 / n == doctest::Approx(0.5).epsilon(0.02));
  }

  TEST_CASE("scenario json round trip") {
    json j = {{"Nt", 4}, {"K", 2}, {"L", 1}, {"M", 1}, {"Nr", {2}}, {"N", 8},    {"Np", 2},
              {"Pt_bar", 100}, {"N0", "auto"}, {"mu", "auto"}, {"rho", 0.9}, {"seed", 11}};
    ScenarioConfig c = scenario_from_json(j);
    c.resolve();
    CHECK(c.N0 == doctest::Approx(1.0 / 8));
    CHECK(c.mu == doctest::Approx(100.0 / (25.0 * 8)));
    CHECK(c.pilots(0) == std::vector<int>{0, 4});
    CHECK(c.snr() == doctest::Approx(100.0));
    ScenarioConfig d = scenario_from_json(scenario_to_json(c));
    d.resolve();
    CHECK(d.N0 == c.N0);
    CHECK(d.mu == c.mu);
    CHECK(d.Sp == c.Sp);
    CHECK(d.seed == 11);
    CHECK(d.rho == 0.9);
  }

  TEST_CASE("invalid scenarios are rejected") {
    CHECK_THROWS_AS(scenario_from_json(json{{"Sp", {{1}}}, {"Np", 1}}), ConfigError);
    ScenarioConfig c;
    c.rho = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ScenarioConfig{};
    c.K = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }

  TEST_CASE("default pilots are spread evenly") {
    CHECK(default_pilots(32, 8) == std::vector<int>{0, 4, 8, 12, 16, 20, 24, 28});
    CHECK(default_pilots(8, 3) == std::vector<int>{0, 2, 5});
    CHECK_THROWS_AS(default_pilots(4, 5), ConfigError);
  }

  TEST_CASE("experiment and solver sections") {
    json doc = {{"N", 8}, {"solver", {{"zeta", 5.0}, {"saa_samples", 4}}},
                {"experiment", {{"sweep", "rho"}, {"grid", {0.45, 0.9}}, {"realizations", 3}, {"schemes", {"SDMA"}}}}};
    ExperimentSpec e = experiment_from_json(doc);
    CHECK(e.solver.zeta == 5.0);
    CHECK(e.solver.saa_samples == 4);
    CHECK(e.sweep == SweepKind::rho);
    CHECK(e.grid.size() == 2);
    CHECK(e.realizations == 3);
    CHECK(e.schemes == std::vector<Scheme>{Scheme::SDMA});
    ScenarioConfig s = scenario_for(e, 0.9, 2);
    CHECK(s.rho == 0.9);
    CHECK(s.seed == e.scenario.seed + 2);

    CHECK_THROWS_AS(experiment_from_json(json{{"experiment", {{"sweep", "rho"}}}}), ConfigError);
    CHECK_THROWS_AS(solver_from_json(json{{"zeta", -1.0}}), ConfigError);
  }

  TEST_CASE("unknown keys are rejected") {
    CHECK_THROWS_AS(experiment_from_json(json{{"N", 8}, {"Ptbar", 5.0}}), ConfigError);
    CHECK_THROWS_AS(experiment_from_json(json{{"solver", {{"zeta", 5.0}, {"max_iter", 3}}}}), ConfigError);
    CHECK_THROWS_AS(experiment_from_json(json{{"experiment", {{"realisations", 3}}}}), ConfigError);
    CHECK_THROWS_AS(ber_from_json(json{{"Es_dB", {0.0}}, {"bits", 10}}), ConfigError);
    for (const char* name : {"desk.json", "desk_ber.json", "desk_rho_sweep.json", "full_snr_sweep.json", "full_ber.json"}) {
      CAPTURE(name);
      json doc = read_json_file(std::string(RSJAM_SOURCE_DIR) + "/configs/" + name);
      CHECK_NOTHROW(experiment_from_json(doc));
      if (doc.contains("ber")) CHECK_NOTHROW(ber_from_json(doc["ber"]));
    }
  }

  TEST_CASE("ber section") {
    BerSpec b = ber_from_json(json{{"Es_dB", {0, 10}}, {"bits_per_point", 1000}});
    REQUIRE(b.Es_grid.size() == 2);
    CHECK(b.Es_grid[1] == doctest::Approx(10.0));
    CHECK_THROWS_AS(ber_from_json(json{{"Es_grid", {2.0, 1.0}}}), ConfigError);
    CHECK_THROWS_AS(ber_from_json(json{{"flat_channel_model", "rician"}}), ConfigError);
  }
}
