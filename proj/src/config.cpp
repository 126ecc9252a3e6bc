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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace rsjam {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::RSMA: return "RSMA";
    case Scheme::SDMA: return "SDMA";
    case Scheme::NOMA: return "NOMA";
  }
  return "?";
}

std::string to_string(JammingMode m) {
  switch (m) {
    case JammingMode::pilot: return "pilot";
    case JammingMode::barrage: return "barrage";
    case JammingMode::off: return "off";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& s) {
  std::string u = s;
  std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return std::toupper(c); });
  if (u == "RSMA") return Scheme::RSMA;
  if (u == "SDMA") return Scheme::SDMA;
  if (u == "NOMA") return Scheme::NOMA;
  throw ConfigError("unknown scheme '" + s + "'");
}

JammingMode jamming_mode_from_string(const std::string& s) {
  if (s == "pilot") return JammingMode::pilot;
  if (s == "barrage") return JammingMode::barrage;
  if (s == "off" || s == "none") return JammingMode::off;
  throw ConfigError("unknown jamming mode '" + s + "'");
}

std::vector<int> default_pilots(int N, int Np) {
  if (N < 1 || Np < 1 || Np > N) throw ConfigError("default_pilots: need 1 <= Np <= N");
  std::vector<int> out;
  for (int i = 0; i < Np; ++i) out.push_back(static_cast<int>((static_cast<long>(i) * N) / Np));
  return out;
}

std::vector<int> ScenarioConfig::pilots(int l) const {
  if (l < 0 || l >= L) throw ConfigError("pilot set index out of range");
  if (Sp.empty()) return default_pilots(N, std::min(8, N));
  return Sp.at(l);
}

bool ScenarioConfig::is_pilot(int l, int n) const {
  auto p = pilots(l);
  return std::find(p.begin(), p.end(), n) != p.end();
}

void ScenarioConfig::resolve() {
  if (N0_auto) N0 = 1.0 / N;
  if (mu_auto) mu = Pt_bar / (25.0 * N);
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("scenario: " + m); };
  if (Nt < 1) fail("Nt must be >= 1");
  if (K < 1) fail("K must be >= 1");
  if (L < 0 || M < 0) fail("L and M must be >= 0");
  if (N < 1) fail("N must be >= 1");
  if (static_cast<int>(Nr.size()) != M) fail("Nr must have M entries");
  for (int r : Nr)
    if (r < 1) fail("Nr entries must be >= 1");
  if (!Sp.empty() && static_cast<int>(Sp.size()) != L) fail("Sp must have L entries");
  for (const auto& s : Sp) {
    std::set<int> seen;
    for (int n : s) {
      if (n < 0 || n >= N) fail("pilot index outside 1..N");
      if (!seen.insert(n).second) fail("duplicate pilot index");
    }
  }
  if (!(Pt_bar >= 0.0) || !std::isfinite(Pt_bar)) fail("Pt_bar must be >= 0");
  if (!(N0 > 0.0)) fail("N0 must be > 0");
  if (!(alpha_i >= 0.0 && alpha_i <= 1.0) || !(alpha_p >= 0.0 && alpha_p <= 1.0)) fail("alpha_i, alpha_p must be in [0,1]");
  if (!(rho >= 0.0 && rho <= 1.0)) fail("rho must be in [0,1]");
  if (!(mu >= 0.0)) fail("mu must be >= 0");
  if (!(Rth >= 0.0)) fail("Rth must be >= 0");
  if (!(delay_spread > 0.0) || !(subcarrier_spacing > 0.0)) fail("delay_spread and subcarrier_spacing must be > 0");
  if (!(au_correlation >= 0.0 && au_correlation < 1.0)) fail("au_correlation must be in [0,1)");
  if (au_covariance_samples < 1) fail("au_covariance_samples must be >= 1");
}

namespace {

template <class T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ScenarioConfig scenario_from_json(const json& j) {
  ScenarioConfig c;
  try {
    get_if(j, "Nt", c.Nt);
    get_if(j, "K", c.K);
    get_if(j, "L", c.L);
    get_if(j, "M", c.M);
    get_if(j, "N", c.N);
    if (j.contains("Nr")) {
      if (j.at("Nr").is_array())
        c.Nr = j.at("Nr").get<std::vector<int>>();
      else
        c.Nr.assign(c.M, j.at("Nr").get<int>());
    } else {
      c.Nr.assign(c.M, c.Nr.empty() ? 2 : c.Nr.front());
    }
    if (j.contains("Sp") && j.contains("Np")) throw ConfigError("scenario: give Sp or Np, not both");
    if (j.contains("Sp")) {
      for (const auto& set : j.at("Sp")) {
        std::vector<int> s;
        for (int n1 : set.get<std::vector<int>>()) s.push_back(n1 - 1);
        c.Sp.push_back(std::move(s));
      }
    } else if (j.contains("Np")) {
      c.Sp.assign(c.L, default_pilots(c.N, j.at("Np").get<int>()));
    }
    get_if(j, "Pt_bar", c.Pt_bar);
    if (j.contains("N0")) {
      if (j.at("N0").is_string()) {
        if (j.at("N0").get<std::string>() != "auto") throw ConfigError("scenario: N0 must be a number or \"auto\"");
        c.N0_auto = true;
      } else {
        c.N0 = j.at("N0").get<double>();
      }
    }
    if (j.contains("mu")) {
      if (j.at("mu").is_string()) {
        if (j.at("mu").get<std::string>() != "auto") throw ConfigError("scenario: mu must be a number or \"auto\"");
        c.mu_auto = true;
      } else {
        c.mu = j.at("mu").get<double>();
      }
    }
    get_if(j, "alpha_i", c.alpha_i);
    get_if(j, "alpha_p", c.alpha_p);
    get_if(j, "rho", c.rho);
    get_if(j, "Rth", c.Rth);
    if (j.contains("scheme")) c.scheme = scheme_from_string(j.at("scheme").get<std::string>());
    get_if(j, "delay_spread", c.delay_spread);
    get_if(j, "subcarrier_spacing", c.subcarrier_spacing);
    get_if(j, "seed", c.seed);
    get_if(j, "au_correlation", c.au_correlation);
    get_if(j, "au_covariance_samples", c.au_covariance_samples);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  c.resolve();
  c.validate();
  return c;
}

json scenario_to_json(const ScenarioConfig& c) {
  json j;
  j["Nt"] = c.Nt;
  j["K"] = c.K;
  j["L"] = c.L;
  j["M"] = c.M;
  j["Nr"] = c.Nr;
  j["N"] = c.N;
  json sp = json::array();
  for (int l = 0; l < c.L; ++l) {
    std::vector<int> s;
    for (int n : c.pilots(l)) s.push_back(n + 1);
    sp.push_back(s);
  }
  j["Sp"] = sp;
  j["Pt_bar"] = c.Pt_bar;
  j["N0"] = c.N0;
  j["alpha_i"] = c.alpha_i;
  j["alpha_p"] = c.alpha_p;
  j["rho"] = c.rho;
  j["mu"] = c.mu;
  j["Rth"] = c.Rth;
  j["scheme"] = to_string(c.scheme);
  j["delay_spread"] = c.delay_spread;
  j["subcarrier_spacing"] = c.subcarrier_spacing;
  j["seed"] = c.seed;
  j["au_correlation"] = c.au_correlation;
  j["au_covariance_samples"] = c.au_covariance_samples;
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace rsjam
