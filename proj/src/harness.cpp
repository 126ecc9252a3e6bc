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

#include "rsjam/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace rsjam {

std::string to_string(SweepKind k) {
  switch (k) {
    case SweepKind::snr: return "snr";
    case SweepKind::rho: return "rho";
    case SweepKind::qos: return "qos";
    case SweepKind::csit_alpha: return "csit_alpha";
    case SweepKind::none: return "none";
  }
  return "?";
}

SweepKind sweep_kind_from_string(const std::string& s) {
  if (s == "snr") return SweepKind::snr;
  if (s == "rho") return SweepKind::rho;
  if (s == "qos") return SweepKind::qos;
  if (s == "csit_alpha") return SweepKind::csit_alpha;
  if (s == "none") return SweepKind::none;
  throw ConfigError("unknown sweep '" + s + "'");
}

double qos_preset(double snr_db) {
  if (snr_db < 10.0) return 0.25;
  if (snr_db < 25.0) return 0.5;
  return 1.0;
}

void ExperimentSpec::validate() const {
  if (realizations < 1) throw ConfigError("experiment: realizations must be >= 1");
  if (sweep != SweepKind::none && grid.empty()) throw ConfigError("experiment: grid must be nonempty");
  if (schemes.empty()) throw ConfigError("experiment: no schemes");
  solver.validate();
}

ScenarioConfig scenario_for(const ExperimentSpec& spec, double v, int realization) {
  ScenarioConfig c = spec.scenario;
  c.seed = spec.scenario.seed + static_cast<std::uint64_t>(realization);
  c.resolve();
  switch (spec.sweep) {
    case SweepKind::snr:
    case SweepKind::qos:
      c.Pt_bar = std::pow(10.0, v / 10.0) * c.N0 * c.N;
      if (spec.sweep == SweepKind::qos) c.Rth = qos_preset(v);
      break;
    case SweepKind::rho: c.rho = v; break;
    case SweepKind::csit_alpha:
      c.alpha_i = v;
      c.alpha_p = v;
      break;
    case SweepKind::none: break;
  }
  c.resolve();
  c.validate();
  return c;
}

std::vector<SchemeOutcome> solve_schemes(const ScenarioConfig& cfg, const ChannelSet& cs, const ThresholdSet& thr,
                                         const SolverConfig& scfg, const std::vector<Scheme>& schemes) {
  std::map<Scheme, SchemeOutcome> done;
  std::vector<PrecoderSet> warm;
  auto run = [&](Scheme s) {
    SchemeOutcome o;
    o.scheme = s;
    SolverConfig sc = scfg;
    sc.scheme = s;
    try {
      o.result = solve_scheme(cfg, cs, thr, sc, s == Scheme::RSMA ? warm : std::vector<PrecoderSet>{});
      if (s != Scheme::RSMA) warm.push_back(o.result.P);
    } catch (const DomainInfeasible& e) {
      o.status = "infeasible";
      o.message = e.what();
    } catch (const std::exception& e) {
      o.status = "error";
      o.message = e.what();
    }
    done[s] = std::move(o);
  };
  for (Scheme s : {Scheme::SDMA, Scheme::NOMA, Scheme::RSMA})
    if (std::find(schemes.begin(), schemes.end(), s) != schemes.end()) run(s);
  std::vector<SchemeOutcome> out;
  for (Scheme s : schemes) out.push_back(done.at(s));
  return out;
}

SolveResult solve_one(const ScenarioConfig& cfg, const ChannelSet& cs, const ThresholdSet& thr,
                      const SolverConfig& scfg) {
  std::vector<Scheme> schemes{scfg.scheme};
  if (scfg.scheme == Scheme::RSMA && scfg.multi_start) {
    schemes = {Scheme::SDMA};
    if (cfg.K == 2) schemes.push_back(Scheme::NOMA);
    schemes.push_back(Scheme::RSMA);
  }
  auto outcomes = solve_schemes(cfg, cs, thr, scfg, schemes);
  const auto& o = outcomes.back();
  if (o.status == "infeasible") throw DomainInfeasible(o.message);
  if (o.status != "ok") throw std::runtime_error(o.message);
  return o.result;
}

SweepTable run_sweep(const ExperimentSpec& spec, const ProgressFn& progress) {
  spec.validate();
  SweepTable table;
  std::vector<double> grid = spec.sweep == SweepKind::none ? std::vector<double>{0.0} : spec.grid;
  for (double v : grid) {
    for (int r = 0; r < spec.realizations; ++r) {
      std::vector<SweepRow> rows;
      for (Scheme s : spec.schemes) {
        SweepRow row;
        row.grid_value = v;
        row.realization = r;
        row.scheme = s;
        rows.push_back(row);
      }
      try {
        ScenarioConfig cfg = scenario_for(spec, v, r);
        RandomStream rng(cfg.seed);
        ChannelSet cs = generate_channel_set(cfg, rng);
        ThresholdSet thr = assemble_thresholds(cfg, cs, spec.jamming, spec.interference_constraints);
        auto outcomes = solve_schemes(cfg, cs, thr, spec.solver, spec.schemes);
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
          SweepRow& row = rows[i];
          const auto& o = outcomes[i];
          row.status = o.status;
          row.message = o.message;
          if (o.status != "ok") continue;
          const auto& res = o.result;
          row.R_sum = res.report.R_sum;
          row.R_common = res.report.R_common;
          row.R_user = res.report.R_user;
          row.audit = audit_solution(cfg, cs, thr, res.P, spec.solver.saa_samples);
          row.outer_iterations = res.outer_iterations;
          row.outer_converged = res.outer_converged;
          row.inner_converged = res.final_inner_converged;
          row.final_r = res.final_r;
          row.final_q = res.final_q;
          row.noma_common_user = res.noma_common_user;
          row.start = res.start;
        }
      } catch (const std::exception& e) {
        for (auto& row : rows) {
          row.status = "error";
          row.message = e.what();
        }
      }
      for (auto& row : rows) {
        if (progress) progress(row);
        table.rows.push_back(row);
      }
    }
    for (Scheme s : spec.schemes) {
      SweepSummaryRow sr;
      sr.grid_value = v;
      sr.scheme = s;
      double acc = 0.0;
      for (const auto& row : table.rows) {
        if (row.grid_value != v || row.scheme != s || row.status != "ok") continue;
        ++sr.solved;
        if (row.audit.all_ok()) ++sr.audited_ok;
        acc += row.R_sum;
      }
      sr.mean_R_sum = sr.solved ? acc / sr.solved : std::nan("");
      table.summary.push_back(sr);
    }
  }
  return table;
}

void BerSpec::validate() const {
  if (Es_grid.empty()) throw ConfigError("ber: Es grid must be nonempty");
  for (std::size_t i = 0; i < Es_grid.size(); ++i) {
    if (!(Es_grid[i] > 0.0)) throw ConfigError("ber: Es values must be > 0");
    if (i && Es_grid[i] < Es_grid[i - 1]) throw ConfigError("ber: Es grid must be ascending");
  }
  if (bits_per_point < 1) throw ConfigError("ber: bits_per_point must be >= 1");
}

double qpsk_awgn_ber(double snr) { return 0.5 * std::erfc(std::sqrt(snr / 2.0)); }

namespace {

// Shared Monte Carlo loop. interference[n] is the received interference power on
// subcarrier n; pilots empty means perfect CSIR.
std::vector<BerPoint> ber_loop(const BerSpec& spec, const std::vector<double>& interference, const ScenarioConfig& cfg,
                               const std::vector<int>* pilots, const RandomStream& rng) {
  spec.validate();
  const int N = cfg.N;
  if (static_cast<int>(interference.size()) != N) throw std::invalid_argument("ber: channel length differs from N");
  const long per_real = 2L * N;
  const long reals = (spec.bits_per_point + per_real - 1) / per_real;
  std::vector<BerPoint> out;
  for (std::size_t i = 0; i < spec.Es_grid.size(); ++i) {
    const double Es = spec.Es_grid[i];
    const double amp = std::sqrt(Es / N);
    BerPoint pt;
    pt.Es = Es;
    RandomStream point = rng.sub("ber_point", {static_cast<std::uint64_t>(i)});
    for (long r = 0; r < reals; ++r) {
      RandomStream s = point.sub("realization", {static_cast<std::uint64_t>(r)});
      cd h = s.cnormal();
      if (spec.flat_channel_model == FlatChannelModel::unit) h = 1.0;
      cd e = s.cnormal();
      cd h_est = h;
      if (pilots) {
        double sigma = 0.0;
        if (!spec.perfect_estimate) {
          double mean_sinr = 0.0;
          for (int n : *pilots) mean_sinr += std::norm(h) * (Es / N) / (cfg.N0 + interference[n]);
          mean_sinr /= std::max<std::size_t>(1, pilots->size());
          sigma = mean_sinr > 0.0 ? std::min(1.0, std::pow(mean_sinr, -spec.sigma_exponent)) : 1.0;
        }
        h_est = std::sqrt(1.0 - sigma * sigma) * h + sigma * e;
      }
      for (int n = 0; n < N; ++n) {
        std::uint64_t bits = s.next_u64();
        int b0 = static_cast<int>(bits & 1u), b1 = static_cast<int>((bits >> 1) & 1u);
        cd x = cd(1.0 - 2.0 * b0, 1.0 - 2.0 * b1) / std::sqrt(2.0);
        cd eta = std::sqrt(interference[n]) * s.cnormal();
        cd w = std::sqrt(cfg.N0) * s.cnormal();
        cd y = amp * h * x + eta + w;
        cd xh = std::abs(h_est) > 0.0 ? y / h_est : cd(0.0);
        int d0 = xh.real() < 0.0 ? 1 : 0, d1 = xh.imag() < 0.0 ? 1 : 0;
        pt.errors += (d0 != b0) + (d1 != b1);
        pt.bits += 2;
      }
    }
    pt.ber = static_cast<double>(pt.errors) / pt.bits;
    pt.se = std::sqrt(std::max(pt.ber * (1.0 - pt.ber), 0.0) / pt.bits);
    out.push_back(pt);
  }
  return out;
}

std::vector<double> realized_power(const PrecoderSet& P, const std::vector<CVec>& c, int N) {
  if (static_cast<int>(c.size()) != N || P.N() != N) throw std::invalid_argument("ber: subcarrier count mismatch");
  std::vector<double> out(N, 0.0);
  for (int n = 0; n < N; ++n) {
    PrecoderSlice s = P.slice(n);
    double acc = std::norm(c[n].dot(s.p_c));
    for (const auto& x : s.p) acc += std::norm(c[n].dot(x));
    for (const auto& x : s.f) acc += std::norm(c[n].dot(x));
    out[n] = acc;
  }
  return out;
}

}  // namespace

std::vector<BerPoint> ber_au(const BerSpec& spec, const PrecoderSet& P, const std::vector<CVec>& g,
                             const ScenarioConfig& cfg, const std::vector<int>& pilots, const RandomStream& rng) {
  return ber_loop(spec, realized_power(P, g, cfg.N), cfg, &pilots, rng.sub("ber_au"));
}

std::vector<BerPoint> ber_pu(const BerSpec& spec, const PrecoderSet& P, const std::vector<CVec>& m,
                             const ScenarioConfig& cfg, const RandomStream& rng) {
  return ber_loop(spec, realized_power(P, m, cfg.N), cfg, nullptr, rng.sub("ber_pu"));
}

std::vector<ProfileRow> interference_profile(const ScenarioConfig& cfg, const ChannelSet& cs, const ThresholdSet& thr,
                                             const PrecoderSet& P, double tol) {
  std::vector<ProfileRow> rows;
  for (int m = 0; m < cfg.M; ++m)
    for (int n = 0; n < cfg.N; ++n) {
      ProfileRow r;
      r.index = m;
      r.n = n;
      r.value = interference_power(cs.M_hat[m][n], cs.sigma_pe2, cfg.Nr[m], P.slice(n)).Psi_bar;
      r.threshold = thr.I_thr[m][n];
      r.constrained = thr.interference_active;
      r.ok = !r.constrained || r.value <= r.threshold + tol;
      rows.push_back(r);
    }
  return rows;
}

std::vector<ProfileRow> jamming_profile(const ScenarioConfig& cfg, const ChannelSet& cs, const ThresholdSet& thr,
                                        const PrecoderSet& P, double tol) {
  std::vector<ProfileRow> rows;
  for (int l = 0; l < cfg.L; ++l)
    for (int n = 0; n < cfg.N; ++n) {
      ProfileRow r;
      r.index = l;
      r.n = n;
      r.value = jamming_power(cs.R[l][n], P.slice(n));
      r.threshold = thr.J_thr[l][n];
      r.constrained = thr.jamming_active && thr.is_pilot(l, n);
      r.ok = !r.constrained || r.value >= r.threshold - tol;
      rows.push_back(r);
    }
  return rows;
}

namespace {

struct BerInstance {
  ScenarioConfig cfg;
  ChannelSet cs;
};

BerInstance ber_instance(ScenarioConfig cfg) {
  cfg.resolve();
  cfg.validate();
  RandomStream rng(cfg.seed);
  ChannelSet cs = generate_channel_set(cfg, rng);
  return {cfg, std::move(cs)};
}

}  // namespace

BerExperiment run_ber_au(const ExperimentSpec& exp, const BerSpec& spec, const std::vector<JammingMode>& modes) {
  spec.validate();
  BerInstance in = ber_instance(exp.scenario);
  if (in.cfg.L < 1) throw ConfigError("ber-au needs L >= 1");
  BerExperiment out;
  out.cfg = in.cfg;
  for (JammingMode mode : modes) {
    BerCurve c;
    c.name = to_string(mode);
    if (mode == JammingMode::off) {
      c.P = PrecoderSet::zeros(in.cfg.Nt, in.cfg.K, in.cfg.L, in.cfg.N);
    } else {
      ThresholdSet thr = assemble_thresholds(in.cfg, in.cs, mode, exp.interference_constraints);
      SolveResult res = solve_one(in.cfg, in.cs, thr, exp.solver);
      c.P = res.P;
      c.R_sum = res.report.R_sum;
      c.solved = true;
    }
    c.points = ber_au(spec, c.P, in.cs.g[0], in.cfg, in.cfg.pilots(0), RandomStream(in.cfg.seed));
    out.curves.push_back(std::move(c));
  }
  return out;
}

BerExperiment run_ber_pu(const ExperimentSpec& exp, const BerSpec& spec) {
  spec.validate();
  ScenarioConfig cfg = exp.scenario;
  if (spec.Pt_dBW) cfg.Pt_bar = std::pow(10.0, *spec.Pt_dBW / 10.0);
  BerInstance in = ber_instance(cfg);
  if (in.cfg.M < 1) throw ConfigError("ber-pu needs M >= 1");
  std::vector<CVec> m(in.cfg.N);
  for (int n = 0; n < in.cfg.N; ++n) m[n] = in.cs.M_true[0][n].col(0);
  BerExperiment out;
  out.cfg = in.cfg;
  BerCurve base;
  base.name = "no_interference";
  base.P = PrecoderSet::zeros(in.cfg.Nt, in.cfg.K, in.cfg.L, in.cfg.N);
  out.curves.push_back(std::move(base));
  for (bool constrained : {true, false}) {
    BerCurve c;
    c.name = constrained ? "constrained" : "unconstrained";
    ThresholdSet thr = assemble_thresholds(in.cfg, in.cs, exp.jamming, constrained);
    SolveResult res = solve_one(in.cfg, in.cs, thr, exp.solver);
    c.P = res.P;
    c.R_sum = res.report.R_sum;
    c.solved = true;
    out.curves.push_back(std::move(c));
  }
  // Same noise stream for every curve.
  for (auto& c : out.curves) c.points = ber_pu(spec, c.P, m, in.cfg, RandomStream(in.cfg.seed));
  return out;
}

}  // namespace rsjam
