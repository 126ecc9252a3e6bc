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

// Configs cross the boundary as JSON text; the Python wrapper handles dicts.

#include "rsjam/harness.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace rsjam;

namespace {

using CArray = py::array_t<std::complex<double>>;

// [count][N][Nt] stack of precoders.
CArray stack(const std::vector<std::vector<CVec>>& v, int N, int Nt) {
  CArray a({static_cast<py::ssize_t>(v.size()), static_cast<py::ssize_t>(N), static_cast<py::ssize_t>(Nt)});
  auto m = a.mutable_unchecked<3>();
  for (std::size_t i = 0; i < v.size(); ++i)
    for (int n = 0; n < N; ++n)
      for (int t = 0; t < Nt; ++t) m(i, n, t) = v[i][n](t);
  return a;
}

py::dict precoders(const PrecoderSet& P, int Nt) {
  py::dict d;
  d["p_c"] = stack({P.p_c}, P.N(), Nt)[py::int_(0)];
  d["p"] = stack(P.p, P.N(), Nt);
  d["f"] = stack(P.f, P.N(), Nt);
  d["c_bar"] = P.c_bar;
  return d;
}

py::array_t<double> trace_array(const std::vector<TraceRow>& rows) {
  py::array_t<double> a({static_cast<py::ssize_t>(rows.size()), py::ssize_t{5}});
  auto m = a.mutable_unchecked<2>();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    m(i, 0) = rows[i].outer_iter;
    m(i, 1) = rows[i].inner_iter;
    m(i, 2) = rows[i].sum_rate;
    m(i, 3) = rows[i].primal_residual;
    m(i, 4) = rows[i].dual_residual;
  }
  return a;
}

py::dict audit_dict(const ConstraintAudit& a) {
  py::dict d;
  d["jamming_ok"] = a.jamming_ok;
  d["interference_ok"] = a.interference_ok;
  d["power_ok"] = a.power_ok;
  d["qos_ok"] = a.qos_ok;
  d["shares_ok"] = a.shares_ok;
  d["all_ok"] = a.all_ok();
  return d;
}

py::dict ber_dict(const BerExperiment& be) {
  py::dict out;
  for (const auto& cv : be.curves) {
    py::array_t<double> a({static_cast<py::ssize_t>(cv.points.size()), py::ssize_t{4}});
    auto m = a.mutable_unchecked<2>();
    for (std::size_t i = 0; i < cv.points.size(); ++i) {
      m(i, 0) = cv.points[i].Es;
      m(i, 1) = cv.points[i].ber;
      m(i, 2) = cv.points[i].se;
      m(i, 3) = static_cast<double>(cv.points[i].bits);
    }
    out[py::str(cv.name)] = a;
  }
  return out;
}

struct Instance {
  json doc;
  ExperimentSpec exp;
  ScenarioConfig cfg;
  ChannelSet cs;
  ThresholdSet thr;
};

Instance instance(const std::string& text) {
  Instance in;
  in.doc = json::parse(text);
  in.exp = experiment_from_json(in.doc);
  in.cfg = in.exp.scenario;
  in.cfg.resolve();
  RandomStream rng(in.cfg.seed);
  in.cs = generate_channel_set(in.cfg, rng);
  in.thr = assemble_thresholds(in.cfg, in.cs, in.exp.jamming, in.exp.interference_constraints);
  return in;
}

py::dict thresholds(const std::string& text) {
  Instance in = instance(text);
  py::dict d;
  d["J_thr"] = in.thr.J_thr;
  d["I_thr"] = in.thr.I_thr;
  d["J_branch"] = in.thr.J_branch;
  d["I_branch"] = in.thr.I_branch;
  d["pilots"] = in.thr.pilots;
  d["mu"] = in.thr.mu;
  d["rho"] = in.thr.rho;
  return d;
}

py::dict solve(const std::string& text) {
  Instance in = instance(text);
  SolveResult r;
  {
    py::gil_scoped_release release;
    r = solve_one(in.cfg, in.cs, in.thr, in.exp.solver);
  }
  ConstraintAudit a = audit_solution(in.cfg, in.cs, in.thr, r.P, in.exp.solver.saa_samples);
  py::dict d;
  d["scheme"] = to_string(r.scheme);
  d["R_sum"] = r.report.R_sum;
  d["R_common"] = r.report.R_common;
  d["R_private"] = r.report.R_private;
  d["R_user"] = r.report.R_user;
  d["outer_iterations"] = r.outer_iterations;
  d["outer_converged"] = r.outer_converged;
  d["trace"] = trace_array(r.trace);
  d["precoders"] = precoders(r.P, in.cfg.Nt);
  d["audit"] = audit_dict(a);
  return d;
}

py::list sweep(const std::string& text) {
  ExperimentSpec e = experiment_from_json(json::parse(text));
  SweepTable t;
  {
    py::gil_scoped_release release;
    t = run_sweep(e);
  }
  py::list rows;
  for (const auto& r : t.rows) {
    py::dict d;
    d["grid_value"] = r.grid_value;
    d["realization"] = r.realization;
    d["scheme"] = to_string(r.scheme);
    d["status"] = r.status;
    d["message"] = r.message;
    d["R_sum"] = r.R_sum;
    d["R_common"] = r.R_common;
    d["R_user"] = r.R_user;
    d["audit"] = audit_dict(r.audit);
    rows.append(d);
  }
  return rows;
}

py::dict ber_au_py(const std::string& text, const std::vector<std::string>& modes) {
  json doc = json::parse(text);
  ExperimentSpec e = experiment_from_json(doc);
  BerSpec spec = ber_from_json(doc.value("ber", json::object()));
  std::vector<JammingMode> m;
  for (const auto& s : modes) m.push_back(jamming_mode_from_string(s));
  py::gil_scoped_release release;
  BerExperiment be = run_ber_au(e, spec, m);
  py::gil_scoped_acquire acquire;
  return ber_dict(be);
}

py::dict ber_pu_py(const std::string& text) {
  json doc = json::parse(text);
  ExperimentSpec e = experiment_from_json(doc);
  BerSpec spec = ber_from_json(doc.value("ber", json::object()));
  py::gil_scoped_release release;
  BerExperiment be = run_ber_pu(e, spec);
  py::gil_scoped_acquire acquire;
  return ber_dict(be);
}

}  // namespace

PYBIND11_MODULE(_rsjam, m) {
  m.doc() = "Native core of rsjam";

  py::register_exception<DomainInfeasible>(m, "DomainInfeasible", PyExc_RuntimeError);
  py::register_exception<ShareViolation>(m, "ShareViolation", PyExc_RuntimeError);

  m.def("resolve_scenario", [](const std::string& text) {
    ScenarioConfig c = scenario_from_json(json::parse(text));
    c.resolve();
    return scenario_to_json(c).dump();
  });
  m.def("thresholds", &thresholds);
  m.def("solve", &solve);
  m.def("sweep", &sweep);
  m.def("ber_au", &ber_au_py, py::arg("config"), py::arg("modes"));
  m.def("ber_pu", &ber_pu_py);
  m.def("mutual_information_from_error", &mutual_information_from_error);
  m.def("wmse", [](double eps, std::optional<double> w) { return wmse_and_optimal_weights(eps, w).xi; },
        py::arg("eps"), py::arg("weight") = py::none());
  m.def("jamming_threshold", &jamming_threshold, py::arg("rho"), py::arg("Pt_bar"), py::arg("Np"), py::arg("L"),
        py::arg("R"));
  m.def("qpsk_awgn_ber", &qpsk_awgn_ber);
}
