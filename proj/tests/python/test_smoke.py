# Copyright 2026 rsjam contributors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math
import pathlib

import numpy as np
import pytest

rsjam = pytest.importorskip("rsjam")

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"

TINY = {
    "Nt": 2,
    "K": 2,
    "L": 1,
    "M": 1,
    "Nr": [1],
    "N": 2,
    "Sp": [[1]],
    "Pt_bar": 10.0,
    "N0": 0.5,
    "seed": 3,
    "solver": {"saa_samples": 4},
}


def test_mi_and_wmse():
    for eps in (0.05, 0.3, 1.0):
        i = rsjam.mutual_information_from_error(eps)
        assert i == pytest.approx(-math.log2(eps), abs=1e-12)
        assert rsjam.wmse(eps) == pytest.approx(1.0 - i, abs=1e-12)
    assert rsjam.wmse(0.5, 1.0) == pytest.approx(0.5 - 0.0)


def test_jamming_threshold_identity():
    assert rsjam.jamming_threshold(0.45, 100.0, 8, 1, np.eye(4, dtype=complex)) == pytest.approx(5.625)


def test_qpsk_ber_matches_erfc():
    for snr in (0.5, 2.0, 10.0):
        assert rsjam.qpsk_awgn_ber(snr) == pytest.approx(0.5 * math.erfc(math.sqrt(snr / 2)))


def test_resolve_scenario_fills_auto_fields():
    s = rsjam.resolve_scenario(CONFIGS / "desk.json")
    assert s["N0"] == pytest.approx(1.0 / s["N"])


def test_thresholds_shape():
    t = rsjam.thresholds(TINY)
    assert len(t["J_thr"]) == 1 and len(t["J_thr"][0]) == 2
    assert t["J_thr"][0][1] == 0.0
    assert t["J_branch"][0][0] == "principal"


def test_solve_tiny_instance():
    r = rsjam.solve(TINY)
    assert r["audit"]["all_ok"]
    assert r["R_sum"] == pytest.approx(r["R_common"] + sum(r["R_private"]), rel=1e-12)
    pc = r["precoders"]["p_c"]
    p = r["precoders"]["p"]
    f = r["precoders"]["f"]
    assert pc.shape == (2, 2) and p.shape == (2, 2, 2) and f.shape == (1, 2, 2)
    power = np.sum(np.abs(pc) ** 2) + np.sum(np.abs(p) ** 2) + np.sum(np.abs(f) ** 2)
    assert power <= 10.0 + 1e-6
    trace = r["trace"]
    assert trace.shape[1] == 5
    assert trace[0, 0] == 0 and trace[0, 1] == 0
    assert np.all(np.isfinite(trace))


def test_solve_is_deterministic():
    a = rsjam.solve(TINY, scheme="SDMA")
    b = rsjam.solve(TINY, scheme="SDMA")
    assert a["scheme"] == "SDMA"
    assert a["R_sum"] == b["R_sum"]
    assert np.array_equal(a["precoders"]["p"], b["precoders"]["p"])


def test_sweep_rows():
    cfg = dict(TINY, experiment={"schemes": ["SDMA", "RSMA"], "realizations": 1})
    rows = rsjam.sweep(cfg)
    assert [r["scheme"] for r in rows] == ["SDMA", "RSMA"]
    assert all(r["status"] == "ok" for r in rows)


def test_ber_au_without_secondary_transmission():
    cfg = dict(TINY, N=4, ber={"Es_dB": [10.0], "bits_per_point": 20000})
    curves = rsjam.ber_au(cfg, modes=["off"])
    pts = curves["off"]
    assert pts.shape == (1, 4)
    assert 0.0 <= pts[0, 1] < 0.5
    assert pts[0, 3] >= 20000


def test_bad_config_raises():
    with pytest.raises(Exception):
        rsjam.solve(dict(TINY, N=0))
