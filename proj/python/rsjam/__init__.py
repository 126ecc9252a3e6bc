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

"""Python front end for the rsjam precoder optimizer.

Every entry point takes a config as a dict (same layout as the JSON files
under configs/) or a path to such a file.
"""

import json
import os

from . import _rsjam
from ._rsjam import (
    DomainInfeasible,
    ShareViolation,
    jamming_threshold,
    mutual_information_from_error,
    qpsk_awgn_ber,
    wmse,
)

__all__ = [
    "DomainInfeasible",
    "ShareViolation",
    "ber_au",
    "ber_pu",
    "jamming_threshold",
    "load_config",
    "mutual_information_from_error",
    "qpsk_awgn_ber",
    "resolve_scenario",
    "solve",
    "sweep",
    "thresholds",
    "wmse",
]


def load_config(path):
    with open(path) as f:
        return json.load(f)


def _text(config, **overrides):
    if isinstance(config, (str, os.PathLike)):
        config = load_config(config)
    doc = dict(config)
    doc.update({k: v for k, v in overrides.items() if v is not None})
    return json.dumps(doc)


def resolve_scenario(config):
    """Scenario with defaults filled in and automatic N0/mu resolved."""
    return json.loads(_rsjam.resolve_scenario(_text(config)))


def thresholds(config, seed=None):
    return _rsjam.thresholds(_text(config, seed=seed))


def solve(config, scheme=None, seed=None):
    """Optimize one channel realization.

    Returns rates, the AO-ADMM trace (columns outer, inner, sum rate,
    primal residual, dual residual), precoders as complex arrays and the
    constraint audit.
    """
    return _rsjam.solve(_text(config, scheme=scheme, seed=seed))


def sweep(config):
    return _rsjam.sweep(_text(config))


def ber_au(config, modes=("pilot", "barrage", "off")):
    """AU bit error rate curves, one (Es, ber, se, bits) array per jamming mode."""
    return _rsjam.ber_au(_text(config), list(modes))


def ber_pu(config):
    return _rsjam.ber_pu(_text(config))
