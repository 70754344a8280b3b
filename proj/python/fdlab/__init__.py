"""Operator-splitting lab for drift-diffusion with nonlinear diffusion."""

import json

from . import _core
from ._core import ScenarioError, battery_names, diffusion_step, w2_1d, wp_exact

__all__ = [
    "ScenarioError",
    "battery_names",
    "classify_drift",
    "diffusion_step",
    "load_trajectory",
    "run_scenario",
    "scenario",
    "verify",
    "w2_1d",
    "wp_exact",
]

STATUS = {0: "pass", 1: "violation", 2: "refused"}


def run_scenario(path, out=""):
    """Run a scenario file; returns the trajectory directory."""
    return _core.run_scenario(str(path), str(out))


def scenario(path):
    """The parsed scenario as a dict."""
    return json.loads(_core.scenario_json(str(path)))


def load_trajectory(directory):
    d = _core.load_trajectory(str(directory))
    d["manifest"] = json.loads(d["manifest"])
    return d


def verify(battery, directory):
    """Returns (status name, report dict)."""
    code, report = _core.verify(battery, str(directory))
    return STATUS[code], json.loads(report)


def classify_drift(kind, m, q, q1=float("inf"), q2=float("inf"), cls="D", dim=2, T=1.0, **params):
    p = {k: str(v) for k, v in params.items()}
    return json.loads(_core.classify_drift(kind, p, dim, m, q, q1, q2, cls, T))
