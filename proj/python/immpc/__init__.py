"""Python access to the IMM-MPC core: filter steps, scheduling and campaigns."""

import json

from . import _core
from ._core import (
    ConfigError,
    ImpossibleEvidence,
    ModelError,
    info_gain,
    link_probability,
    mode_names,
    predict,
    transition_matrix,
    update,
)

__all__ = [
    "ConfigError",
    "ImpossibleEvidence",
    "ModelError",
    "info_gain",
    "link_probability",
    "load_config",
    "mode_names",
    "predict",
    "run_campaign",
    "solve",
    "transition_matrix",
    "update",
    "windows_csv",
]


def load_config(path):
    """Resolved config document (model and stations inlined) as a dict."""
    return json.loads(_core.config_json(str(path)))


def windows_csv(config):
    return _core.windows_csv(str(config))


def solve(problem, solver="exact"):
    """Solve a scheduling problem given as a dict; returns the schedule dict."""
    return json.loads(_core.solve_json(json.dumps(problem), solver))


def run_campaign(config, planner="imm", trials=1, seed=1, solver="exact", jobs=1):
    """Campaign summary dict; the per-trial CSV is under "metrics_csv"."""
    return json.loads(_core.run_campaign_json(str(config), planner, trials, seed, solver, jobs))
