"""Conditional wave function experiments for two-particle stationary states."""

import json

from ._core import Error, __version__, bohmian_velocity, canonical_config, cli, scenario_state
from ._core import run_experiment as _run_experiment

__all__ = [
    "Error",
    "__version__",
    "bohmian_velocity",
    "canonical_config",
    "cli",
    "run",
    "scenario_state",
]


def run(kind, config):
    """Run `kind` ("equivariance", "classicality", "compare" or "residuals") and return the report."""
    return json.loads(_run_experiment(kind, config))
