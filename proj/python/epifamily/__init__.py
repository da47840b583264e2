"""Python access to the epifamily model family.

Array-valued results from the JSON-configured models come back as plain
dicts and lists.
"""

import json as _json

from ._core import (
    DailySeries,
    InputError,
    NumericalError,
    cld_roundtrip,
    discretize_delay,
    hm_calibrate,
    hm_forward,
    run_command,
    stochastic_round,
)
from . import _core

__all__ = [
    "DailySeries",
    "InputError",
    "NumericalError",
    "cld_coverage",
    "cld_roundtrip",
    "discretize_delay",
    "generate_scenarios",
    "hm_calibrate",
    "hm_forward",
    "run_asm",
    "run_command",
    "run_iwm",
    "stochastic_round",
]


def run_iwm(config_path, seed=0):
    """Runs the immunity waning model from a JSON config."""
    return _json.loads(_core._run_iwm(str(config_path), seed))


def run_asm(config_path):
    """Integrates the age structure model from a JSON config."""
    return _json.loads(_core._run_asm(str(config_path)))


def generate_scenarios(config_path):
    """Generates the case scenarios described by a JSON config."""
    return _json.loads(_core._generate_scenarios(str(config_path)))


def cld_coverage(system, models):
    """Coverage report for a system CLD text and a {name: text} mapping of model CLDs."""
    return _json.loads(_core._cld_coverage(system, list(models.items())))
