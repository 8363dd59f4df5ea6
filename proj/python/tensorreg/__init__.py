"""Regularized low-dimensional tensor regression.

Tensors are numpy arrays in C order. Regularizers are named as on the
command line: "EntryL1", "FiberGroup:1", "SliceFrob:0:1", "SliceNuclear:0:1",
"MatricizedNuclearSum" and "TensorSpectralDualOnly" (dual norm only).
"""

import json

from . import _core
from ._core import (
    TensorregError,
    gaussian_width,
    gen_problem,
    objective,
    prox,
    read_tns,
    reg_dual,
    reg_eval,
    solve,
    var_spectral_extrema,
    write_tns,
)

__all__ = [
    "TensorregError",
    "cli",
    "gaussian_width",
    "gen_problem",
    "gen_truth",
    "objective",
    "prox",
    "read_tns",
    "reg_dual",
    "reg_eval",
    "run_experiment",
    "solve",
    "var_spectral_extrema",
    "write_tns",
]


def _as_json(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)


def gen_truth(model, seed):
    """Draw a truth from a model class, e.g. {"class": "Theta1", "param": 3, "shape": [4, 4, 4]}."""
    return _core.gen_truth(_as_json(model), seed)


def run_experiment(kind, config, fmt="json"):
    """Run a "rate", "width" or "compare" experiment. JSON reports come back parsed."""
    text = _core.run_experiment(kind, _as_json(config), fmt)
    return json.loads(text) if fmt == "json" else text


def cli(*args):
    """Run the command line tool in process. Returns (exit_code, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])
