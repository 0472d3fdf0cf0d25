"""Neural surrogates for point values of stochastic interface problems."""

import json

from . import _core
from ._core import (
    DatasetMismatch,
    Mlp,
    SampleError,
    interface_radius,
    max_shape_variation,
    preset_names,
    run_suite,
    sample_parameters,
    suite_names,
    train,
)

__all__ = [
    "DatasetMismatch",
    "Mlp",
    "QoiSolver",
    "SampleError",
    "config_hash",
    "interface_radius",
    "max_shape_variation",
    "preset_config",
    "preset_names",
    "run_experiment",
    "run_suite",
    "sample_parameters",
    "suite_names",
    "train",
]


def preset_config(name):
    """Config dict of a named preset."""
    return json.loads(_core.preset_config_json(name))


def config_hash(config):
    return _core.config_hash_json(json.dumps(config))


def run_experiment(config, persist=False):
    """Generate data, train and return the result record as a dict."""
    return json.loads(_core.run_experiment_json(json.dumps(config), persist))


class QoiSolver(_core.QoiSolver):
    """Mesh and PDE of a config; call with y for the point values."""

    def __init__(self, config):
        super().__init__(json.dumps(config))
