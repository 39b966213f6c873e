"""Deformation stability of scattering networks on sampled periodic signals."""

import json as _json

from ._deformlab import (
    Coefficients,
    Features,
    Field,
    Filter,
    Grid,
    Network,
    Signal,
    Space,
    amalgam_norm,
    check_rescaling,
    deform,
    extract_features,
    feature_distance,
    l2_distance,
    l2_norm,
    make_sinc_packet,
    make_tent,
    mra_verify,
    project,
    random_coefficients,
    random_field,
    read_signal_csv,
    s_hat_from,
    synthesize,
    tent_coefficients,
    theoretical_envelope,
    worst_case_field,
)
from . import _deformlab


def _text(config):
    if config is None:
        return ""
    return config if isinstance(config, str) else _json.dumps(config)


def network(config, grid):
    """Scattering network from a dict {layers: [{J, Q}], max_depth, eps_path}."""
    return Network(_text(config), grid)


def verify(theorem, config=None):
    """Runs one estimate ("sensitivity", "besov", "sharp-large", "sharp-small",
    "random", "modulated") and returns its report as a dict."""
    report = _deformlab.run_theorem(theorem, _text(config))
    return _json.loads(report.to_json())


def wls_polyfit(x, y, w, degree=3):
    return _json.loads(_deformlab.wls_polyfit(x, y, w, degree))


def run_experiment(config):
    """Sweep, per-realization cubic fits and scale estimate; returns the estimate."""
    return _json.loads(_deformlab.run_experiment(_text(config)))
