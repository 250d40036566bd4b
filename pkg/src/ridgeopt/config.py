"""Flat YAML run configuration with field-level validation.

A run file is a single mapping of scalar or list values, e.g.::

    setting: random_x
    n: 100
    d: 90
    profile: spiked
    epsilon: 1.0
    m_theta: 20
    m_xy: 20
    log10_epsilon_values: [-2, 0, 1]
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass

import yaml

from .eval_harness import ConfigError, EvalConfig

_INT, _FLOAT, _STR = "integer", "number", "string"

EVAL_FIELDS = {
    "setting": _STR, "n": _INT, "d": _INT, "profile": _STR, "eigenvalues": [_FLOAT],
    "epsilon": _FLOAT, "m_theta": _INT, "m_x": _INT, "m_y": _INT, "m_xy": _INT,
    "n_test": _INT, "methods": [_STR], "seed": _INT, "bootstrap_resamples": _INT,
    "confidence": _FLOAT, "lambda0": _FLOAT, "p": _FLOAT, "delta": _FLOAT,
    "max_iter": _INT, "folds": _INT, "threads": _INT, "max_skip_rate": _FLOAT,
}
SWEEP_FIELDS = {
    "n_values": [_INT], "aspect_values": [_FLOAT],
    "epsilon_values": [_FLOAT], "log10_epsilon_values": [_FLOAT],
}
LANDSCAPE_FIELDS = {
    "theta": None,  # "principal", "random", or a list of vectors
    "singular_values": [_FLOAT], "projections": None,
    "lambda_lo": _FLOAT, "lambda_hi": _FLOAT, "grid_points": _INT,
}
ALL_FIELDS = {**EVAL_FIELDS, **SWEEP_FIELDS, **LANDSCAPE_FIELDS}


class _Loader(yaml.SafeLoader):
    """SafeLoader that also reads 1e6 / 1.0e-4 (no dot or no exponent sign) as floats."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(\d+\.?\d*|\.\d+)[eE][-+]?\d+$"),
    list("-+0123456789."),
)


@dataclass
class RunConfig:
    eval: EvalConfig
    extras: dict

    def sweep_values(self, axis: str) -> list:
        if axis == "n":
            vals = self.extras.get("n_values")
            key = "n_values"
        elif axis == "aspect":
            vals = self.extras.get("aspect_values")
            key = "aspect_values"
        elif axis == "noise":
            if "log10_epsilon_values" in self.extras:
                vals = [10.0 ** v for v in self.extras["log10_epsilon_values"]]
            else:
                vals = self.extras.get("epsilon_values")
            key = "log10_epsilon_values"
        else:
            raise ConfigError("axis", f"must be n, aspect or noise, got {axis!r}")
        if not vals:
            raise ConfigError(key, f"sweep over {axis!r} needs a nonempty list")
        return list(vals)


def _check_scalar(key, value, kind):
    if kind == _INT:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, f"expected {_INT}, got {value!r}")
    elif kind == _FLOAT:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected {_FLOAT}, got {value!r}")
        return float(value)
    elif kind == _STR and not isinstance(value, str):
        raise ConfigError(key, f"expected {_STR}, got {value!r}")
    return value


def _check(key, value, kind):
    if kind is None:
        return value
    if isinstance(kind, list):
        if not isinstance(value, list):
            raise ConfigError(key, f"expected a list of {kind[0]}s, got {value!r}")
        return [_check_scalar(f"{key}[{i}]", v, kind[0]) for i, v in enumerate(value)]
    return _check_scalar(key, value, kind)


def _present(d):
    return {k: v for k, v in (d or {}).items() if v is not None}


def parse_config(doc, overrides=None, defaults=None) -> RunConfig:
    """Validate a parsed document; ``overrides`` beat the file, ``defaults`` only fill gaps."""
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a mapping of key: value pairs")
    doc = {**_present(defaults), **doc, **_present(overrides)}
    clean = {}
    for key, value in doc.items():
        if key not in ALL_FIELDS:
            raise ConfigError(key, "unknown configuration key")
        clean[key] = _check(key, value, ALL_FIELDS[key])
    eval_kwargs = {k: v for k, v in clean.items() if k in EVAL_FIELDS}
    cfg = EvalConfig(**eval_kwargs)
    extras = {k: v for k, v in clean.items() if k not in EVAL_FIELDS}
    return RunConfig(cfg, extras)


def load_config(path, overrides=None, defaults=None) -> RunConfig:
    try:
        with open(path) as fh:
            doc = yaml.load(fh, Loader=_Loader)
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"not valid YAML: {exc}") from exc
    return parse_config(doc, overrides, defaults)


def with_axis(cfg: EvalConfig, axis: str, value) -> EvalConfig:
    """Copy of ``cfg`` moved to one sweep point; aspect keeps n and sets d = round(value * n)."""
    if axis == "n":
        d = max(1, round(cfg.d / cfg.n * value))
        return dataclasses.replace(cfg, n=int(value), d=d)
    if axis == "aspect":
        return dataclasses.replace(cfg, d=max(1, round(value * cfg.n)))
    return dataclasses.replace(cfg, epsilon=float(value))
