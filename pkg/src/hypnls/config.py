"""Experiment configuration: flat key=value files with dotted sections.

A configuration is a plain-text file of `key = value` lines (blank lines
and `#` comments allowed); keys use dots for grouping, e.g. ``grid.R = 40``.
Every experiment declares its full key schema with defaults below.  Parsing
is strict: unknown keys, malformed values and out-of-range settings are
reported as `ConfigError` before any computation starts, and the fully
resolved mapping (defaults made explicit) is written back next to the
results so a run can always be reproduced from its own output directory.

Float lists accept either a comma list (``1,2,5``) or the shorthand
``linspace(a,b,n)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .geometry import Geometry, RadialGrid
from .integrator import SolverConfig


class ConfigError(ValueError):
    """Invalid configuration input (unknown key, bad value, bad combination)."""


_LINSPACE = re.compile(r"^linspace\(([^,]+),([^,]+),([^)]+)\)$")


def _parse_float(text):
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"expected a finite number, got {text!r}")
    return value


def _parse_int(text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}") from None


def _parse_bool(text):
    lowered = str(text).strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _parse_float_list(text):
    if isinstance(text, (tuple, list)):
        return tuple(float(x) for x in text)
    stripped = str(text).strip()
    if not stripped:
        return ()
    match = _LINSPACE.match(stripped.replace(" ", ""))
    if match:
        a, b = _parse_float(match.group(1)), _parse_float(match.group(2))
        n = _parse_int(match.group(3))
        if n < 2:
            raise ConfigError("linspace needs at least 2 points")
        return tuple(float(x) for x in np.linspace(a, b, n))
    return tuple(_parse_float(part) for part in stripped.split(","))


_PARSERS = {
    "float": _parse_float,
    "int": _parse_int,
    "bool": _parse_bool,
    "str": lambda s: str(s).strip(),
    "floatlist": _parse_float_list,
}


def _format_value(kind, value):
    if kind == "bool":
        return "true" if value else "false"
    if kind == "float":
        return repr(float(value))
    if kind == "floatlist":
        return ",".join(repr(float(x)) for x in value)
    return str(value)


# key -> (type name, default); shared by every experiment
_COMMON_SCHEMA = {
    "geometry": ("str", "hyperbolic3"),
    "grid.R": ("float", 40.0),
    "grid.N": ("int", 4096),
    "seed": ("int", 0),
    "data.family": ("str", "gaussian_bump"),
    "data.center": ("float", 5.0),
    "data.width": ("float", 1.0),
    "data.amplitude": ("float", 1.0),
    "data.phase_slope": ("float", 0.0),
    "data.scale": ("float", 1.0),
    "solver.sigma": ("float", 1.0),
    "solver.kappa": ("int", 1),
    "solver.dt": ("float", 1e-3),
    "solver.t_begin": ("float", 0.0),
    "solver.t_end": ("float", 2.0),
    "solver.snapshots": ("floatlist", ()),
    "solver.allow_supercritical": ("bool", False),
}

_EXPERIMENT_SCHEMA = {
    "selftest": {
        "selftest.trials": ("int", 64),
    },
    "evolve": {
        "evolve.mass_drift_tol": ("float", 1e-12),
    },
    "scatter": {
        "scatter.probe_times": ("floatlist", (5.0, 10.0, 20.0, 40.0)),
    },
    "morawetz": {
        "morawetz.margin_scale": ("float", 1e-3),
    },
    "pseudoconformal": {
        "pseudoconformal.halvings": ("int", 1),
    },
    "semiclassical": {
        "semiclassical.eps": ("floatlist", (0.1, 0.05, 0.025)),
        "semiclassical.s": ("float", 0.3),
        "semiclassical.c0": ("float", 0.1),
        "semiclassical.k": ("int", 2),
        "semiclassical.steps": ("int", 2000),
        "semiclassical.samples": ("int", 9),
        "semiclassical.grid_n": ("int", 4096),
        "semiclassical.span": ("float", 6.0),
    },
    "h2kernel": {
        "h2kernel.rho_min": ("float", 0.01),
        "h2kernel.rho_max": ("float", 20.0),
        "h2kernel.rho_count": ("int", 40),
        "h2kernel.times": ("floatlist", (0.1, 1.0, 10.0)),
        "h2kernel.refine": ("int", 1),
    },
    "longrange": {
        "longrange.probe_times": ("floatlist", (5.0, 10.0, 20.0, 40.0)),
        "longrange.pairing_times": ("floatlist", ()),
        "longrange.psi_center": ("float", 4.0),
        "longrange.psi_width": ("float", 2.0),
        "longrange.psi_amplitude": ("float", 1.0),
    },
}

EXPERIMENTS = tuple(sorted(_EXPERIMENT_SCHEMA))


def schema_for(experiment):
    if experiment not in _EXPERIMENT_SCHEMA:
        raise ConfigError(
            f"unknown experiment {experiment!r}; available: {', '.join(EXPERIMENTS)}"
        )
    schema = dict(_COMMON_SCHEMA)
    schema.update(_EXPERIMENT_SCHEMA[experiment])
    return schema


def parse_config_text(text):
    """Parse `key = value` lines into a raw string mapping."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = stripped.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value.strip()
    return raw


def apply_overrides(raw, overrides):
    """Fold `key=value` override strings (CLI --override) into a raw map."""
    out = dict(raw)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved, validated experiment configuration."""

    experiment: str
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    @property
    def geometry(self):
        return Geometry.from_name(self.values["geometry"])

    @property
    def grid(self):
        return RadialGrid(R=self.values["grid.R"], N=self.values["grid.N"])

    def solver(self, **replacements):
        params = {
            "sigma": self.values["solver.sigma"],
            "kappa": self.values["solver.kappa"],
            "dt": self.values["solver.dt"],
            "t_begin": self.values["solver.t_begin"],
            "t_end": self.values["solver.t_end"],
            "snapshot_times": self.values["solver.snapshots"],
            "allow_supercritical": self.values["solver.allow_supercritical"],
        }
        params.update(replacements)
        try:
            return SolverConfig(**params)
        except ValueError as exc:
            raise ConfigError(f"invalid solver settings: {exc}") from None

    def formatted(self):
        """Render back to config-file text (parseable, defaults explicit)."""
        schema = schema_for(self.experiment)
        lines = [f"experiment = {self.experiment}"]
        for key in sorted(self.values):
            kind = schema[key][0]
            lines.append(f"{key} = {_format_value(kind, self.values[key])}")
        return "\n".join(lines) + "\n"


def resolve_config(experiment, raw):
    """Validate a raw string mapping against the experiment's schema.

    Args:
        experiment: experiment name; the `experiment` key inside `raw`, if
            present, must agree with it.
        raw: mapping of key -> unparsed string (or already-typed value).

    Returns:
        ExperimentConfig with every key of the schema present and typed.

    Raises:
        ConfigError: unknown key, malformed value, or invalid combination.
    """
    raw = dict(raw)
    named = raw.pop("experiment", None)
    if named is not None and str(named).strip() != experiment:
        raise ConfigError(
            f"config file is for experiment {named!r}, not {experiment!r}"
        )
    schema = schema_for(experiment)
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    values = {}
    for key, (kind, default) in schema.items():
        if key in raw:
            value = raw[key]
            if isinstance(value, str):
                value = _PARSERS[kind](value)
            elif kind == "floatlist":
                value = _parse_float_list(value)
            values[key] = value
        else:
            values[key] = default if kind != "floatlist" else _parse_float_list(default)
    _validate_combinations(experiment, values)
    return ExperimentConfig(experiment, values)


def _validate_combinations(experiment, values):
    try:
        Geometry.from_name(values["geometry"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if values["grid.R"] <= 0 or values["grid.N"] < 4:
        raise ConfigError("grid needs R > 0 and N >= 4")
    if values["data.family"] not in ("gaussian_bump", "compact_bump"):
        raise ConfigError(
            f"unknown data family {values['data.family']!r}; "
            "use gaussian_bump or compact_bump"
        )
    if values["data.width"] <= 0 or values["data.scale"] <= 0:
        raise ConfigError("data.width and data.scale must be positive")
    if values["solver.kappa"] not in (-1, 0, 1):
        raise ConfigError("solver.kappa must be -1, 0 or +1")
    if experiment == "semiclassical":
        eps = values["semiclassical.eps"]
        if not eps or any(not 0 < e < 1 for e in eps):
            raise ConfigError("semiclassical.eps must be values in (0, 1)")
        if list(eps) != sorted(eps, reverse=True):
            raise ConfigError("semiclassical.eps must be decreasing")
        if values["semiclassical.samples"] < 2:
            raise ConfigError("semiclassical.samples must be >= 2")
        # the rescaled profile lives on [1, 2]; demand at least 32 nodes
        # across one unit of the rescaled radius
        nodes_per_unit = values["semiclassical.grid_n"] / values["semiclassical.span"]
        if nodes_per_unit < 32:
            raise ConfigError(
                "semiclassical grid resolves fewer than 32 nodes across the "
                "support of the profile; raise semiclassical.grid_n"
            )
    if experiment == "h2kernel":
        if not 0 < values["h2kernel.rho_min"] < values["h2kernel.rho_max"]:
            raise ConfigError("h2kernel needs 0 < rho_min < rho_max")
        if values["h2kernel.rho_count"] < 2:
            raise ConfigError("h2kernel.rho_count must be >= 2")
        if values["h2kernel.refine"] < 1:
            raise ConfigError("h2kernel.refine must be >= 1")
        if any(t == 0 for t in values["h2kernel.times"]):
            raise ConfigError("h2kernel.times must be nonzero")
