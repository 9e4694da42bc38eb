"""Flat key-value scenario configs with section headers.

A config describes exactly one scenario kind (fwm, pamp or holo) plus an
optional Cartesian sweep over listed parameter values.  Every key is
whitelisted and every physical parameter is validated against the module
preconditions before any computation starts.
"""

from __future__ import annotations

import configparser
import hashlib
import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


_INT_KEYS = {
    "n1", "n2", "m", "samples", "n_planes", "tau_points", "t_points",
}

# parameter keys per scenario kind (grid keys listed separately)
PARAM_KEYS = {
    "fwm": {"n1", "n2", "m", "c2", "c0", "kinetic"},
    "pamp": {"chi", "delta", "omega_r", "alpha"},
    "holo": {
        "samples", "spacing", "object_width", "object_center", "object_amplitude",
        "object_edge", "writing_wavelength", "object_distance", "carrier",
        "writing_strength", "g", "atom_number", "trap_radius", "eta",
        "incidence_angle", "reading_mass", "reading_velocity", "reading_envelope",
        "search_lo", "search_hi", "n_planes",
    },
}

GRID_KEYS = {
    "fwm": {"tau_max", "tau_points"},
    "pamp": {"t_max", "t_points"},
    "holo": set(),
}

REQUIRED_PARAMS = {
    "fwm": {"n1", "n2", "m", "c2"},
    "pamp": {"chi", "delta"},
    "holo": PARAM_KEYS["holo"] - {"n_planes"},
}

DEFAULTS = {
    "fwm": {"c0": 0.0, "kinetic": 0.0},
    "pamp": {"omega_r": 1.0, "alpha": 0.0},
    "holo": {"n_planes": 96},
}


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    name: str
    params: dict
    grid: dict
    sweep: dict = field(default_factory=dict)
    out: str | None = None
    source: Path | None = None
    raw: bytes = b""

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.raw).hexdigest()


def _parse_value(key: str, text: str):
    text = text.strip()
    try:
        if key in _INT_KEYS:
            return int(text)
        return float(text)
    except ValueError:
        raise ConfigError(f"key '{key}': cannot parse {text!r} as a number") from None


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(raw.decode("utf-8"))
    except (UnicodeDecodeError, configparser.Error) as exc:
        raise ConfigError(f"config {path} does not parse: {exc}") from exc

    known_sections = {"scenario", "params", "grid", "sweep"}
    for section in parser.sections():
        if section not in known_sections:
            raise ConfigError(f"unknown section '[{section}]'")
    if not parser.has_section("scenario"):
        raise ConfigError("missing section '[scenario]'")

    scenario = dict(parser.items("scenario"))
    unknown = set(scenario) - {"kind", "name", "out"}
    if unknown:
        raise ConfigError(f"unknown key '{sorted(unknown)[0]}' in [scenario]")
    kind = scenario.get("kind", "").strip()
    if kind not in PARAM_KEYS:
        raise ConfigError(f"key 'kind': expected one of fwm, pamp, holo, got {kind!r}")
    name = scenario.get("name", "").strip() or path.stem
    out = scenario.get("out", "").strip() or None

    params = dict(DEFAULTS[kind])
    if parser.has_section("params"):
        for key, value in parser.items("params"):
            if key not in PARAM_KEYS[kind]:
                raise ConfigError(f"unknown key '{key}' in [params] for kind {kind}")
            params[key] = _parse_value(key, value)
    missing = REQUIRED_PARAMS[kind] - set(params)
    if missing:
        raise ConfigError(f"missing required key '{sorted(missing)[0]}' in [params]")

    grid = {}
    if parser.has_section("grid"):
        for key, value in parser.items("grid"):
            if key not in GRID_KEYS[kind]:
                raise ConfigError(f"unknown key '{key}' in [grid] for kind {kind}")
            grid[key] = _parse_value(key, value)
    missing = GRID_KEYS[kind] - set(grid)
    if missing:
        raise ConfigError(f"missing required key '{sorted(missing)[0]}' in [grid]")

    sweep = {}
    if parser.has_section("sweep"):
        for key, value in parser.items("sweep"):
            if key not in PARAM_KEYS[kind]:
                raise ConfigError(f"unknown sweep key '{key}' for kind {kind}")
            values = [v for v in (s.strip() for s in value.split(",")) if v]
            if not values:
                raise ConfigError(f"sweep key '{key}' has an empty value list")
            sweep[key] = [_parse_value(key, v) for v in values]

    return ScenarioConfig(
        kind=kind, name=name, params=params, grid=grid, sweep=sweep,
        out=out, source=path, raw=raw,
    )


def expand_sweep(cfg: ScenarioConfig) -> list[tuple[str, dict]]:
    """Deterministic (key, params) list: sorted sweep keys, listed order."""
    if not cfg.sweep:
        return [(cfg.name, dict(cfg.params))]
    keys = sorted(cfg.sweep)
    jobs = []
    for combo in itertools.product(*(cfg.sweep[k] for k in keys)):
        params = dict(cfg.params)
        tag = []
        for key, value in zip(keys, combo):
            params[key] = value
            tag.append(f"{key}={value:g}" if isinstance(value, float) else f"{key}={value}")
        jobs.append((f"{cfg.name}__{'__'.join(tag)}__", params))
    return jobs


def time_grid(cfg: ScenarioConfig, params: dict) -> np.ndarray:
    if cfg.kind == "fwm":
        points = int(cfg.grid["tau_points"])
        if points < 2:
            raise ConfigError("key 'tau_points': need at least 2 points")
        return np.linspace(0.0, float(cfg.grid["tau_max"]), points)
    if cfg.kind == "pamp":
        points = int(cfg.grid["t_points"])
        if points < 1:
            raise ConfigError("key 't_points': need at least 1 point")
        t_max = float(cfg.grid["t_max"])
        if t_max <= 0:
            raise ConfigError("key 't_max': must be positive")
        return np.linspace(t_max / points, t_max, points)
    raise ConfigError(f"no time grid for kind {cfg.kind}")


def build_scenario(cfg: ScenarioConfig, params: dict):
    """Instantiate the typed scenario, converting module errors to ConfigError."""
    try:
        if cfg.kind == "fwm":
            from .spinor import FWMScenario

            return FWMScenario(
                n1=params["n1"], n2=params["n2"], m=params["m"], c2=params["c2"],
                time_grid=time_grid(cfg, params),
                c0=params["c0"], kinetic=params["kinetic"],
            )
        if cfg.kind == "pamp":
            from .pamp import GaussianState, ThreeModeParams

            three = ThreeModeParams(
                chi=params["chi"], delta=params["delta"], omega_r=params["omega_r"]
            )
            state = GaussianState.coherent(alpha_probe=params["alpha"])
            return three, state, time_grid(cfg, params)
        if cfg.kind == "holo":
            from .holo import HolographyScenario

            return HolographyScenario(**params)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid parameters in [params]: {exc}") from exc
    raise ConfigError(f"unknown kind {cfg.kind}")


def validate_config(cfg: ScenarioConfig) -> list[str]:
    """Build every swept scenario; returns the list of job keys."""
    jobs = expand_sweep(cfg)
    for key, params in jobs:
        build_scenario(cfg, params)
    return [key for key, _ in jobs]
