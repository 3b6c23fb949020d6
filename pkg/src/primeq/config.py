"""Run configuration: a strict JSON document with dotted-key overrides.

Unknown keys are rejected at every level so typos in experiment definitions
fail loudly instead of silently running the defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .grid import Grid, PhysParams


class ConfigError(ValueError):
    pass


_SCHEMA = {
    "grid": {"nx", "ny", "nz", "h"},
    "physics": {"alpha", "beta_tau", "beta_sigma"},
    "time": {"dt", "t_end", "scheme", "picard_M", "picard_max_iter",
             "picard_tol"},
    "initial": {"profile", "snapshot", "amplitude", "seed"},
    "forcing": {"profile", "beta_f", "beta_g", "amplitude"},
    "output": {"csv", "snapshot", "emit_every", "figures"},
    "tstar": {"C", "eps"},
}

_INITIAL_PROFILES = ("zero", "eigenmodes", "random_smooth")
_FORCING_PROFILES = ("none", "decaying")


@dataclass
class RunConfig:
    nx: int = 32
    ny: int = 32
    nz: int = 16
    h: float = 1.0
    alpha: float = 1.0
    beta_tau: float = 1.0
    beta_sigma: float = 1.0
    dt: float = 1e-3
    t_end: float = 1.0
    scheme: str = "imex"
    picard_M: int = 8
    picard_max_iter: int = 25
    picard_tol: float = 1e-10
    initial_profile: str = "eigenmodes"
    initial_snapshot: str | None = None
    initial_amplitude: float = 1.0
    initial_seed: int = 0
    forcing_profile: str = "none"
    beta_f: float | None = None
    beta_g: float | None = None
    forcing_amplitude: float = 1.0
    csv: str | None = None
    snapshot: str | None = None
    figures: str | None = None
    emit_every: int = 1
    tstar_C: float = 2.0
    tstar_eps: float = 0.25

    def validate(self):
        try:
            self.grid()
            self.params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.dt <= 0 or self.t_end < 0:
            raise ConfigError("dt must be positive and t_end nonnegative")
        if self.scheme not in ("imex", "picard"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.initial_profile not in _INITIAL_PROFILES:
            raise ConfigError(f"unknown initial profile {self.initial_profile!r}")
        if self.forcing_profile not in _FORCING_PROFILES:
            raise ConfigError(f"unknown forcing profile {self.forcing_profile!r}")
        if self.picard_M < 2:
            raise ConfigError("picard_M must be >= 2")
        if self.emit_every < 1:
            raise ConfigError("emit_every must be >= 1")
        return self

    def grid(self) -> Grid:
        return Grid(self.nx, self.ny, self.nz, self.h)

    def params(self) -> PhysParams:
        return PhysParams(self.alpha, self.beta_tau, self.beta_sigma)


_FLAT_KEYS = {
    ("grid", "nx"): "nx", ("grid", "ny"): "ny", ("grid", "nz"): "nz",
    ("grid", "h"): "h",
    ("physics", "alpha"): "alpha",
    ("physics", "beta_tau"): "beta_tau",
    ("physics", "beta_sigma"): "beta_sigma",
    ("time", "dt"): "dt", ("time", "t_end"): "t_end",
    ("time", "scheme"): "scheme",
    ("time", "picard_M"): "picard_M",
    ("time", "picard_max_iter"): "picard_max_iter",
    ("time", "picard_tol"): "picard_tol",
    ("initial", "profile"): "initial_profile",
    ("initial", "snapshot"): "initial_snapshot",
    ("initial", "amplitude"): "initial_amplitude",
    ("initial", "seed"): "initial_seed",
    ("forcing", "profile"): "forcing_profile",
    ("forcing", "beta_f"): "beta_f", ("forcing", "beta_g"): "beta_g",
    ("forcing", "amplitude"): "forcing_amplitude",
    ("output", "csv"): "csv", ("output", "snapshot"): "snapshot",
    ("output", "figures"): "figures",
    ("output", "emit_every"): "emit_every",
    ("tstar", "C"): "tstar_C", ("tstar", "eps"): "tstar_eps",
}

_INT_FIELDS = {"nx", "ny", "nz", "picard_M", "picard_max_iter", "emit_every",
               "initial_seed"}
_STR_FIELDS = {"scheme", "initial_profile", "initial_snapshot",
               "forcing_profile", "csv", "snapshot", "figures"}


def _assign(cfg: RunConfig, section: str, key: str, value):
    attr = _FLAT_KEYS.get((section, key))
    if attr is None:
        raise ConfigError(f"unknown key {section}.{key}")
    if attr in _INT_FIELDS:
        if isinstance(value, str):
            value = int(value)
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{section}.{key} must be an integer")
    elif attr in _STR_FIELDS:
        if value is not None and not isinstance(value, str):
            raise ConfigError(f"{section}.{key} must be a string")
    else:
        if isinstance(value, str):
            value = float(value)
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"{section}.{key} must be a number")
        value = float(value)
    setattr(cfg, attr, value)


def load_config(path=None, overrides=()) -> RunConfig:
    """Build a RunConfig from an optional JSON file plus key=value overrides.

    Override keys are dotted, e.g. grid.nx=64 or time.dt=1e-4.
    """
    cfg = RunConfig()
    if path is not None:
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config root must be a JSON object")
        for section, body in doc.items():
            if section not in _SCHEMA:
                raise ConfigError(f"unknown section {section!r}")
            if not isinstance(body, dict):
                raise ConfigError(f"section {section!r} must be an object")
            for key, value in body.items():
                _assign(cfg, section, key, value)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like key=value")
        dotted, value = item.split("=", 1)
        parts = dotted.split(".")
        if len(parts) != 2:
            raise ConfigError(f"override key {dotted!r} must be section.key")
        _assign(cfg, parts[0], parts[1], value)
    return cfg.validate()
