"""Structured run configuration: loading, defaults and strict key checking."""

from __future__ import annotations

import copy
import json
import sys
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

PARAM_KEYS = ("omega_X", "delta_X", "omega_2X", "S", "Gamma", "D", "omega_e", "omega_b", "tau")

COMB_DEFAULTS = {"fsr": 1e-5, "peak_width": 1e-6, "n_range": None, "shift_to_centers": True}

# Per-command defaults. A nested dict is a table whose own keys are checked;
# "params" accepts the PhysicalParams fields.
SCHEMAS: dict[str, dict[str, Any]] = {
    "scatter": {"params": {}, "alpha": 1e-6, "beta": 4e-6, "coupling": "gaussian",
                "n": 512, "half_width": None, "comb": None, "mode_width": 1e-4,
                "save_fields": True},
    "schmidt": {"params": {}, "alpha": 1e-6, "beta": 1e-5, "source": "output", "field": None,
                "n": 1024, "half_width": None, "count": 100, "modes": [1, 3, 5]},
    "tradeoff": {"params": {}, "alpha": 1e-6, "ratios": None, "n": 512, "count": 60},
    "qudit": {"params": {"Gamma": 2e-4}, "alpha": 2e-5, "ratios": [0.1, 0.5, 1, 3, 10, 20, 30, 45],
              "comb": {}, "n": 1024, "count": 60},
    "decay": {"preset": "adiabatic", "params": {}, "g0": None, "n_freq": None, "t_max": None,
              "step": None, "record_every": None, "bandwidth": None, "mode_center": None,
              "freq_window": None},
    "optimize-mode": {"params": {}, "alpha": 1e-6, "beta": 1e-4, "n": 200, "window_widths": 6.0,
                      "kind": "cubic", "target": "gaussian", "max_iter": 500},
    "regime": {"params": {}, "T": None, "coupling_l2_norms": None, "partner_l2_norms": None,
               "bandwidths": None, "detuning_floor": None, "factor": 10.0},
}

DEFAULT_TRADEOFF_RATIOS = [0.1, 0.15, 0.2, 0.3, 0.5, 0.7, 1.0, 1.5, 2.0, 3.0, 5.0, 7.0, 10.0]


def load_file(path) -> dict:
    """Read a TOML or JSON file, chosen by extension."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix.lower() == ".toml":
            return tomllib.loads(text)
        if path.suffix.lower() == ".json":
            data = json.loads(text)
            if not isinstance(data, dict):
                raise ConfigError("JSON config must be an object")
            return data
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    raise ConfigError(f"config must be .toml or .json, got {path.suffix!r}")


def _merge(defaults: Mapping, given: Mapping, where: str) -> dict:
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    out = copy.deepcopy(dict(defaults))
    for k, v in given.items():
        out[k] = v
    return out


def resolve(command: str, given: Mapping | None) -> dict:
    """Fill defaults for ``command`` and reject unknown keys."""
    if command not in SCHEMAS:
        raise ConfigError(f"unknown command {command!r}")
    given = dict(given or {})
    cfg = _merge(SCHEMAS[command], given, command)
    params = cfg.get("params") or {}
    if not isinstance(params, Mapping):
        raise ConfigError("params must be a table")
    bad = sorted(set(params) - set(PARAM_KEYS))
    if bad:
        raise ConfigError(f"unknown key(s) in params: {', '.join(bad)}")
    merged = dict(SCHEMAS[command].get("params", {}))
    merged.update(params)
    cfg["params"] = merged
    if "comb" in cfg and cfg["comb"] is not None:
        if not isinstance(cfg["comb"], Mapping):
            raise ConfigError("comb must be a table")
        cfg["comb"] = _merge(COMB_DEFAULTS, cfg["comb"], "comb")
    if command == "tradeoff" and cfg["ratios"] is None:
        cfg["ratios"] = list(DEFAULT_TRADEOFF_RATIOS)
    return cfg


def build_params(table: Mapping):
    """PhysicalParams from a config table; ``omega_X`` follows ``delta_X`` unless given."""
    from .errors import DomainError
    from .spectral import PhysicalParams
    kw = {k: float(v) for k, v in table.items()}
    try:
        if "omega_X" in kw:
            if "delta_X" not in kw:
                omega_2X = kw.get("omega_2X", 1.0)
                kw["delta_X"] = 2 * kw["omega_X"] - omega_2X
            return PhysicalParams(**kw)
        return PhysicalParams.from_binding(kw.pop("delta_X", 0.005), **kw)
    except (TypeError, DomainError) as exc:
        raise ConfigError(f"inconsistent params: {exc}") from exc
