"""Engine configuration file.

A JSON object; every key is optional::

    {
      "dim": 3, "depth": 4,
      "price_transform": "log",          # or "raw"
      "time_format": "year",             # or "iso"
      "level_weights": null,             # depth + 1 positive numbers
      "seed": 0,
      "model": "model.json",             # path or inline model object
      "portfolio": "book.json",
      "scenarios": "scenarios/",
      "risk_weights": 1.0,               # number or tensor file
      "alpha": 0.975, "n_paths": 10000, "rho": 1.0,
      "monitor": {"gamma": 1.0, "anchor_interval": 1, "divergence_threshold": null,
                  "td_error_threshold": null, "reward": "zero"},
      "pla": {"spearman_green": 0.8, "spearman_amber": 0.7, "ks_green": 0.09, "ks_amber": 0.12}
    }

Relative paths are resolved against the config file's directory.  Errors
name the file and the line of the offending key.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

from .tensor_algebra import AlgebraShape
from .errors import ConfigError, SigRiskError
from .io import key_line, read_json

__all__ = ["EngineConfig", "MonitorSettings", "load_config", "ENV_VAR"]

ENV_VAR = "SIGRISK_CONFIG"


@dataclass(frozen=True)
class MonitorSettings:
    gamma: float = 1.0
    anchor_interval: int = 1
    divergence_threshold: float = math.inf
    td_error_threshold: float = math.inf
    reward: str = "zero"


@dataclass(frozen=True)
class EngineConfig:
    dim: int = 3
    depth: int = 4
    price_transform: str = "log"
    time_format: str = "year"
    level_weights: tuple | None = None
    seed: int = 0
    model: object = None
    portfolio: str | None = None
    scenarios: str | None = None
    risk_weights: object = 1.0
    alpha: float = 0.975
    n_paths: int = 10000
    rho: float = 1.0
    monitor: MonitorSettings = field(default_factory=MonitorSettings)
    pla: dict = field(default_factory=dict)
    source: str | None = None

    @property
    def shape(self) -> AlgebraShape:
        return AlgebraShape(self.dim, self.depth)

    def with_overrides(self, **kwargs) -> "EngineConfig":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


_TOP_KEYS = {f for f in EngineConfig.__dataclass_fields__ if f != "source"}
_MONITOR_KEYS = set(MonitorSettings.__dataclass_fields__)
_PLA_KEYS = {"spearman_green", "spearman_amber", "ks_green", "ks_amber"}


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def load_config(path) -> EngineConfig:
    path = os.fspath(path)
    obj, text = read_json(path)
    base = os.path.dirname(os.path.abspath(path))

    def fail(key, msg):
        raise ConfigError(msg, path=path, line=key_line(text, key) if key else 1, code="cli.config")

    if not isinstance(obj, dict):
        fail(None, "config must be a JSON object")
    for key in obj:
        if key not in _TOP_KEYS:
            fail(key, f"unknown key {key!r}")
    out = {}
    for key in ("dim", "depth", "seed", "n_paths"):
        if key in obj:
            v = obj[key]
            if not _is_int(v) or v < (0 if key == "seed" else 1):
                fail(key, f"{key!r} must be a {'non-negative' if key == 'seed' else 'positive'} integer, got {v!r}")
            out[key] = v
    if out.get("seed", 0) >= 2**64:
        fail("seed", "'seed' must be below 2**64")
    for key, allowed in (("price_transform", ("raw", "log")), ("time_format", ("year", "iso"))):
        if key in obj:
            if obj[key] not in allowed:
                fail(key, f"{key!r} must be one of {', '.join(allowed)}, got {obj[key]!r}")
            out[key] = obj[key]
    if "alpha" in obj:
        if not _is_num(obj["alpha"]) or not 0 < obj["alpha"] < 1:
            fail("alpha", f"'alpha' must lie in (0, 1), got {obj['alpha']!r}")
        out["alpha"] = float(obj["alpha"])
    if "rho" in obj:
        if not _is_num(obj["rho"]) or not obj["rho"] > 0:
            fail("rho", f"'rho' must be positive, got {obj['rho']!r}")
        out["rho"] = float(obj["rho"])
    depth = out.get("depth", EngineConfig.depth)
    if obj.get("level_weights") is not None:
        lw = obj["level_weights"]
        if not isinstance(lw, list) or len(lw) != depth + 1 or not all(_is_num(w) and w > 0 for w in lw):
            fail("level_weights", f"'level_weights' must be {depth + 1} positive numbers")
        out["level_weights"] = tuple(float(w) for w in lw)
    for key in ("portfolio", "scenarios"):
        if obj.get(key) is not None:
            if not isinstance(obj[key], str):
                fail(key, f"{key!r} must be a path")
            out[key] = os.path.join(base, obj[key])
    if obj.get("model") is not None:
        m = obj["model"]
        if isinstance(m, str):
            out["model"] = os.path.join(base, m)
        elif isinstance(m, dict):
            out["model"] = m
        else:
            fail("model", "'model' must be a path or an object")
    if "risk_weights" in obj:
        rw = obj["risk_weights"]
        if isinstance(rw, str):
            out["risk_weights"] = os.path.join(base, rw)
        elif _is_num(rw) and rw >= 0:
            out["risk_weights"] = float(rw)
        else:
            fail("risk_weights", "'risk_weights' must be a non-negative number or a tensor file")
    if "monitor" in obj:
        mon = obj["monitor"]
        if not isinstance(mon, dict):
            fail("monitor", "'monitor' must be an object")
        kw = {}
        for key, v in mon.items():
            if key not in _MONITOR_KEYS:
                fail(key, f"unknown monitor key {key!r}")
            if key == "gamma" and not (_is_num(v) and 0 < v <= 1):
                fail(key, f"'gamma' must lie in (0, 1], got {v!r}")
            if key == "anchor_interval" and not (_is_int(v) and v >= 1):
                fail(key, f"'anchor_interval' must be a positive integer, got {v!r}")
            if key in ("divergence_threshold", "td_error_threshold"):
                if v is None:
                    continue
                if not (_is_num(v) and v > 0):
                    fail(key, f"{key!r} must be positive, got {v!r}")
            if key == "reward" and v not in ("zero", "pnl"):
                fail(key, f"'reward' must be 'zero' or 'pnl', got {v!r}")
            kw[key] = v
        out["monitor"] = MonitorSettings(**kw)
    if "pla" in obj:
        pla = obj["pla"]
        if not isinstance(pla, dict):
            fail("pla", "'pla' must be an object")
        for key, v in pla.items():
            if key not in _PLA_KEYS:
                fail(key, f"unknown pla key {key!r}")
            if not _is_num(v):
                fail(key, f"{key!r} must be a number")
        out["pla"] = dict(pla)
    try:
        cfg = EngineConfig(source=path, **out)
        cfg.shape
    except SigRiskError as exc:
        raise ConfigError(str(exc), path=path, line=1, code="cli.config") from None
    return cfg
