"""JSON experiment configuration.

A configuration is a single JSON object::

    {
      "field":  {"kind": "ellipse", "center": [20, 20], "coeff": [1, 8]},
      "params": {"k1": 1, "k2": 0.9, "C": 1, "a": 0.01, "epsilon": 2,
                 "d0": 1, "z_d": 500, "sgn_deadband": 0},
      "init":   {"center": [32, 20], "gamma0": 0.785398}   # or {"r1": [..], "r2": [..]}
      "dt": 0.01, "steps": 30000, "noise_sigma": 0, "seed": 0, "scheme": "euler",
      "monitor": {"b": 0.99, "z_max": 502},
      "window": 100, "reference_point": [20, 20],
      "output_dir": "out", "emit": ["trajectory", "summary", "plot"],
      "sweep": {"params.k2": [0.5, 0.9, 0.99]}
    }

Only ``field``, ``params`` and ``init`` are required.
"""
from __future__ import annotations

import copy
import json
import math
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Optional

from .analysis import DEFAULT_WINDOW, MonitorParams
from .controller import ControllerParams
from .errors import ConfigError, CurvetrakError
from .field import FieldModel
from .sim import ExplicitInit, Placement, SimConfig

__all__ = ["ExperimentConfig", "parse_config", "parse_config_dict", "bundled_config_path",
           "SEED_ENV", "EMIT_CHOICES"]

SEED_ENV = "CURVETRAK_SEED"
EMIT_CHOICES = ("trajectory", "summary", "plot")

DEFAULTS = {
    "dt": 0.01,
    "steps": 30000,
    "noise_sigma": 0.0,
    "seed": 0,
    "scheme": "euler",
    "window": DEFAULT_WINDOW,
    "output_dir": "out",
    "emit": ["trajectory", "summary"],
}
PARAM_KEYS = ("k1", "k2", "C", "a", "epsilon", "d0", "z_d")
TOP_KEYS = {"field", "params", "init", "monitor", "reference_point", "sweep", *DEFAULTS}


@dataclass(frozen=True)
class ExperimentConfig:
    sim: SimConfig
    output_dir: Path
    emit: frozenset
    sweep: Optional[dict[str, list]]
    raw: dict[str, Any]

    @property
    def monitor(self) -> MonitorParams:
        return self.sim.monitor


def bundled_config_path(name: str) -> Optional[Path]:
    """Path of a shipped example config (``ellipse``, ``matyas``, ``cubic_order_test``)."""
    stem = name[:-5] if name.endswith(".json") else name
    p = resources.files("curvetrak").joinpath("configs", f"{stem}.json")
    return Path(str(p)) if p.is_file() else None


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        bundled = bundled_config_path(path.name) if path.parent == Path(".") else None
        if bundled is None:
            raise ConfigError(f"config file not found: {path}")
        path = bundled
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return parse_config_dict(raw)


def _num(d: dict, key: str, where: str, integer: bool = False):
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}{key}: expected a number, got {v!r}")
    if integer and int(v) != v:
        raise ConfigError(f"{where}{key}: expected an integer, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(f"{where}{key}: must be finite")
    return int(v) if integer else float(v)


def _point(v, key: str):
    if not (isinstance(v, (list, tuple)) and len(v) == 2
            and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)):
        raise ConfigError(f"{key}: expected [x, y], got {v!r}")
    return (float(v[0]), float(v[1]))


def parse_config_dict(raw: dict[str, Any]) -> ExperimentConfig:
    """Validate ``raw`` and apply defaults. Error messages name the offending key."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(sorted(unknown))}")
    for key in ("field", "params", "init"):
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")
    cfg = copy.deepcopy(DEFAULTS)
    cfg.update(copy.deepcopy(raw))

    try:
        field = FieldModel.from_spec(cfg["field"])
    except CurvetrakError as exc:
        raise ConfigError(f"field: {exc}") from exc

    praw = cfg["params"]
    if not isinstance(praw, dict):
        raise ConfigError("params: expected an object")
    for key in PARAM_KEYS:
        if key not in praw:
            raise ConfigError(f"params.{key}: missing")
    extra = set(praw) - set(PARAM_KEYS) - {"sgn_deadband"}
    if extra:
        raise ConfigError(f"params: unknown key(s) {', '.join(sorted(extra))}")
    pvals = {k: _num(praw, k, "params.") for k in praw}
    for key in ("k1", "k2", "C", "a", "epsilon", "d0"):
        if pvals[key] <= 0:
            raise ConfigError(f"params.{key}: must be positive, got {pvals[key]!r}")
    try:
        params = ControllerParams(**pvals)
    except ValueError as exc:
        raise ConfigError(f"params.sgn_deadband: {exc}") from exc

    iraw = cfg["init"]
    if not isinstance(iraw, dict):
        raise ConfigError("init: expected an object")
    if "r1" in iraw or "r2" in iraw:
        init = ExplicitInit(_point(iraw.get("r1"), "init.r1"), _point(iraw.get("r2"), "init.r2"))
    elif "center" in iraw and "gamma0" in iraw:
        g0 = _num(iraw, "gamma0", "init.")
        if not (0 < g0 < math.pi / 2):
            raise ConfigError(f"init.gamma0: must lie strictly inside (0, pi/2), got {g0!r}")
        init = Placement(_point(iraw["center"], "init.center"), g0)
    else:
        raise ConfigError("init: expected {r1, r2} or {center, gamma0}")

    dt = _num(cfg, "dt", "")
    if dt <= 0:
        raise ConfigError(f"dt: must be positive, got {dt!r}")
    steps = _num(cfg, "steps", "", integer=True)
    if steps < 1:
        raise ConfigError(f"steps: must be >= 1, got {steps!r}")
    noise = _num(cfg, "noise_sigma", "")
    if noise < 0:
        raise ConfigError(f"noise_sigma: must be >= 0, got {noise!r}")
    seed = _num(cfg, "seed", "", integer=True)
    env_seed = os.environ.get(SEED_ENV)
    if env_seed not in (None, ""):
        try:
            seed = int(env_seed, 0)
        except ValueError:
            raise ConfigError(f"{SEED_ENV}: not an integer: {env_seed!r}") from None
    if not (0 <= seed < 2**64):
        raise ConfigError(f"seed: must be a 64-bit unsigned integer, got {seed!r}")
    window = _num(cfg, "window", "", integer=True)
    if window < 1:
        raise ConfigError(f"window: must be >= 1, got {window!r}")
    if cfg["scheme"] not in ("euler", "midpoint"):
        raise ConfigError(f"scheme: must be 'euler' or 'midpoint', got {cfg['scheme']!r}")

    mraw = cfg.get("monitor", {}) or {}
    if not isinstance(mraw, dict):
        raise ConfigError("monitor: expected an object")
    b = _num(mraw, "b", "monitor.") if "b" in mraw else 0.99
    if not (0 < b < 1):
        raise ConfigError(f"monitor.b: must lie in (0, 1), got {b!r}")
    z_max = _num(mraw, "z_max", "monitor.") if mraw.get("z_max") is not None else None
    monitor = MonitorParams(b, z_max)

    ref = _point(cfg["reference_point"], "reference_point") if cfg.get("reference_point") else None

    emit = cfg["emit"]
    if isinstance(emit, str):
        emit = [emit]
    if not isinstance(emit, list) or any(e not in EMIT_CHOICES for e in emit):
        raise ConfigError(f"emit: expected a list drawn from {EMIT_CHOICES}, got {emit!r}")

    sweep = cfg.get("sweep")
    if sweep is not None:
        _check_sweep(sweep, cfg)

    sim = SimConfig(field=field, params=params, init=init, dt=dt, steps=steps,
                    noise_sigma=noise, seed=seed, scheme=cfg["scheme"], monitor=monitor,
                    window=window, reference_point=ref)
    out = cfg["output_dir"]
    if not isinstance(out, str) or not out:
        raise ConfigError(f"output_dir: expected a path string, got {out!r}")
    return ExperimentConfig(sim, Path(out), frozenset(emit), sweep, cfg)


SWEEPABLE_TOP = ("dt", "steps", "noise_sigma", "seed", "window")


def _check_sweep(sweep, cfg):
    if not isinstance(sweep, dict) or not sweep:
        raise ConfigError("sweep: expected a non-empty object of parameter path -> values")
    for path, values in sweep.items():
        if not isinstance(values, list) or not values:
            raise ConfigError(f"sweep.{path}: expected a non-empty list of values")
        for v in values:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"sweep.{path}: non-numeric value {v!r}")
        head, _, tail = path.partition(".")
        if head == "params" and tail in (*PARAM_KEYS, "sgn_deadband"):
            continue
        if head == "monitor" and tail in ("b", "z_max"):
            continue
        if head == "init" and tail == "gamma0" and "gamma0" in cfg["init"]:
            continue
        if not tail and head in SWEEPABLE_TOP:
            continue
        raise ConfigError(f"sweep: path {path!r} does not name a numeric parameter")


def set_path(raw: dict[str, Any], path: str, value) -> dict[str, Any]:
    """Copy of ``raw`` with the dotted ``path`` set to ``value``."""
    out = copy.deepcopy(raw)
    node = out
    parts = path.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value
    return out
