"""Experiment configuration: YAML loading, strict validation, defaults.

Unknown keys are errors; every recognized key has a per-testbed default
matching the benchmark protocol, so a minimal config is just
``testbed: GG1``.  The canonical JSON form of the fully resolved config
is hashed into run manifests.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError
from .models import TESTBEDS

M_VALUES_DEFAULT = (1000, 2000, 4000, 8000)
M_VALUES_DENSE = (1000, 1500, 2000, 3000, 4000, 6000, 8000)
EDGE_OFFSETS_DEFAULT = (0.40, 0.25, 0.15, 0.10, 0.05)

# per-testbed protocol constants: query point, CLT exponent, desk-scale
# repetition count for the rate experiment (half the full-scale count)
_TESTBED_DEFAULTS = {
    "GG1": {"t0": 0.6, "x0": 0.2, "xi0": (0.0,), "alpha": 0.22, "rate_reps": 25},
    "GG2": {"t0": 0.6, "x0": None, "xi0": (0.0, 0.0), "alpha": None, "rate_reps": 10},
    "MM1": {"t0": 0.6, "x0": 0.3, "xi0": (0.8,), "alpha": 0.28, "rate_reps": 25},
    "MM2": {"t0": 0.6, "x0": None, "xi0": (0.8, -0.8), "alpha": None, "rate_reps": 10},
}

_EVAL_GRID_DEFAULTS = {1: (200, -2.0, 2.0), 2: (21, -1.5, 1.5)}
_DIM = {"GG1": 1, "MM1": 1, "GG2": 2, "MM2": 2}

_SCHEMA = {
    "testbed": str,
    "variant": str,
    "seed": int,
    "threads": int,
    "output": str,
    "interval": {"s": float, "u": float, "eta": float},
    "query": {"t0": float, "x0": (float, list), "xi0": (float, list)},
    "eval_grid": {"points": int, "lo": float, "hi": float},
    "conditioning_grid_points": int,
    "m_values": list,
    "rate": {"reps": int},
    "clt": {"reps": int, "alpha": float, "c": float, "m_values": list},
    "edge": {"reps": int, "m": int, "offsets": list},
    "stress": {"reps": int, "m": int},
    "bandwidth": {"h0": float, "kappa_pair": float, "kappa_final": float},
    "preflight": {"testbeds": list},
}


@dataclass(frozen=True)
class ExperimentConfig:
    testbed: str
    variant: str
    seed: int
    threads: int
    output: str
    interval_s: float
    interval_u: float
    interval_eta: float
    t0: float
    x0: tuple | None
    xi0: tuple
    eval_points: int
    eval_lo: float
    eval_hi: float
    conditioning_grid_points: int
    m_values: tuple
    rate_reps: int
    clt_reps: int
    clt_alpha: float | None
    clt_c: float
    clt_m_values: tuple
    edge_reps: int
    edge_m: int
    edge_offsets: tuple
    stress_reps: int
    stress_m: int
    h0: float
    kappa_pair: float
    kappa_final: float
    preflight_testbeds: tuple
    raw: dict = field(repr=False)

    @property
    def dim(self) -> int:
        return _DIM[self.testbed]


def _check_keys(data: dict, schema: dict, path: str) -> None:
    for key, val in data.items():
        if key not in schema:
            raise ConfigError(
                f"unknown config key {path}{key!r}; allowed: {sorted(schema)}"
            )
        want = schema[key]
        if isinstance(want, dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config key {path}{key!r} must be a mapping")
            _check_keys(val, want, f"{path}{key}.")
        elif want is float:
            if not isinstance(val, (int, float)) or isinstance(val, bool):
                raise ConfigError(f"config key {path}{key!r} must be a number")
        elif want is int:
            if not isinstance(val, int) or isinstance(val, bool):
                raise ConfigError(f"config key {path}{key!r} must be an integer")
        elif want is list:
            if not isinstance(val, (list, tuple)):
                raise ConfigError(f"config key {path}{key!r} must be a list")
        elif want is str:
            if not isinstance(val, str):
                raise ConfigError(f"config key {path}{key!r} must be a string")
        else:  # tuple of alternatives
            if isinstance(val, bool) or not isinstance(val, want):
                raise ConfigError(f"config key {path}{key!r} has the wrong type")


def _as_point(value, d: int, name: str) -> tuple:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, (list, tuple)) or len(value) != d:
        raise ConfigError(f"{name} must be a point with {d} coordinate(s)")
    return tuple(float(v) for v in value)


def resolve_config(data: dict | None) -> ExperimentConfig:
    """Validate a parsed config mapping and fill protocol defaults."""
    data = dict(data or {})
    _check_keys(data, _SCHEMA, "")
    testbed = data.get("testbed")
    if testbed is None:
        raise ConfigError("config must name a testbed (GG1, GG2, MM1, MM2)")
    if testbed not in TESTBEDS:
        raise ConfigError(f"unknown testbed {testbed!r}; expected one of {TESTBEDS}")
    variant = data.get("variant", "compact")
    d = _DIM[testbed]
    tb = _TESTBED_DEFAULTS[testbed]

    interval = data.get("interval", {})
    query = data.get("query", {})
    x0_raw = query.get("x0", tb["x0"])
    x0 = None if x0_raw is None else _as_point(x0_raw, d, "query.x0")
    xi0 = _as_point(query.get("xi0", tb["xi0"]), d, "query.xi0")

    points, lo, hi = _EVAL_GRID_DEFAULTS[d]
    eval_grid = data.get("eval_grid", {})
    m_values = tuple(int(m) for m in data.get("m_values", M_VALUES_DEFAULT))
    if len(m_values) < 1 or any(m < 1 for m in m_values):
        raise ConfigError("m_values must be a nonempty list of positive integers")

    clt = data.get("clt", {})
    alpha = clt.get("alpha", tb["alpha"])
    if alpha is not None:
        alpha = float(alpha)
    edge = data.get("edge", {})
    offsets = tuple(float(o) for o in edge.get("offsets", EDGE_OFFSETS_DEFAULT))
    if any(o <= 0.0 for o in offsets):
        raise ConfigError("edge.offsets must be positive (they are u - t)")
    stress = data.get("stress", {})
    bw = data.get("bandwidth", {})
    preflight = data.get("preflight", {})
    testbeds = tuple(preflight.get("testbeds", (testbed,)))
    for name in testbeds:
        if name not in TESTBEDS:
            raise ConfigError(f"unknown testbed {name!r} in preflight.testbeds")

    cfg = ExperimentConfig(
        testbed=testbed,
        variant=variant,
        seed=int(data.get("seed", 20250815)),
        threads=int(data.get("threads", 1)),
        output=str(data.get("output", "results")),
        interval_s=float(interval.get("s", 0.2)),
        interval_u=float(interval.get("u", 1.0)),
        interval_eta=float(interval.get("eta", 0.05)),
        t0=float(query.get("t0", tb["t0"])),
        x0=x0,
        xi0=xi0,
        eval_points=int(eval_grid.get("points", points)),
        eval_lo=float(eval_grid.get("lo", lo)),
        eval_hi=float(eval_grid.get("hi", hi)),
        conditioning_grid_points=int(data.get("conditioning_grid_points", 21)),
        m_values=m_values,
        rate_reps=int(data.get("rate", {}).get("reps", tb["rate_reps"])),
        clt_reps=int(clt.get("reps", 150)),
        clt_alpha=alpha,
        clt_c=float(clt.get("c", 1.0)),
        clt_m_values=tuple(int(m) for m in clt.get("m_values", m_values)),
        edge_reps=int(edge.get("reps", 50)),
        edge_m=int(edge.get("m", 4000)),
        edge_offsets=offsets,
        stress_reps=int(stress.get("reps", 100)),
        stress_m=int(stress.get("m", 4000)),
        h0=float(bw.get("h0", 1.2)),
        kappa_pair=float(bw.get("kappa_pair", 2.0)),
        kappa_final=float(bw.get("kappa_final", 2.0)),
        preflight_testbeds=testbeds,
        raw=data,
    )
    _validate_resolved(cfg)
    return cfg


def _validate_resolved(cfg: ExperimentConfig) -> None:
    if not cfg.interval_s < cfg.interval_u:
        raise ConfigError("interval requires s < u")
    if not 0.0 < cfg.interval_eta < cfg.interval_u - cfg.interval_s:
        raise ConfigError("interval.eta must lie in (0, u - s)")
    if not cfg.interval_s <= cfg.t0 <= cfg.interval_u - cfg.interval_eta:
        raise ConfigError("query.t0 must lie in [s, u - eta]")
    if cfg.eval_points < 2 or cfg.eval_lo >= cfg.eval_hi:
        raise ConfigError("eval_grid must have points >= 2 and lo < hi")
    if cfg.variant not in ("compact", "wide"):
        raise ConfigError("variant must be 'compact' or 'wide'")
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")
    for name in ("rate_reps", "clt_reps", "edge_reps", "stress_reps"):
        if getattr(cfg, name) < 1:
            raise ConfigError(f"{name} must be >= 1")
    if max(cfg.edge_offsets) > cfg.interval_u - cfg.interval_s:
        raise ConfigError("edge offsets cannot exceed the interval length")


def load_config(path) -> ExperimentConfig:
    """Parse and validate a YAML experiment config file."""
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"could not parse config {path}: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    return resolve_config(data)


def canonical_json(cfg: ExperimentConfig) -> str:
    """Stable serialization of the resolved config (manifest hashing).

    threads and output are excluded: results are identical for any
    thread count, and the artifact location is not part of the science.
    """
    fields = {
        k: v
        for k, v in vars(cfg).items()
        if k not in ("raw", "threads", "output")
    }
    return json.dumps(fields, sort_keys=True, default=list)


def config_sha256(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(canonical_json(cfg).encode("utf-8")).hexdigest()
