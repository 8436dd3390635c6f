"""TOML experiment configuration with schema and range validation."""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from dataclasses import field as dc_field

import tomli

from .errors import ParseError, RangeError, SchemaError

JOBS = ("energy", "lift", "decompose", "verify", "counterexample")
ENERGIES = ("gagliardo", "truncated", "gap", "dirichlet", "segment", "large_osc", "x_energy")


def _unit_open(v):
    return 0 < v < 1


def _positive(v):
    return v > 0


def _nonneg(v):
    return v >= 0


def _finite(v):
    return math.isfinite(v)


# key -> (type, default, range predicate or None, human-readable range)
SCHEMA = {
    "job": (str, "energy", lambda v: v in JOBS, f"one of {JOBS}"),
    "suite": (str, "all", None, ""),
    "energy": (str, "gagliardo", lambda v: v in ENERGIES, f"one of {ENERGIES}"),
    "domain": (str, "interval", lambda v: v in ("interval", "cube", "torus"), "interval, cube or torus"),
    "m": (int, 1, lambda v: v in (1, 2), "1 or 2"),
    "n": (int, 256, lambda v: v >= 2, ">= 2"),
    "side": (float, 1.0, _positive, "> 0"),
    "covering": (str, "r-over-s1", None, ""),
    "family": (str, "trig", None, ""),
    "target": (str, "real", lambda v: v in ("real", "base", "total"), "real, base or total"),
    "field": (str, "", None, ""),
    "seed": (int, 0, _nonneg, ">= 0"),
    "s": (float, 0.5, _unit_open, "in (0, 1)"),
    "p": (float, 2.0, lambda v: v >= 1 and _finite(v), ">= 1"),
    "q": (float, 1.0, lambda v: v >= 0 and _finite(v), ">= 0"),
    "sigma": (float, 0.25, _unit_open, "in (0, 1)"),
    "lam": (float, 0.5, _positive, "> 0"),
    "gamma": (float, 1.0, _finite, "finite"),
    "r": (float, 2.0, lambda v: v >= 1, ">= 1"),
    "delta": (float, 0.5, _positive, "> 0"),
    "s_star": (float, 0.5, _unit_open, "in (0, 1)"),
    "p_star": (float, 4.0, lambda v: v >= 1, ">= 1"),
    "K": (int, 64, lambda v: v >= 2, ">= 2"),
    "slack": (float, 0.05, _nonneg, ">= 0"),
    "threads": (int, 1, lambda v: v >= 1, ">= 1"),
    "out": (str, "out", None, ""),
}
TABLES = ("params", "suites")


@dataclass
class ExperimentConfig:
    job: str = "energy"
    suite: str = "all"
    energy: str = "gagliardo"
    domain: str = "interval"
    m: int = 1
    n: int = 256
    side: float = 1.0
    covering: str = "r-over-s1"
    family: str = "trig"
    target: str = "real"
    field: str = ""
    seed: int = 0
    s: float = 0.5
    p: float = 2.0
    q: float = 1.0
    sigma: float = 0.25
    lam: float = 0.5
    gamma: float = 1.0
    r: float = 2.0
    delta: float = 0.5
    s_star: float = 0.5
    p_star: float = 4.0
    K: int = 64
    slack: float = 0.05
    threads: int = 1
    out: str = "out"
    params: dict = dc_field(default_factory=dict)   # extra family parameters
    suites: dict = dc_field(default_factory=dict)   # per-suite overrides
    explicit: frozenset = frozenset()            # keys set by the user

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "explicit"}


def _coerce(key, value):
    typ, _, ok, desc = SCHEMA[key]
    if typ is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, typ) or isinstance(value, bool):
        raise RangeError(key, f"{key} must be of type {typ.__name__}, got {value!r}")
    if ok is not None and not ok(value):
        raise RangeError(key, f"{key}={value!r} out of range ({desc})")
    return value


def _check_suites(table):
    from .ineq_lab.suites import SUITES, suite_config
    out = {}
    for sid, over in table.items():
        if sid not in SUITES:
            raise SchemaError(f"suites.{sid}", f"unknown suite {sid!r}")
        if not isinstance(over, dict):
            raise SchemaError(f"suites.{sid}", "suite overrides must be a table")
        known = suite_config(sid)
        for k, v in over.items():
            if k not in known:
                raise SchemaError(f"suites.{sid}.{k}", f"unknown key {k!r} for suite {sid!r}")
            if k in ("s", "sigma") and isinstance(v, (int, float)) and not 0 < v < 1:
                raise RangeError(k, f"{k}={v!r} out of range (in (0, 1))")
        out[sid] = dict(over)
    return out


def config_from_dict(data):
    values, explicit = {}, set()
    for key, value in data.items():
        if key in TABLES:
            if not isinstance(value, dict):
                raise SchemaError(key, f"{key} must be a table")
            values[key] = _check_suites(value) if key == "suites" else dict(value)
        elif key in SCHEMA:
            values[key] = _coerce(key, value)
        else:
            raise SchemaError(key, f"unknown key {key!r}")
        explicit.add(key)
    return ExperimentConfig(**values, explicit=frozenset(explicit))


def parse_config(text):
    """Parse and validate a TOML document.

    Raises ``ParseError`` (with line diagnostics from the TOML parser),
    ``SchemaError(key)`` for unknown keys and ``RangeError(key)`` for
    ill-typed or out-of-range values.  Missing keys take their defaults.
    """
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ParseError(str(exc)) from None
    return config_from_dict(data)


def load_config(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"config is not UTF-8: {exc}") from None
    return parse_config(text)


def with_overrides(cfg, **kw):
    """Copy of ``cfg`` with non-``None`` keyword values validated and applied."""
    data = cfg.to_dict()
    explicit = set(cfg.explicit)
    for k, v in kw.items():
        if v is None:
            continue
        data[k] = _coerce(k, v)
        explicit.add(k)
    return ExperimentConfig(**data, explicit=frozenset(explicit))
