"""Seeded generators of test fields on grid domains."""
from __future__ import annotations

import math

import numpy as np

from .covering import REAL_LINE
from .energy import make_field

__all__ = ["FAMILIES", "generate", "trig_mix", "ramp", "ramp_steps", "bump", "winding_ramp",
           "power_singularity", "two_scale", "constant"]


def _rng(seed):
    return np.random.default_rng(seed)


def trig_mix(dom, seed=0, modes=4, amplitude=1.0):
    """Random combination of integer-frequency sines (periodic on the unit torus)."""
    rng = _rng(seed)
    x = dom.points / dom.side
    out = np.zeros(dom.size)
    for _ in range(modes):
        freq = rng.integers(-modes, modes + 1, size=dom.m)
        if not freq.any():
            freq[0] = 1
        a = rng.normal() / np.linalg.norm(freq)
        out += a * np.sin(2 * math.pi * (x @ freq) + rng.uniform(0, 2 * math.pi))
    return amplitude * out


def ramp(dom, slope=1.0, axis=0):
    return slope * dom.points[:, axis]


def ramp_steps(dom, seed=0, jumps=3, height=1.0):
    """A unit ramp plus a few random jumps."""
    rng = _rng(seed)
    x = dom.points[:, 0] / dom.side
    out = x.copy()
    for c in rng.uniform(0.1, 0.9, size=jumps):
        out += height * rng.uniform(0.5, 1.5) * (x > c)
    return out


def bump(dom, center=None, radius=0.3, height=1.0):
    c = np.full(dom.m, 0.5 * dom.side) if center is None else np.asarray(center, dtype=float)
    r2 = np.sum((dom.points - c) ** 2, axis=1) / radius ** 2
    return height * np.where(r2 < 1, np.exp(1 - 1 / np.clip(1 - r2, 1e-300, None)), 0.0)


def winding_ramp(dom, turns=1.0, circumference=2 * math.pi):
    """Real ramp covering ``turns`` circumferences across the first axis."""
    return turns * circumference * dom.points[:, 0] / dom.side


def power_singularity(dom, alpha, center=None):
    """``|x - c|^(-alpha)``; grid midpoints never hit the centre for even ``n``."""
    c = np.full(dom.m, 0.5 * dom.side) if center is None else np.asarray(center, dtype=float)
    r = np.sqrt(np.sum((dom.points - c) ** 2, axis=1))
    return r ** -alpha


def two_scale(dom, seed=0, ripple=0.02, freq=40):
    """Smooth ramp plus a small high-frequency ripple."""
    rng = _rng(seed)
    x = dom.points[:, 0] / dom.side
    phase = rng.uniform(0, 2 * math.pi)
    return x + ripple * rng.uniform(0.5, 1.5) * np.sin(2 * math.pi * freq * x + phase)


def constant(dom, value=0.0):
    return np.full(dom.size, float(value))


FAMILIES = {
    "trig": trig_mix,
    "ramp": ramp,
    "ramp_steps": ramp_steps,
    "bump": bump,
    "winding": winding_ramp,
    "power": power_singularity,
    "two_scale": two_scale,
    "constant": constant,
}


def generate(family, dom, space=REAL_LINE, **params):
    """Field from a named family; ``space`` reduces the values (e.g. a circle)."""
    try:
        fn = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown field family {family!r}") from None
    return make_field(dom, space, fn(dom, **params))
