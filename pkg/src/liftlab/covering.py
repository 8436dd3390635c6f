"""Analytic Riemannian coverings and their target geometries.

Three families are hardcoded: the real line over the circle, the ``k``-fold
cover of the circle by a longer circle, and the plane over the flat torus.
Points are float arrays whose last axis holds the coordinates (length 1 or 2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousLift, InvalidDeckElement, UnknownCovering

__all__ = [
    "TargetGeometry", "CoveringChart", "REAL_LINE", "REAL_PLANE", "circle", "flat_torus",
    "line_over_circle", "kfold_circle", "plane_over_torus", "get_covering",
    "project", "local_lift", "deck_apply", "deck_compose", "deck_identity",
]

TWO_PI = 2.0 * math.pi


def _periodic_delta(d, period):
    return d - period * np.round(d / period)


@dataclass(frozen=True)
class TargetGeometry:
    """A flat target: products of lines and circles.

    ``periods`` holds one entry per coordinate, ``None`` for a line factor.
    """
    name: str
    periods: tuple

    @property
    def dim(self):
        return len(self.periods)

    @property
    def is_real(self):
        return self.dim == 1 and self.periods[0] is None

    @property
    def injectivity_radius(self):
        finite = [L for L in self.periods if L is not None]
        return 0.5 * min(finite) if finite else math.inf

    @property
    def diameter(self):
        if any(L is None for L in self.periods):
            return math.inf
        return 0.5 * math.sqrt(sum(L * L for L in self.periods))

    def reduce(self, x):
        """Canonical coordinates: circle factors reduced to ``[0, L)``."""
        x = np.array(x, dtype=float)
        for k, L in enumerate(self.periods):
            if L is not None:
                c = np.mod(x[..., k], L)
                # mod can round up to L itself
                x[..., k] = np.where(c >= L, 0.0, c)
        return x

    def delta(self, a, b):
        """Per-coordinate shortest displacement from ``a`` to ``b``."""
        d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
        if all(L is None for L in self.periods):
            return d
        out = np.empty(d.shape)
        for k, L in enumerate(self.periods):
            out[..., k] = d[..., k] if L is None else _periodic_delta(d[..., k], L)
        return out

    def distance(self, a, b):
        d = self.delta(a, b)
        if self.dim == 1:
            return np.abs(d[..., 0])
        return np.sqrt(np.sum(d * d, axis=-1))


REAL_LINE = TargetGeometry("RealLine", (None,))
REAL_PLANE = TargetGeometry("RealPlane", (None, None))


def circle(circumference=TWO_PI):
    return TargetGeometry(f"Circle({circumference:g})", (float(circumference),))


def flat_torus(periods=(TWO_PI, TWO_PI)):
    return TargetGeometry(f"FlatTorus2({periods[0]:g},{periods[1]:g})", tuple(float(L) for L in periods))


@dataclass(frozen=True)
class CoveringChart:
    """A covering ``total -> base`` acting by translations of the total coordinate.

    ``deck_rank`` is the rank of the free abelian deck group; ``deck_order``
    is ``k`` for the cyclic group of the k-fold circle cover.
    """
    id: str
    family: str
    base: TargetGeometry
    total: TargetGeometry
    deck_rank: int
    deck_order: int = 0

    @property
    def inj(self):
        return self.base.injectivity_radius

    @property
    def deck_step(self):
        """Translation vector of each deck generator."""
        return tuple(L for L in self.base.periods)


def line_over_circle():
    return CoveringChart("r-over-s1", "LineOverCircle", circle(TWO_PI), REAL_LINE, 1)


def kfold_circle(k):
    k = int(k)
    if k < 1:
        raise UnknownCovering(f"k-fold covering needs k >= 1, got {k}")
    return CoveringChart(f"kfold:{k}", "KFoldCircle", circle(TWO_PI), circle(TWO_PI * k), 1, k)


def plane_over_torus():
    return CoveringChart("r2-over-t2", "PlaneOverTorus", flat_torus(), REAL_PLANE, 2)


def get_covering(cov_id):
    """Look a covering up by its string id (``r-over-s1``, ``kfold:<k>``, ``r2-over-t2``)."""
    if isinstance(cov_id, CoveringChart):
        return cov_id
    key = str(cov_id).strip().lower()
    if key == "r-over-s1":
        return line_over_circle()
    if key == "r2-over-t2":
        return plane_over_torus()
    if key.startswith("kfold:"):
        try:
            k = int(key.split(":", 1)[1])
        except ValueError:
            raise UnknownCovering(f"bad k in covering id {cov_id!r}") from None
        return kfold_circle(k)
    raise UnknownCovering(f"unknown covering id {cov_id!r}")


def project(cov, total_point):
    return cov.base.reduce(total_point)


def local_lift(cov, base_point, reference, strict=True):
    """Preimage of ``base_point`` nearest to the total-space point ``reference``.

    Vectorized over leading axes.  With ``strict`` an :class:`AmbiguousLift`
    is raised when the base distance reaches the injectivity radius.
    """
    base_point = np.asarray(base_point, dtype=float)
    reference = np.asarray(reference, dtype=float)
    step = cov.base.delta(project(cov, reference), base_point)
    if strict:
        dist = np.sqrt(np.sum(step * step, axis=-1))
        if np.any(dist >= cov.inj):
            raise AmbiguousLift(
                f"base distance {float(np.max(dist)):.6g} >= injectivity radius {cov.inj:.6g}")
    return cov.total.reduce(reference + step)


def _check_elem(cov, elem):
    e = np.atleast_1d(np.asarray(elem))
    if e.shape != (cov.deck_rank,) or not np.all(e == np.round(e)):
        raise InvalidDeckElement(f"{elem!r} is not an element of the deck group of {cov.id}")
    e = e.astype(np.int64)
    if cov.deck_order and not 0 <= e[0] < cov.deck_order:
        raise InvalidDeckElement(f"{elem!r} is outside Z/{cov.deck_order}")
    return e


def deck_apply(cov, elem, total_point):
    e = _check_elem(cov, elem)
    shift = e * np.asarray(cov.deck_step)
    return cov.total.reduce(np.asarray(total_point, dtype=float) + shift)


def deck_compose(cov, a, b):
    """Group law: ``deck_apply(compose(a, b)) == deck_apply(a) o deck_apply(b)``."""
    s = _check_elem(cov, a) + _check_elem(cov, b)
    if cov.deck_order:
        s = s % cov.deck_order
    return _as_elem(s)


def deck_identity(cov):
    return _as_elem(np.zeros(cov.deck_rank, dtype=np.int64))


def _as_elem(e):
    e = [int(v) for v in np.atleast_1d(e)]
    return e[0] if len(e) == 1 else tuple(e)


def deck_between(cov, a, b):
    """Deck element carrying total point ``a`` to ``b`` (rounded; vectorized)."""
    d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    e = np.round(d / np.asarray(cov.deck_step)).astype(np.int64)
    if cov.deck_order:
        e = e % cov.deck_order
    return e
