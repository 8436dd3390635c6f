"""Discretized flat domains: interval, cube and flat torus.

Grid points sit at cell midpoints ``(i + 1/2) h`` along each axis and carry
the uniform weight ``h**m``.  Flat indices are row-major over the axes.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .errors import IndexOutOfRange, InvalidDimension, InvalidResolution

__all__ = ["DomainKind", "GridDomain", "make_domain", "geodesic_distance", "line_sections"]


class DomainKind(str, Enum):
    INTERVAL = "interval"
    CUBE = "cube"
    TORUS = "torus"


@dataclass(frozen=True)
class GridDomain:
    kind: DomainKind
    m: int
    n: int
    side: float
    periodic: tuple

    @property
    def h(self):
        return self.side / self.n

    @property
    def shape(self):
        return (self.n,) * self.m

    @property
    def size(self):
        return self.n ** self.m

    @property
    def weight(self):
        return self.h ** self.m

    @property
    def is_convex(self):
        return self.kind is not DomainKind.TORUS

    @property
    def diameter(self):
        """Geodesic diameter of the continuous domain."""
        if self.kind is DomainKind.TORUS:
            return 0.5 * self.side * np.sqrt(self.m)
        return self.side * np.sqrt(self.m)

    @cached_property
    def points(self):
        axis = (np.arange(self.n) + 0.5) * self.h
        grids = np.meshgrid(*([axis] * self.m), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        pts.flags.writeable = False
        return pts

    @cached_property
    def weights(self):
        w = np.full(self.size, self.weight)
        w.flags.writeable = False
        return w

    def check_index(self, i):
        if not 0 <= int(i) < self.size:
            raise IndexOutOfRange(f"index {i} outside [0, {self.size})")
        return int(i)

    def unravel(self, i):
        return np.unravel_index(i, self.shape)

    def displacement(self, a, b):
        """Per-axis displacement ``b - a`` reduced to the shortest periodic representative."""
        d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
        if any(self.periodic):
            per = np.asarray(self.periodic)
            wrapped = d - self.side * np.round(d / self.side)
            d = np.where(per, wrapped, d)
        return d

    def distance_block(self, rows, cols=None):
        """Distances between the points ``rows`` (indices) and ``cols`` (default: all)."""
        pr = self.points[rows]
        pc = self.points if cols is None else self.points[cols]
        d = self.displacement(pr[:, None, :], pc[None, :, :])
        if self.m == 1:
            return np.abs(d[..., 0])
        return np.sqrt(np.sum(d * d, axis=-1))

    def edges(self):
        """All axis-neighbour pairs ``(i, j)`` with ``j`` the forward neighbour of ``i``.

        Returns ``(pairs, axes)``; periodic axes contribute their wrap edges.
        """
        idx = np.arange(self.size).reshape(self.shape)
        pairs, axes = [], []
        for ax in range(self.m):
            if self.periodic[ax]:
                fwd = np.roll(idx, -1, axis=ax)
                src = idx
            else:
                sl_src = [slice(None)] * self.m
                sl_dst = [slice(None)] * self.m
                sl_src[ax] = slice(0, -1)
                sl_dst[ax] = slice(1, None)
                src = idx[tuple(sl_src)]
                fwd = idx[tuple(sl_dst)]
            p = np.stack([src.ravel(), fwd.ravel()], axis=1)
            pairs.append(p)
            axes.append(np.full(len(p), ax))
        return np.concatenate(pairs), np.concatenate(axes)


def make_domain(kind, m, n, side=1.0):
    kind = DomainKind(kind.lower() if isinstance(kind, str) else kind)
    if m not in (1, 2):
        raise InvalidDimension(f"dimension must be 1 or 2, got {m}")
    if kind is DomainKind.CUBE and m == 1:
        kind = DomainKind.INTERVAL
    if kind is DomainKind.INTERVAL and m == 2:
        kind = DomainKind.CUBE
    if int(n) != n or n < 2:
        raise InvalidResolution(f"need at least 2 points per axis, got {n}")
    if not side > 0:
        raise InvalidResolution(f"side must be positive, got {side}")
    periodic = (kind is DomainKind.TORUS,) * m
    return GridDomain(kind, int(m), int(n), float(side), periodic)


def geodesic_distance(dom, i, j):
    i, j = dom.check_index(i), dom.check_index(j)
    if i == j:
        return 0.0
    d = dom.displacement(dom.points[i], dom.points[j])
    return float(np.sqrt(np.sum(d * d)))


def line_sections(dom, axis):
    """Maximal 1D index paths along ``axis``.

    Paths are closed loops when the axis is periodic (the last index neighbours
    the first) and open chains otherwise.
    """
    if not 0 <= axis < dom.m:
        raise IndexOutOfRange(f"axis {axis} outside [0, {dom.m})")
    idx = np.arange(dom.size).reshape(dom.shape)
    lines = np.moveaxis(idx, axis, -1).reshape(-1, dom.n)
    return [line.copy() for line in lines]
