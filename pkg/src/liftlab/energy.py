"""Nonlocal and local energies as deterministic pair-sum quadratures.

Every pair energy has the form

    E = sum_{i != j} K(d_target(u_i, u_j), d_dom(x_i, x_j)) * w_i * w_j

over the grid of a :class:`GridDomain`.  Pairs are grouped by grid offset,
each group is summed with numpy and the group sums are combined with
``math.fsum`` in a fixed order, so the result does not depend on how many
workers evaluate groups.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .covering import TargetGeometry, REAL_LINE
from .domain import DomainKind, GridDomain
from .errors import BadSigma, EmptyField, NotConvexDomain, NotOneDimensional

__all__ = [
    "Field", "EnergyValue", "make_field", "set_workers", "pair_sum", "pair_sum_direct",
    "gagliardo", "truncated", "gap_energy", "x_energy", "dirichlet",
    "large_osc_energy", "segment_double_energy",
]

BLOCK_ELEMENTS = 1 << 20
_workers = 1


def set_workers(n):
    """Number of threads used to evaluate pair-sum blocks (results are identical for any value)."""
    global _workers
    _workers = max(1, int(n))


@dataclass(frozen=True)
class Field:
    domain: GridDomain
    space: TargetGeometry
    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.shape[0] != self.domain.size or v.shape[1] != self.space.dim:
            raise ValueError(
                f"values of shape {v.shape} do not match {self.domain.size} points in {self.space.name}")

    @property
    def size(self):
        return self.values.shape[0]

    def scalar(self):
        """Values of a one-component field as a flat array."""
        return self.values[:, 0]

    def grid(self):
        """Values reshaped to the domain grid (component axis dropped when 1D)."""
        v = self.values.reshape(self.domain.shape + (self.space.dim,))
        return v[..., 0] if self.space.dim == 1 else v

    def with_values(self, values, space=None):
        return make_field(self.domain, space or self.space, values)


def make_field(domain, space, values):
    """Build a :class:`Field`; ``values`` may be flat, grid-shaped, or (N, dim)."""
    space = space or REAL_LINE
    v = np.asarray(values, dtype=float)
    v = v.reshape(domain.size, space.dim)
    v = space.reduce(v)
    v.flags.writeable = False
    return Field(domain, space, v)


@dataclass(frozen=True)
class EnergyValue:
    value: float
    pair_count: int
    params: dict = dc_field(default_factory=dict)

    def __float__(self):
        return self.value


def _check(field):
    if field is None or field.size == 0:
        raise EmptyField("field has no samples")


def _blocks(n_rows, n_cols):
    step = max(1, BLOCK_ELEMENTS // max(1, n_cols))
    return [(i, min(i + step, n_rows)) for i in range(0, n_rows, step)]


def _offsets(dom, upper):
    """Grid offsets to visit and the multiplicity of each.

    Open domains visit a lexicographic half of the offsets and count each twice
    (every kernel is symmetric).  Tori visit every nonzero residue once, which
    already enumerates all ordered pairs; with ``upper`` the residues are
    folded onto a half as well.
    """
    n, m = dom.n, dom.m
    if dom.kind.value == "torus":
        rng = [range(n)] * m
    else:
        rng = [range(-(n - 1), n)] * m
    offs = np.array(np.meshgrid(*rng, indexing="ij")).reshape(m, -1).T
    offs = offs[np.any(offs != 0, axis=1)]
    if dom.kind.value == "torus":
        if not upper:
            return offs, np.ones(len(offs))
        neg = np.mod(-offs, n)
        key = offs[:, 0] * n + (offs[:, 1] if m == 2 else 0)
        nkey = neg[:, 0] * n + (neg[:, 1] if m == 2 else 0)
        keep = key <= nkey
        return offs[keep], np.where(key[keep] == nkey[keep], 1.0, 2.0)
    first = np.argmax(offs != 0, axis=1)
    lead = offs[np.arange(len(offs)), first]
    offs = offs[lead > 0]
    return offs, np.full(len(offs), 2.0)


def _shifted(dom, grid, o):
    """Views ``(a, b)`` with ``b`` the values displaced by offset ``o`` from ``a``."""
    if dom.kind.value == "torus":
        return grid, np.roll(grid, tuple(-int(v) for v in o), axis=tuple(range(dom.m)))
    src, dst = [], []
    for v in o:
        v = int(v)
        if v >= 0:
            src.append(slice(0, dom.n - v))
            dst.append(slice(v, dom.n))
        else:
            src.append(slice(-v, dom.n))
            dst.append(slice(0, dom.n + v))
    return grid[tuple(src)], grid[tuple(dst)]


def _offset_length(dom, o):
    k = np.abs(np.asarray(o, dtype=float))
    if dom.kind.value == "torus":
        k = np.minimum(k, dom.n - k)
    return float(np.sqrt(np.sum(k * k))) * dom.h


def pair_sum(field, kernel, upper=False, workers=None):
    """Weighted sum of ``kernel(d_target, d_domain)`` over ordered pairs ``i != j``.

    Pairs are grouped by their grid offset, so the domain distance is a single
    scalar per group.  Group sums are combined with ``math.fsum`` in a fixed
    order; the value does not depend on ``workers``.
    Returns ``(value, active_pair_count)``.
    """
    _check(field)
    dom, space = field.domain, field.space
    grid = field.values.reshape(dom.shape + (space.dim,))
    offs, mult = _offsets(dom, upper)

    def run(chunk):
        sums, counts = [], []
        for o in offs[chunk[0]:chunk[1]]:
            a, b = _shifted(dom, grid, o)
            dt = space.distance(a, b)
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                k = kernel(dt, _offset_length(dom, o))
            k = np.broadcast_to(k, dt.shape)
            sums.append(float(np.sum(k)))
            counts.append(int(np.count_nonzero(k)))
        return sums, counts

    step = max(1, len(offs) // 64)
    chunks = [(i, min(i + step, len(offs))) for i in range(0, len(offs), step)]
    nw = _workers if workers is None else max(1, int(workers))
    if nw > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(nw) as ex:
            results = list(ex.map(run, chunks))
    else:
        results = [run(c) for c in chunks]
    sums = np.concatenate([r[0] for r in results]) * mult
    counts = np.concatenate([r[1] for r in results]) * mult
    return math.fsum(sums.tolist()) * dom.weight ** 2, int(counts.sum())


def pair_sum_direct(field, kernel, upper=False):
    """Row-blocked reference evaluation of :func:`pair_sum` (explicit distance matrices)."""
    _check(field)
    dom, space, vals = field.domain, field.space, field.values
    N = dom.size
    cols = np.arange(N)
    total, count = [], 0
    for i0, i1 in _blocks(N, N):
        rows = np.arange(i0, i1)
        dt = space.distance(vals[i0:i1, None, :], vals[None, :, :])
        dd = dom.distance_block(rows)
        off = cols[None, :] > rows[:, None] if upper else cols[None, :] != rows[:, None]
        dd = np.where(off, dd, 1.0)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            k = kernel(dt, dd)
        k = np.where(off, k, 0.0)
        total.extend(np.sum(k, axis=1).tolist())
        count += int(np.count_nonzero(k))
    factor = 2.0 if upper else 1.0
    return factor * math.fsum(total) * dom.weight ** 2, int(factor * count)


def _pow(x, e):
    if e == 2:
        return x * x
    if e == 1:
        return x
    return np.power(x, e)


def gagliardo(field, s, p, upper=False):
    """Gagliardo energy: sum of ``d^p / |x - y|^(m + s p)``."""
    m = field.domain.m
    a = m + s * p
    val, cnt = pair_sum(field, lambda dt, dd: _pow(dt, p) / _pow(dd, a), upper=upper)
    return EnergyValue(val, cnt, {"energy": "gagliardo", "s": s, "p": p})


def truncated(field, s, p, q, upper=False):
    """Energy with the kernel ``min(d^p, d^q)``; ``q = 0`` gives the cap ``min(d^p, 1)``."""
    m = field.domain.m
    a = m + s * p

    def kern(dt, dd):
        num = np.minimum(_pow(dt, p), np.power(dt, q)) if q > 0 else np.minimum(_pow(dt, p), 1.0)
        return num / _pow(dd, a)

    val, cnt = pair_sum(field, kern, upper=upper)
    return EnergyValue(val, cnt, {"energy": "truncated", "s": s, "p": p, "q": q})


def gap_energy(field, lam, q, gamma):
    """Sum over pairs with ``d >= lam`` of ``(d - lam)^q / |x - y|^(m + gamma)``."""
    m = field.domain.m
    if lam < 0 or q < 0 or m + gamma <= 0:
        raise ValueError("gap energy needs lam >= 0, q >= 0 and m + gamma > 0")

    def kern(dt, dd):
        act = dt >= lam
        g = np.where(act, dt - lam, 0.0)
        num = np.where(act, np.power(g, q), 0.0)
        return num / np.power(dd, m + gamma)

    val, cnt = pair_sum(field, kern)
    return EnergyValue(val, cnt, {"energy": "gap", "lambda": lam, "q": q, "gamma": gamma})


def x_energy(field_total, cov):
    """Membership functional of the lifting space: ``1/|x-y|^(m+1)`` over pairs
    whose total-space distance is at least half the injectivity radius."""
    m = field_total.domain.m
    thr = 0.5 * cov.inj
    val, cnt = pair_sum(field_total, lambda dt, dd: np.where(dt >= thr, 1.0, 0.0) / _pow(dd, m + 1))
    return EnergyValue(val, cnt, {"energy": "x", "covering": cov.id, "threshold": thr})


def large_osc_energy(field, delta, s_star, p_star):
    if not delta > 0:
        raise ValueError("delta must be positive")
    m = field.domain.m
    a = m + s_star * p_star

    def kern(dt, dd):
        return np.where(dt >= delta, np.power(dt, p_star), 0.0) / np.power(dd, a)

    val, cnt = pair_sum(field, kern)
    return EnergyValue(val, cnt, {"energy": "large_osc", "delta": delta, "s": s_star, "p": p_star})


def gradient_magnitude(field):
    """Per-cell forward-difference gradient norm (target-space distances over ``h``).

    Periodic axes wrap; on open axes the last cell reuses the backward difference.
    """
    _check(field)
    dom, space = field.domain, field.space
    v = field.values.reshape(dom.shape + (space.dim,))
    sq = np.zeros(dom.shape)
    for ax in range(dom.m):
        if dom.periodic[ax]:
            d = space.distance(v, np.roll(v, -1, axis=ax))
        else:
            fwd = space.distance(np.take(v, range(0, dom.n - 1), axis=ax),
                                 np.take(v, range(1, dom.n), axis=ax))
            last = np.take(fwd, [dom.n - 2], axis=ax)
            d = np.concatenate([fwd, last], axis=ax)
        sq += (d / dom.h) ** 2
    return np.sqrt(sq).ravel()


def dirichlet(field, r):
    """Discrete ``int |D u|^r``."""
    if r < 1:
        raise ValueError("dirichlet exponent must be >= 1")
    g = gradient_magnitude(field)
    val = math.fsum(np.power(g, r).tolist()) * field.domain.weight
    return EnergyValue(val, int(np.count_nonzero(g)), {"energy": "dirichlet", "r": r})


def segment_double_energy(field, s, p, sigma, mu=0.0, K=64):
    """Segment energy of a 1D field.

    For every grid pair ``(x, y)`` the restriction of the field to ``[x, y]`` is
    sampled at ``K`` midpoints ``t_a`` (piecewise-geodesic interpolation
    between cell centres) and

        sum_{a != b} d(u(z_a), u(z_b))^p / |t_a - t_b|^(1 + sigma p) / K^2

    is weighted by ``|y - x|^-(1 + s p)``.  With ``mu > 0`` the inner kernel is
    ``(d / |t_a - t_b|^sigma - mu)_+^p / |t_a - t_b|``.  Cost is ``O(n^2 K^2)``.
    """
    _check(field)
    dom, space = field.domain, field.space
    if dom.m != 1:
        raise NotOneDimensional("segment energy needs a one-dimensional domain")
    if dom.kind is DomainKind.TORUS:
        raise NotConvexDomain("segments are not defined on the torus")
    if not 0 < sigma < s:
        raise BadSigma(f"sigma={sigma} must lie in (0, s={s})")
    n, h = dom.n, dom.h
    t = (np.arange(K) + 0.5) / K
    gap = np.abs(t[:, None] - t[None, :])
    off = ~np.eye(K, dtype=bool)
    gap_safe = np.where(off, gap, 1.0)
    if mu > 0:
        holder = np.where(off, gap_safe ** -sigma, 0.0)
        inner_w = np.where(off, 1.0 / gap_safe, 0.0) / K ** 2
    else:
        inner_w = np.where(off, gap_safe ** -(1 + sigma * p), 0.0) / K ** 2
    x = dom.points[:, 0]
    vals = field.values
    # piecewise-geodesic interpolation between cell centres
    steps = space.delta(vals[:-1], vals[1:])
    outer_exp = 1 + s * p
    row_sums = []
    for i in range(n - 1):
        y = x[i + 1:]
        z = (1 - t)[None, :] * x[i] + t[None, :] * y[:, None]
        pos = z / h - 0.5
        k = np.clip(np.floor(pos).astype(np.int64), 0, n - 2)
        theta = np.clip(pos - k, 0.0, 1.0)[..., None]
        g = vals[k] + theta * steps[k]
        if space.is_real:
            g0 = g[..., 0]
            D = np.abs(g0[:, :, None] - g0[:, None, :])
        else:
            D = space.distance(g[:, :, None, :], g[:, None, :, :])
        if mu > 0:
            inner = np.maximum(D * holder - mu, 0.0)
            inner = np.einsum("jab,ab->j", _pow(inner, p), inner_w)
        else:
            inner = np.einsum("jab,ab->j", _pow(D, p), inner_w)
        row_sums.append(math.fsum((inner / (y - x[i]) ** outer_exp).tolist()))
    val = 2.0 * math.fsum(row_sums) * h * h
    return EnergyValue(val, n * (n - 1),
                       {"energy": "segment", "s": s, "p": p, "sigma": sigma, "mu": mu, "K": K})
