"""Liftings through coverings: paths, grid fields, winding numbers, deck alignment."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order

from .covering import deck_apply, deck_between, local_lift, project, _as_elem
from .energy import Field, make_field
from .errors import HolonomyObstruction, ProjectionMismatch, StepTooLarge

__all__ = [
    "LiftResult", "NotRelated", "lift_path", "lift_field", "winding",
    "deck_align", "chain_rule_residual", "HOLONOMY_TOL",
]

HOLONOMY_TOL = 1e-9
ALIGN_TOL = 1e-9


@dataclass(frozen=True)
class LiftResult:
    lifted: Field
    seed_index: int
    seed_sheet: np.ndarray
    max_holonomy_residual: float
    parents: np.ndarray


@dataclass(frozen=True)
class NotRelated:
    """Two liftings that agree with no single deck transformation."""
    mismatch_fraction: float
    best_element: object = None


def _points(values, dim):
    v = np.asarray(values, dtype=float)
    return v.reshape(-1, dim)


def lift_path(values, cov, seed_sheet):
    """Nearest-sheet continuation of a sequence of base points."""
    u = cov.base.reduce(_points(values, cov.base.dim))
    steps = cov.base.distance(u[:-1], u[1:])
    bad = np.flatnonzero(steps >= cov.inj)
    if bad.size:
        k = int(bad[0])
        raise StepTooLarge(k, float(steps[k]), cov.inj)
    seed = np.asarray(seed_sheet, dtype=float).reshape(cov.total.dim)
    out = np.empty((len(u), cov.total.dim))
    out[0] = local_lift(cov, u[0], seed)
    for k in range(1, len(u)):
        out[k] = local_lift(cov, u[k], out[k - 1], strict=False)
    return out


def _tree(dom, pairs, seed):
    N = dom.size
    ones = np.ones(len(pairs) * 2)
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    graph = coo_matrix((ones, (rows, cols)), shape=(N, N)).tocsr()
    graph.sort_indices()
    order, pred = breadth_first_order(graph, seed, directed=False, return_predecessors=True)
    return order, pred


def _ancestors(pred, i):
    path = [int(i)]
    while pred[path[-1]] >= 0:
        path.append(int(pred[path[-1]]))
    return path


def _cycle_witness(pred, i, j):
    """Closed index path ``lca -> ... -> i -> j -> ... -> lca`` through the tree."""
    ai, aj = _ancestors(pred, i), _ancestors(pred, j)
    common = set(ai) & set(aj)
    ai_cut = []
    for v in ai:
        ai_cut.append(v)
        if v in common:
            break
    lca = ai_cut[-1]
    aj_cut = aj[: aj.index(lca)]
    return list(reversed(ai_cut)) + aj_cut + [lca]


def lift_field(field_base, cov, seed_index=0, seed_sheet=None):
    """Lift a base field along a breadth-first spanning tree of the grid graph.

    Every grid edge must have base distance below the injectivity radius.
    After propagation each edge is re-checked; a closure defect above
    ``HOLONOMY_TOL`` raises :class:`HolonomyObstruction` with a cycle witness.
    """
    dom = field_base.domain
    if field_base.space.dim != cov.base.dim:
        raise ProjectionMismatch(f"field in {field_base.space.name} cannot be lifted through {cov.id}")
    seed_index = dom.check_index(seed_index)
    u = cov.base.reduce(field_base.values)
    pairs, _ = dom.edges()
    steps = cov.base.distance(u[pairs[:, 0]], u[pairs[:, 1]])
    bad = np.flatnonzero(steps >= cov.inj)
    if bad.size:
        k = int(bad[0])
        raise StepTooLarge(tuple(int(v) for v in pairs[k]), float(steps[k]), cov.inj)

    if seed_sheet is None:
        seed_sheet = u[seed_index]
    seed_sheet = cov.total.reduce(np.asarray(seed_sheet, dtype=float).reshape(cov.total.dim))
    order, pred = _tree(dom, pairs, seed_index)

    lifted = np.empty((dom.size, cov.total.dim))
    lifted[seed_index] = local_lift(cov, u[seed_index], seed_sheet)
    # depth-by-depth propagation: every node of one BFS layer depends only on the previous one
    depth = np.zeros(dom.size, dtype=np.int64)
    for v in order[1:]:
        depth[v] = depth[pred[v]] + 1
    rest = order[1:]
    layers = np.split(rest, np.flatnonzero(np.diff(depth[rest])) + 1) if rest.size else []
    for layer in layers:
        lifted[layer] = local_lift(cov, u[layer], lifted[pred[layer]], strict=False)

    expected = local_lift(cov, u[pairs[:, 1]], lifted[pairs[:, 0]], strict=False)
    resid = cov.total.distance(expected, lifted[pairs[:, 1]])
    worst = float(resid.max()) if resid.size else 0.0
    if worst > HOLONOMY_TOL:
        k = int(np.flatnonzero(resid > HOLONOMY_TOL)[0])
        i, j = (int(v) for v in pairs[k])
        raise HolonomyObstruction(_cycle_witness(pred, i, j), float(resid[k]))
    lifted.flags.writeable = False
    out = Field(dom, cov.total, lifted)
    return LiftResult(out, seed_index, seed_sheet, worst, pred)


def winding(loop, circumference=2 * math.pi):
    """Degree of a closed loop of angles on a circle of the given circumference."""
    from .covering import CoveringChart, REAL_LINE, circle

    cov = CoveringChart("loop", "LineOverCircle", circle(circumference), REAL_LINE, 1)
    a = np.asarray(loop, dtype=float).ravel()
    if a.size == 0:
        return 0
    closed = np.append(a, a[0])
    lifted = lift_path(closed, cov, cov.base.reduce(a[:1]))
    turns = (lifted[-1, 0] - lifted[0, 0]) / circumference
    k = round(turns)
    if abs(turns - k) > 1e-6:
        raise ArithmeticError(f"loop does not close: {turns} turns")
    return int(k)


def _values(x):
    return x.values if isinstance(x, Field) else np.asarray(x, dtype=float)


def deck_align(lift_a, lift_b, cov):
    """Deck element ``tau`` with ``tau(lift_a) == lift_b`` everywhere, or :class:`NotRelated`."""
    a = _values(lift_a).reshape(-1, cov.total.dim)
    b = _values(lift_b).reshape(-1, cov.total.dim)
    if a.shape != b.shape:
        raise ProjectionMismatch("liftings live on different grids")
    if np.any(cov.base.distance(project(cov, a), project(cov, b)) > ALIGN_TOL):
        raise ProjectionMismatch("liftings do not project to the same field")
    elems = deck_between(cov, a, b)
    uniq, counts = np.unique(elems, axis=0, return_counts=True)
    tau = _as_elem(uniq[int(np.argmax(counts))])
    miss = cov.total.distance(deck_apply(cov, tau, a), b) > ALIGN_TOL
    if miss.any():
        return NotRelated(float(miss.mean()), tau)
    return tau


def chain_rule_residual(field_base, lift, cov):
    """Largest edge defect ``|d_total(lift_i, lift_j) - d_base(u_i, u_j)|``.

    Only edges whose base step is below the injectivity radius are compared.
    """
    lv = _values(lift).reshape(-1, cov.total.dim)
    u = cov.base.reduce(_values(field_base).reshape(-1, cov.base.dim))
    if np.any(cov.base.distance(project(cov, lv), u) > ALIGN_TOL):
        raise ProjectionMismatch("lift does not project to the field")
    dom = field_base.domain if isinstance(field_base, Field) else lift.domain
    pairs, _ = dom.edges()
    db = cov.base.distance(u[pairs[:, 0]], u[pairs[:, 1]])
    dt = cov.total.distance(lv[pairs[:, 0]], lv[pairs[:, 1]])
    keep = db < cov.inj
    return float(np.max(np.abs(dt - db)[keep], initial=0.0))


def project_field(field_total, cov):
    return make_field(field_total.domain, cov.base, project(cov, field_total.values))
