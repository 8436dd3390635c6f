"""Per-bump evaluation of the critical-dimension counterexample.

The profile ``psi`` equals ``x_1`` on the ball of radius 1/2 and vanishes
outside radius 0.9.  Bump ``j`` is ``lambda_j psi((x - a_j)/rho_j)`` with
``lambda_j = lambda_0 2^(j^2)`` and
``rho_j = (lambda_j^q ln(lambda_j/2 - 1))^(-1/(m - q))``.  By scaling, bump
``j`` contributes

* ``lambda_j^q rho_j^(m-q) int |D psi|^q = int |D psi|^q / ln(lambda_j/2 - 1)``
  to the gradient energy, and
* ``rho_j^(m-q) I(lambda_j)`` to the large-oscillation energy, where
  ``I(lam)`` integrates ``|lam dpsi|^q / |y-x|^(m+q)`` over unit-ball pairs
  with ``|lam dpsi| >= 1``.

``I`` is split at a radius ``eps``: lattice pairs farther apart are summed
directly; closer pairs use the linearization ``dpsi ~ D psi(x).(y - x)``,
whose polar integral is closed-form in the radius.
"""
from __future__ import annotations

import math

import numba
import numpy as np

R_FLAT, R_CUT = 0.5, 0.9


def _f(t):
    return np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)


def _step(t):
    """Smooth step: 0 for ``t <= 0``, 1 for ``t >= 1``; returns value and derivative."""
    a, b = _f(t), _f(1 - t)
    da = np.where(t > 0, a / np.where(t > 0, t, 1.0) ** 2, 0.0)
    db = np.where(1 - t > 0, b / np.where(1 - t > 0, 1 - t, 1.0) ** 2, 0.0)
    den = a + b
    return a / den, (da * b + a * db) / den ** 2


def psi(x):
    """Profile and its gradient at points ``x`` of shape ``(N, 2)``."""
    r = np.sqrt(np.sum(x * x, axis=1))
    w = R_CUT - R_FLAT
    chi, dstep = _step((R_CUT - r) / w)
    dchi = -dstep / w
    rs = np.where(r > 0, r, 1.0)
    val = x[:, 0] * chi
    g0 = chi + x[:, 0] * x[:, 0] * dchi / rs
    g1 = x[:, 0] * x[:, 1] * dchi / rs
    return val, np.stack([g0, g1], axis=1)


@numba.njit(cache=True)
def _far_sums(px, py, val, eps2, q, thresholds):
    """Row sums of ``|dpsi|^q / d^(2+q)`` over pairs ``j > i`` with ``d >= eps``,
    split by which thresholds ``|dpsi| >= thr_k`` hold."""
    n = px.shape[0]
    K = thresholds.shape[0]
    out = np.zeros((n, K))
    half = 0.5 * (2.0 + q)
    for i in range(n):
        for j in range(i + 1, n):
            dx = px[j] - px[i]
            dy = py[j] - py[i]
            d2 = dx * dx + dy * dy
            if d2 < eps2:
                continue
            dv = abs(val[j] - val[i])
            if dv < thresholds[K - 1]:
                continue
            if q == 1.5:
                num = dv * math.sqrt(dv)
                den = d2 * d2 / math.sqrt(math.sqrt(d2))
            else:
                num = dv ** q
                den = d2 ** half
            w = num / den
            for k in range(K):
                if dv >= thresholds[k]:
                    out[i, k] += w
    return out


def _angular(A, q, n_theta=4096):
    """``int_0^{2pi} |cos t|^q ln(A |cos t|)_+ dt`` for each entry of ``A``."""
    th = (np.arange(n_theta) + 0.5) * (2 * math.pi / n_theta)
    c = np.abs(np.cos(th))
    out = np.empty(len(A))
    for i, a in enumerate(A):
        if a <= 1:
            out[i] = 0.0
            continue
        out[i] = np.sum(c ** q * np.log(np.maximum(a * c, 1.0))) * (2 * math.pi / n_theta)
    return out


def reference_grid(n):
    h = 2.0 / n
    ax = -1.0 + (np.arange(n) + 0.5) * h
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    pts = pts[np.sum(pts * pts, axis=1) < 1.0]
    return pts, h


def gradient_integral(q, n=256):
    pts, h = reference_grid(n)
    _, g = psi(pts)
    return math.fsum((np.linalg.norm(g, axis=1) ** q).tolist()) * h * h


def oscillation_integrals(lams, q, n=256, eps_cells=4.0):
    """``I(lam)`` for each ``lam`` on the ``n x n`` reference grid of the unit disk."""
    lams = np.asarray(lams, dtype=float)
    pts, h = reference_grid(n)
    val, g = psi(pts)
    eps = eps_cells * h
    order = np.argsort(-lams)  # thresholds ascending
    thr = 1.0 / lams[order]
    rows = _far_sums(pts[:, 0].copy(), pts[:, 1].copy(), val, eps * eps, float(q), thr)
    far_sorted = np.array([math.fsum(rows[:, k].tolist()) for k in range(len(thr))])
    far = np.empty(len(lams))
    far[order] = far_sorted
    far = 2.0 * far * h ** 4 * lams ** q
    gn = np.linalg.norm(g, axis=1)
    near = np.empty(len(lams))
    for k, lam in enumerate(lams):
        ang = _angular(eps * lam * gn, q)
        near[k] = math.fsum((lam ** q * gn ** q * ang).tolist()) * h * h
    return far + near, far, near


def bump_terms(lam0, q, J, m=2, n=256):
    """Gradient and large-oscillation contributions of bumps ``j = 1..J``."""
    if not 1 <= q < m:
        from ..errors import ExponentOutOfRange
        raise ExponentOutOfRange(f"need 1 <= q < m, got q={q}, m={m}")
    js = np.arange(1, J + 1)
    log_lams = math.log(lam0) + js.astype(float) ** 2 * math.log(2.0)
    lams = np.exp(log_lams)
    # ln(lambda/2 - 1) evaluated without forming lambda/2 - 1 for huge lambda
    log_half_minus = np.array([ll - math.log(2.0) + math.log1p(-2.0 / math.exp(ll)) for ll in log_lams])
    log_ln = np.log(log_half_minus)
    log_rho = -(q * log_lams + log_ln) / (m - q)
    dpsi_q = gradient_integral(q, n)
    grad_scaled = np.exp(q * log_lams + (m - q) * log_rho) * dpsi_q
    grad_closed = dpsi_q / np.log(lam0 * 2.0 ** (js.astype(float) ** 2 - 1) - 1.0)
    I, far, near = oscillation_integrals(lams, q, n)
    osc = np.exp((m - q) * log_rho) * I
    return {
        "j": js, "lambda": lams, "rho": np.exp(log_rho), "grad_integral": dpsi_q,
        "grad_term": grad_closed, "grad_term_scaled": grad_scaled, "osc_term": osc,
        "I": I, "I_far": far, "I_near": near,
    }
