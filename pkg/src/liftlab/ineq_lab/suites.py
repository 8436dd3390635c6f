"""Verification suites.  Each returns a :class:`SuiteResult` of ratio reports."""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy.integrate import quad

from ..covering import REAL_LINE, circle, get_covering
from ..decompose import mollify, phi_energy, split_sum_space, sum_membership_functional, sum_objective
from ..domain import make_domain
from ..energy import (gagliardo, gap_energy, large_osc_energy, make_field,
                      segment_double_energy, truncated, x_energy)
from ..errors import (BadEta, ExponentConditionViolated, ExponentOutOfRange, NotConvexDomain)
from ..families import generate, power_singularity, trig_mix
from ..lifting import lift_field
from . import counterexample as cex
from .report import SuiteResult, exact, explicit, stability

TWO_PI = 2 * math.pi


def fractional_constant(s, sigma, p):
    """Sharp constant of the segment (fractional integration) inequality."""
    a = 2 * (s - sigma) * p + 1
    return 8.0 / (a * a - 1)


def gap_constant(q, gamma, lam0, lam1):
    qp = max(q - 1, 0.0)
    return 2.0 ** max(gamma - 1 - qp, 0.0) * (lam1 / lam0) ** (qp - gamma + 1)


def s_flat(s, p, m):
    """Reduced smoothness exponent, evaluated in exact rational arithmetic."""
    S, P, M = (Fraction(str(v)) for v in (s, p, m))
    return float(S - (1 - S) * (M / (S * P) - 1))


def s_star_large_osc(s, p, p_star, m):
    return 1.0 - m * (1.0 / (s * p) - 1.0 / p_star)


def _fmt(v):
    return f"{v:g}"


# ---------------------------------------------------------------- fractional integration

def run_fractional_integration(cfg):
    sid = "fractional_integration"
    dom = make_domain("interval", 1, cfg["n"])
    reports, consts = [], {}
    for s, sigma, p in cfg["triples"]:
        C = fractional_constant(s, sigma, p)
        tag = f"s{_fmt(s)}-sigma{_fmt(sigma)}-p{_fmt(p)}"
        worst = 0.0
        for i in range(cfg["fields"]):
            f = make_field(dom, REAL_LINE, trig_mix(dom, seed=cfg["seed"] + i))
            lhs = segment_double_energy(f, s, p, sigma, K=cfg["K"]).value
            rhs = gagliardo(f, s, p).value
            r = explicit(sid, f"{tag}/trig{i:02d}", lhs, rhs, C, cfg["slack"], s=s, p=p, sigma=sigma)
            worst = max(worst, r.ratio)
            reports.append(r)
        f0 = make_field(dom, REAL_LINE, np.zeros(dom.size))
        reports.append(explicit(sid, f"{tag}/constant", segment_double_energy(f0, s, p, sigma, K=cfg["K"]).value,
                                gagliardo(f0, s, p).value, C, cfg["slack"], s=s, p=p, sigma=sigma))
        consts[tag] = {"bound_constant": C, "max_ratio": worst}
    return SuiteResult(sid, reports, consts)


# ---------------------------------------------------------------- gap scaling

def run_gap_scaling(cfg):
    sid = "gap_scaling"
    if cfg["domain"] == "torus":
        raise NotConvexDomain("gap scaling needs a convex domain")
    doms = [make_domain(cfg["domain"], 1, cfg["n"]), make_domain(cfg["domain"], 2, cfg["n2d"])]
    reports, consts = [], {}
    for q, gamma, lam0, lam1 in cfg["cases"]:
        if not lam0 < lam1:
            raise ValueError("gap scaling needs lambda0 < lambda1")
        C = gap_constant(q, gamma, lam0, lam1)
        tag = f"q{_fmt(q)}-g{_fmt(gamma)}-l{_fmt(lam0)}-{_fmt(lam1)}"
        worst = 0.0
        for dom in doms:
            for fam in ("ramp_steps", "trig"):
                for k in range(cfg["fields"]):
                    f = generate(fam, dom, seed=cfg["seed"] + k)
                    lhs = gap_energy(f, lam1, q, gamma).value
                    rhs = gap_energy(f, lam0, q, gamma).value
                    r = explicit(sid, f"{tag}/m{dom.m}-{fam}{k}", lhs, rhs, C, cfg["slack"], q=q,
                                 gamma=gamma, lambda0=lam0, lambda1=lam1)
                    worst = max(worst, r.ratio)
                    reports.append(r)
        consts[tag] = {"bound_constant": C, "max_ratio": worst}
    f = generate("trig", doms[0], seed=cfg["seed"], amplitude=0.1)
    big = 10.0 * float(np.ptp(f.scalar())) + 1.0
    reports.append(explicit(sid, "above-oscillation", gap_energy(f, 2 * big, 1.0, 1.5).value,
                            gap_energy(f, big, 1.0, 1.5).value, gap_constant(1.0, 1.5, big, 2 * big),
                            cfg["slack"], q=1.0))
    return SuiteResult(sid, reports, consts)


# ---------------------------------------------------------------- truncated powers

def truncated_power_constant(q0, q1, eta, t_max, points=400):
    """Smallest ``C`` with ``(t-1)^q1 <= C int_eta^t (t-r)^q0 / r^(1+q0-q1) dr`` on a t-grid."""
    if not 0 < eta < 1:
        raise BadEta(f"eta={eta} must lie in (0, 1)")
    best = 0.0
    for t in np.linspace(1.0, t_max, points)[1:]:
        lhs = (t - 1) ** q1
        rhs = quad(lambda r: (t - r) ** q0 / r ** (1 + q0 - q1), eta, t, limit=200)[0]
        best = max(best, lhs / rhs)
    return best


def run_truncated_powers(cfg):
    sid = "truncated_powers"
    reports, consts = [], {}
    for q0, q1, eta in cfg["cases"]:
        tag = f"q0{_fmt(q0)}-q1{_fmt(q1)}-eta{_fmt(eta)}"
        c1 = truncated_power_constant(q0, q1, eta, cfg["t_max"])
        c2 = truncated_power_constant(q0, q1, eta, 2 * cfg["t_max"])
        reports.append(stability(sid, tag, c2, c1, q=q1, q0=q0, eta=eta, t_max=cfg["t_max"]))
        consts[tag] = {"C": c1, "C_doubled_range": c2}
    return SuiteResult(sid, reports, consts)


# ---------------------------------------------------------------- exponent equivalence

def _equivalence_family(dom, seed):
    fields = [generate("winding", dom, turns=t) for t in (0.5, 1, 2, 4)]
    fields += [generate("trig", dom, seed=seed + k, amplitude=a) for k, a in enumerate((1.0, 5.0, 20.0))]
    return fields


def run_exponent_equivalence(cfg):
    sid = "exponent_equivalence"
    s, p = cfg["s"], cfg["p"]
    reports, consts = [], {}
    for q0, q1 in cfg["pairs"]:
        if not max(q0, q1, 1.0) < s * p:
            raise ExponentOutOfRange(f"need q0, q1, 1 < s p = {s * p:g}; got q0={q0}, q1={q1}")
        tag = f"q0{_fmt(q0)}-q1{_fmt(q1)}"
        cs = []
        for n in (cfg["n"], 2 * cfg["n"]):
            dom = make_domain("interval", 1, n)
            ratios = []
            for k, f in enumerate(_equivalence_family(dom, cfg["seed"])):
                a, b = truncated(f, s, p, q0).value, truncated(f, s, p, q1).value
                ratios.append(a / b if b > 0 else 0.0)
                if q0 <= q1 and n == cfg["n"]:
                    reports.append(exact(sid, f"{tag}/field{k}", a, b, s=s, p=p, q=q0, q1=q1))
            cs.append(max(ratios))
        if q0 > q1:
            reports.append(stability(sid, f"{tag}/family", cs[1], cs[0], s=s, p=p, q=q0, q1=q1))
        consts[tag] = {"C": cs[0], "C_doubled": cs[1]}
    return SuiteResult(sid, reports, consts)


# ---------------------------------------------------------------- lifting estimates

def _lifting_constant(cov, n, ts, s, p, seed):
    dom = make_domain("interval", 1, n)
    x = dom.points[:, 0]
    ratios = {}
    for t in ts:
        phi = t * np.sin(TWO_PI * x)
        u = make_field(dom, cov.base, phi)
        lift = lift_field(u, cov).lifted
        ratios[t] = truncated(lift, s, p, 0).value / gagliardo(u, s, p).value
    return max(ratios.values()), ratios


def run_lifting_estimates(cfg):
    sid = "lifting_estimates"
    s, p = cfg["s"], cfg["p"]
    if s * p <= 1:
        raise ExponentConditionViolated(f"s p = {s * p:g} must exceed 1")
    reports, consts, base = [], {}, {}
    for cid in cfg["coverings"]:
        cov = get_covering(cid)
        c1, r1 = _lifting_constant(cov, cfg["n"], cfg["t"], s, p, cfg["seed"])
        c2, r2 = _lifting_constant(cov, 2 * cfg["n"], cfg["t"], s, p, cfg["seed"])
        reports.append(stability(sid, f"{cid}/t-sin", c2, c1, s=s, p=p, q=0.0, covering=cid))
        consts[cid] = {"C": c1, "C_doubled": c2,
                       "per_t": {_fmt(t): [r1[t], r2[t]] for t in cfg["t"]}}
        base[cid] = c1

        dom = make_domain("interval", 1, cfg["n"])
        u0 = make_field(dom, cov.base, np.full(dom.size, 1.0))
        lift0 = lift_field(u0, cov).lifted
        reports.append(exact(sid, f"{cid}/constant", truncated(lift0, s, p, 0).value,
                             gagliardo(u0, s, p).value, s=s, p=p, q=0.0))

        # membership of the lifting space, through the X-energy
        x = dom.points[:, 0]
        u = make_field(dom, cov.base, 8 * np.sin(TWO_PI * x))
        lift = lift_field(u, cov).lifted
        xe = x_energy(lift, cov).value
        half = cov.inj / 2
        for q in cfg["x_q"]:
            lhs = xe * min(half ** p, half ** q)
            reports.append(explicit(sid, f"{cid}/x-energy-q{_fmt(q)}", lhs, truncated(lift, s, p, q).value,
                                    dom.diameter ** (s * p - 1), 1e-12, s=s, p=p, q=q))
    if len(base) >= 2:
        vals = list(base.values())
        reports.append(stability(sid, "cross-covering", max(vals), min(vals), s=s, p=p, q=0.0,
                                 band=2.0, coverings=list(base)))
    return SuiteResult(sid, reports, consts)


# ---------------------------------------------------------------- nonlinear exponent

def _nonlinear_series(n, s, p, ts):
    dom = make_domain("torus", 1, n)
    x = dom.points[:, 0]
    phi = np.sin(TWO_PI * x) + 0.3 * np.cos(2 * TWO_PI * x)
    X, Y = [], []
    for t in ts:
        Y.append(gagliardo(make_field(dom, REAL_LINE, t * phi), s, p).value)
        X.append(gagliardo(make_field(dom, circle(), t * phi), s, p).value)
    return np.array(X), np.array(Y)


def fit_slope(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def run_nonlinear_exponent(cfg):
    sid = "nonlinear_exponent"
    s, p, m = cfg["s"], cfg["p"], 1
    if not (s * p >= m and s * p > 1):
        raise ExponentConditionViolated(f"need s p >= m and s p > 1, got s p = {s * p:g}")
    ts = [2.0 ** k for k in range(cfg["t_exp_max"] + 1)]
    X, Y = _nonlinear_series(cfg["n"], s, p, ts)
    Xc, Yc = _nonlinear_series(cfg["n"] // 2, s, p, ts)
    half = len(ts) // 2
    slope = fit_slope(X[half:], Y[half:])
    target = 1.0 / s
    reports = [explicit(sid, "slope", abs(slope - target), target, cfg["slope_tol"], 0.0,
                        s=s, p=p, slope=slope, target=target)]
    C = float(np.max(Y / (X + X ** (1 / s))))
    Cc = float(np.max(Yc / (Xc + Xc ** (1 / s))))
    reports.append(stability(sid, "bound-constant", C, Cc, s=s, p=p))
    dom = make_domain("torus", 1, 64)
    z = np.zeros(dom.size)
    reports.append(exact(sid, "constant", gagliardo(make_field(dom, REAL_LINE, z), s, p).value,
                         gagliardo(make_field(dom, circle(), z), s, p).value, s=s, p=p))
    consts = {"slope": slope, "target": target, "C": C, "C_half_resolution": Cc}
    series = {"lift energy vs base energy": list(zip(X.tolist(), Y.tolist()))}
    return SuiteResult(sid, reports, consts, series)


# ---------------------------------------------------------------- large scale

def run_large_scale(cfg):
    sid = "large_scale"
    rng = np.random.default_rng(cfg["seed"])
    reports, consts = [], {}

    # (a) Minkowski inequality for mean oscillations
    dom = make_domain("interval", 1, cfg["minkowski_n"])
    for c in range(cfg["minkowski_cases"]):
        k = 1 + c % 4
        p = float(rng.choice([1.0, 2.0, 3.5]))
        f = make_field(dom, circle(), 3 * trig_mix(dom, seed=cfg["seed"] + c))
        v = f.values
        sets = [rng.choice(dom.size, size=int(rng.integers(3, 20)), replace=False) for _ in range(k + 1)]

        def mean_osc(A, B):
            d = f.space.distance(v[A][:, None, :], v[B][None, :, :])
            return float(np.mean(d ** p)) ** (1 / p)

        lhs = mean_osc(sets[0], sets[k])
        rhs = math.fsum(mean_osc(sets[j], sets[j + 1]) for j in range(k))
        reports.append(exact(sid, f"minkowski/{c:02d}-k{k}", lhs, rhs, p=p, k=k))

    # (b) truncated Morrey inequality on an interval
    s, p = cfg["morrey_s"], cfg["morrey_p"]
    if s * p <= 1:
        raise ExponentConditionViolated("truncated Morrey needs s p > 1")
    pairs = rng.uniform(0, 1, size=(cfg["morrey_pairs"], 2))
    cm = {}
    for mu in cfg["morrey_mu"]:
        cs = []
        for n in (cfg["morrey_n"], 2 * cfg["morrey_n"]):
            cs.append(_morrey_constant(n, s, p, mu, pairs))
        reports.append(stability(sid, f"morrey/mu{_fmt(mu)}", cs[1], cs[0], s=s, p=p, mu=mu))
        cm[_fmt(mu)] = cs
    consts["morrey"] = cm

    # (c) large-oscillation estimate for lifted windings
    s, p, ps = cfg["osc_s"], cfg["osc_p"], cfg["osc_p_star"]
    ss = s_star_large_osc(s, p, ps, 1)
    if not (s * p > 1 and 0 < ss < 1):
        raise ExponentConditionViolated(f"large-oscillation exponents invalid: s*={ss:g}")
    cov = get_covering("r-over-s1")
    delta = cov.inj / 2
    cs = []
    for n in (cfg["osc_n"], 2 * cfg["osc_n"]):
        dom = make_domain("interval", 1, n)
        ratios = []
        for turns in cfg["osc_turns"]:
            u = generate("winding", dom, space=cov.base, turns=turns)
            lift = lift_field(u, cov).lifted
            lhs = large_osc_energy(lift, delta, ss, ps).value
            base = gagliardo(u, s, p).value
            ratios.append(lhs / (delta ** (-(1 - s) * p) * base) ** (ps / (s * p)))
        cs.append(max(ratios))
    reports.append(stability(sid, "large-oscillation/winding", cs[1], cs[0], s=s, p=p, s_star=ss, p_star=ps))
    consts["large_oscillation"] = {"s_star": ss, "C": cs[0], "C_doubled": cs[1]}

    # (d) segment integration with an explicit constant
    dom = make_domain("interval", 1, cfg["seg_n"])
    for gamma in cfg["seg_gamma"]:
        for k in range(cfg["seg_fields"]):
            g = trig_mix(dom, seed=cfg["seed"] + 100 + k)
            F = (g[:, None] - g[None, :]) ** 2 + g[:, None] ** 2
            lhs, rhs = _segment_integration(dom, F, gamma, cfg["seg_K"])
            C = 2 * dom.diameter ** (dom.m + gamma) / (dom.m + gamma)
            reports.append(explicit(sid, f"segment-integration/g{_fmt(gamma)}-f{k}", lhs, rhs, C,
                                    cfg["slack"], gamma=gamma))
    return SuiteResult(sid, reports, consts)


def _morrey_constant(n, s, p, mu, pairs):
    dom = make_domain("interval", 1, n)
    x = dom.points[:, 0]
    u = make_field(dom, circle(), 4 * np.sin(TWO_PI * x) + 2 * np.cos(3 * TWO_PI * x))
    v = u.values
    h = dom.h
    best = 0.0
    for a, b in pairs:
        i, j = sorted((min(int(a * n), n - 1), min(int(b * n), n - 1)))
        if i == j:
            continue
        idx = np.arange(i, j + 1)
        d = u.space.distance(v[idx][:, None, :], v[idx][None, :, :])
        gap = np.abs(x[idx][:, None] - x[idx][None, :])
        off = gap > 0
        q = np.where(off, d / np.where(off, gap, 1.0) ** s - mu, 0.0)
        inner = np.sum(np.where(off, np.maximum(q, 0.0) ** p / np.where(off, gap, 1.0), 0.0)) * h * h
        L = x[j] - x[i]
        rhs = inner ** (1 / p) * L ** (s - 1 / p) + mu * L ** s
        lhs = float(u.space.distance(v[i], v[j]))
        if rhs > 0:
            best = max(best, lhs / rhs)
        elif lhs > 0:
            return math.inf
    return best


def _segment_integration(dom, F, gamma, K):
    """Both sides of the segment-integration inequality for a kernel matrix ``F`` on a 1D grid."""
    n, h = dom.n, dom.h
    x = dom.points[:, 0]
    t = (np.arange(K) + 0.5) / K
    rows = []
    for i in range(n):
        y = x
        z = (1 - t)[None, :] * x[i] + t[None, :] * y[:, None]
        idx = np.clip(np.floor(z / h).astype(np.int64), 0, n - 1)
        inner = F[idx[:, :, None], idx[:, None, :]].sum(axis=(1, 2)) / K ** 2
        L = np.abs(y - x[i])
        seg = inner * L ** 2  # arc-length measure on the segment, squared
        w = np.where(L > 0, np.where(L > 0, L, 1.0) ** (gamma - 1) * seg, 0.0)
        rows.append(math.fsum(w.tolist()))
    lhs = math.fsum(rows) * h * h
    rhs = math.fsum(F.ravel().tolist()) * h * h
    return lhs, rhs


# ---------------------------------------------------------------- counterexample

def run_counterexample(cfg):
    sid = "counterexample"
    q, m, J = cfg["q"], cfg["m"], cfg["J"]
    lam0 = math.exp(cfg["log_lambda0"])
    if not 1 <= q < m:
        raise ExponentOutOfRange(f"need 1 <= q < m, got q={q}, m={m}")
    if lam0 <= 2:
        raise ExponentOutOfRange("lambda0 must exceed 2")
    res = cex.bump_terms(lam0, q, J, m=m, n=cfg["n"])
    g, osc = res["grad_term"], res["osc_term"]
    reports = []
    summable = math.log(lam0 - 1) / math.log(2)
    for k in range(J):
        j = k + 1
        reports.append(explicit(sid, f"gradient/j{j}", g[k] * j * j, g[0], cfg["grad_factor"], 0.0, q=q, j=j))
    for k in range(J):
        j = k + 1
        reports.append(explicit(sid, f"gradient-summable/j{j}", g[k] * j * j, g[0], summable, 1e-12, q=q, j=j))
    for k in range(J):
        j = k + 1
        diff = abs(res["grad_term_scaled"][k] - g[k])
        reports.append(explicit(sid, f"gradient-scaling/j{j}", diff, g[k], 1e-9, 0.0, q=q, j=j))
    for k in range(J):
        j = k + 1
        reports.append(explicit(sid, f"oscillation/j{j}", cfg["osc_factor"] * osc[0], osc[k], 1.0, 0.0, q=q, j=j))
    table = {
        "columns": ["j", "lambda", "rho", "grad_term", "grad_partial_sum", "osc_term", "osc_partial_sum"],
        "rows": [[int(res["j"][k]), float(res["lambda"][k]), float(res["rho"][k]), float(g[k]),
                  float(np.sum(g[:k + 1])), float(osc[k]), float(np.sum(osc[:k + 1]))] for k in range(J)],
    }
    consts = {"grad_integral": res["grad_integral"], "summable_bound": summable}
    series = {"gradient partial sums": [(float(j), float(v)) for j, v in zip(res["j"], np.cumsum(g))],
              "oscillation partial sums": [(float(j), float(v)) for j, v in zip(res["j"], np.cumsum(osc))]}
    return SuiteResult(sid, reports, consts, series, {"series": table})


# ---------------------------------------------------------------- supercritical

def _supercritical_constant(n, s, p, sf, ts):
    cov = get_covering("r-over-s1")
    dom = make_domain("torus", 2, n)
    x = dom.points
    phi = np.sin(TWO_PI * x[:, 0]) + 0.5 * np.cos(TWO_PI * (x[:, 0] + x[:, 1]))
    best = 0.0
    for t in ts:
        u = make_field(dom, cov.base, t * phi)
        lift = lift_field(u, cov).lifted
        E = gagliardo(u, s, p).value
        best = max(best, gagliardo(lift, sf, p).value / (E + E ** (1 / s)))
    return best


def membership_threshold(s_grid, energies):
    """Locate where the refinement log-slope of ``E_{2n} - E_n`` changes sign.

    ``energies`` maps resolution to an array over ``s_grid``; the two finest
    increments give the slope.  Returns ``(threshold, slopes)``.
    """
    ns = sorted(energies)
    inc_a = energies[ns[-2]] - energies[ns[-3]]
    inc_b = energies[ns[-1]] - energies[ns[-2]]
    slopes = np.log2(inc_b / inc_a)
    for k in range(len(s_grid) - 1):
        if slopes[k] < 0 <= slopes[k + 1]:
            a, b = slopes[k], slopes[k + 1]
            return float(s_grid[k] + (s_grid[k + 1] - s_grid[k]) * (-a) / (b - a)), slopes
    return math.nan, slopes


def run_supercritical(cfg):
    sid = "supercritical"
    s, p, m = cfg["s"], cfg["p"], cfg["m"]
    if not 1 - s < s * p / m < 1:
        raise ExponentConditionViolated(f"need 1 - s < s p / m < 1, got s={s}, p={p}, m={m}")
    sf = s_flat(s, p, m)
    reports = [exact(sid, "s-flat-below-s", sf, s, s=s, p=p, s_flat=sf)]
    c1 = _supercritical_constant(cfg["n"], s, p, sf, cfg["t"])
    c2 = _supercritical_constant(2 * cfg["n"], s, p, sf, cfg["t"])
    reports.append(stability(sid, "lifted-family", c2, c1, s=s, p=p, s_flat=sf))

    alpha = cfg["alpha"]
    if not (alpha + 1) * s * p < m:
        raise ExponentConditionViolated(f"alpha={alpha} violates (alpha + 1) s p < m")
    s_grid = np.round(np.arange(cfg["s_star_min"], cfg["s_star_max"] + 1e-9, cfg["s_star_step"]), 10)
    energies = {}
    for n in cfg["resolutions"]:
        dom = make_domain("cube", m, n)
        f = make_field(dom, REAL_LINE, power_singularity(dom, alpha))
        energies[n] = np.array([gagliardo(f, ss, p).value for ss in s_grid])
    thr, slopes = membership_threshold(s_grid, energies)
    predicted = m / p - alpha
    reports.append(explicit(sid, "threshold", abs(thr - sf) if math.isfinite(thr) else math.inf, 1.0,
                            cfg["threshold_band"], 0.0, s=s, p=p, threshold=thr, s_flat=sf,
                            alpha=alpha, predicted=predicted))
    consts = {"s_flat": sf, "C": c1, "C_doubled": c2, "threshold": thr,
              "predicted_threshold": predicted, "alpha": alpha,
              "refinement_slopes": dict(zip((_fmt(v) for v in s_grid), slopes.tolist()))}
    series = {f"n={n}": list(zip(s_grid.tolist(), energies[n].tolist())) for n in cfg["resolutions"]}
    return SuiteResult(sid, reports, consts, series)


# ---------------------------------------------------------------- small lemmas

def coarsen(f, k, p, q):
    """Piecewise-constant approximation on ``k^m`` cells.

    Each cell takes the sample value minimizing the mean truncated kernel
    ``d^p ^ d^q`` to the other samples of the cell.
    """
    dom = f.domain
    if dom.n % k:
        raise ValueError(f"grid size {dom.n} not divisible by {k}")
    b = dom.n // k
    idx = np.arange(dom.size).reshape(dom.shape)
    out = np.empty_like(f.values)
    v = f.values
    cells = [idx[i * b:(i + 1) * b] for i in range(k)] if dom.m == 1 else \
        [idx[i * b:(i + 1) * b, j * b:(j + 1) * b] for i in range(k) for j in range(k)]
    for cell in cells:
        c = cell.ravel()
        d = f.space.distance(v[c][:, None, :], v[c][None, :, :])
        cost = np.sum(np.minimum(d ** p, d ** q), axis=0)
        out[c] = v[c[int(np.argmin(cost))]]
    return f.with_values(out)


def run_small_lemmas(cfg):
    sid = "small_lemmas"
    rng = np.random.default_rng(cfg["seed"])
    reports = []

    def pqab(a, p, q):
        S = float(np.sum(a))
        ell = len(a)
        return min(S ** p, S ** q), max(min((ell * x) ** p, (ell * x) ** q) for x in a)

    lhs, rhs = pqab([1.0], 2.0, 1.0)
    reports.append(exact(sid, "pqab/ell1", lhs, rhs, p=2.0, q=1.0))
    lhs, rhs = pqab([1.0, 1.0, 1.0], 2.0, 1.0)
    reports.append(exact(sid, "pqab/ones3", lhs, rhs, p=2.0, q=1.0))
    for c in range(cfg["pqab_cases"]):
        ell = int(rng.integers(1, 7))
        a = np.exp(rng.normal(0, 2, size=ell))
        p, q = rng.uniform(0, 4, size=2)
        lhs, rhs = pqab(a, p, q)
        reports.append(exact(sid, f"pqab/{c:04d}", lhs, rhs, p=p, q=q, ell=ell))

    for c in range(cfg["holder_cases"]):
        m = 1 + c % 2
        dom = make_domain("cube", m, 64 if m == 1 else 16, side=float(rng.uniform(0.5, 3.0)))
        space = circle() if c % 3 == 0 else REAL_LINE
        f = make_field(dom, space, 3 * trig_mix(dom, seed=cfg["seed"] + c))
        g = make_field(dom, space, 3 * trig_mix(dom, seed=cfg["seed"] + 1000 + c))
        p = float(rng.uniform(0.3, 4.0))
        q = float(rng.uniform(0, p))
        d = space.distance(f.values, g.values)
        w = dom.weight
        lhs = math.fsum((d / (1 + d)).tolist()) * w
        mass = dom.size * w
        inner = math.fsum(np.minimum(d ** p, d ** q).tolist()) * w
        rhs = mass ** max(1 - 1 / p, 0.0) * inner ** min(1 / p, 1.0)
        reports.append(explicit(sid, f"measure-holder/{c:02d}", lhs, rhs, 1.0, 1e-9, p=p, q=q))

    s, p, q = cfg["coarsen_s"], cfg["coarsen_p"], cfg["coarsen_q"]
    dom = make_domain("cube", 2, cfg["coarsen_n"])
    f = make_field(dom, REAL_LINE, 2 * trig_mix(dom, seed=cfg["seed"]))
    E = truncated(f, s, p, q).value
    errs = {}
    for k in cfg["coarsen_k"]:
        fk = coarsen(f, k, p, q)
        d = np.abs(f.scalar() - fk.scalar())
        lhs = math.fsum(np.minimum(d ** p, d ** q).tolist()) * dom.weight
        C = dom.m ** ((dom.m + s * p) / 2) / k ** (s * p)
        errs[str(k)] = lhs
        reports.append(explicit(sid, f"coarsening/k{k}", lhs, E, C, cfg["slack"], s=s, p=p, q=q, k=k))
    return SuiteResult(sid, reports, {"coarsening_error": errs})


# ---------------------------------------------------------------- sum space

def _sum_space_family(dom, count, seed):
    out = []
    for k in range(count):
        if k % 2 == 0:
            out.append(generate("two_scale", dom, seed=seed + k))
        else:
            out.append(generate("trig", dom, seed=seed + k))
    return out


def run_sum_space(cfg):
    sid = "sum_space"
    s, p, q = cfg["s"], cfg["p"], cfg["q"]
    reports, consts = [], {}
    bands = []
    for n in (cfg["n"], 2 * cfg["n"]):
        dom = make_domain("interval", 1, n)
        up, down = [], []
        for k, f in enumerate(_sum_space_family(dom, cfg["fields"], cfg["seed"])):
            res = split_sum_space(f, s, p, refine_steps=cfg["refine_steps"])
            zero = f.with_values(np.zeros(dom.size))
            trivial = min(sum_objective(f, zero, s, p), sum_objective(zero, f, s, p))
            if n == cfg["n"]:
                reports.append(exact(sid, f"split/{k:02d}", res.objective, trivial, s=s, p=p,
                                     tol=cfg["split_tol"], scale=res.scale_chosen))
            T = sum_membership_functional(f, s, p, q)
            up.append(T / res.objective)
            down.append(res.objective / T)
        bands.append((max(up), max(down)))
    reports.append(stability(sid, "band/membership-over-split", bands[1][0], bands[0][0], s=s, p=p, q=q))
    reports.append(stability(sid, "band/split-over-membership", bands[1][1], bands[0][1], s=s, p=p, q=q))
    consts["band"] = {"n": list(bands[0]), "2n": list(bands[1])}

    # convex-profile energy does not grow under mollification (periodic grids)
    dom = make_domain("torus", 1, cfg["n"])
    for k in range(cfg["phi_cases"]):
        f = generate("trig", dom, seed=cfg["seed"] + 500 + k, amplitude=3.0)
        scale = 0.02 * (k + 1)
        reports.append(explicit(sid, f"phi-contraction/{k}", phi_energy(mollify(f, scale), s, p),
                                phi_energy(f, s, p), 1.0, 1e-9, s=s, p=p, scale=scale))
    return SuiteResult(sid, reports, consts)


SUITES = {
    "fractional_integration": (run_fractional_integration, {
        "n": 128, "K": 64, "fields": 10, "triples": [[0.5, 0.3, 2.0], [0.75, 0.5, 2.0], [0.6, 0.2, 3.0]]}),
    "gap_scaling": (run_gap_scaling, {
        "n": 256, "n2d": 24, "domain": "interval", "fields": 2,
        "cases": [[1.0, 1.5, 0.5, 1.0], [2.0, 1.2, 0.3, 0.9], [0.5, 0.8, 0.2, 0.6], [0.0, 0.3, 0.2, 0.5],
                  [3.0, 2.5, 0.1, 0.4]]}),
    "truncated_powers": (run_truncated_powers, {
        "t_max": 10.0, "cases": [[1.0, 1.0, 0.5], [0.5, 2.0, 0.25], [0.0, 0.0, 0.5], [2.0, 0.5, 0.1],
                                 [0.0, 1.5, 0.5]]}),
    "exponent_equivalence": (run_exponent_equivalence, {
        "n": 256, "s": 0.75, "p": 2.0, "pairs": [[0.5, 1.25], [1.25, 1.25], [1.25, 0.5], [0.0, 1.25], [1.25, 0.0]]}),
    "lifting_estimates": (run_lifting_estimates, {
        "n": 128, "s": 0.75, "p": 2.0, "t": [1.0, 4.0, 16.0], "coverings": ["r-over-s1", "kfold:3"],
        "x_q": [0.0, 1.0]}),
    "nonlinear_exponent": (run_nonlinear_exponent, {
        "n": 4096, "s": 0.75, "p": 2.0, "t_exp_max": 8, "slope_tol": 0.1}),
    "large_scale": (run_large_scale, {
        "minkowski_n": 64, "minkowski_cases": 20,
        "morrey_n": 256, "morrey_s": 0.75, "morrey_p": 2.0, "morrey_pairs": 30, "morrey_mu": [0.0, 0.5, 2.0, 8.0],
        "osc_n": 256, "osc_s": 0.8, "osc_p": 2.0, "osc_p_star": 4.0, "osc_turns": [1.0, 2.0, 4.0],
        "seg_n": 48, "seg_K": 24, "seg_gamma": [-0.5, 0.5, 1.0, 2.0], "seg_fields": 2}),
    "counterexample": (run_counterexample, {
        "n": 256, "m": 2, "q": 1.5, "log_lambda0": 4.0, "J": 4, "grad_factor": 2.0, "osc_factor": 0.5}),
    "supercritical": (run_supercritical, {
        "n": 32, "s": 0.8, "p": 2.0, "m": 2, "t": [1.0, 2.0, 4.0], "alpha": 0.24,
        "s_star_min": 0.66, "s_star_max": 0.86, "s_star_step": 0.02, "resolutions": [32, 64, 128],
        "threshold_band": 0.05}),
    "small_lemmas": (run_small_lemmas, {
        "pqab_cases": 1000, "holder_cases": 20, "coarsen_n": 32, "coarsen_k": [2, 4, 8],
        "coarsen_s": 0.5, "coarsen_p": 2.0, "coarsen_q": 1.0}),
    "sum_space": (run_sum_space, {
        "n": 128, "s": 0.5, "p": 3.0, "q": 1.0, "fields": 20, "refine_steps": 200, "split_tol": 1e-12,
        "phi_cases": 5}),
}

COMMON_DEFAULTS = {"seed": 0, "slack": 0.05}


def suite_ids():
    return list(SUITES)


def suite_config(suite_id, overrides=None):
    fn, defaults = SUITES[suite_id]
    cfg = dict(COMMON_DEFAULTS)
    cfg.update(defaults)
    cfg.update(overrides or {})
    return cfg


def run_suite(suite_id, overrides=None):
    if suite_id not in SUITES:
        raise KeyError(f"unknown suite {suite_id!r}")
    fn, _ = SUITES[suite_id]
    res = fn(suite_config(suite_id, overrides))
    res.reports = sorted(res.reports, key=lambda r: r.case_id)
    return res
