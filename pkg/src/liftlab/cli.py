"""Command-line experiment runner.

Exit status: 0 when every checked case passes, 2 on a mathematical failure
or module error (a JSON error record is written), 3 on I/O errors.
"""
from __future__ import annotations

import argparse
import inspect
import json
import os
import sys
import time

import numpy as np

from . import energy as en
from .config import ExperimentConfig, load_config, with_overrides
from .covering import REAL_LINE, REAL_PLANE, get_covering
from .decompose import split_sum_space, sum_membership_functional, sum_objective
from .domain import make_domain
from .errors import EmptyField, LiftlabError
from .families import FAMILIES, generate
from .ineq_lab.suites import run_suite, suite_config, suite_ids
from .lifting import chain_rule_residual, lift_field
from .plotting import emit_plot
from .reporting import field_csv, read_field_csv, reports_csv, suite_summary, table_csv, atomic_write, dumps

EXIT_OK, EXIT_FAIL, EXIT_IO = 0, 2, 3


class MathFailure(Exception):
    """Raised internally when a job ran but some case did not pass."""


# ---------------------------------------------------------------- inputs

def _space(cfg, dim=1):
    if cfg.target == "real":
        return REAL_LINE if dim == 1 else REAL_PLANE
    cov = get_covering(cfg.covering)
    return cov.base if cfg.target == "base" else cov.total


def build_field(cfg, target=None):
    if target is not None:
        cfg = with_overrides(cfg, target=target)
    dom = make_domain(cfg.domain, cfg.m, cfg.n, cfg.side)
    if cfg.field:
        idx, vals = read_field_csv(cfg.field)
        if idx.shape[1] != dom.m or len(idx) != dom.size:
            raise EmptyField(f"{cfg.field}: {len(idx)} rows of rank {idx.shape[1]} do not fit the "
                             f"{cfg.domain} grid of shape {dom.shape}")
        order = np.ravel_multi_index(tuple(idx.T), dom.shape)
        out = np.empty_like(vals)
        out[order] = vals
        return en.make_field(dom, _space(cfg, vals.shape[1]), out)
    if cfg.family not in FAMILIES:
        raise EmptyField(f"unknown field family {cfg.family!r}")
    params = dict(cfg.params)
    if "seed" in inspect.signature(FAMILIES[cfg.family]).parameters:
        params.setdefault("seed", cfg.seed)
    return generate(cfg.family, dom, space=_space(cfg), **params)


# ---------------------------------------------------------------- jobs

def job_energy(cfg, out):
    name = cfg.energy
    if name == "x_energy":
        f = build_field(cfg, target="total")
        val = en.x_energy(f, get_covering(cfg.covering))
    else:
        f = build_field(cfg)
        val = {
            "gagliardo": lambda: en.gagliardo(f, cfg.s, cfg.p),
            "truncated": lambda: en.truncated(f, cfg.s, cfg.p, cfg.q),
            "gap": lambda: en.gap_energy(f, cfg.lam, cfg.q, cfg.gamma),
            "dirichlet": lambda: en.dirichlet(f, cfg.r),
            "segment": lambda: en.segment_double_energy(f, cfg.s, cfg.p, cfg.sigma, K=cfg.K),
            "large_osc": lambda: en.large_osc_energy(f, cfg.delta, cfg.s_star, cfg.p_star),
        }[name]()
    summary = {"status": "ok", "job": "energy", "energy": name,
               "value": val.value, "pair_count": val.pair_count, "params": val.params}
    return summary, {"energy.json": dumps(summary)}


def job_lift(cfg, out):
    cov = get_covering(cfg.covering)
    f = build_field(cfg, target="base")
    res = lift_field(f, cov)
    summary = {"status": "ok", "job": "lift", "covering": cfg.covering,
               "seed_index": res.seed_index, "seed_sheet": res.seed_sheet,
               "max_holonomy_residual": res.max_holonomy_residual,
               "chain_rule_residual": chain_rule_residual(f, res.lifted, cov)}
    return summary, {"lift.json": dumps(summary), "lifted.csv": field_csv(res.lifted)}


def job_decompose(cfg, out):
    f = build_field(cfg)
    res = split_sum_space(f, cfg.s, cfg.p)
    zero = f.with_values(np.zeros_like(f.values))
    summary = {"status": "ok", "job": "decompose", "objective": res.objective,
               "scale": res.scale_chosen, "refine_iterations": res.refine_iterations,
               "trivial_all_in_g": sum_objective(f, zero, cfg.s, cfg.p),
               "trivial_all_in_h": sum_objective(zero, f, cfg.s, cfg.p)}
    if 0 < cfg.q < cfg.s * cfg.p:
        summary["membership_functional"] = sum_membership_functional(f, cfg.s, cfg.p, cfg.q)
    return summary, {"decompose.json": dumps(summary), "g.csv": field_csv(res.g), "h.csv": field_csv(res.h)}


def _suite_overrides(cfg, sid):
    known = suite_config(sid)
    over = {}
    for key in ("seed", "slack", "n"):
        if key in cfg.explicit and key in known:
            over[key] = getattr(cfg, key)
    over.update(cfg.suites.get(sid, {}))
    return over


def run_suites(cfg, ids):
    """Run suites in order; returns ``(files, summary, timings, all_passed)``."""
    reports, files = [], {}
    summary = {"status": "ok", "job": "verify", "seed": cfg.seed, "suites": {}}
    timings = {}
    ok = True
    for sid in ids:
        t0 = time.perf_counter()
        try:
            res = run_suite(sid, _suite_overrides(cfg, sid))
        except LiftlabError as exc:
            summary["suites"][sid] = {"error": exc.to_dict()}
            summary["status"] = "error"
            ok = False
            timings[sid] = time.perf_counter() - t0
            continue
        timings[sid] = time.perf_counter() - t0
        reports.extend(res.reports)
        summary["suites"][sid] = suite_summary(res)
        ok = ok and res.passed
        for name, table in res.tables.items():
            files[f"tables/{sid}_{name}.csv"] = table_csv(table["columns"], table["rows"])
        if res.series:
            files[f"plots/{sid}.svg"] = res.series
    summary["cases"] = len(reports)
    summary["passed"] = sum(r.passed for r in reports)
    summary["all_passed"] = ok
    files["reports.csv"] = reports_csv(reports)
    files["summary.json"] = dumps(summary)
    return files, summary, timings, ok


def job_verify(cfg, out, suite):
    ids = suite_ids() if suite == "all" else [suite]
    for sid in ids:
        if sid not in suite_ids():
            raise KeyError(sid)
    files, summary, timings, ok = run_suites(cfg, ids)
    files["timings.json"] = dumps({"seconds": timings, "threads": cfg.threads})
    return summary, files, ok


# ---------------------------------------------------------------- driver

def _write(out, files):
    for rel, content in files.items():
        path = os.path.join(out, rel)
        if rel.endswith(".svg"):
            emit_plot(content, path, title=os.path.splitext(os.path.basename(rel))[0])
        else:
            atomic_write(path, content)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML experiment configuration")
    common.add_argument("--out", help="output directory (default: out)")
    common.add_argument("--n", type=int, help="grid points per axis")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--covering", help='covering id: "r-over-s1", "kfold:<k>", "r2-over-t2"')
    common.add_argument("--threads", type=int, help="worker threads for pair sums")
    common.add_argument("--field", help="input field CSV (index columns, then value columns)")
    common.add_argument("--family", help="generated field family when no --field is given")

    ap = argparse.ArgumentParser(prog="liftlab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("energy", parents=[common], help="evaluate an energy of a field")
    sub.add_parser("lift", parents=[common], help="lift a field through a covering")
    sub.add_parser("decompose", parents=[common], help="split a field into a sum of two fields")
    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("suite", help=f"suite id or 'all' ({', '.join(suite_ids())})")
    sub.add_parser("counterexample", parents=[common], help="bump-sequence divergence study")
    return ap


def _error(out, exc):
    record = {"status": "error", **exc.to_dict()}
    text = dumps(record)
    sys.stdout.write(text)
    try:
        atomic_write(os.path.join(out, "summary.json"), text)
    except OSError as io_exc:
        print(f"liftlab: cannot write error record: {io_exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_FAIL


def main(argv=None):
    args = build_parser().parse_args(argv)
    out = args.out or "out"
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        out = args.out or cfg.out
        cfg = with_overrides(cfg, n=args.n, seed=args.seed, covering=args.covering,
                             threads=args.threads, field=args.field, family=args.family)
        en.set_workers(cfg.threads)
        ok = True
        if args.command == "verify":
            summary, files, ok = job_verify(cfg, out, args.suite)
        elif args.command == "counterexample":
            summary, files, ok = job_verify(cfg, out, "counterexample")
        else:
            job = {"energy": job_energy, "lift": job_lift, "decompose": job_decompose}[args.command]
            summary, files = job(cfg, out)
        _write(out, files)
    except LiftlabError as exc:
        return _error(out, exc)
    except KeyError as exc:
        print(f"liftlab: unknown suite {exc.args[0]!r}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"liftlab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    brief = {k: summary[k] for k in ("status", "job", "value", "cases", "passed", "all_passed") if k in summary}
    sys.stdout.write(json.dumps(brief) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
