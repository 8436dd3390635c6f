"""Ratio reports: one checked inequality per row."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

EXACT_TOL = 1e-12
STABILITY_BAND = 1.2


class Mode(str, Enum):
    EXACT = "EXACT"
    EXPLICIT_CONSTANT = "EXPLICIT_CONSTANT"
    EMPIRICAL_STABILITY = "EMPIRICAL_STABILITY"


@dataclass(frozen=True)
class RatioReport:
    suite_id: str
    case_id: str
    s: float
    p: float
    q: float
    lhs: float
    rhs: float
    bound_constant: float
    ratio: float
    mode: Mode
    passed: bool
    params: dict = field(default_factory=dict)

    def row(self):
        return {
            "suite_id": self.suite_id, "case_id": self.case_id,
            "s": self.s, "p": self.p, "q": self.q,
            "lhs": self.lhs, "rhs": self.rhs, "bound_constant": self.bound_constant,
            "ratio": self.ratio, "mode": self.mode.value, "pass": self.passed,
        }


def _ratio(lhs, rhs):
    if rhs > 0:
        return lhs / rhs
    return 0.0 if lhs == 0 else math.inf


def _nan(x):
    return math.nan if x is None else float(x)


def exact(suite, case, lhs, rhs, s=None, p=None, q=None, tol=EXACT_TOL, **params):
    """Literal finite-sum inequality ``lhs <= rhs``."""
    lhs, rhs = float(lhs), float(rhs)
    ok = lhs <= rhs * (1 + tol)
    return RatioReport(suite, case, _nan(s), _nan(p), _nan(q), lhs, rhs, 1.0,
                       _ratio(lhs, rhs), Mode.EXACT, bool(ok), dict(params, tol=tol))


def explicit(suite, case, lhs, rhs, constant, slack, s=None, p=None, q=None, **params):
    """``lhs <= constant * rhs * (1 + slack)``; ``ratio`` is ``lhs / rhs``."""
    lhs, rhs, constant = float(lhs), float(rhs), float(constant)
    ok = lhs <= constant * rhs * (1 + slack)
    return RatioReport(suite, case, _nan(s), _nan(p), _nan(q), lhs, rhs, constant,
                       _ratio(lhs, rhs), Mode.EXPLICIT_CONSTANT, bool(ok), dict(params, slack=slack))


def stability(suite, case, fine, coarse, s=None, p=None, q=None, band=STABILITY_BAND, **params):
    """Empirical constant at doubled resolution (``fine``) against the base one (``coarse``)."""
    fine, coarse = float(fine), float(coarse)
    r = _ratio(fine, coarse)
    ok = math.isfinite(fine) and math.isfinite(coarse) and r < band
    return RatioReport(suite, case, _nan(s), _nan(p), _nan(q), fine, coarse, math.nan,
                       r, Mode.EMPIRICAL_STABILITY, bool(ok), dict(params, band=band))


@dataclass
class SuiteResult:
    suite_id: str
    reports: list
    constants: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(r.passed for r in self.reports)
