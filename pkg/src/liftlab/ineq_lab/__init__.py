"""Inequality verification harness."""
from .report import Mode, RatioReport, SuiteResult, exact, explicit, stability
from .suites import SUITES, run_suite, suite_config, suite_ids

__all__ = ["Mode", "RatioReport", "SuiteResult", "exact", "explicit", "stability",
           "SUITES", "run_suite", "suite_config", "suite_ids"]
