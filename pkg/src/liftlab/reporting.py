"""CSV and JSON serialization with atomic writes."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from enum import Enum

import numpy as np

CSV_COLUMNS = ("suite_id", "case_id", "s", "p", "q", "lhs", "rhs", "bound_constant", "ratio", "mode", "pass")


def atomic_write(path, data):
    """Write ``data`` (str or bytes) to ``path`` through a temp file and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    payload = data.encode("utf-8") if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt_float(x):
    """Shortest round-tripping decimal; ``nan``/``inf``/``-inf`` for non-finite values."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


def reports_csv(reports):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        row = r.row()
        w.writerow([_cell(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def table_csv(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def jsonable(obj):
    """Plain JSON types; non-finite floats become ``null``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def dumps(obj):
    return json.dumps(jsonable(obj), indent=2, allow_nan=False) + "\n"


def write_json(path, obj):
    atomic_write(path, dumps(obj))


def write_reports(path, reports):
    atomic_write(path, reports_csv(reports))


def suite_summary(result):
    reports = result.reports
    return {
        "cases": len(reports),
        "passed": sum(r.passed for r in reports),
        "failed": [r.case_id for r in reports if not r.passed],
        "constants": result.constants,
    }


def field_csv(field):
    """Index columns (one per axis), then one column per value component."""
    dom = field.domain
    idx = np.stack(np.unravel_index(np.arange(dom.size), dom.shape), axis=1)
    cols = [f"i{k}" for k in range(dom.m)] + [f"v{k}" for k in range(field.values.shape[1])]
    rows = [[*map(int, i), *map(float, v)] for i, v in zip(idx, field.values)]
    return table_csv(cols, rows)


def read_field_csv(path):
    """Return ``(index array (N, m), values (N, k))`` sorted into C order."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty field file")
    header, body = rows[0], rows[1:]
    m = sum(1 for h in header if h.startswith("i"))
    if m == 0 or m == len(header):
        raise ValueError(f"{path}: need index columns i0.. followed by value columns v0..")
    arr = np.array(body, dtype=float).reshape(len(body), len(header))
    return arr[:, :m].astype(np.int64), arr[:, m:]
