import json
import math
import os

import numpy as np
import pytest

from liftlab.cli import main
from liftlab.errors import EmptySeries
from liftlab.plotting import emit_plot, fitted_slope
from liftlab.reporting import CSV_COLUMNS, atomic_write, dumps


def _run(tmp_path, *args):
    out = tmp_path / "out"
    code = main([*args, "--out", str(out)])
    return code, out


def test_energy_of_constant_field(tmp_path):
    code, out = _run(tmp_path, "energy", "--family", "constant", "--n", "32")
    assert code == 0
    rec = json.loads((out / "energy.json").read_text())
    assert rec["value"] == 0.0


def test_energy_from_field_csv(tmp_path):
    path = tmp_path / "f.csv"
    rows = ["i0,v0"] + [f"{i},{(i + 0.5) / 8}" for i in reversed(range(8))]
    path.write_text("\n".join(rows) + "\n")
    code, out = _run(tmp_path, "energy", "--field", str(path), "--n", "8")
    assert code == 0
    assert json.loads((out / "energy.json").read_text())["value"] == pytest.approx(1 - 1 / 8, rel=1e-12)


def test_lift_winding_torus_exits_two_with_cycle(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('domain = "torus"\nm = 1\nn = 64\nfamily = "winding"\n[params]\nturns = 1.0\n')
    code, out = _run(tmp_path, "lift", "--config", str(cfg))
    assert code == 2
    rec = json.loads((out / "summary.json").read_text())
    assert rec["error"] == "HolonomyObstruction"
    assert rec["cycle"][0] == rec["cycle"][-1]


def test_lift_writes_field_csv(tmp_path):
    code, out = _run(tmp_path, "lift", "--family", "winding", "--n", "32", "--covering", "kfold:3")
    assert code == 0
    lines = (out / "lifted.csv").read_text().splitlines()
    assert lines[0] == "i0,v0" and len(lines) == 33
    assert json.loads((out / "lift.json").read_text())["chain_rule_residual"] <= 1e-12


def test_decompose(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('family = "two_scale"\nn = 32\ns = 0.5\np = 3.0\n')
    code, out = _run(tmp_path, "decompose", "--config", str(cfg))
    assert code == 0
    rec = json.loads((out / "decompose.json").read_text())
    assert rec["objective"] <= min(rec["trivial_all_in_g"], rec["trivial_all_in_h"]) * (1 + 1e-12)
    assert (out / "g.csv").exists() and (out / "h.csv").exists()


@pytest.mark.parametrize("text,kind,key", [("s = 1.5", "RangeError", "s"), ("foo = 1", "SchemaError", "foo"),
                                           ("x = [", "ParseError", None)])
def test_config_errors_exit_two(tmp_path, text, kind, key):
    cfg = tmp_path / "c.toml"
    cfg.write_text(text)
    code, out = _run(tmp_path, "energy", "--config", str(cfg))
    assert code == 2
    rec = json.loads((out / "summary.json").read_text())
    assert rec["error"] == kind and rec.get("key") == key


def test_missing_config_is_io_error(tmp_path):
    code, _ = _run(tmp_path, "energy", "--config", str(tmp_path / "missing.toml"))
    assert code == 3


def test_unwritable_output_is_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["energy", "--family", "constant", "--n", "8", "--out", str(blocker / "sub")]) == 3


def test_verify_writes_reports_and_plots(tmp_path):
    code, out = _run(tmp_path, "verify", "truncated_powers")
    assert code == 0
    lines = (out / "reports.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 6
    summary = json.loads((out / "summary.json").read_text())
    assert summary["suites"]["truncated_powers"]["passed"] == 5
    assert "seconds" in json.loads((out / "timings.json").read_text())


def test_verify_is_repeatable(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert main(["verify", "gap_scaling", "--out", str(a), "--threads", "1"]) == 0
    assert main(["verify", "gap_scaling", "--out", str(b), "--threads", "3"]) == 0
    for name in ("reports.csv", "summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_atomic_write_leaves_no_temp(tmp_path):
    atomic_write(tmp_path / "x.json", dumps({"a": math.nan, "b": np.float64(1.5)}))
    assert json.loads((tmp_path / "x.json").read_text()) == {"a": None, "b": 1.5}
    assert os.listdir(tmp_path) == ["x.json"]


def test_plot_secant_and_errors(tmp_path):
    slopes = emit_plot({"two": [(1, 1), (4, 8)]}, tmp_path / "p.svg")
    assert slopes["two"] == pytest.approx(1.5)
    text = (tmp_path / "p.svg").read_text()
    assert text.startswith("<?xml") and "<svg" in text
    with pytest.raises(EmptySeries):
        emit_plot({}, tmp_path / "q.svg")
    with pytest.raises(EmptySeries):
        emit_plot({"one": [(1, 1)]}, tmp_path / "q.svg")


def test_plot_is_byte_stable(tmp_path):
    series = {"a": [(1, 2), (2, 5), (4, 11)], "b": [(1, 1), (2, 2), (4, 4)]}
    emit_plot(series, tmp_path / "1.svg")
    emit_plot(series, tmp_path / "2.svg")
    assert (tmp_path / "1.svg").read_bytes() == (tmp_path / "2.svg").read_bytes()
    assert fitted_slope(series["b"]) == pytest.approx(1.0)
