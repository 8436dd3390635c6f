import pytest

from liftlab.config import parse_config, with_overrides
from liftlab.errors import ParseError, RangeError, SchemaError


def test_minimal_energy_job_gets_defaults():
    cfg = parse_config('job = "energy"\n')
    assert cfg.job == "energy"
    assert cfg.n == 256
    assert cfg.slack == 0.05
    assert cfg.explicit == {"job"}


def test_s_out_of_range():
    with pytest.raises(RangeError) as info:
        parse_config("s = 1.5\n")
    assert info.value.key == "s"


def test_unknown_key():
    with pytest.raises(SchemaError) as info:
        parse_config("foo = 1\n")
    assert info.value.key == "foo"


def test_bad_toml_reports_line():
    with pytest.raises(ParseError, match="line 2"):
        parse_config('job = "energy"\nn = \n')


@pytest.mark.parametrize("text,key", [("n = 1", "n"), ("p = 0.5", "p"), ('domain = "sphere"', "domain"),
                                      ("threads = 0", "threads"), ('n = "many"', "n")])
def test_range_errors(text, key):
    with pytest.raises(RangeError) as info:
        parse_config(text)
    assert info.value.key == key


def test_integer_promoted_to_float():
    assert parse_config("p = 3").p == 3.0


def test_suite_overrides_are_checked():
    cfg = parse_config("[suites.gap_scaling]\nn = 128\n")
    assert cfg.suites == {"gap_scaling": {"n": 128}}
    with pytest.raises(SchemaError) as info:
        parse_config("[suites.gap_scaling]\nbogus = 1\n")
    assert info.value.key == "suites.gap_scaling.bogus"
    with pytest.raises(SchemaError):
        parse_config("[suites.nope]\nn = 1\n")


def test_family_params_table():
    cfg = parse_config('family = "winding"\n[params]\nturns = 2.0\n')
    assert cfg.params == {"turns": 2.0}


def test_overrides_validate():
    cfg = parse_config("")
    assert with_overrides(cfg, n=64, seed=None).n == 64
    with pytest.raises(RangeError):
        with_overrides(cfg, n=0)
