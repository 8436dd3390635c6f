import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liftlab.covering import get_covering
from liftlab.domain import make_domain
from liftlab.energy import make_field
from liftlab.errors import HolonomyObstruction, ProjectionMismatch, StepTooLarge
from liftlab.families import trig_mix, winding_ramp
from liftlab.lifting import (NotRelated, chain_rule_residual, deck_align, lift_field, lift_path,
                             project_field, winding)

TWO_PI = 2 * math.pi


@pytest.mark.parametrize("k", [-2, 1, 7])
@pytest.mark.parametrize("samples", [64, 128, 256])
def test_winding_numbers(k, samples):
    t = np.arange(samples) / samples
    assert winding(np.mod(TWO_PI * k * t + 0.3, TWO_PI)) == k


@settings(max_examples=30, deadline=None)
@given(st.integers(-6, 6), st.integers(0, 10_000))
def test_winding_with_wiggle(k, seed):
    t = np.arange(256) / 256
    wiggle = 0.4 * np.sin(TWO_PI * 3 * t + seed)
    assert winding(TWO_PI * k * t + wiggle) == k


def test_lift_path_recovers_ramp():
    cov = get_covering("r-over-s1")
    x = np.linspace(0, 20, 200)
    out = lift_path(cov.base.reduce(x[:, None]), cov, np.array([0.0]))
    np.testing.assert_allclose(out[:, 0], x, atol=1e-12)


def test_lift_path_rejects_large_steps():
    cov = get_covering("r-over-s1")
    with pytest.raises(StepTooLarge):
        lift_path(np.array([[0.0], [math.pi]]), cov, np.array([0.0]))


@pytest.mark.parametrize("cid", ["r-over-s1", "kfold:3"])
def test_lift_interval_and_chain_rule(cid):
    cov = get_covering(cid)
    dom = make_domain("interval", 1, 200)
    u = make_field(dom, cov.base, winding_ramp(dom, turns=2.5))
    res = lift_field(u, cov)
    assert chain_rule_residual(u, res.lifted, cov) <= 1e-12
    proj = project_field(res.lifted, cov)
    assert np.max(cov.base.distance(proj.values, u.values)) < 1e-12


def test_lift_cube_and_seed_change():
    cov = get_covering("r-over-s1")
    dom = make_domain("cube", 2, 32)
    u = make_field(dom, cov.base, 6 * trig_mix(dom, seed=4))
    a = lift_field(u, cov)
    b = lift_field(u, cov, seed_index=100, seed_sheet=np.array([u.values[100, 0] + 3 * TWO_PI]))
    assert chain_rule_residual(u, a.lifted, cov) <= 1e-12
    assert chain_rule_residual(u, b.lifted, cov) <= 1e-12
    tau = deck_align(a.lifted, b.lifted, cov)
    assert not isinstance(tau, NotRelated)


def test_plane_over_torus_lift():
    cov = get_covering("r2-over-t2")
    dom = make_domain("cube", 2, 16)
    vals = np.stack([3 * trig_mix(dom, seed=1), 3 * trig_mix(dom, seed=2)], axis=1)
    u = make_field(dom, cov.base, vals)
    res = lift_field(u, cov)
    assert chain_rule_residual(u, res.lifted, cov) <= 1e-12


def test_torus_winding_obstruction():
    cov = get_covering("r-over-s1")
    dom = make_domain("torus", 1, 64)
    u = make_field(dom, cov.base, winding_ramp(dom, turns=1))
    with pytest.raises(HolonomyObstruction) as info:
        lift_field(u, cov)
    rec = info.value.to_dict()
    assert rec["error"] == "HolonomyObstruction"
    cyc = rec["cycle"]
    assert cyc[0] == cyc[-1] and len(cyc) >= 3


def test_torus_without_winding_lifts():
    cov = get_covering("r-over-s1")
    dom = make_domain("torus", 2, 16)
    u = make_field(dom, cov.base, 2 * trig_mix(dom, seed=9))
    assert chain_rule_residual(u, lift_field(u, cov).lifted, cov) <= 1e-12


def test_deck_align_not_related_and_mismatch():
    cov = get_covering("r-over-s1")
    a = np.zeros((8, 1))
    b = a.copy()
    b[4:] += TWO_PI
    assert isinstance(deck_align(a, b, cov), NotRelated)
    with pytest.raises(ProjectionMismatch):
        deck_align(a, a + 0.5, cov)
    assert deck_align(a, a + 2 * TWO_PI, cov) == 2
