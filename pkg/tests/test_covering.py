import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from liftlab.covering import (REAL_LINE, circle, deck_apply, deck_compose, deck_identity, flat_torus,
                              get_covering, local_lift, project)
from liftlab.errors import AmbiguousLift, InvalidDeckElement, UnknownCovering

TWO_PI = 2 * math.pi
angles = st.floats(-50, 50, allow_nan=False)


def test_circle_distance_is_arc_length():
    c = circle()
    assert c.distance(np.array([0.1]), np.array([TWO_PI - 0.1]))[()] == pytest.approx(0.2)
    assert c.injectivity_radius == pytest.approx(math.pi)


@given(angles, angles, angles)
def test_circle_metric_axioms(a, b, c):
    S = circle()
    d = lambda x, y: float(S.distance(np.array([x]), np.array([y])))
    assert d(a, b) == pytest.approx(d(b, a), abs=1e-12)
    assert 0 <= d(a, b) <= math.pi + 1e-12
    assert d(a, c) <= d(a, b) + d(b, c) + 1e-9


def test_flat_torus_distance():
    T = flat_torus()
    d = T.distance(np.array([0.1, 0.1]), np.array([TWO_PI - 0.1, 0.4]))
    assert float(d) == pytest.approx(math.hypot(0.2, 0.3))


@pytest.mark.parametrize("cid,family", [("r-over-s1", "LineOverCircle"), ("kfold:3", "KFoldCircle"),
                                        ("r2-over-t2", "PlaneOverTorus")])
def test_registry(cid, family):
    cov = get_covering(cid)
    assert cov.family == family and cov.id == cid


@pytest.mark.parametrize("bad", ["s1", "kfold:x", "kfold:0"])
def test_unknown_covering(bad):
    with pytest.raises(UnknownCovering):
        get_covering(bad)


def test_kfold_deck_action():
    cov = get_covering("kfold:3")
    assert float(deck_apply(cov, 2, np.array([1.0]))[0]) == pytest.approx(1.0 + 4 * math.pi)
    assert float(deck_apply(cov, 2, np.array([3 * math.pi]))[0]) == pytest.approx(math.pi)
    assert deck_compose(cov, 2, 2) == 1
    with pytest.raises(InvalidDeckElement):
        deck_apply(cov, 3, np.array([0.0]))


@given(angles, st.integers(-5, 5))
def test_deck_preserves_projection(x, k):
    cov = get_covering("r-over-s1")
    y = deck_apply(cov, k, np.array([x]))
    assert float(cov.base.distance(project(cov, y), project(cov, np.array([x])))) < 1e-9


@given(angles, st.floats(-3.0, 3.0))
def test_local_lift_is_nearest_preimage(ref, step):
    cov = get_covering("r-over-s1")
    base = cov.base.reduce(np.array([ref + step]))
    lifted = local_lift(cov, base, np.array([ref]))
    assert float(lifted[0]) == pytest.approx(ref + step, abs=1e-9)


def test_local_lift_ambiguous_at_antipode():
    cov = get_covering("r-over-s1")
    with pytest.raises(AmbiguousLift):
        local_lift(cov, np.array([math.pi]), np.array([0.0]))


def test_plane_deck_group():
    cov = get_covering("r2-over-t2")
    assert deck_identity(cov) == (0, 0)
    p = deck_apply(cov, (1, -2), np.array([0.5, 0.5]))
    np.testing.assert_allclose(p, [0.5 + TWO_PI, 0.5 - 2 * TWO_PI])
    assert REAL_LINE.is_real
