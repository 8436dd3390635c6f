import numpy as np
import pytest

from liftlab.domain import DomainKind, geodesic_distance, line_sections, make_domain
from liftlab.errors import IndexOutOfRange, InvalidDimension, InvalidResolution


def test_interval_points_are_cell_centres():
    dom = make_domain("interval", 1, 4)
    assert dom.kind is DomainKind.INTERVAL
    np.testing.assert_allclose(dom.points[:, 0], [0.125, 0.375, 0.625, 0.875])
    assert dom.weight == pytest.approx(0.25)


def test_cube_size_and_weights_sum_to_volume():
    dom = make_domain("cube", 2, 8, side=2.0)
    assert dom.size == 64
    assert dom.weights.sum() == pytest.approx(4.0)


@pytest.mark.parametrize("kind,diam", [("interval", 1.0), ("cube", np.sqrt(2)), ("torus", 0.5 * np.sqrt(2))])
def test_diameter(kind, diam):
    m = 1 if kind == "interval" else 2
    assert make_domain(kind, m, 8).diameter == pytest.approx(diam)


def test_torus_distance_wraps():
    dom = make_domain("torus", 1, 8)
    assert geodesic_distance(dom, 0, 7) == pytest.approx(1 / 8)
    open_dom = make_domain("interval", 1, 8)
    assert geodesic_distance(open_dom, 0, 7) == pytest.approx(7 / 8)


def test_convexity():
    assert make_domain("cube", 2, 4).is_convex
    assert not make_domain("torus", 2, 4).is_convex


def test_edges_include_wraps_only_on_torus():
    pairs, _ = make_domain("interval", 1, 5).edges()
    assert len(pairs) == 4
    pairs, _ = make_domain("torus", 1, 5).edges()
    assert len(pairs) == 5
    pairs, _ = make_domain("torus", 2, 4).edges()
    assert len(pairs) == 32


def test_line_sections_cover_grid():
    dom = make_domain("cube", 2, 6)
    lines = line_sections(dom, 1)
    flat = np.sort(np.concatenate([np.asarray(l).ravel() for l in lines]))
    np.testing.assert_array_equal(flat, np.arange(dom.size))


@pytest.mark.parametrize("args,exc", [
    (("cube", 3, 4), InvalidDimension),
    (("interval", 1, 1), InvalidResolution),
    (("torus", 0, 4), InvalidDimension),
])
def test_invalid_domains(args, exc):
    with pytest.raises(exc):
        make_domain(*args)


def test_index_checks():
    dom = make_domain("interval", 1, 4)
    with pytest.raises(IndexOutOfRange):
        dom.check_index(4)
