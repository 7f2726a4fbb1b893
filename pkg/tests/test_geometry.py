import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entropic import geometry

SQUARE = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)


def test_area_and_centroid():
    assert geometry.area(SQUARE) == 1.0
    assert np.allclose(geometry.centroid(SQUARE), [0.5, 0.5])
    assert geometry.is_convex_ccw(SQUARE)
    assert not geometry.is_convex_ccw(SQUARE[::-1])


def test_clip_halfplane_keeps_side():
    half = geometry.clip_halfplane(SQUARE, np.array([1.0, 0.0]), 0.25)
    assert geometry.area(half) == pytest.approx(0.75)
    assert np.all(half[:, 0] >= 0.25 - 1e-15)
    assert len(geometry.clip_halfplane(SQUARE, np.array([1.0, 0.0]), 2.0)) == 0


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 2))
def test_clip_areas_complement(a, b, c):
    n = np.array([a, b])
    if np.linalg.norm(n) < 1e-3:
        return
    p = geometry.clip_halfplane(SQUARE, n, c)
    q = geometry.clip_halfplane(SQUARE, -n, -c)
    assert geometry.area(p) + geometry.area(q) == pytest.approx(1.0, abs=1e-12)


def test_contains_buffer():
    pts = np.array([[0.5, 0.5], [0.0005, 0.5], [1.0005, 0.5]])
    assert list(geometry.contains(SQUARE, pts)) == [True, True, False]
    assert list(geometry.contains(SQUARE, pts, buffer=1e-3)) == [True, False, False]
    assert list(geometry.contains(SQUARE, pts, buffer=-1e-3)) == [True, True, True]


def test_clip_convex():
    tri = np.array([[0.5, -1], [2, 0.5], [0.5, 2]])
    piece = geometry.clip_convex(SQUARE, tri)
    inside = np.random.default_rng(0).random((20000, 2))
    frac = np.mean(geometry.contains(tri, inside))
    assert geometry.area(piece) == pytest.approx(frac, abs=0.02)


def test_segment_distance():
    d = geometry.segment_distance([[0.5, 1.0], [2.0, 0.0]], np.array([[0.0, 0.0]]), np.array([[1.0, 0.0]]))
    assert np.allclose(d, [1.0, 1.0])
