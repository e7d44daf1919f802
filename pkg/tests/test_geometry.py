import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from geometry_checks import check_hull_2d, random_points
from stochpa.geometry import (ValuePolytope, contains, convex_hull_2d, convex_hull_3d_halfspaces,
                              to_halfspaces_2d)

SQUARE = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)


def test_square_with_center():
    hull = convex_hull_2d(np.vstack([SQUARE, [[0.5, 0.5]]]))
    assert {tuple(p) for p in hull} == {tuple(p) for p in SQUARE}


def test_hull_is_counterclockwise():
    hull = convex_hull_2d(SQUARE[::-1])
    e1, e2 = hull[1] - hull[0], hull[2] - hull[1]
    assert e1[0] * e2[1] - e1[1] * e2[0] > 0


def test_collinear_and_single():
    hull = convex_hull_2d([[0, 0], [1, 1], [2, 2]])
    assert {tuple(p) for p in hull} == {(0.0, 0.0), (2.0, 2.0)}
    assert np.array_equal(convex_hull_2d([[0.3, 0.7]]), [[0.3, 0.7]])


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        convex_hull_2d([[0, np.nan]])


def test_halfspace_row_counts():
    assert to_halfspaces_2d(convex_hull_2d(SQUARE))[0].shape == (4, 2)
    H, b = to_halfspaces_2d(convex_hull_2d([[0, 0], [1, 1]]))
    assert H.shape == (4, 2)
    # the two line rows are opposing
    assert np.allclose(H[0], -H[1]) and np.isclose(b[0], -b[1])
    H, b = to_halfspaces_2d([[0.0, 0.0]])
    assert H.shape == (4, 2) and np.allclose(b, 0)


def test_contains_tolerances():
    sq = ValuePolytope.from_points(SQUARE)
    assert contains(sq, [0.5, 0.5], 0.0)
    assert not contains(sq, [1 + 1e-6, 0.5], 1e-7)
    assert contains(sq, [1 + 1e-9, 0.5], 1e-7)
    with pytest.raises(ValueError):
        contains(sq, [0.5, 0.5, 0.5])


def test_3d_full_rank():
    tet = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    H, b, v = convex_hull_3d_halfspaces(tet)
    assert H.shape == (4, 3) and len(v) == 4
    cube = np.array([[i, j, k] for i in (0, 1) for j in (0, 1) for k in (0, 1)], dtype=float)
    H, b, v = convex_hull_3d_halfspaces(np.vstack([cube, [[0.5, 0.5, 0.5]]]))
    assert H.shape == (6, 3) and len(v) == 8


def test_3d_coplanar_slab():
    pts = np.array([[0, 0, 1], [1, 0, 1], [0, 1, 1], [1, 1, 1], [0.5, 0.5, 1]], dtype=float)
    H, b, v = convex_hull_3d_halfspaces(pts)
    assert len(v) == 4
    assert np.allclose(np.abs(H[0]), [0, 0, 1]) and np.allclose(H[0], -H[1])
    assert H.shape[0] == 2 + 4
    poly = ValuePolytope.from_points(pts)
    assert poly.contains([0.2, 0.3, 1.0], 1e-9) and not poly.contains([0.2, 0.3, 1.01], 1e-9)


def test_3d_collinear_and_point():
    H, b, v = convex_hull_3d_halfspaces([[0, 0, 0], [1, 1, 1], [0.5, 0.5, 0.5]])
    assert len(v) == 2
    poly = ValuePolytope.from_points([[0, 0, 0], [1, 1, 1]])
    assert poly.contains([0.3, 0.3, 0.3], 1e-9) and not poly.contains([0.3, 0.3, 0.4], 1e-6)
    poly = ValuePolytope.point([1.0, 2.0, 3.0])
    assert poly.contains([1, 2, 3], 0) and not poly.contains([1, 2, 3.001], 1e-6)


def test_lexmax_vertex_and_dict_round_trip():
    poly = ValuePolytope.from_points([[0, 0.6], [0.8, 0.6], [0.4, 1.0], [0.8, 0.2]], owner=(1, None))
    assert np.allclose(poly.lexmax_vertex(), [0.8, 0.6])
    back = ValuePolytope.from_dict(poly.to_dict())
    assert np.array_equal(back.H, poly.H) and back.owner == (1, None)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 30), st.just(2)),
              elements=st.floats(-5, 5, allow_nan=False, width=32)))
def test_hypothesis_hull_invariants(pts):
    assert check_hull_2d(pts, np.random.default_rng(0)) == []


def test_random_hull_invariants():
    rng = np.random.default_rng(7)
    for _ in range(300):
        pts = random_points(rng)
        assert check_hull_2d(pts, rng) == [], pts


def test_random_3d_containment():
    rng = np.random.default_rng(11)
    for _ in range(200):
        pts = random_points(rng, dim=3)
        H, b, v = convex_hull_3d_halfspaces(pts)
        assert np.all(pts @ H.T <= b + 1e-9)
        assert np.allclose(np.linalg.norm(H, axis=1), 1.0)
        # every reported vertex is one of the inputs and lies on the boundary
        for x in v:
            assert np.min(np.abs(pts - x).sum(axis=1)) == 0
            assert np.max(H @ x - b) > -1e-9


@pytest.mark.parametrize("pts", [
    [[0.0, -1.0], [-1.17549435e-38, 0.0], [0.0, 0.0]],
    [[0.0, -1.0], [-1.17549435e-38, 1.0], [0.0, 0.0]],
    [[0.0, -1.0], [-1.40129846e-45, 1.0], [-1.40129846e-45, 0.0]],
])
def test_nearly_vertical_collinear_points(pts):
    pts = np.array(pts)
    assert check_hull_2d(pts, np.random.default_rng(0)) == []
    assert len(convex_hull_2d(pts)) == 2
