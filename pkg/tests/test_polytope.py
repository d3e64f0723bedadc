import math

import numpy as np
import pytest
from scipy.spatial import HalfspaceIntersection

from l1stab.polytope import (build_p0, circumscription_gap,
                             estimate_circumscription_gap, gap_proxy, membership)


def polygon_radius_oracle(P):
    """Vertex enumeration of the 2-D polygon by scipy's halfspace intersection."""
    halfspaces = np.hstack([P.M.T, -np.ones((P.N, 1))])
    hs = HalfspaceIntersection(halfspaces, np.zeros(2))
    return np.linalg.norm(hs.intersections, axis=1).max()


def test_axis_columns_come_first():
    for m in (1, 2, 3, 5):
        P = build_p0(m, 10, seed=4)
        np.testing.assert_array_equal(P.M[:, :m], np.eye(m))
        np.testing.assert_array_equal(P.M[:, m:2 * m], -np.eye(m))
        np.testing.assert_allclose(np.linalg.norm(P.M, axis=0), 1.0, atol=1e-12)


def test_one_dimensional_ball_is_exact():
    P = build_p0(1, 0)
    assert P.N == 2
    assert circumscription_gap(P) == pytest.approx(0.0)
    assert membership(P, [1.0]) and not membership(P, [1.0 + 1e-9])


def test_square_when_no_extra_facets():
    P = build_p0(2, 0)
    assert P.N == 4
    assert circumscription_gap(P) == pytest.approx(math.sqrt(2) - 1)


def test_l8_grid_radius():
    P = build_p0(2, 8)
    assert P.N == 12
    expected = 1 / math.cos(math.pi / 12)
    assert polygon_radius_oracle(P) == pytest.approx(expected, rel=1e-12)
    assert circumscription_gap(P) == pytest.approx(expected - 1, rel=1e-10)


def test_membership_examples():
    P = build_p0(2, 64)
    assert membership(P, [0, 0])
    assert not membership(P, [1.1, 1.1])
    assert polygon_radius_oracle(P) == pytest.approx(1 / math.cos(math.pi / 68))


def test_membership_dimension_check():
    with pytest.raises(ValueError):
        membership(build_p0(2, 4), [0, 0, 0])


@pytest.mark.parametrize("m, L", [(2, 16), (3, 20), (5, 30)])
def test_ball_inside_polytope(m, L):
    P = build_p0(m, L, seed=1)
    z = np.random.default_rng(0).standard_normal((1000, m))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    assert all(membership(P, zi) for zi in z)


def test_gap_nonincreasing_on_2d_grids():
    gaps = [circumscription_gap(build_p0(2, L)) for L in (0, 4, 8, 16, 32, 64, 128)]
    assert all(a >= b - 1e-15 for a, b in zip(gaps, gaps[1:]))


def test_no_duplicate_directions():
    for L in (4, 8, 12, 16):
        P = build_p0(2, L)
        G = P.M.T @ P.M
        np.fill_diagonal(G, 0)
        assert G.max() < 1 - 1e-12


def test_three_dimensional_gap_matches_sampling():
    P = build_p0(3, 30, seed=2)
    exact = circumscription_gap(P)
    est = estimate_circumscription_gap(P, samples=50000, seed=0)
    assert est <= exact + 1e-12
    assert est >= exact - 0.05


def test_gap_proxy_kind():
    assert gap_proxy(build_p0(3, 10))[1] == "exact"
    assert gap_proxy(build_p0(4, 10))[1] == "estimated"
    with pytest.raises(ValueError):
        circumscription_gap(build_p0(4, 10))


def test_invalid_arguments():
    with pytest.raises(ValueError):
        build_p0(0, 3)
    with pytest.raises(ValueError):
        build_p0(2, -1)
