"""Circumscribed polytopes of the unit l2 ball.

P0 = {z : M^T z <= 1} where the columns of M are unit vectors; the first
2m columns are +e_1..+e_m, -e_1..-e_m.  Every column is a supporting
half-space of the ball, so the ball always lies inside P0.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

DEDUP_ANGLE = 1e-9
MEMBER_TOL = 1e-12


@dataclass(frozen=True)
class Polytope:
    M: np.ndarray

    @property
    def m(self):
        return self.M.shape[0]

    @property
    def N(self):
        return self.M.shape[1]

    def contains(self, z):
        return membership(self, z)


def _grid_2d(L):
    # uniform grid of L + 4 angles; it contains the 4 axis directions
    # whenever L is a multiple of 4
    K = L + 4
    ang = 2.0 * math.pi * np.arange(K) / K
    return np.vstack([np.cos(ang), np.sin(ang)]).T


def build_p0(m, L, seed=0):
    """Axis half-spaces plus up to ``L`` extra unit directions."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if L < 0:
        raise ValueError("L must be >= 0")
    eye = np.eye(m)
    cols = [c for c in eye] + [-c for c in eye]
    if m == 2:
        extra = _grid_2d(L)
    elif m >= 3 and L > 0:
        g = np.random.default_rng(seed).standard_normal((L, m))
        extra = g / np.linalg.norm(g, axis=1, keepdims=True)
    else:
        # m = 1: the two axis facets already give the ball exactly
        extra = np.zeros((0, m))
    added = 0
    for d in extra:
        if added >= L:
            break
        # unit vectors: angle < tol  <=>  1 - cos < tol^2 / 2
        if any(1.0 - float(d @ c) < 0.5 * DEDUP_ANGLE**2 for c in cols):
            continue
        cols.append(d)
        added += 1
    return Polytope(np.array(cols).T)


def membership(P, z):
    z = np.asarray(z, dtype=float).ravel()
    if z.size != P.m:
        raise ValueError(f"z has length {z.size}, expected {P.m}")
    return bool(np.all(P.M.T @ z <= 1.0 + MEMBER_TOL))


def vertices(P, tol=1e-9):
    """All vertices by intersecting m facet hyperplanes (m <= 3)."""
    m = P.m
    if m > 3:
        raise ValueError("vertex enumeration is limited to m <= 3")
    out = []
    for rows in itertools.combinations(range(P.N), m):
        F = P.M[:, rows].T
        if abs(np.linalg.det(F)) < 1e-12:
            continue
        z = np.linalg.solve(F, np.ones(m))
        if np.all(P.M.T @ z <= 1.0 + tol):
            out.append(z)
    return np.array(out)


def circumscription_gap(P):
    """``max_{z in P} |z|_2 - 1``, the Hausdorff distance from the ball to P."""
    V = vertices(P)
    return float(np.linalg.norm(V, axis=1).max() - 1.0)


def estimate_circumscription_gap(P, samples=20000, seed=0):
    """Lower estimate of the gap from random rays through the origin."""
    d = np.random.default_rng(seed).standard_normal((samples, P.m))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    reach = (d @ P.M).max(axis=1)
    return float((1.0 / reach).max() - 1.0)


def gap_proxy(P, samples=20000, seed=0):
    """Exact gap for m <= 3, sampled estimate otherwise; second item tells which."""
    if P.m <= 3:
        return circumscription_gap(P), "exact"
    return estimate_circumscription_gap(P, samples, seed), "estimated"
