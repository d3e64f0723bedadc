"""Exhaustive-support solver for the l0 problem at small n."""

import itertools
from dataclasses import dataclass

import numpy as np

from . import lp as lpmod

MAX_N = 16


class NoFeasibleSupport(Exception):
    pass


@dataclass
class L0Result:
    k_min: int
    support: tuple
    x0: np.ndarray
    exact_l2: bool

    def to_json(self, one_based=True):
        off = 1 if one_based else 0
        return {"k_min": self.k_min, "support": [i + off for i in self.support],
                "x": self.x0.tolist(), "exact_l2": self.exact_l2}


def colex_supports(n, k):
    return sorted(itertools.combinations(range(n), k), key=lambda S: S[::-1])


def support_program(p, P, S):
    """Constraint system over ``(x_S, s, xi, v)`` with the l2 term relaxed by P."""
    S = list(S)
    k, h, N = len(S), p.h, P.N
    a1, a2, a3 = p.a
    AS = p.A[:, S]
    nv = k + 2 + h
    ix, i_s, i_xi, iv = slice(0, k), k, k + 1, slice(k + 2, nv)
    UA, Uy = p.U.T @ AS, p.U.T @ p.y
    rows, rhs = [], []

    def block(r, size):
        R = np.zeros((size, nv))
        rows.append(R)
        rhs.append(np.broadcast_to(np.asarray(r, dtype=float), (size,)))
        return R

    R = block(p.epsilon, 1); R[0, i_s] = a1; R[0, i_xi] = a2; R[0, iv] = a3
    # M^T (y - A_S x_S) <= s e
    R = block(-(P.M.T @ p.y), N); R[:, ix] = -(P.M.T @ AS); R[:, i_s] = -1.0
    R = block(Uy, h); R[:, ix] = UA; R[:, i_xi] = -1.0
    R = block(-Uy, h); R[:, ix] = -UA; R[:, i_xi] = -1.0
    R = block(Uy, h); R[:, ix] = UA; R[:, iv] = -np.eye(h)
    R = block(-Uy, h); R[:, ix] = -UA; R[:, iv] = -np.eye(h)
    if p.l:
        R = block(p.b, p.l); R[:, ix] = p.B[:, S]
    lower = np.zeros(nv)
    lower[ix] = -np.inf
    return lpmod.LinearProgram(np.zeros(nv), np.vstack(rows), np.concatenate(rhs),
                               lower=lower)


def support_feasible(p, P, S):
    """Feasible point supported on S (as a full-length x), or None."""
    res = lpmod.feasibility(support_program(p, P, S))
    if not res.feasible:
        if res.status is lpmod.Status.NUMERICAL_FAILURE:
            raise RuntimeError("support LP hit the iteration cap")
        return None
    x = np.zeros(p.n)
    x[list(S)] = res.x[:len(S)]
    return x


def solve_l0(p, P, k_cap=None):
    """Smallest k with a feasible support of size k (colex order within k).

    When a1 > 0 the l2 term is relaxed through P, so k_min is a lower bound on
    the exact l0 optimum; it is exact when a1 = 0.
    """
    n = p.n
    if n > MAX_N:
        raise ValueError(f"exhaustive l0 search is limited to n <= {MAX_N}")
    k_cap = n if k_cap is None else k_cap
    if not 0 <= k_cap <= n:
        raise ValueError("k_cap must lie in [0, n]")
    for k in range(k_cap + 1):
        for S in colex_supports(n, k):
            x = support_feasible(p, P, S)
            if x is not None:
                return L0Result(k, tuple(S), x, exact_l2=p.a[0] == 0)
    raise NoFeasibleSupport(f"no feasible support of size <= {k_cap}")
