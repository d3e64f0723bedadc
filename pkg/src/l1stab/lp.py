"""Dense two-phase tableau simplex with dual multipliers.

Problems are given as::

    minimize    c^T x
    subject to  G x <= p,  H x = q,  x_j >= 0 or free

and solved after conversion to ``min c'^T z, A z = b, z >= 0`` (free
variables split, slacks appended, rows flipped so that ``b >= 0``).
"""

import enum
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

log = logging.getLogger(__name__)

OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
FEAS_TOL = 1e-8
MAX_ITER = 10**6


class Status(str, enum.Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    UNBOUNDED = "UNBOUNDED"
    NUMERICAL_FAILURE = "NUMERICAL_FAILURE"


@dataclass
class LinearProgram:
    c: np.ndarray
    G: Optional[np.ndarray] = None
    p: Optional[np.ndarray] = None
    H: Optional[np.ndarray] = None
    q: Optional[np.ndarray] = None
    lower: Optional[np.ndarray] = None  # entries 0 or -inf; default all 0

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        if not np.all(np.isfinite(self.c)):
            raise ValueError("costs must be finite")

        def block(M, r):
            if M is None:
                return np.zeros((0, n)), np.zeros(0)
            M = np.asarray(M, dtype=float).reshape(-1, n)
            r = np.asarray(r, dtype=float).ravel()
            if r.size != M.shape[0]:
                raise ValueError("rhs length does not match row count")
            return M, r

        self.G, self.p = block(self.G, self.p)
        self.H, self.q = block(self.H, self.q)
        if self.lower is None:
            self.lower = np.zeros(n)
        self.lower = np.asarray(self.lower, dtype=float).ravel()
        if self.lower.size != n:
            raise ValueError("lower bound vector has wrong length")
        if not np.all((self.lower == 0) | np.isneginf(self.lower)):
            raise ValueError("lower bounds must be 0 or -inf")

    @property
    def n(self):
        return self.c.size

    @property
    def free(self):
        return np.isneginf(self.lower)


@dataclass
class LPSolution:
    status: Status
    x: Optional[np.ndarray] = None
    value: float = float("nan")
    dual_ineq: Optional[np.ndarray] = None
    dual_eq: Optional[np.ndarray] = None
    iterations: int = 0

    @property
    def ok(self):
        return self.status is Status.OPTIMAL


@dataclass
class Feasibility:
    feasible: bool
    x: Optional[np.ndarray] = None
    status: Status = Status.OPTIMAL


@dataclass
class _Standard:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    sign: np.ndarray       # +1/-1 row flips
    slack_col: np.ndarray  # slack column per row, -1 for equality rows
    pos: np.ndarray        # column of x_j^+
    neg: np.ndarray        # column of x_j^-, -1 if x_j >= 0
    n_ineq: int = 0


def _standardize(lp):
    n = lp.n
    free = lp.free
    k, e = lp.G.shape[0], lp.H.shape[0]
    pos = np.arange(n)
    neg = np.full(n, -1)
    neg[free] = n + np.arange(free.sum())
    nx = n + int(free.sum())
    ncol = nx + k
    rows = k + e
    A = np.zeros((rows, ncol))
    b = np.concatenate([lp.p, lp.q])
    A[:k, :n] = lp.G
    A[k:, :n] = lp.H
    A[:, nx:] = 0.0
    fcols = np.flatnonzero(free)
    A[:, neg[fcols]] = -A[:, fcols]
    slack_col = np.full(rows, -1)
    slack_col[:k] = nx + np.arange(k)
    A[np.arange(k), slack_col[:k]] = 1.0
    c = np.zeros(ncol)
    c[:n] = lp.c
    c[neg[fcols]] = -lp.c[fcols]
    sign = np.where(b < 0, -1.0, 1.0)
    A *= sign[:, None]
    b = b * sign
    return _Standard(A, b, c, sign, slack_col, pos, neg, k)


class _Tableau:
    """Canonical tableau ``T = B^{-1} A``, ``rhs = B^{-1} b``."""

    def __init__(self, T, rhs, basis):
        self.T = T
        self.rhs = rhs
        self.basis = basis
        self.iterations = 0

    def pivot(self, i, j):
        T, rhs = self.T, self.rhs
        piv = T[i, j]
        T[i] /= piv
        rhs[i] /= piv
        col = T[:, j].copy()
        col[i] = 0.0
        nz = np.flatnonzero(col)
        if nz.size:
            T[nz] -= np.outer(col[nz], T[i])
            rhs[nz] -= col[nz] * rhs[i]
        T[:, j] = 0.0
        T[i, j] = 1.0
        self.basis[i] = j

    def run(self, cost, allowed, max_iter=MAX_ITER):
        """Minimize ``cost`` over the columns in ``allowed``.

        Returns "optimal", "unbounded" or "iterations".  Dantzig pricing,
        switching to Bland's rule after a long stall.
        """
        m, ncol = self.T.shape
        d = cost - cost[self.basis] @ self.T
        obj = float(cost[self.basis] @ self.rhs)
        best = obj
        stall = 0
        stall_cap = 5 * (m + ncol)
        bland = False
        blocked = ~allowed
        while self.iterations < max_iter:
            dd = np.where(blocked, 0.0, d)
            if bland:
                cand = np.flatnonzero(dd < -OPT_TOL)
                if cand.size == 0:
                    return "optimal"
                j = int(cand[0])
            else:
                j = int(np.argmin(dd))
                if dd[j] >= -OPT_TOL:
                    return "optimal"
            col = self.T[:, j]
            rows = np.flatnonzero(col > PIVOT_TOL)
            if rows.size == 0:
                return "unbounded"
            ratios = np.maximum(self.rhs[rows], 0.0) / col[rows]
            rmin = ratios.min()
            ties = rows[ratios <= rmin + 1e-12 * (1.0 + rmin)]
            if bland:
                i = int(ties[np.argmin(self.basis[ties])])
            else:
                # among ties prefer the largest pivot element
                i = int(ties[np.argmax(col[ties])])
            dj = d[j]
            self.pivot(i, j)
            d -= dj * self.T[i]
            d[self.basis] = 0.0
            self.iterations += 1
            obj = float(cost[self.basis] @ self.rhs)
            if obj < best - 1e-12 * (1.0 + abs(best)):
                best = obj
                stall = 0
            else:
                stall += 1
                if not bland and stall > stall_cap:
                    log.debug("switching to Bland's rule after %d stalled pivots", stall)
                    bland = True
        return "iterations"


def _phase1(std, max_iter):
    """Find a feasible basis; returns (tableau, kept_rows) or None if infeasible."""
    A, b = std.A, std.b
    m, ncol = A.shape
    basis = np.full(m, -1)
    for i in range(m):
        sc = std.slack_col[i]
        if sc >= 0 and std.sign[i] > 0:
            basis[i] = sc
    need = np.flatnonzero(basis < 0)
    na = need.size
    T = np.hstack([A, np.zeros((m, na))])
    T[need, ncol + np.arange(na)] = 1.0
    basis[need] = ncol + np.arange(na)
    tab = _Tableau(T, b.copy(), basis)
    if na == 0:
        return tab, np.arange(m), ncol
    cost = np.zeros(ncol + na)
    cost[ncol:] = 1.0
    res = tab.run(cost, np.ones(ncol + na, dtype=bool), max_iter)
    if res == "iterations":
        raise _IterationCap(tab.iterations)
    infeas = float(cost[tab.basis] @ tab.rhs)
    if infeas > FEAS_TOL * (1.0 + np.abs(b).max(initial=0.0)):
        return None
    # drive artificials out of the basis; drop rows that are redundant
    keep = np.ones(m, dtype=bool)
    for i in range(m):
        if tab.basis[i] < ncol:
            continue
        row = tab.T[i, :ncol]
        j = int(np.argmax(np.abs(row)))
        if abs(row[j]) > PIVOT_TOL:
            tab.pivot(i, j)
        else:
            keep[i] = False
    kept = np.flatnonzero(keep)
    tab.T = tab.T[kept][:, :ncol].copy()
    tab.rhs = tab.rhs[kept].copy()
    tab.basis = tab.basis[kept].copy()
    return tab, kept, ncol


class _IterationCap(Exception):
    def __init__(self, iterations):
        self.iterations = iterations


def _recover(lp, std, tab, kept):
    """Recompute primal/dual values from the final basis for accuracy."""
    Bm = std.A[np.ix_(kept, tab.basis)]
    zB = np.linalg.solve(Bm, std.b[kept])
    zB[(zB < 0) & (zB > -FEAS_TOL)] = 0.0
    z = np.zeros(std.A.shape[1])
    z[tab.basis] = zB
    y_kept = np.linalg.solve(Bm.T, std.c[tab.basis])
    y = np.zeros(std.A.shape[0])
    y[kept] = y_kept
    y *= std.sign
    x = z[std.pos].copy()
    free = std.neg >= 0
    x[free] -= z[std.neg[free]]
    k = std.n_ineq
    lam = -y[:k]
    lam[(lam < 0) & (lam > -FEAS_TOL)] = 0.0
    mu = y[k:]
    return x, lam, mu


def solve(lp, max_iter=MAX_ITER):
    """Solve ``lp``; deterministic for identical input."""
    std = _standardize(lp)
    try:
        ph1 = _phase1(std, max_iter)
        if ph1 is None:
            return LPSolution(Status.INFEASIBLE)
        tab, kept, ncol = ph1
        res = tab.run(std.c, np.ones(ncol, dtype=bool), max_iter)
    except _IterationCap as cap:
        return LPSolution(Status.NUMERICAL_FAILURE, iterations=cap.iterations)
    if res == "iterations":
        return LPSolution(Status.NUMERICAL_FAILURE, iterations=tab.iterations)
    if res == "unbounded":
        return LPSolution(Status.UNBOUNDED, iterations=tab.iterations)
    try:
        x, lam, mu = _recover(lp, std, tab, kept)
    except np.linalg.LinAlgError:
        return LPSolution(Status.NUMERICAL_FAILURE, iterations=tab.iterations)
    return LPSolution(Status.OPTIMAL, x=x, value=float(lp.c @ x), dual_ineq=lam,
                      dual_eq=mu, iterations=tab.iterations)


def feasibility(lp, max_iter=MAX_ITER):
    """Phase 1 only: a feasible point of ``lp``'s constraints, or proof of none."""
    std = _standardize(lp)
    try:
        ph1 = _phase1(std, max_iter)
    except _IterationCap:
        return Feasibility(False, status=Status.NUMERICAL_FAILURE)
    if ph1 is None:
        return Feasibility(False, status=Status.INFEASIBLE)
    tab, kept, _ = ph1
    z = np.zeros(std.A.shape[1])
    z[tab.basis] = np.maximum(tab.rhs, 0.0)
    x = z[std.pos].copy()
    free = std.neg >= 0
    x[free] -= z[std.neg[free]]
    return Feasibility(True, x=x)


# --- diagnostics shared by tests and callers -------------------------------

def dual_value(lp, sol):
    return float(-lp.p @ sol.dual_ineq + lp.q @ sol.dual_eq)


def reduced_costs(lp, sol):
    return lp.c + lp.G.T @ sol.dual_ineq - lp.H.T @ sol.dual_eq


def primal_residual(lp, x):
    r = 0.0
    if lp.p.size:
        r = max(r, float(np.max(lp.G @ x - lp.p, initial=0.0)))
    if lp.q.size:
        r = max(r, float(np.abs(lp.H @ x - lp.q).max()))
    bounded = ~lp.free
    if bounded.any():
        r = max(r, float(np.max(-x[bounded], initial=0.0)))
    return r


def dual_residual(lp, sol):
    rc = reduced_costs(lp, sol)
    free = lp.free
    r = float(np.max(-sol.dual_ineq, initial=0.0))
    if free.any():
        r = max(r, float(np.abs(rc[free]).max()))
    if (~free).any():
        r = max(r, float(np.max(-rc[~free], initial=0.0)))
    return r


def dual_program(lp):
    """The explicit dual of ``lp`` written again as a minimization LP.

    Variables ``(lambda >= 0, mu free)``; its optimal value is the negated
    optimal value of ``lp``.
    """
    k, e = lp.G.shape[0], lp.H.shape[0]
    free = lp.free
    # c + G^T lam - H^T mu >= 0 (bounded), = 0 (free)
    M = np.hstack([lp.G.T, -lp.H.T])
    G = -M[~free]
    p = lp.c[~free]
    H = M[free]
    q = -lp.c[free]
    cost = np.concatenate([lp.p, -lp.q])
    lower = np.concatenate([np.zeros(k), np.full(e, -np.inf)])
    return LinearProgram(cost, G, p, H, q, lower)
