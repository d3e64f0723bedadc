"""The l1 problem as a linear program over a circumscribed polytope.

Variables ``(x, t, s, xi, v)``; rows are kept in ">=" form in this order,
and their multipliers are the dual blocks ``w1 .. w9``::

    w1:  x + t >= 0                     w5:  U^T A x + xi e >= U^T y
    w2: -x + t >= 0                     w6: -U^T A x + xi e >= -U^T y
    w3: -a1 s - a2 xi - a3 e^T v >= -eps   w7:  U^T A x + v >= U^T y
    w4:  M^T A x + s e >= M^T y         w8: -U^T A x + v >= -U^T y
                                        w9: -B x >= -b
"""

from dataclasses import dataclass

import numpy as np

from . import lp as lpmod
from .linalg import invertible_subsets

STATIONARITY_TOL = 1e-8


class InfeasibleProblem(Exception):
    pass


class NumericalFailure(Exception):
    pass


@dataclass
class PrimalPoint:
    x: np.ndarray
    t: np.ndarray
    s: float
    xi: float
    v: np.ndarray

    def vector(self):
        return np.concatenate([self.x, self.t, [self.s, self.xi], self.v])


@dataclass
class DualPoint:
    w1: np.ndarray
    w2: np.ndarray
    w3: float
    w4: np.ndarray
    w5: np.ndarray
    w6: np.ndarray
    w7: np.ndarray
    w8: np.ndarray
    w9: np.ndarray

    NAMES = ("w1", "w2", "w3", "w4", "w5", "w6", "w7", "w8", "w9")

    def vector(self):
        return np.concatenate([np.atleast_1d(getattr(self, k)) for k in self.NAMES])

    def to_dict(self):
        return {k: np.atleast_1d(getattr(self, k)).tolist() for k in self.NAMES}


def _block_sizes(p, P):
    n, h, N, l = p.n, p.h, P.N, p.l
    return [n, n, 1, N, h, h, h, h, l]


def _split(vec, sizes):
    out, at = [], 0
    for size in sizes:
        out.append(vec[at:at + size])
        at += size
    return out


def _check(p, P):
    if P.m != p.m:
        raise ValueError(f"polytope dimension {P.m} does not match m = {p.m}")


def assemble_lp(p, P):
    """The LP form of the polytope-relaxed problem; objective ``e^T t``."""
    _check(p, P)
    n, h, N, l = p.n, p.h, P.N, p.l
    a1, a2, a3 = p.a
    A, U, M = p.A, p.U, P.M
    UA, MA = U.T @ A, M.T @ A
    nv = 2 * n + 2 + h
    ix, it, i_s, i_xi, iv = slice(0, n), slice(n, 2 * n), 2 * n, 2 * n + 1, slice(2 * n + 2, nv)

    rows, rhs = [], []

    def block(k):
        R = np.zeros((k, nv))
        rows.append(R)
        return R

    R = block(n); R[:, ix] = np.eye(n); R[:, it] = np.eye(n); rhs.append(np.zeros(n))
    R = block(n); R[:, ix] = -np.eye(n); R[:, it] = np.eye(n); rhs.append(np.zeros(n))
    R = block(1); R[0, i_s] = -a1; R[0, i_xi] = -a2; R[0, iv] = -a3; rhs.append([-p.epsilon])
    R = block(N); R[:, ix] = MA; R[:, i_s] = 1.0; rhs.append(M.T @ p.y)
    Uy = U.T @ p.y
    R = block(h); R[:, ix] = UA; R[:, i_xi] = 1.0; rhs.append(Uy)
    R = block(h); R[:, ix] = -UA; R[:, i_xi] = 1.0; rhs.append(-Uy)
    R = block(h); R[:, ix] = UA; R[:, iv] = np.eye(h); rhs.append(Uy)
    R = block(h); R[:, ix] = -UA; R[:, iv] = np.eye(h); rhs.append(-Uy)
    R = block(l); R[:, ix] = -p.B; rhs.append(-p.b)

    Rall = np.vstack(rows)
    rall = np.concatenate([np.atleast_1d(r) for r in rhs])
    c = np.zeros(nv)
    c[it] = 1.0
    lower = np.zeros(nv)
    lower[ix] = -np.inf
    return lpmod.LinearProgram(c, -Rall, -rall, lower=lower)


def _primal(p, z):
    n, h = p.n, p.h
    return PrimalPoint(z[:n].copy(), z[n:2 * n].copy(), float(z[2 * n]),
                       float(z[2 * n + 1]), z[2 * n + 2:2 * n + 2 + h].copy())


def _dual(p, P, w):
    parts = _split(w, _block_sizes(p, P))
    parts[2] = float(parts[2][0])
    return DualPoint(*[np.array(x, copy=True) if not isinstance(x, float) else x
                       for x in parts])


def solve_l1(p, P):
    """Optimal primal point, dual multipliers and value ``|x*|_1``."""
    prog = assemble_lp(p, P)
    sol = lpmod.solve(prog)
    if sol.status is lpmod.Status.INFEASIBLE:
        raise InfeasibleProblem("relaxed l1 problem has an empty feasible set")
    if sol.status is lpmod.Status.UNBOUNDED:
        raise RuntimeError("objective e^T t >= 0 cannot be unbounded; solver error")
    if sol.status is not lpmod.Status.OPTIMAL:
        raise NumericalFailure(f"LP solve failed: {sol.status.value}")
    primal = _primal(p, sol.x)
    dual = _dual(p, P, sol.dual_ineq)
    return primal, dual, sol.value


# --- optimality system -------------------------------------------------------

@dataclass
class ThetaSystem:
    """``{u : M1 u <= p, M2 u = q}``."""
    M1: np.ndarray
    p: np.ndarray
    M2: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        self.M1 = np.atleast_2d(np.asarray(self.M1, dtype=float))
        self.p = np.asarray(self.p, dtype=float).ravel()
        self.M2 = np.asarray(self.M2, dtype=float).reshape(-1, self.M1.shape[1])
        self.q = np.asarray(self.q, dtype=float).ravel()

    @property
    def dim(self):
        return self.M1.shape[1]


def theta_layout(p, P):
    """Slices of ``u = (x, t, s, xi, v, w1..w9)`` inside a Theta vector."""
    sizes = [p.n, p.n, 1, 1, p.h] + _block_sizes(p, P)
    names = ["x", "t", "s", "xi", "v"] + list(DualPoint.NAMES)
    out, at = {}, 0
    for name, size in zip(names, sizes):
        out[name] = slice(at, at + size)
        at += size
    out["dim"] = at
    return out


def stack_u(primal, dual):
    return np.concatenate([primal.vector(), dual.vector()])


def assemble_theta(p, P):
    """Primal feasibility, dual feasibility, sign rows and zero duality gap."""
    _check(p, P)
    n, h, N, l = p.n, p.h, P.N, p.l
    a1, a2, a3 = p.a
    A, U, M, B = p.A, p.U, P.M, p.B
    L = theta_layout(p, P)
    dim = L["dim"]
    UA, MA = U.T @ A, M.T @ A
    Uy, My = U.T @ p.y, M.T @ p.y

    ineq, rhs = [], []

    def row_block(k, r):
        R = np.zeros((k, dim))
        ineq.append(R)
        rhs.append(np.broadcast_to(np.asarray(r, dtype=float), (k,)))
        return R

    x, t, s, xi, v = L["x"], L["t"], L["s"], L["xi"], L["v"]
    # primal rows
    R = row_block(n, 0.0); R[:, x] = -np.eye(n); R[:, t] = -np.eye(n)
    R = row_block(n, 0.0); R[:, x] = np.eye(n); R[:, t] = -np.eye(n)
    R = row_block(1, p.epsilon); R[0, s] = a1; R[0, xi] = a2; R[0, v] = a3
    R = row_block(N, -My); R[:, x] = -MA; R[:, s] = -1.0
    R = row_block(l, p.b); R[:, x] = B
    R = row_block(h, -Uy); R[:, x] = -UA; R[:, xi] = -1.0
    R = row_block(h, Uy); R[:, x] = UA; R[:, xi] = -1.0
    R = row_block(h, -Uy); R[:, x] = -UA; R[:, v] = -np.eye(h)
    R = row_block(h, Uy); R[:, x] = UA; R[:, v] = -np.eye(h)
    # dual rows
    w = {k: L[k] for k in DualPoint.NAMES}
    R = row_block(n, 1.0); R[:, w["w1"]] = np.eye(n); R[:, w["w2"]] = np.eye(n)
    R = row_block(1, 0.0); R[0, w["w3"]] = -a1; R[0, w["w4"]] = 1.0
    R = row_block(1, 0.0); R[0, w["w3"]] = -a2; R[0, w["w5"]] = 1.0; R[0, w["w6"]] = 1.0
    R = row_block(h, 0.0); R[:, w["w3"]] = -a3; R[:, w["w7"]] = np.eye(h); R[:, w["w8"]] = np.eye(h)
    # (t, s, xi, v, w) >= 0
    nonneg = np.arange(t.start, dim)
    R = row_block(nonneg.size, 0.0); R[np.arange(nonneg.size), nonneg] = -1.0

    # stationarity and zero duality gap
    E = np.zeros((n + 1, dim))
    AM, AU = A.T @ M, A.T @ U
    E[:n, w["w1"]] = np.eye(n)
    E[:n, w["w2"]] = -np.eye(n)
    E[:n, w["w4"]] = AM
    E[:n, w["w5"]] = AU
    E[:n, w["w6"]] = -AU
    E[:n, w["w7"]] = AU
    E[:n, w["w8"]] = -AU
    E[:n, w["w9"]] = -B.T
    E[n, t] = 1.0
    E[n, w["w3"]] = p.epsilon
    E[n, w["w4"]] = -(p.y @ M)
    yU = p.y @ U
    E[n, w["w5"]] = -yU
    E[n, w["w6"]] = yU
    E[n, w["w7"]] = -yU
    E[n, w["w8"]] = yU
    E[n, w["w9"]] = p.b
    return ThetaSystem(np.vstack(ineq), np.concatenate(rhs), E, np.zeros(n + 1))


def theta_residual(T, u):
    """Stacked ``[(M1 u - p)^+; M2 u - q]`` and its l1 norm."""
    u = np.asarray(u, dtype=float).ravel()
    if u.size != T.dim:
        raise ValueError(f"u has length {u.size}, expected {T.dim}")
    r = np.concatenate([np.maximum(T.M1 @ u - T.p, 0.0), T.M2 @ u - T.q])
    return r, float(np.abs(r).sum())


def theta_as_lp(T, c=None):
    """Theta as LP constraints; single-entry ``-u_j <= 0`` rows become bounds."""
    M1, p = T.M1, T.p
    nnz = (M1 != 0).sum(axis=1)
    sign_row = (nnz == 1) & (p == 0) & (M1.min(axis=1) < 0)
    lower = np.full(T.dim, -np.inf)
    lower[np.argmin(M1[sign_row], axis=1)] = 0.0
    keep = ~sign_row
    cost = np.zeros(T.dim) if c is None else c
    return lpmod.LinearProgram(cost, M1[keep], p[keep], T.M2, T.q, lower)


def theta_feasible_point(T):
    res = lpmod.feasibility(theta_as_lp(T))
    if not res.feasible:
        raise InfeasibleProblem(f"Theta system is empty ({res.status.value})")
    return res.x


# --- dual witness built from a range-space certificate ----------------------

@dataclass
class DualWitness:
    primal: PrimalPoint
    dual: DualPoint
    g: np.ndarray
    omega: tuple
    J1: np.ndarray
    J2: np.ndarray


def top_k_pattern(x, k):
    """Signs of the k largest-magnitude entries: (positive idx, negative idx)."""
    x = np.asarray(x, dtype=float).ravel()
    J = np.argsort(-np.abs(x), kind="stable")[:k]
    J1 = np.sort(J[x[J] > 0])
    J2 = np.sort(J[x[J] < 0])
    return J1, J2


def choice_point(p, P, x):
    """``t = |x|``, ``s = |M^T r|_inf``, ``xi = |U^T r|_inf``, ``v = |U^T r|``."""
    r = p.y - p.A @ x
    Ur = p.U.T @ r
    return PrimalPoint(x.copy(), np.abs(x), float(np.abs(P.M.T @ r).max()),
                       float(np.abs(Ur).max()), np.abs(Ur))


def construct_dual_witness(p, P, x, k, eta, nu, hstar):
    """Dual feasible ``w`` built from ``eta = A^T nu + B^T hstar``.

    ``w3`` takes the max only over the norms whose weights are nonzero,
    which is what the w3 rows actually require.
    """
    _check(p, P)
    x = np.asarray(x, dtype=float).ravel()
    eta = np.asarray(eta, dtype=float).ravel()
    nu = np.asarray(nu, dtype=float).ravel()
    hstar = np.asarray(hstar, dtype=float).ravel()
    m, h = p.m, p.h
    a1, a2, a3 = p.a
    J1, J2 = top_k_pattern(x, k)

    w1 = (1.0 - eta) / 2.0
    w2 = (1.0 + eta) / 2.0
    w1[J1], w2[J1] = 0.0, 1.0
    w1[J2], w2[J2] = 1.0, 0.0

    subsets, _ = invertible_subsets(p.U)
    if not subsets:
        raise ValueError("no invertible m x m column subset of U")
    omega, Uinv = subsets[0]
    g = np.zeros(h)
    g[list(omega)] = Uinv @ nu
    gp, gm = np.maximum(g, 0.0), np.minimum(g, 0.0)
    w5, w6, w7, w8 = a2 * gp, -a2 * gm, a3 * gp, -a3 * gm

    w4 = np.zeros(P.N)
    w4[:m] = a1 * np.maximum(nu, 0.0)
    w4[m:2 * m] = -a1 * np.minimum(nu, 0.0)

    terms = []
    if a1 > 0:
        terms.append(np.abs(nu).sum())
    if a2 > 0:
        terms.append(np.abs(g).sum())
    if a3 > 0:
        terms.append(np.abs(g).max(initial=0.0))
    w3 = float(max(terms, default=0.0))
    w9 = -hstar

    dual = DualPoint(w1, w2, w3, w4, w5, w6, w7, w8, w9)
    stat = stationarity(p, P, dual)
    scale = 1.0 + np.abs(eta).max(initial=0.0)
    if np.abs(stat).max(initial=0.0) > STATIONARITY_TOL * scale * max(1.0, np.abs(nu).max(initial=0.0)):
        raise ValueError("witness violates stationarity; is eta = A^T nu + B^T h?")
    return DualWitness(choice_point(p, P, x), dual, g, omega, J1, J2)


def stationarity(p, P, w):
    """``w1 - w2 + A^T M w4 + A^T U (w5 - w6 + w7 - w8) - B^T w9``."""
    return (w.w1 - w.w2 + p.A.T @ (P.M @ w.w4)
            + p.A.T @ (p.U @ (w.w5 - w.w6 + w.w7 - w.w8)) - p.B.T @ w.w9)


def dual_objective(p, P, w):
    yU = p.y @ p.U
    return float(-p.epsilon * w.w3 + p.y @ (P.M @ w.w4)
                 + yU @ (w.w5 - w.w6 + w.w7 - w.w8) - p.b @ w.w9)


def dual_violations(p, P, w):
    """Per-condition violation of dual feasibility (all zero when feasible)."""
    a1, a2, a3 = p.a
    h = p.h
    return {
        "stationarity": float(np.abs(stationarity(p, P, w)).max(initial=0.0)),
        "w1+w2<=e": float(np.max(w.w1 + w.w2 - 1.0, initial=0.0)),
        "w3_a1": max(0.0, float(-a1 * w.w3 + w.w4.sum())),
        "w3_a2": max(0.0, float(-a2 * w.w3 + w.w5.sum() + w.w6.sum())),
        "w3_a3": float(np.max(-a3 * w.w3 * np.ones(h) + w.w7 + w.w8, initial=0.0)),
        "nonneg": max(0.0, -float(np.min(w.vector(), initial=0.0))),
    }
