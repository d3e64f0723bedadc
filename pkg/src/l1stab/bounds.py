"""Stability constants, error-bound right-hand sides and proof-step checks."""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import lp as lpmod
from .l1solver import (dual_violations, theta_as_lp, theta_feasible_point,
                       theta_residual)
from .linalg import (conjugate, induced_norm, invertible_subsets, lp_norm,
                     row_space_operator)
from .problem import best_k_term_error

log = logging.getLogger(__name__)

INF = math.inf


@dataclass(frozen=True)
class ConjugatePair:
    p: float
    p_conj: float

    def __post_init__(self):
        if not math.isclose(conjugate(self.p), self.p_conj, rel_tol=1e-12):
            raise ValueError(f"{self.p} and {self.p_conj} are not conjugate")

    @classmethod
    def of(cls, p):
        return cls(float(p), conjugate(p))


@dataclass
class StabilityConstants:
    upsilon: float
    vartheta_c: float
    vartheta_1: float
    upsilon_11: float
    upsilon_inf_inf: float
    upsilon_hat: float
    c: float = 1.0
    d: float = 1.0
    dhat: float = 1.0
    sigma_est: float = float("nan")
    skipped_subsets: int = 0
    prime: bool = False  # True when the B-free tightened constants are used

    @property
    def c_conj(self):
        return conjugate(self.c)

    @property
    def d_conj(self):
        return conjugate(self.d)

    def to_dict(self):
        out = {k: getattr(self, k) for k in (
            "upsilon", "vartheta_c", "vartheta_1", "upsilon_11", "upsilon_inf_inf",
            "upsilon_hat", "c", "d", "dhat", "sigma_est", "skipped_subsets", "prime")}
        return {k: (_jsonable(v)) for k, v in out.items()}


def _jsonable(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    if isinstance(v, float) and math.isnan(v):
        return None
    return v


def compute_vartheta(C, c):
    """``|(C C^T)^{-1} C|_{inf -> c}``."""
    return induced_norm(row_space_operator(C), INF, c)


def compute_upsilon(U, C, d, dhat, return_skipped=False):
    """Max over invertible m x m column subsets W of U of
    ``|U_W^{-1}|_{dhat -> d} * |(C C^T)^{-1} C|_{inf -> dhat}``."""
    subsets, skipped = invertible_subsets(U)
    if not subsets:
        raise ValueError("U has no invertible m x m column subset")
    if skipped:
        log.info("skipped %d singular column subsets of U", skipped)
    factor = induced_norm(row_space_operator(C), INF, dhat)
    best = max(induced_norm(inv, dhat, d) for _, inv in subsets) * factor
    return (best, skipped) if return_skipped else best


def compute_upsilon_prime(U, A, d):
    """B-free tightening: max over W of ``|U_W^{-1} (A A^T)^{-1} A|_{inf -> d}``."""
    subsets, _ = invertible_subsets(U)
    if not subsets:
        raise ValueError("U has no invertible m x m column subset")
    R = row_space_operator(A)
    return max(induced_norm(inv @ R, INF, d) for _, inv in subsets)


def upsilon_hat(a, upsilon_11, upsilon_inf_inf, vartheta_1):
    """Each nonzero weight brings in the constant bounding its w3 term:
    a1 -> vartheta(1), a2 -> Upsilon(1,1), a3 -> Upsilon(inf,inf)."""
    a1, a2, a3 = a
    picked = []
    if a1 > 0:
        picked.append(vartheta_1)
    if a2 > 0:
        picked.append(upsilon_11)
    if a3 > 0:
        picked.append(upsilon_inf_inf)
    if not picked:
        raise ValueError("all weights are zero")
    return max(picked)


def compute_constants(p, c=1.0, d=1.0, dhat=1.0, prime=None):
    """All constants for instance ``p``.

    ``prime=None`` picks the tightened B-free constants whenever ``p`` has no
    side constraints; in that case ``dhat`` plays no role.
    """
    if prime is None:
        prime = p.l == 0
    if prime and p.l:
        raise ValueError("tightened constants need an instance without B")
    C = p.C
    v1 = compute_vartheta(C, 1.0)
    vc = compute_vartheta(C, c)
    if prime:
        u = compute_upsilon_prime(p.U, p.A, d)
        u11 = compute_upsilon_prime(p.U, p.A, 1.0)
        uii = compute_upsilon_prime(p.U, p.A, INF)
        skipped = invertible_subsets(p.U)[1]
    else:
        u, skipped = compute_upsilon(p.U, C, d, dhat, return_skipped=True)
        u11 = compute_upsilon(p.U, C, 1.0, 1.0)
        uii = compute_upsilon(p.U, C, INF, INF)
    return StabilityConstants(
        upsilon=u, vartheta_c=vc, vartheta_1=v1, upsilon_11=u11, upsilon_inf_inf=uii,
        upsilon_hat=upsilon_hat(p.a, u11, uii, v1), c=float(c), d=float(d),
        dhat=float(dhat), skipped_subsets=skipped, prime=prime)


# --- Hoffman / Robinson constant estimate ------------------------------------

def l1_distance(T, u):
    """``min |u - v|_1`` over ``v`` in Theta, by LP."""
    u = np.asarray(u, dtype=float).ravel()
    D = T.dim
    base = theta_as_lp(T)
    nb = base.G.shape[0]
    # variables (v, d); |u - v| <= d
    I = np.eye(D)
    G = np.vstack([
        np.hstack([base.G, np.zeros((nb, D))]),
        np.hstack([I, -I]),
        np.hstack([-I, -I]),
    ])
    p = np.concatenate([base.p, u, -u])
    H = np.hstack([base.H, np.zeros((base.H.shape[0], D))])
    cost = np.concatenate([np.zeros(D), np.ones(D)])
    lower = np.concatenate([base.lower, np.zeros(D)])
    sol = lpmod.solve(lpmod.LinearProgram(cost, G, p, H, base.q, lower))
    if not sol.ok:
        raise RuntimeError(f"l1 projection LP failed: {sol.status.value}")
    return sol.value


def estimate_robinson(T, samples=20, seed=0, scale=1.0, tol=1e-9):
    """Largest observed ``dist_1(u, Theta) / residual_1(u)`` over perturbed points.

    A lower estimate of any valid Hoffman constant for Theta, not the exact
    value.  Sample i depends only on (seed, i), so more samples never lower
    the estimate.
    """
    base = theta_feasible_point(T)
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(samples):
        u = base + scale * rng.standard_normal(T.dim)
        _, res = theta_residual(T, u)
        if res <= tol:
            continue
        best = max(best, l1_distance(T, u) / res)
    return best


# --- bound right-hand sides --------------------------------------------------

@dataclass
class BoundBreakdown:
    total: float
    eps_prime: float
    sigma: float
    terms: dict = field(default_factory=dict)

    @property
    def inner(self):
        return sum(self.terms.values())


def bound_rhs(p, x, k, const, eps_prime=0.0, feasible=False, sigma=None):
    """Right-hand side ``eps' + 2 sigma' {...}`` of the stability bound.

    With ``feasible=True`` the two infeasibility penalties must vanish and
    the feasible-point form is returned.
    """
    x = np.asarray(x, dtype=float).ravel()
    sigma = const.sigma_est if sigma is None else sigma
    phi = p.residual_phi(x)
    side = p.side_residual(x)
    terms = {
        "two_sigma_k": 2.0 * best_k_term_error(x, k),
        "eps_upsilon": p.epsilon * const.upsilon_hat,
        "phi": lp_norm(phi, const.d_conj) * const.upsilon,
        "Bxb": (lp_norm(side, const.c_conj) * const.vartheta_c) if side.size else 0.0,
        "Bx_plus": float(np.maximum(side, 0.0).sum()),
        "excess": max(0.0, p.constraint_value(x) - p.epsilon),
    }
    if feasible:
        if terms["Bx_plus"] > 1e-10 or terms["excess"] > 1e-10:
            raise ValueError("x is not feasible; use the general bound")
        del terms["Bx_plus"], terms["excess"]
    total = eps_prime + 2.0 * sigma * sum(terms.values())
    return BoundBreakdown(total=total, eps_prime=eps_prime, sigma=sigma, terms=terms)


def corollary_rhs(p, x, k, const, eps_prime=0.0, sigma=None):
    """Error bound between an l0 solution ``x`` and the l1 solution set."""
    return bound_rhs(p, x, k, const, eps_prime, feasible=True, sigma=sigma)


def eps_prime_proxy(p, gap):
    """Residual-level slack introduced by the polytope: (eps / a1) * gap.

    Zero when a1 = 0, since the polytope then does not constrain anything.
    """
    a1 = p.a[0]
    if a1 <= 0:
        return 0.0
    return p.epsilon / a1 * gap


# --- proof-step inequalities -------------------------------------------------

def proof_step_margins(p, P, x, k, witness, eta, hstar, const):
    """Margins (rhs - lhs) of the inequalities chained in the bound's proof.

    ``witness`` is the output of ``construct_dual_witness`` for ``x``.
    """
    x = np.asarray(x, dtype=float).ravel()
    pt, w, g = witness.primal, witness.dual, witness.g
    phi = p.residual_phi(x)
    side = p.side_residual(x)
    a1, a2, a3 = p.a
    sk = best_k_term_error(x, k)
    out = {}
    out["eq12"] = 2.0 * sk - abs(pt.t.sum() - x @ eta)
    out["eq14"] = const.upsilon * lp_norm(phi, const.d_conj) - abs(phi @ g)
    if side.size:
        out["eq17"] = const.vartheta_c * lp_norm(side, const.c_conj) - abs(side @ hstar)
    else:
        out["eq17"] = 0.0
    y_term = max(0.0, a1 * pt.s + a2 * pt.xi + a3 * pt.v.sum() - p.epsilon)
    out["eq19"] = max(0.0, p.constraint_value(x) - p.epsilon) - y_term
    out["eq10"] = p.epsilon * const.upsilon_hat - p.epsilon * abs(w.w3)
    out["eq7"] = max(dual_violations(p, P, w).values())
    return out


def witness_gap_terms(p, P, witness):
    """|X|, Y and |(Bx - b)^+|_1 for the constructed point u = (x, t, s, xi, v, w)."""
    pt, w = witness.primal, witness.dual
    a1, a2, a3 = p.a
    yU = p.y @ p.U
    X = (pt.t.sum() + p.epsilon * w.w3 - p.y @ (P.M @ w.w4)
         - yU @ (w.w5 - w.w6 + w.w7 - w.w8) + p.b @ w.w9)
    Y = max(0.0, a1 * pt.s + a2 * pt.xi + a3 * pt.v.sum() - p.epsilon)
    Bp = float(np.maximum(p.side_residual(pt.x), 0.0).sum())
    return abs(float(X)), Y, Bp
