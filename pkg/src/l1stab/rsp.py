"""Certification of the (restricted) weak range space property of order k.

For a sign pattern (J1, J2) a witness is ``eta = A^T nu + B^T h`` with
``h <= 0``, ``eta = 1`` on J1, ``eta = -1`` on J2 and ``|eta| <= 1``
elsewhere.  Only patterns with ``|J1| + |J2| = k`` are enumerated: a
witness for a size-k extension of a smaller pattern also serves the
smaller one.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import lp as lpmod

PATTERN_BUDGET = 10**6
WITNESS_TOL = 1e-8


class PatternBudgetExceeded(ValueError):
    pass


@dataclass(frozen=True)
class SignPattern:
    J1: tuple
    J2: tuple

    def __post_init__(self):
        if set(self.J1) & set(self.J2):
            raise ValueError("J1 and J2 must be disjoint")


@dataclass
class Witness:
    eta: np.ndarray
    nu: np.ndarray
    h: np.ndarray


@dataclass
class RspCertificate:
    k: int
    holds: bool
    witnesses: dict = field(default_factory=dict)
    failing: Optional[SignPattern] = None

    def to_json(self, one_based=True):
        off = 1 if one_based else 0
        failing = None
        if self.failing is not None:
            failing = [[i + off for i in self.failing.J1], [i + off for i in self.failing.J2]]
        return {"k": self.k, "holds": self.holds, "failing": failing,
                "witness_count": len(self.witnesses)}


def pattern_count(n, k):
    return math.comb(n, k) * 2**k


def sign_patterns(n, k):
    """All disjoint (J1, J2) with |J1| + |J2| = k, in a fixed order."""
    for J in itertools.combinations(range(n), k):
        for signs in itertools.product((1, -1), repeat=k):
            J1 = tuple(j for j, s in zip(J, signs) if s > 0)
            J2 = tuple(j for j, s in zip(J, signs) if s < 0)
            yield SignPattern(J1, J2)


def _as_matrix(B, n):
    if B is None:
        return np.zeros((0, n))
    B = np.asarray(B, dtype=float)
    return B.reshape(-1, n) if B.size else np.zeros((0, n))


def find_witness(A, B, J1, J2):
    """A witness for the pattern, or ``None`` when the LP is infeasible."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    B = _as_matrix(B, n)
    l = B.shape[0]
    # variables (nu free, g = -h >= 0): eta = A^T nu - B^T g
    K = np.hstack([A.T, -B.T])
    on = np.zeros(n, dtype=bool)
    on[list(J1)] = True
    on[list(J2)] = True
    target = np.zeros(n)
    target[list(J1)] = 1.0
    target[list(J2)] = -1.0
    off = ~on
    G = np.vstack([K[off], -K[off]])
    p = np.ones(2 * int(off.sum()))
    lower = np.concatenate([np.full(m, -np.inf), np.zeros(l)])
    prog = lpmod.LinearProgram(np.zeros(m + l), G, p, K[on], target[on], lower)
    res = lpmod.feasibility(prog)
    if not res.feasible:
        if res.status is lpmod.Status.NUMERICAL_FAILURE:
            raise RuntimeError("witness LP hit the iteration cap")
        return None
    nu, g = res.x[:m], res.x[m:]
    eta = K @ res.x
    return Witness(eta=eta, nu=nu, h=-g)


def certify_restricted(A, B, k, max_patterns=PATTERN_BUDGET):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[1]
    B = _as_matrix(B, n)
    if k < 0 or k > n:
        raise ValueError(f"order k must lie in [0, {n}]")
    if pattern_count(n, k) > max_patterns:
        raise PatternBudgetExceeded(
            f"{pattern_count(n, k)} patterns exceed the budget of {max_patterns}")
    cert = RspCertificate(k=k, holds=True)
    if k == 0:
        return cert
    for pat in sign_patterns(n, k):
        wit = find_witness(A, B, pat.J1, pat.J2)
        if wit is None:
            cert.holds = False
            cert.failing = pat
            return cert
        cert.witnesses[pat] = wit
    return cert


def certify_weak(A, k, max_patterns=PATTERN_BUDGET):
    return certify_restricted(A, None, k, max_patterns)


def witness_violation(A, B, pattern, wit):
    """Largest violation of the witness conditions for ``pattern``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[1]
    B = _as_matrix(B, n)
    eta = wit.eta
    viol = float(np.abs(eta - A.T @ wit.nu - B.T @ wit.h).max(initial=0.0))
    viol = max(viol, float(np.max(wit.h, initial=0.0)))
    J1, J2 = list(pattern.J1), list(pattern.J2)
    viol = max(viol, float(np.abs(eta[J1] - 1.0).max(initial=0.0)))
    viol = max(viol, float(np.abs(eta[J2] + 1.0).max(initial=0.0)))
    rest = np.ones(n, dtype=bool)
    rest[J1 + J2] = False
    viol = max(viol, float(np.max(np.abs(eta[rest]) - 1.0, initial=0.0)))
    return viol
