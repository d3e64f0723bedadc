"""Problem instances for mixed-residual sparse recovery.

An instance fixes ``A (m x n)``, ``B (l x n)``, ``U (m x h)``, ``y``, ``b``,
a tolerance ``epsilon`` and weights ``a = (a1, a2, a3)`` for the constraint

    a1 |y - Ax|_2 + a2 |U^T(Ax - y)|_inf + a3 |U^T(Ax - y)|_1 <= epsilon,
    Bx <= b.
"""

import enum
import json
from dataclasses import dataclass

import numpy as np

from .linalg import full_row_rank, lp_norm

WEIGHT_TOL = 1e-12


class SpecialCase(str, enum.Enum):
    D1 = "D1"  # basis pursuit, y = Ax
    D2 = "D2"  # quadratically constrained basis pursuit
    D3 = "D3"  # l1-residual constraint
    D4 = "D4"  # Dantzig-selector type
    GENERAL = "GENERAL"


SPECIAL_WEIGHTS = {
    SpecialCase.D1: (1.0, 0.0, 0.0),
    SpecialCase.D2: (1.0, 0.0, 0.0),
    SpecialCase.D3: (0.0, 0.0, 1.0),
    SpecialCase.D4: (0.0, 1.0, 0.0),
}


def _matrix(M, cols=None):
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return np.zeros((0, cols if cols is not None else 0))
    return np.atleast_2d(M)


@dataclass(frozen=True)
class ProblemData:
    A: np.ndarray
    U: np.ndarray
    y: np.ndarray
    epsilon: float
    a: tuple
    B: np.ndarray = None
    b: np.ndarray = None

    def __post_init__(self):
        A = _matrix(self.A)
        set_ = object.__setattr__
        set_(self, "A", A)
        set_(self, "U", _matrix(self.U))
        set_(self, "y", np.asarray(self.y, dtype=float).ravel())
        set_(self, "B", _matrix(self.B if self.B is not None else [], A.shape[1]))
        set_(self, "b", np.asarray(self.b if self.b is not None else [], dtype=float).ravel())
        set_(self, "epsilon", float(self.epsilon))
        set_(self, "a", tuple(float(w) for w in self.a))

    m = property(lambda self: self.A.shape[0])
    n = property(lambda self: self.A.shape[1])
    h = property(lambda self: self.U.shape[1])
    l = property(lambda self: self.B.shape[0])

    @property
    def C(self):
        """Stacked ``[A; B]``."""
        return np.vstack([self.A, self.B])

    def _check_x(self, x):
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.n:
            raise ValueError(f"x has length {x.size}, expected {self.n}")
        return x

    def residual_phi(self, x):
        """``U^T (Ax - y)``."""
        x = self._check_x(x)
        return self.U.T @ (self.A @ x - self.y)

    def constraint_value(self, x):
        x = self._check_x(x)
        a1, a2, a3 = self.a
        r = self.y - self.A @ x
        phi = -(self.U.T @ r)
        return float(a1 * lp_norm(r, 2) + a2 * lp_norm(phi, np.inf) + a3 * lp_norm(phi, 1))

    def side_residual(self, x):
        """``Bx - b`` (empty when there are no side constraints)."""
        x = self._check_x(x)
        return self.B @ x - self.b

    def is_feasible(self, x, tol=1e-9):
        ok = self.constraint_value(x) <= self.epsilon + tol
        return bool(ok and np.all(self.side_residual(x) <= tol))

    def validate(self):
        return validate(self)

    def to_dict(self):
        d = {"A": self.A.tolist(), "U": self.U.tolist(), "y": self.y.tolist(),
             "epsilon": self.epsilon, "a": list(self.a)}
        if self.l:
            d["B"] = self.B.tolist()
            d["b"] = self.b.tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        missing = [k for k in ("A", "U", "y", "epsilon", "a") if k not in d]
        if missing:
            raise ValueError(f"problem is missing keys: {', '.join(missing)}")
        if len(d["a"]) != 3:
            raise ValueError("'a' must hold three weights")
        return cls(A=d["A"], U=d["U"], y=d["y"], epsilon=d["epsilon"], a=d["a"],
                   B=d.get("B"), b=d.get("b"))


def validate(p):
    """Every violated instance invariant as a message; empty list means valid."""
    issues = []
    m, n, h, l = p.m, p.n, p.h, p.l
    for name in ("A", "U", "B", "y", "b"):
        if not np.all(np.isfinite(getattr(p, name))):
            issues.append(f"{name} has non-finite entries")
    if p.U.shape[0] != m:
        issues.append(f"U has {p.U.shape[0]} rows, expected {m}")
    if p.y.size != m:
        issues.append(f"y has length {p.y.size}, expected {m}")
    if p.B.shape[1] != n:
        issues.append(f"B has {p.B.shape[1]} columns, expected {n}")
    if p.b.size != l:
        issues.append(f"b has length {p.b.size}, expected {l}")
    if any(w < 0 for w in p.a):
        issues.append("weights must be nonnegative")
    if abs(sum(p.a) - 1.0) > WEIGHT_TOL:
        issues.append("weights sum != 1")
    if not p.epsilon >= 0:
        issues.append("epsilon must be >= 0")
    if m > n:
        issues.append("need m <= n")
    if l >= n and l > 0:
        issues.append("need l < n")
    if m > h:
        issues.append("need m <= h")
    if not full_row_rank(p.A):
        issues.append("A rank-deficient")
    if p.U.shape[0] == m and not full_row_rank(p.U):
        issues.append("U rank-deficient")
    if l and p.B.shape[1] == n and not full_row_rank(p.C):
        issues.append("C = [A; B] rank-deficient")
    return issues


def best_k_term_error(x, k):
    """``sigma_k(x)_1``: sum of the n - k smallest magnitudes of x."""
    a = np.sort(np.abs(np.asarray(x, dtype=float).ravel()))
    if k < 0 or k > a.size:
        raise ValueError(f"k must lie in [0, {a.size}], got {k}")
    return float(a[: a.size - k].sum())


def make_special_case(tag, A, U, y, epsilon=0.0):
    tag = SpecialCase(tag)
    if tag is SpecialCase.GENERAL:
        raise ValueError("GENERAL has no fixed weights; build ProblemData directly")
    if tag is SpecialCase.D1:
        epsilon = 0.0
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    return ProblemData(A=A, U=U, y=y, epsilon=epsilon, a=SPECIAL_WEIGHTS[tag])


def load_problem(path):
    with open(path) as fh:
        return ProblemData.from_dict(json.load(fh))
