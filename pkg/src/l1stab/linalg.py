"""Dense norms, induced operator norms and row-space solves."""

import itertools
import math

import numpy as np
import scipy.linalg as scilin

MAX_ENUM_COLS = 25
RANK_TOL = 1e-10


def _check_p(p):
    p = float(p)
    if not (p >= 1.0):
        raise ValueError(f"norm exponent must be >= 1 or inf, got {p}")
    return p


def conjugate(p):
    """Hoelder conjugate exponent, with 1 <-> inf."""
    p = _check_p(p)
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def lp_norm(x, p):
    x = np.asarray(x, dtype=float).ravel()
    p = _check_p(p)
    if x.size == 0:
        raise ValueError("lp_norm of an empty vector")
    a = np.abs(x)
    if math.isinf(p):
        return float(a.max())
    if p == 1.0:
        return float(a.sum())
    if p == 2.0:
        return float(np.sqrt(a @ a))
    scale = a.max()
    if scale == 0.0:
        return 0.0
    return float(scale * np.sum((a / scale) ** p) ** (1.0 / p))


def _columnwise_norm(M, q):
    q = _check_p(q)
    if math.isinf(q):
        return np.abs(M).max(axis=0)
    if q == 1.0:
        return np.abs(M).sum(axis=0)
    return np.array([lp_norm(col, q) for col in M.T])


def _sign_vectors(n, chunk=1 << 16):
    """Yield blocks of sign vectors in {+1,-1}^n with the first entry fixed to +1.

    Fixing one sign halves the work; every norm used here is even.
    """
    if n == 0:
        yield np.zeros((1, 0))
        return
    total = 1 << (n - 1)
    bits = np.arange(n - 1)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        free = 1.0 - 2.0 * ((idx[:, None] >> bits) & 1)
        yield np.hstack([np.ones((idx.size, 1)), free])


def _inf_to_q(M, q):
    rows, cols = M.shape
    if cols > MAX_ENUM_COLS:
        raise ValueError(f"sign enumeration needs <= {MAX_ENUM_COLS} columns, got {cols}")
    if rows == 0 or cols == 0:
        return 0.0
    best = 0.0
    for S in _sign_vectors(cols):
        best = max(best, float(_columnwise_norm(M @ S.T, q).max()))
    return best


def induced_norm(M, p, q):
    """Exact ``sup_{|x|_p <= 1} |Mx|_q``.

    Supported: p = 1 or q = inf in closed form, p = inf or q = 1 by sign
    enumeration (directly or through the transpose), and p = q = 2.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    p, q = _check_p(p), _check_p(q)
    if M.size == 0:
        return 0.0
    if p == 1.0:
        return float(_columnwise_norm(M, q).max())
    if math.isinf(q):
        return float(_columnwise_norm(M.T, conjugate(p)).max())
    if math.isinf(p):
        return _inf_to_q(M, q)
    if q == 1.0:
        # ||M||_{p->1} = ||M^T||_{inf->p'}
        return _inf_to_q(M.T, conjugate(p))
    if p == 2.0 and q == 2.0:
        return float(np.linalg.norm(M, 2))
    raise ValueError(f"unsupported induced norm pair ({p} -> {q})")


def full_row_rank(M, tol=RANK_TOL):
    """Gaussian elimination with partial pivoting on the rows of ``M``."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    rows, cols = M.shape
    if rows == 0:
        return True
    if rows > cols:
        return False
    scale = np.abs(M).max()
    if scale == 0.0:
        return False
    # eliminate column-wise on M^T; column j dependent => no pivot left
    W = M.T.copy()
    for j in range(rows):
        piv = j + int(np.argmax(np.abs(W[j:, j])))
        if abs(W[piv, j]) <= tol * scale:
            return False
        W[[j, piv]] = W[[piv, j]]
        W[j + 1:] -= np.outer(W[j + 1:, j] / W[j, j], W[j])
    return True


def row_space_solve(C, eta):
    """Return ``(C C^T)^{-1} C eta`` via a Cholesky solve."""
    C = np.atleast_2d(np.asarray(C, dtype=float))
    eta = np.asarray(eta, dtype=float).ravel()
    if C.shape[1] != eta.size:
        raise ValueError("dimension mismatch between C and eta")
    if not full_row_rank(C):
        raise np.linalg.LinAlgError("C is rank deficient")
    factor = scilin.cho_factor(C @ C.T)
    return scilin.cho_solve(factor, C @ eta)


def row_space_operator(C):
    """The matrix ``(C C^T)^{-1} C`` itself, formed by a Cholesky solve."""
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if not full_row_rank(C):
        raise np.linalg.LinAlgError("C is rank deficient")
    factor = scilin.cho_factor(C @ C.T)
    return scilin.cho_solve(factor, C)


def invertible_subsets(U, det_tol=1e-10):
    """Invertible m x m column subsets of U in lexicographic order.

    Returns ``(subsets, skipped)`` where ``subsets`` holds ``(cols, inverse)``
    pairs and ``skipped`` counts subsets with ``|det| <= det_tol``.
    """
    U = np.atleast_2d(np.asarray(U, dtype=float))
    m, h = U.shape
    subsets = []
    skipped = 0
    for cols in itertools.combinations(range(h), m):
        sub = U[:, cols]
        if abs(np.linalg.det(sub)) <= det_tol:
            skipped += 1
            continue
        subsets.append((cols, np.linalg.inv(sub)))
    return subsets, skipped
