import numpy as np
import pytest

from l1stab.rsp import (PatternBudgetExceeded, SignPattern, certify_restricted, certify_weak,
                        find_witness, pattern_count, sign_patterns, witness_violation)

ONES = np.array([[1.0, 1.0]])


def test_sum_row_order_one_holds():
    assert certify_weak(ONES, 1).holds


def test_sum_row_order_two_fails():
    cert = certify_weak(ONES, 2)
    assert not cert.holds
    assert cert.failing == SignPattern((0,), (1,))
    assert cert.to_json()["failing"] == [[1], [2]]


def test_side_constraints_rescue_order_two():
    cert = certify_restricted(ONES, -np.eye(2), 2)
    assert cert.holds
    for pat, wit in cert.witnesses.items():
        assert witness_violation(ONES, -np.eye(2), pat, wit) <= 1e-8


@pytest.mark.parametrize("n", [1, 2, 4])
def test_identity_holds_at_every_order(n):
    for k in range(n + 1):
        assert certify_weak(np.eye(n), k).holds


def test_order_zero_is_vacuous():
    cert = certify_weak(np.zeros((1, 3)), 0)
    assert cert.holds and cert.witnesses == {}


def test_pattern_enumeration():
    pats = list(sign_patterns(4, 2))
    assert len(pats) == pattern_count(4, 2) == 24
    assert len(set(pats)) == 24
    assert all(len(p.J1) + len(p.J2) == 2 for p in pats)


def test_pattern_disjointness():
    with pytest.raises(ValueError):
        SignPattern((0,), (0,))


def test_budget():
    with pytest.raises(PatternBudgetExceeded):
        certify_weak(np.eye(30), 10)
    with pytest.raises(PatternBudgetExceeded):
        certify_weak(np.eye(4), 2, max_patterns=10)


def test_order_out_of_range():
    with pytest.raises(ValueError):
        certify_weak(np.eye(2), 3)


def test_random_order_one_witnesses(rng):
    A = rng.standard_normal((4, 8))
    cert = certify_weak(A, 1)
    assert cert.holds
    assert len(cert.witnesses) == 16
    for pat, wit in cert.witnesses.items():
        assert witness_violation(A, None, pat, wit) <= 1e-8


def test_witness_with_side_constraints(rng):
    A = rng.standard_normal((3, 6))
    B = rng.standard_normal((2, 6))
    wit = find_witness(A, B, (0,), (3,))
    if wit is not None:
        assert np.all(wit.h <= 1e-12)
        assert witness_violation(A, B, SignPattern((0,), (3,)), wit) <= 1e-8


def test_failing_pattern_is_infeasible_for_scipy(rng):
    from scipy.optimize import linprog
    A = rng.standard_normal((2, 6))
    cert = certify_weak(A, 2)
    assert not cert.holds
    J1, J2 = cert.failing.J1, cert.failing.J2
    on = list(J1) + list(J2)
    off = [j for j in range(6) if j not in on]
    target = [1.0] * len(J1) + [-1.0] * len(J2)
    res = linprog(np.zeros(2), A_ub=np.vstack([A.T[off], -A.T[off]]), b_ub=np.ones(2 * len(off)),
                  A_eq=A.T[on], b_eq=target, bounds=(None, None), method="highs")
    assert res.status == 2


def test_monotone_in_order(rng):
    for _ in range(10):
        A = rng.standard_normal((int(rng.integers(2, 5)), 6))
        held = [certify_weak(A, k).holds for k in range(1, 4)]
        for lo, hi in zip(held, held[1:]):
            assert lo or not hi


def test_weak_equals_restricted_without_b(rng):
    A = rng.standard_normal((3, 6))
    for k in (1, 2):
        a, b = certify_weak(A, k), certify_restricted(A, np.zeros((0, 6)), k)
        assert a.holds == b.holds and a.failing == b.failing
        assert a.witnesses.keys() == b.witnesses.keys()
