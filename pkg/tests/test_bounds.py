import math

import numpy as np
import pytest

from l1stab.bounds import (ConjugatePair, bound_rhs, compute_constants, compute_upsilon,
                           compute_upsilon_prime, compute_vartheta, corollary_rhs,
                           eps_prime_proxy, estimate_robinson, l1_distance, upsilon_hat)
from l1stab.l1solver import ThetaSystem, assemble_theta, theta_residual
from l1stab.polytope import build_p0
from l1stab.problem import ProblemData

INF = math.inf
I2 = np.eye(2)

# transcription of the two tables: zero pattern of (a1, a2, a3) -> constants in the max
TABLE_1 = {
    (0, 0, 1): {"U_inf_inf"},
    (0, 1, 0): {"U_11"},
    (1, 0, 0): {"theta_1"},
    (0, 1, 1): {"U_11", "U_inf_inf"},
    (1, 0, 1): {"U_inf_inf", "theta_1"},
    (1, 1, 0): {"U_11", "theta_1"},
    (1, 1, 1): {"U_11", "U_inf_inf", "theta_1"},
}
TABLE_2 = {
    (0, 0, 1): {"Up_inf"},
    (0, 1, 0): {"Up_1"},
    (1, 0, 0): {"theta_1"},
    (0, 1, 1): {"Up_1", "Up_inf"},
    (1, 0, 1): {"Up_inf", "theta_1"},
    (1, 1, 0): {"Up_1", "theta_1"},
    (1, 1, 1): {"Up_1", "Up_inf", "theta_1"},
}


def weights_for(pattern):
    w = np.array(pattern, dtype=float)
    return tuple(w / w.sum())


@pytest.mark.parametrize("values", [(2.0, 3.0, 5.0), (5.0, 3.0, 2.0), (3.0, 5.0, 2.0)])
def test_table_one_selection(values):
    named = dict(zip(("U_11", "U_inf_inf", "theta_1"), values))
    for pattern, names in TABLE_1.items():
        got = upsilon_hat(weights_for(pattern), named["U_11"], named["U_inf_inf"],
                          named["theta_1"])
        assert got == max(named[k] for k in names)


@pytest.mark.parametrize("values", [(2.0, 3.0, 5.0), (5.0, 3.0, 2.0), (3.0, 5.0, 2.0)])
def test_table_two_selection(values):
    named = dict(zip(("Up_1", "Up_inf", "theta_1"), values))
    for pattern, names in TABLE_2.items():
        got = upsilon_hat(weights_for(pattern), named["Up_1"], named["Up_inf"], named["theta_1"])
        assert got == max(named[k] for k in names)


def test_table_selection_through_constants(rng):
    A = rng.standard_normal((3, 6))
    U = rng.standard_normal((3, 4))
    B = rng.standard_normal((1, 6))
    for pattern in TABLE_1:
        a = weights_for(pattern)
        p = ProblemData(A=A, U=U, y=np.zeros(3), epsilon=0.1, a=a, B=B, b=np.ones(1))
        c = compute_constants(p)
        named = {"U_11": c.upsilon_11, "U_inf_inf": c.upsilon_inf_inf, "theta_1": c.vartheta_1}
        assert not c.prime
        assert c.upsilon_hat == max(named[k] for k in TABLE_1[pattern])
        q = ProblemData(A=A, U=U, y=np.zeros(3), epsilon=0.1, a=a)
        c = compute_constants(q)
        named = {"Up_1": compute_upsilon_prime(U, A, 1.0),
                 "Up_inf": compute_upsilon_prime(U, A, INF), "theta_1": c.vartheta_1}
        assert c.prime
        assert c.upsilon_hat == pytest.approx(max(named[k] for k in TABLE_2[pattern]))


def test_all_zero_weights_rejected():
    with pytest.raises(ValueError):
        upsilon_hat((0, 0, 0), 1, 1, 1)


@pytest.mark.parametrize("U, C, d, dhat, expected", [
    (I2, I2, 1.0, 1.0, 2.0),
    (I2, I2, INF, INF, 1.0),
    (2 * I2, I2, INF, INF, 0.5),
])
def test_upsilon_examples(U, C, d, dhat, expected):
    assert compute_upsilon(U, C, d, dhat) == pytest.approx(expected)


@pytest.mark.parametrize("C, c, expected", [(I2, 1.0, 2.0), (I2, INF, 1.0), (2 * I2, INF, 0.5)])
def test_vartheta_examples(C, c, expected):
    assert compute_vartheta(C, c) == pytest.approx(expected)


@pytest.mark.parametrize("d, expected", [(1.0, 2.0), (INF, 1.0)])
def test_upsilon_prime_examples(d, expected):
    assert compute_upsilon_prime(I2, I2, d) == pytest.approx(expected)


def test_upsilon_prime_is_tighter(rng):
    for _ in range(10):
        A = rng.standard_normal((3, 6))
        U = rng.standard_normal((3, 5))
        for d in (1.0, 2.0, INF):
            for dhat in (1.0, 2.0, INF):
                assert compute_upsilon_prime(U, A, d) <= compute_upsilon(U, A, d, dhat) * (1 + 1e-12)
        assert compute_upsilon_prime(U, A, 1.0) >= compute_upsilon_prime(U, A, INF)


def test_singular_subsets_are_skipped():
    U = np.array([[1.0, 2.0, 0.0], [0.0, 0.0, 1.0]])
    value, skipped = compute_upsilon(U, I2, INF, INF, return_skipped=True)
    assert skipped == 1
    assert value > 0


def test_conjugate_pair():
    assert ConjugatePair.of(1).p_conj == INF
    assert ConjugatePair.of(2).p_conj == 2
    with pytest.raises(ValueError):
        ConjugatePair(1.0, 1.0)


def test_robinson_examples():
    T = ThetaSystem([[1.0]], [1.0], np.zeros((0, 1)), [])
    assert l1_distance(T, [2.0]) / theta_residual(T, [2.0])[1] == pytest.approx(1.0)
    T = ThetaSystem([[1.0], [-1.0]], [1.0, 1.0], np.zeros((0, 1)), [])
    assert l1_distance(T, [3.0]) / theta_residual(T, [3.0])[1] == pytest.approx(1.0)
    T = ThetaSystem([[1.0, 1.0]], [0.0], np.zeros((0, 2)), [])
    assert l1_distance(T, [1.0, 1.0]) == pytest.approx(2.0)
    assert theta_residual(T, [1.0, 1.0])[1] == pytest.approx(2.0)


def test_robinson_estimate_monotone_in_samples(rng):
    A = rng.standard_normal((2, 4))
    p = ProblemData(A=A, U=I2, y=rng.standard_normal(2), epsilon=0.2, a=(1, 0, 0))
    T = assemble_theta(p, build_p0(2, 4))
    values = [estimate_robinson(T, s, seed=3) for s in (1, 3, 6)]
    assert values[0] <= values[1] <= values[2]
    assert values[0] > 0


def _feasible_problem(rng, l=1):
    A = rng.standard_normal((3, 6))
    B = rng.standard_normal((l, 6))
    x = np.zeros(6)
    x[[1, 4]] = [1.0, -2.0]
    p = ProblemData(A=A, U=rng.standard_normal((3, 4)), y=A @ x, epsilon=0.3, a=(0.5, 0.3, 0.2),
                    B=B, b=B @ x + 0.5)
    return p, x


def test_bound_rhs_trivial_case(rng):
    p, x = _feasible_problem(rng, l=0)
    const = compute_constants(p)
    out = bound_rhs(p, x, 2, const, eps_prime=0.1, feasible=True, sigma=1.5)
    assert out.total == pytest.approx(0.1 + 2 * 1.5 * p.epsilon * const.upsilon_hat)


def test_bound_rhs_vanishes_for_exact_sparse_point(rng):
    p, x = _feasible_problem(rng, l=0)
    p = ProblemData(A=p.A, U=p.U, y=p.y, epsilon=0.0, a=(1, 0, 0))
    const = compute_constants(p)
    assert bound_rhs(p, x, 2, const, feasible=True, sigma=4.0).total == 0.0


def test_bound_breakdown_sums(rng):
    p, _ = _feasible_problem(rng)
    const = compute_constants(p, 2.0, INF, 1.0)
    for _ in range(10):
        x = rng.standard_normal(6)
        out = bound_rhs(p, x, 1, const, eps_prime=0.05, sigma=2.0)
        assert set(out.terms) == {"two_sigma_k", "eps_upsilon", "phi", "Bxb", "Bx_plus", "excess"}
        assert abs(out.eps_prime + 2 * out.sigma * sum(out.terms.values()) - out.total) <= 1e-12


def test_feasible_form_rejects_infeasible_point(rng):
    p, x = _feasible_problem(rng)
    const = compute_constants(p)
    with pytest.raises(ValueError):
        bound_rhs(p, x + 10, 1, const, feasible=True, sigma=1.0)


def test_feasible_form_drops_penalties(rng):
    p, x = _feasible_problem(rng)
    const = compute_constants(p)
    general = bound_rhs(p, x, 1, const, sigma=1.0)
    feasible = corollary_rhs(p, x, 1, const, sigma=1.0)
    assert general.total == pytest.approx(feasible.total)
    assert "excess" not in feasible.terms


def test_eps_prime_proxy():
    p = ProblemData(A=I2, U=I2, y=[1, 0], epsilon=0.5, a=(0.5, 0.5, 0))
    assert eps_prime_proxy(p, 0.1) == pytest.approx(0.1)
    q = ProblemData(A=I2, U=I2, y=[1, 0], epsilon=0.5, a=(0, 0.5, 0.5))
    assert eps_prime_proxy(q, 0.1) == 0.0


def test_constants_serialize():
    p = ProblemData(A=I2, U=I2, y=[1, 0], epsilon=0.5, a=(1, 0, 0))
    d = compute_constants(p, INF, INF, 1.0).to_dict()
    assert d["c"] == "inf" and d["sigma_est"] is None
