"""Closed-form weighted integrals checked against analytic values and dense Gauss."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toricshrink.polyhedra import box, from_halfspaces, half_line, interval
from toricshrink.quadrature import (
    DivergentWeight,
    Simplex,
    UnsupportedMoment,
    divided_difference_exp,
    exp_integral_simplex,
    gauss_integral_simplex,
    stable_sum,
    moment_integral_simplex,
    plan,
)


def random_simplex(rng, n):
    while True:
        V = rng.uniform(-3, 3, size=(n + 1, n))
        S = Simplex(tuple(map(tuple, V)))
        if S.volume > 1e-2:
            return S


# ---------------------------------------------------------------------------
# divided differences

def test_dd_single_node():
    assert divided_difference_exp([0.3]) == pytest.approx(math.exp(0.3), rel=1e-15)


def test_dd_two_distinct_nodes():
    a, b = 0.2, 1.7
    expected = (math.exp(a) - math.exp(b)) / (a - b)
    assert divided_difference_exp([a, b]) == pytest.approx(expected, rel=1e-14)


def test_dd_confluent_nodes():
    # all nodes equal: exp[t,...,t] (m+1 copies) = e^t / m!
    for m in range(6):
        val = divided_difference_exp([0.4] * (m + 1))
        assert val == pytest.approx(math.exp(0.4) / math.factorial(m), rel=1e-13)


def test_dd_regime_boundary_consistency():
    # values straddling the series/matrix switch must agree
    rng = np.random.default_rng(0)
    for _ in range(30):
        m = rng.integers(1, 6)
        center = rng.uniform(-5, 5)
        for spread in (0.99, 1.01):
            nodes = center + rng.uniform(-spread, spread, size=m + 1)
            nodes[0] = center - spread
            nodes[1] = center + spread
            v1 = divided_difference_exp(nodes)
            Z = np.diag(nodes.astype(float)) + np.diag(np.ones(m), 1)
            from scipy.linalg import expm

            v2 = float(expm(Z)[0, m])
            assert v1 == pytest.approx(v2, rel=1e-10)


@given(st.lists(st.floats(-8, 8), min_size=2, max_size=5), st.randoms())
@settings(max_examples=80, deadline=None)
def test_dd_symmetric_under_permutation(nodes, rnd):
    v1 = divided_difference_exp(nodes)
    shuffled = list(nodes)
    rnd.shuffle(shuffled)
    v2 = divided_difference_exp(shuffled)
    assert v2 == pytest.approx(v1, rel=1e-9, abs=1e-300)


def test_dd_positive():
    rng = np.random.default_rng(1)
    for _ in range(50):
        nodes = rng.uniform(-10, 10, size=rng.integers(1, 7))
        assert divided_difference_exp(nodes) > 0.0


# ---------------------------------------------------------------------------
# simplex integrals

def test_unit_interval_exponential():
    S = Simplex(((0.0,), (1.0,)))
    for b in (0.3, -1.2, 4.0):
        expected = (1.0 - math.exp(-b)) / b
        assert exp_integral_simplex(S, [b]) == pytest.approx(expected, rel=1e-13)


def test_standard_triangle_area_and_first_moment():
    S = Simplex(((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)))
    assert exp_integral_simplex(S, [0.0, 0.0]) == pytest.approx(0.5, rel=1e-14)
    assert moment_integral_simplex(S, [0.0, 0.0], (1, 0)) == pytest.approx(
        1.0 / 6.0, rel=1e-12
    )
    assert moment_integral_simplex(S, [0.0, 0.0], (1, 1)) == pytest.approx(
        1.0 / 24.0, rel=1e-12
    )
    assert moment_integral_simplex(S, [0.0, 0.0], (2, 0)) == pytest.approx(
        1.0 / 12.0, rel=1e-12
    )


def test_closed_form_matches_dense_gauss_on_random_simplices():
    rng = np.random.default_rng(42)
    checked = 0
    for n in (1, 2, 3):
        for _ in range(17):
            S = random_simplex(rng, n)
            b = rng.uniform(-2, 2, size=n)
            exact = exp_integral_simplex(S, b)
            dense = gauss_integral_simplex(S, lambda X: np.exp(-(X @ b)))
            assert exact == pytest.approx(dense, rel=1e-8)
            checked += 1
    assert checked >= 50


def test_moments_match_dense_gauss():
    rng = np.random.default_rng(9)
    for n in (1, 2, 3):
        for _ in range(6):
            S = random_simplex(rng, n)
            b = rng.uniform(-1.5, 1.5, size=n)
            alphas = [tuple(int(i == j) for i in range(n)) for j in range(n)]
            alphas += [
                tuple((i == j) + (i == k) for i in range(n))
                for j in range(n)
                for k in range(j, n)
            ]
            for alpha in alphas:
                exact = moment_integral_simplex(S, b, alpha)

                def f(X, alpha=alpha):
                    out = np.exp(-(X @ b))
                    for i, a in enumerate(alpha):
                        out = out * X[:, i] ** a
                    return out

                dense = gauss_integral_simplex(S, f)
                assert exact == pytest.approx(dense, rel=1e-8, abs=1e-12)


def test_translation_covariance():
    rng = np.random.default_rng(4)
    S = random_simplex(rng, 2)
    b = np.array([0.7, -0.4])
    c = np.array([1.3, -2.2])
    shifted = Simplex(tuple(tuple(np.array(p) + c) for p in S.points))
    lhs = exp_integral_simplex(shifted, b)
    rhs = math.exp(-float(b @ c)) * exp_integral_simplex(S, b)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_unsupported_moment_orders():
    S = Simplex(((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)))
    with pytest.raises(UnsupportedMoment):
        moment_integral_simplex(S, [0.0, 0.0], (1, 2))
    with pytest.raises(UnsupportedMoment):
        moment_integral_simplex(S, [0.0, 0.0], (3,))


# ---------------------------------------------------------------------------
# plans

def test_bounded_plan_square():
    P = box([(-2, 2), (-2, 2)])
    pl = plan(P, [0.0, 0.0])
    assert pl.tail_bound == 0.0 and pl.truncation is None
    assert pl.exp_integral() == pytest.approx(16.0, rel=1e-12)
    b = [1.0, 2.0]
    val = plan(P, b).exp_integral()
    f1 = (math.exp(2) - math.exp(-2)) / 1.0
    f2 = (math.exp(4) - math.exp(-4)) / 2.0
    assert val == pytest.approx(f1 * f2, rel=1e-11)


def test_half_line_plan_matches_analytic():
    P = half_line(-2)
    pl = plan(P, [0.5], tol=1e-12)
    assert pl.truncation is not None and pl.tail_bound <= 1e-12
    assert pl.exp_integral() == pytest.approx(2.0 * math.e, rel=1e-10)
    # first moment vanishes exactly at b = 1/2: the soliton normalization
    assert pl.moment((1,)) == pytest.approx(0.0, abs=1e-9)
    assert pl.moment((2,)) == pytest.approx(8.0 * math.e, rel=1e-9)


def test_quadrant_plan_is_product():
    P = box([(-2, None), (-2, None)])
    pl = plan(P, [0.5, 0.5], tol=1e-10)
    assert pl.exp_integral() == pytest.approx((2.0 * math.e) ** 2, rel=1e-8)


def test_tail_bound_is_honest():
    P = half_line(-2)
    for tol in (1e-6, 1e-9):
        pl = plan(P, [0.5], tol=tol)
        err = abs(pl.exp_integral() - 2.0 * math.e)
        assert err <= pl.tail_bound + 1e-11
        assert pl.tail_bound <= tol


def test_fixed_truncation():
    P = half_line(-2)
    pl = plan(P, [0.5], truncation=12.0)
    assert pl.truncation == 12.0
    err = abs(pl.exp_integral() - 2.0 * math.e)
    assert err <= pl.tail_bound + 1e-11
    with pytest.raises(ValueError, match="truncation"):
        plan(P, [0.5], truncation=-2.0)


def test_divergent_weight_reports_ray():
    P = half_line(-2)
    for b in ([-1.0], [0.0]):
        with pytest.raises(DivergentWeight) as ei:
            plan(P, b)
        assert ei.value.ray == (1,)


def test_divergent_on_improper_polyhedron():
    strip = from_halfspaces(2, [((1, 0), 1, 2), ((-1, 0), 1, 2)])
    with pytest.raises(DivergentWeight):
        plan(strip, [1.0, 0.0])


def test_plan_deterministic():
    P = box([(-2, None), (-2, 2)])
    p1 = plan(P, [0.7, 0.1], tol=1e-9)
    p2 = plan(P, [0.7, 0.1], tol=1e-9)
    assert p1.simplices == p2.simplices
    assert p1.exp_integral() == p2.exp_integral()


def test_gauss_agrees_with_closed_form_on_plan():
    P = interval(-2, 2)
    pl = plan(P, [0.8])
    via_gauss = pl.integrate(lambda X: np.ones(len(X)))
    assert via_gauss == pytest.approx(pl.exp_integral(), rel=1e-12)


# ---------------------------------------------------------------------------
# summation

def test_stable_sum_exact():
    assert stable_sum([1e16, 1.0, -1e16]) == 1.0
    rng = np.random.default_rng(2)
    vals = list(rng.uniform(-1, 1, size=1000))
    assert stable_sum(vals) == math.fsum(vals)
