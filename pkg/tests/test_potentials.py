"""Potentials: canonical values, grid corrections, Legendre duality, detectors."""

import math

import numpy as np
import pytest

from toricshrink.polyhedra import box, half_line, interval, vertices
from toricshrink.potentials import (
    BoundaryReport,
    CanonicalPotential,
    CorrectedPotential,
    GridCorrection,
    NoConvergence,
    NotConvexHere,
    OutOfDomain,
    boundary_density,
    check_boundary_conditions,
    check_space_E,
    differentiation_matrix,
    guillemin_potential,
    kahler_potential_canonical,
    legendre,
    legendre_inverse,
    lobatto_nodes,
    metric,
)

SQ = box([(-2, 2), (-2, 2)])


def fd_gradient(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


# ---------------------------------------------------------------------------
# canonical potential

def test_canonical_interval_values():
    u = guillemin_potential(interval(-2, 2))
    assert u.value([0.0]) == pytest.approx(2.0 * math.log(2.0), rel=1e-14)
    assert u.gradient([0.0])[0] == pytest.approx(0.0, abs=1e-15)
    assert u.hessian([0.0])[0, 0] == pytest.approx(0.5, rel=1e-14)
    assert u.gradient([1.0])[0] == pytest.approx(0.5 * math.log(3.0), rel=1e-13)


def test_canonical_derivatives_match_finite_differences():
    rng = np.random.default_rng(0)
    for P in (SQ, half_line(-2), interval(-2, 2)):
        u = guillemin_potential(P)
        for x in P.sample_interior(rng, 6):
            g = u.gradient(x)
            assert np.allclose(g, fd_gradient(u.value, x), rtol=1e-6, atol=1e-8)
            H = u.hessian(x)
            Hfd = np.array([fd_gradient(lambda z: u.gradient(z)[i], x)
                            for i in range(P.dim)])
            assert np.allclose(H, Hfd, rtol=1e-5, atol=1e-7)


def test_canonical_out_of_domain():
    u = guillemin_potential(interval(-2, 2))
    with pytest.raises(OutOfDomain):
        u.value([2.0])
    with pytest.raises(OutOfDomain):
        u.value([3.0])


def test_batch_evaluation_shapes():
    u = guillemin_potential(SQ)
    X = np.zeros((5, 2))
    assert u.value(X).shape == (5,)
    assert u.gradient(X).shape == (5, 2)
    assert u.hessian(X).shape == (5, 2, 2)


def test_dual_potential_is_legendre_dual_value():
    rng = np.random.default_rng(1)
    P = interval(-2, 2)
    u = guillemin_potential(P)
    for x in P.sample_interior(rng, 8):
        pair = legendre(u, x)
        assert kahler_potential_canonical(P, x) == pytest.approx(
            pair.dual_value, rel=1e-12, abs=1e-12
        )


# ---------------------------------------------------------------------------
# grid corrections

def test_grid_correction_reproduces_polynomial_1d():
    f = lambda x: 0.3 * x[0] ** 3 - x[0] + 2.0
    g = GridCorrection.from_function(f, [(-2.0, 2.0)], [9])
    rng = np.random.default_rng(2)
    for _ in range(10):
        x = rng.uniform(-2, 2, size=1)
        assert g.value(x) == pytest.approx(f(x), rel=1e-12, abs=1e-12)
        assert g.gradient(x)[0] == pytest.approx(0.9 * x[0] ** 2 - 1.0, rel=1e-10,
                                                 abs=1e-10)
        assert g.hessian(x)[0, 0] == pytest.approx(1.8 * x[0], rel=1e-9, abs=1e-9)


def test_grid_correction_reproduces_polynomial_2d():
    f = lambda x: x[0] ** 2 * x[1] + 0.5 * x[1] ** 2 - x[0]
    g = GridCorrection.from_function(f, [(-2.0, 2.0), (-1.0, 3.0)], [7, 7])
    rng = np.random.default_rng(3)
    for _ in range(10):
        x = np.array([rng.uniform(-2, 2), rng.uniform(-1, 3)])
        assert g.value(x) == pytest.approx(f(x), rel=1e-11, abs=1e-11)
        gx = np.array([2 * x[0] * x[1] - 1.0, x[0] ** 2 + x[1]])
        assert np.allclose(g.gradient(x), gx, rtol=1e-9, atol=1e-9)
        H = np.array([[2 * x[1], 2 * x[0]], [2 * x[0], 1.0]])
        assert np.allclose(g.hessian(x), H, rtol=1e-8, atol=1e-8)


def test_grid_correction_json_roundtrip():
    g = GridCorrection.from_function(lambda x: math.sin(x[0]), [(-2.0, 2.0)], [12])
    d = g.to_dict()
    h = GridCorrection.from_dict(d)
    assert np.allclose(g.values, h.values)
    x = np.array([0.37])
    assert h.value(x) == pytest.approx(g.value(x), rel=1e-14)
    with pytest.raises(ValueError, match="kind"):
        GridCorrection.from_dict({"kind": "spline", "axes": [[0, 1]], "values": [0, 0]})


def test_grid_correction_validation():
    with pytest.raises(ValueError):
        GridCorrection([np.array([0.0, 1.0])], np.zeros(3))
    with pytest.raises(ValueError):
        GridCorrection([np.array([1.0, 0.0])], np.zeros(2))


def test_lobatto_nodes_and_differentiation():
    xs = lobatto_nodes(-2.0, 2.0, 9)
    assert xs[0] == -2.0 and xs[-1] == 2.0
    assert np.all(np.diff(xs) > 0)
    D = differentiation_matrix(xs)
    p = 0.5 * xs**3 - 2.0 * xs
    dp = 1.5 * xs**2 - 2.0
    assert np.allclose(D @ p, dp, atol=1e-10)


# ---------------------------------------------------------------------------
# Legendre transform

def test_legendre_roundtrip_interval():
    P = interval(-2, 2)
    u = guillemin_potential(P)
    rng = np.random.default_rng(4)
    for x in P.sample_interior(rng, 10):
        pair = legendre(u, x)
        back = legendre_inverse(u, pair.y)
        assert np.allclose(back.x, x, atol=1e-9)
        assert back.dual_value == pytest.approx(pair.dual_value, rel=1e-9)


def test_legendre_roundtrip_square_with_correction():
    s = GridCorrection.from_function(
        lambda x: 0.05 * (x[0] ** 2 - x[0] * x[1]), [(-2.0, 2.0), (-2.0, 2.0)], [6, 6]
    )
    u = CorrectedPotential(SQ, s)
    rng = np.random.default_rng(5)
    for x in SQ.sample_interior(rng, 6):
        y = u.gradient(x)
        back = legendre_inverse(u, y)
        assert np.allclose(back.x, x, atol=1e-8)


def test_legendre_inverse_hits_any_target():
    # gradient image of the canonical potential covers R^n
    u = guillemin_potential(interval(-2, 2))
    for y in (-8.0, -1.0, 0.0, 3.0, 11.0):
        pair = legendre_inverse(u, [y])
        assert u.gradient(pair.x)[0] == pytest.approx(y, abs=1e-7)


# ---------------------------------------------------------------------------
# metric

def test_metric_data_consistency():
    u = guillemin_potential(SQ)
    m = metric(u, [0.3, -0.7])
    assert np.allclose(m.hessian @ m.inverse, np.eye(2), atol=1e-12)
    assert m.det == pytest.approx(np.linalg.det(m.hessian), rel=1e-12)


def test_metric_rejects_nonconvex_point():
    s = GridCorrection.from_function(lambda x: -5.0 * x[0] ** 2, [(-2.0, 2.0)], [5])
    u = CorrectedPotential(interval(-2, 2), s)
    with pytest.raises(NotConvexHere):
        metric(u, [0.0])


# ---------------------------------------------------------------------------
# boundary detector

FIVE = [
    interval(-2, 2),
    interval(-2, "2/3", 1, 3),
    half_line(-2),
    box([(-2, 2), (-2, 2)]),
    box([(-2, None), (-2, None)]),
]


def test_canonical_passes_boundary_conditions():
    for P in FIVE:
        rep = check_boundary_conditions(P, guillemin_potential(P))
        assert rep.ok, f"canonical potential flagged on {P}"


def test_smooth_bump_passes_boundary_conditions():
    for P in FIVE:
        if P.dim == 1:
            lo = float(min(v.point_float[0] for v in vertices(P)))
            dom = [(lo, lo + 6.0)]
            s = GridCorrection.from_function(
                lambda x: 0.05 * math.exp(-x[0] ** 2), dom, [10]
            )
        else:
            dom = [(-2.0, 2.0), (-2.0, 2.0)]
            s = GridCorrection.from_function(
                lambda x: 0.05 * math.exp(-x[0] ** 2 - x[1] ** 2), dom, [8, 8]
            )
        rep = check_boundary_conditions(P, CorrectedPotential(P, s))
        assert rep.ok


class _DoubledLog:
    """u = 2 u_P: the correction equals u_P itself, with boundary log terms."""

    def __init__(self, P):
        self.polyhedron = P
        self.correction = CanonicalPotential(P)

    def value(self, x):
        return 2.0 * self.correction.value(x)

    def gradient(self, x):
        return 2.0 * self.correction.gradient(x)

    def hessian(self, x):
        return 2.0 * self.correction.hessian(x)


def test_doubled_log_fails_detector():
    for P in FIVE:
        rep = check_boundary_conditions(P, _DoubledLog(P))
        assert not rep.ok
        # the failure is in the correction growth, not the density
        assert not rep.correction_ok


def test_boundary_density_value_interval():
    # for u_P on [-2,2]: det Hess = 2/(L0 L1), so the density is 2
    P = interval(-2, 2)
    u = guillemin_potential(P)
    for x in (-1.5, 0.0, 1.2):
        assert boundary_density(P, u, [x]) == pytest.approx(2.0, rel=1e-12)


# ---------------------------------------------------------------------------
# admissible space

def test_canonical_in_space_on_half_line():
    P = half_line(-2)
    rep = check_space_E(P, guillemin_potential(P), [0.5])
    assert rep.in_space
    assert rep.hessian_positive and rep.gradient_surjective


def test_canonical_in_space_on_square():
    rep = check_space_E(SQ, guillemin_potential(SQ), [0.0, 0.0])
    assert rep.in_space


def test_divergent_weight_not_integrable():
    P = half_line(-2)
    rep = check_space_E(P, guillemin_potential(P), [-1.0])
    assert not rep.integrable and not rep.in_space


def test_nonconvex_potential_not_in_space():
    s = GridCorrection.from_function(lambda x: -5.0 * x[0] ** 2, [(-2.0, 2.0)], [5])
    u = CorrectedPotential(interval(-2, 2), s)
    rep = check_space_E(interval(-2, 2), u, [0.0])
    assert not rep.hessian_positive and not rep.in_space


def test_report_carries_caveat_note():
    rep = check_space_E(SQ, guillemin_potential(SQ), [0.0, 0.0])
    assert "not a certificate" in rep.note
