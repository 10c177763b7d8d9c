"""Ding functional on symplectic potentials and its geodesic convexity.

For a convex potential v on P the dual volume

    d1(v) = int_P e^{v - <grad v, x>} det(Hess v) dx

is the pushforward of e^{-phi} under y = grad v, phi the Legendre dual. The
Ding functional normalizes the potential integral by the soliton mass:

    D(v) = (1/F(b_X)) int_P v e^{-<b_X,x>} dx - log d1(v).

With this normalization a constant shift of v cancels exactly between the two
terms, and at b = b_X linear tilts leave both terms unchanged, so D descends
to potentials modulo affine functions. Along linear interpolations of
symplectic potentials D is convex; the scan here samples it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .polyhedra import LabeledPolyhedron
from .potentials import CanonicalPotential, CorrectedPotential, GridCorrection, \
    NotConvexHere, correction_of
from .quadrature import Simplex, _float_vertices, _triangulate, \
    gauss_integral_simplex, gauss_simplex_rule, plan as build_plan, stable_sum
from .shrinker import _correction_arrays, _density, find_soliton_vector


class DivergentD1(ValueError):
    """The dual volume cannot be certified finite at the requested accuracy."""


class NotInE(ValueError):
    """The potential integral against the soliton weight is not evaluable."""


@dataclass(frozen=True)
class DingValue:
    """One sample of the Ding functional: D = linear part minus log d1."""

    t: float
    d1: float
    value: float


# ---------------------------------------------------------------------------
# regions

def _beta(P: LabeledPolyhedron) -> np.ndarray:
    # e^{-<grad u_P, x> + u_P} decays like e^{-<beta, x>} with this beta
    return 0.5 * np.sum(P.scaled_normal_matrix(), axis=0)


def _fitted_plan(P, w, correction, tol, exc):
    """Quadrature plan for weight e^{-<w,x>}, kept inside the correction grid."""
    w = np.asarray(w, dtype=float)
    if P.is_bounded() or correction is None:
        try:
            return build_plan(P, w, tol=tol)
        except RuntimeError as err:
            raise exc(str(err)) from err
    W = P.scaled_normal_matrix()
    a = P.offsets_array()
    res = linprog(-w, A_ub=-W, b_ub=a, bounds=list(correction.domain),
                  method="highs")
    if not res.success:
        raise exc("could not fit a truncation level inside the correction grid")
    T = float(-res.fun) * (1.0 - 1e-12) - 1e-12
    try:
        return build_plan(P, w, tol=tol, truncation=T)
    except ValueError as err:
        raise exc(f"correction grid too small for a usable truncation: {err}") from err


def _tail_relative(pl, value):
    return pl.tail_bound / max(abs(value), 1e-300)


# ---------------------------------------------------------------------------
# the potential integral

def _canonical_linear(P: LabeledPolyhedron, b, pl, order: int = 20) -> float:
    """int_P u_P e^{-<b,x>} dx over the plan region.

    Each facet term L_k log L_k is integrated over geometric slabs
    2^{-m-1} R < L_k <= 2^{-m} R where it is smooth, so plain Gauss rules
    converge; the leftover sliver at L_k <= 1e-8 R is below rounding.
    """
    b = np.asarray(b, dtype=float)
    W = P.scaled_normal_matrix()
    a = P.offsets_array()
    rows = [W]
    offs = [a]
    if pl.truncation is not None:
        rows.append(-b[None, :])
        offs.append(np.array([pl.truncation]))
    A0 = np.vstack(rows)
    a0 = np.concatenate(offs)
    region = np.array([p for S in pl.simplices for p in S.points])
    pieces = []
    for k in range(len(P.facets)):
        wk = W[k]
        ak = float(a[k])

        def term(X, wk=wk, ak=ak):
            L = X @ wk + ak
            return 0.5 * L * np.log(L) * np.exp(-(X @ b))

        R = float(np.max(region @ wk + ak))
        hi = R
        floor = 1e-8 * R
        while hi > floor:
            lo = 0.5 * hi
            if lo <= floor:
                lo = floor
            A = np.vstack([A0, -wk[None, :]])
            aa = np.concatenate([a0, [hi - ak]])
            A[k] = wk
            aa[k] = ak - lo
            pts = _float_vertices(A, aa)
            if len(pts) >= P.dim + 1:
                for S in _triangulate(pts):
                    pieces.append(gauss_integral_simplex(S, term, order=order))
            hi = lo if lo > floor else 0.0
    return stable_sum(pieces)


def _adaptive_gauss(S, f, tol, budget):
    coarse = gauss_integral_simplex(S, f, order=14)
    fine = gauss_integral_simplex(S, f, order=24)
    if abs(fine - coarse) <= tol or budget[0] <= 0:
        return fine
    pts = np.asarray(S.points, dtype=float)
    best = (-1.0, 0, 1)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d2 = float(np.sum((pts[i] - pts[j]) ** 2))
            if d2 > best[0]:
                best = (d2, i, j)
    _, i, j = best
    mid = 0.5 * (pts[i] + pts[j])
    A = pts.copy()
    A[i] = mid
    B = pts.copy()
    B[j] = mid
    budget[0] -= 1
    return (_adaptive_gauss(Simplex(tuple(map(tuple, A))), f, 0.5 * tol, budget)
            + _adaptive_gauss(Simplex(tuple(map(tuple, B))), f, 0.5 * tol, budget))


def _linear_term(P, b_X, v, corr, pl, order):
    F = pl.exp_integral()
    if isinstance(corr, _Duck):
        barr = np.asarray(b_X, dtype=float)

        def f(X):
            return np.asarray(v.value(X), dtype=float) * np.exp(-(X @ barr))

        budget = [512]
        total = stable_sum(
            _adaptive_gauss(S, f, 1e-11 * max(1.0, F), budget)
            for S in pl.simplices
        )
    else:
        total = _canonical_linear(P, b_X, pl, order=order)
        if corr is not None:
            barr = np.asarray(b_X, dtype=float)

            def f(X):
                return np.asarray(corr.value(X), dtype=float) * np.exp(-(X @ barr))

            total += stable_sum(
                gauss_integral_simplex(S, f, order=order)
                for S in _refined(pl.simplices, barr)
            )
    if not math.isfinite(total):
        raise NotInE("potential integral against the soliton weight is not finite")
    return total / F


class _Duck:
    """Marker for potentials outside the canonical + correction family."""


def _correction_or_duck(v, P):
    home = getattr(v, "polyhedron", None)
    if home is not None and home != P:
        raise ValueError("potential belongs to a different polyhedron")
    try:
        return correction_of(v)
    except TypeError:
        if all(hasattr(v, name) for name in ("value", "gradient", "hessian")):
            return _Duck()
        raise


# ---------------------------------------------------------------------------
# the dual volume

def _refined(simplices, weight, pieces_cap: int = 4096):
    """Bisect simplices until edges resolve the e^{-<weight,x>} length scale."""
    nw = float(np.linalg.norm(np.asarray(weight, dtype=float)))
    if nw == 0.0:
        return list(simplices)
    target2 = (3.0 / nw) ** 2
    out = []
    stack = list(simplices)
    while stack:
        S = stack.pop()
        pts = np.asarray(S.points, dtype=float)
        best = (-1.0, 0, 1)
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                d2 = float(np.sum((pts[i] - pts[j]) ** 2))
                if d2 > best[0]:
                    best = (d2, i, j)
        d2, i, j = best
        if d2 <= target2 or len(out) + len(stack) >= pieces_cap:
            out.append(S)
            continue
        mid = 0.5 * (pts[i] + pts[j])
        A = pts.copy()
        A[i] = mid
        B = pts.copy()
        B[j] = mid
        stack.append(Simplex(tuple(map(tuple, A))))
        stack.append(Simplex(tuple(map(tuple, B))))
    return out


def _stable_d1_evaluator(P: LabeledPolyhedron):
    W = P.scaled_normal_matrix()
    a = P.offsets_array()
    beta = _beta(P)
    if np.any(a <= 0.0):
        raise DivergentD1("a facet offset <= 0 makes the dual volume diverge")
    exps = a / 2.0 - 1.0
    powered = bool(np.any(exps != 0.0))

    def evaluate(X, s_val, s_grad, s_hess):
        L = X @ W.T + a[None, :]
        D = _density(P, L, s_hess)
        if np.any(D <= 0.0):
            raise NotConvexHere("potential is not convex on the quadrature nodes")
        vals = D * np.exp(s_val - np.einsum("mi,mi->m", s_grad, X) - X @ beta)
        if powered:
            vals = vals * np.prod(L ** exps[None, :], axis=1)
        return vals

    return evaluate


def _direct_d1_integrand(v):
    def f(X):
        val = np.asarray(v.value(X), dtype=float)
        grad = np.asarray(v.gradient(X), dtype=float)
        hess = np.asarray(v.hessian(X), dtype=float)
        det = np.linalg.det(hess)
        if np.any(det <= 0.0):
            raise NotConvexHere("potential is not convex on the quadrature nodes")
        return det * np.exp(val - np.einsum("mi,mi->m", grad, X))

    return f


def d1(v, P: LabeledPolyhedron, tol: float = 1e-8, order: int = 25) -> float:
    """Dual volume of v: int_P e^{v - <grad v, x>} det(Hess v) dx.

    Corrected potentials on P with n <= 2 use the boundary-stable form of
    the integrand; anything else with value/gradient/hessian is integrated
    directly at interior Gauss nodes. For unbounded P the region is cut
    inside the correction grid and the dropped tail, estimated through the
    e^{-<beta,x>} decay of the canonical factor, must stay below tol
    relative to the result. The potential is assumed strictly convex with
    surjective gradient; see check_space_E for a screening routine.
    """
    corr = _correction_or_duck(v, P)
    if isinstance(corr, _Duck) or P.dim > 2:
        pl = _fitted_plan(P, _beta(P), None, tol, DivergentD1)
        f = _direct_d1_integrand(v)
        budget = [512]
        total = stable_sum(
            _adaptive_gauss(S, f, 1e-12, budget) for S in pl.simplices
        )
    else:
        beta = _beta(P)
        pl = _fitted_plan(P, beta, corr, tol, DivergentD1)
        evaluate = _stable_d1_evaluator(P)

        def f(X):
            s_val, s_grad, s_hess = _correction_arrays(corr, X, P.dim)
            return evaluate(X, s_val, s_grad, s_hess)

        total = stable_sum(
            gauss_integral_simplex(S, f, order=order)
            for S in _refined(pl.simplices, beta)
        )
    if not (math.isfinite(total) and total > 0.0):
        raise DivergentD1(f"dual volume evaluated to {total}")
    if _tail_relative(pl, total) > tol:
        raise DivergentD1(
            f"truncation tail estimate {pl.tail_bound:.3e} exceeds "
            f"tolerance {tol:g} relative to d1 = {total:.6g}"
        )
    return float(total)


# ---------------------------------------------------------------------------
# the Ding functional

def ding(v, P: LabeledPolyhedron, b_X=None, tol: float = 1e-8,
         order: int = 25) -> DingValue:
    """D(v) = (1/F(b_X)) int_P v e^{-<b_X,x>} dx - log d1(v), tagged t = 0.

    b_X defaults to the soliton vector of P; only there is D invariant under
    affine changes of v.
    """
    if b_X is None:
        b_X = find_soliton_vector(P).b
    b_X = np.asarray(b_X, dtype=float)
    corr = _correction_or_duck(v, P)
    grid = None if isinstance(corr, _Duck) else corr
    pl = _fitted_plan(P, b_X, grid, tol, NotInE)
    linear = _linear_term(P, b_X, v, corr, pl, order)
    dual = d1(v, P, tol=tol, order=order)
    return DingValue(t=0.0, d1=dual, value=linear - math.log(dual))


@dataclass(frozen=True)
class Geodesic:
    """Linear interpolation v_t = (1-t) v0 + t v1 of symplectic potentials.

    Both endpoints live on the same polyhedron; corrected endpoints must
    share grid axes so the blend is again a grid correction. Convexity of
    every v_t follows from convexity of the endpoints.
    """

    v0: object
    v1: object

    def __post_init__(self):
        P = self.v0.polyhedron
        if self.v1.polyhedron != P:
            raise ValueError("geodesic endpoints live on different polyhedra")
        c0 = correction_of(self.v0)
        c1 = correction_of(self.v1)
        if c0 is not None and c1 is not None:
            if len(c0.axes) != len(c1.axes) or not all(
                np.array_equal(a, b) for a, b in zip(c0.axes, c1.axes)
            ):
                raise ValueError("geodesic endpoints use different grids")

    @property
    def polyhedron(self) -> LabeledPolyhedron:
        return self.v0.polyhedron

    def corrections(self):
        """Endpoint corrections on a shared grid; (None, None) if canonical."""
        c0 = correction_of(self.v0)
        c1 = correction_of(self.v1)
        if c0 is None and c1 is None:
            return None, None
        if c0 is None:
            c0 = GridCorrection(c1.axes, np.zeros_like(c1.values))
        if c1 is None:
            c1 = GridCorrection(c0.axes, np.zeros_like(c0.values))
        return c0, c1

    def at(self, t: float):
        c0, c1 = self.corrections()
        if c0 is None:
            return CanonicalPotential(self.polyhedron)
        blend = GridCorrection(
            c0.axes, (1.0 - t) * c0.values + t * c1.values
        )
        return CorrectedPotential(self.polyhedron, blend)

    def __call__(self, t: float):
        return self.at(t)


def convexity_scan(v0, v1, P: LabeledPolyhedron, b_X=None, num_t: int = 9,
                   tol: float = 1e-8, order: int = 25) -> list[DingValue]:
    """Sample D along the geodesic from v0 to v1 at num_t uniform t values.

    All samples share one quadrature region and one set of Gauss nodes, so
    differences across t are free of regridding noise. The canonical part of
    the potential integral is t-independent and computed once.
    """
    if num_t < 2:
        raise ValueError("a scan needs at least two sample points")
    geo = Geodesic(v0, v1)
    if geo.polyhedron != P:
        raise ValueError("geodesic endpoints live on a different polyhedron")
    if b_X is None:
        b_X = find_soliton_vector(P).b
    b_X = np.asarray(b_X, dtype=float)
    c0, c1 = geo.corrections()

    pl_b = _fitted_plan(P, b_X, c0, tol, NotInE)
    F = pl_b.exp_integral()
    canonical = _canonical_linear(P, b_X, pl_b, order=20)

    beta = _beta(P)
    pl_d = _fitted_plan(P, beta, c0, tol, DivergentD1)
    if P.dim > 2:
        raise ValueError("scan uses the stable integrand, dimensions 1 and 2")
    evaluate = _stable_d1_evaluator(P)
    rules = [gauss_simplex_rule(S, order) for S in _refined(pl_d.simplices, beta)]
    cached = []
    for X, Wq in rules:
        z = np.zeros(len(X)), np.zeros((len(X), P.dim)), \
            np.zeros((len(X), P.dim, P.dim))
        e0 = z if c0 is None else _correction_arrays(c0, X, P.dim)
        e1 = z if c1 is None else _correction_arrays(c1, X, P.dim)
        cached.append((X, Wq, e0, e1))

    lin_rules = [gauss_simplex_rule(S, order)
                 for S in _refined(pl_b.simplices, b_X)]
    lin_cached = []
    for X, Wq in lin_rules:
        wexp = Wq * np.exp(-(X @ b_X))
        s0 = 0.0 if c0 is None else np.asarray(c0.value(X), dtype=float)
        s1 = 0.0 if c1 is None else np.asarray(c1.value(X), dtype=float)
        lin_cached.append((wexp, s0, s1))

    out = []
    for t in np.linspace(0.0, 1.0, num_t):
        svals = stable_sum(
            float(np.dot(wexp, (1.0 - t) * s0 + t * s1))
            for wexp, s0, s1 in lin_cached
        )
        linear = (canonical + svals) / F
        dual = stable_sum(
            float(np.dot(Wq, evaluate(
                X,
                (1.0 - t) * e0[0] + t * e1[0],
                (1.0 - t) * e0[1] + t * e1[1],
                (1.0 - t) * e0[2] + t * e1[2],
            )))
            for X, Wq, e0, e1 in cached
        )
        if not (math.isfinite(dual) and dual > 0.0):
            raise DivergentD1(f"dual volume evaluated to {dual} at t = {t}")
        if _tail_relative(pl_d, dual) > tol:
            raise DivergentD1(
                f"truncation tail estimate {pl_d.tail_bound:.3e} exceeds "
                f"tolerance {tol:g} relative to d1 at t = {t}"
            )
        out.append(DingValue(t=float(t), d1=float(dual),
                             value=float(linear - math.log(dual))))
    return out


def second_differences(scan) -> np.ndarray:
    """Undivided central second differences of D over a uniform scan."""
    vals = np.array([s.value for s in scan])
    if len(vals) < 3:
        return np.zeros(0)
    return vals[:-2] - 2.0 * vals[1:-1] + vals[2:]
