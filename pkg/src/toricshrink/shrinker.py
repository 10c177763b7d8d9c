"""Soliton data on a labeled polyhedron.

The soliton vector minimizes F(b) = integral of e^{-<b,x>} over P. A
symplectic potential u = u_P + s solves the soliton equation when

    R(x) = <grad u, x> - u - <b, x> - log det Hess u

is constant. R is evaluated in a boundary-stable form: the labeled-facet
factors of det Hess u are cancelled algebraically against the canonical
potential's own divergence, leaving quantities smooth up to the boundary.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .polyhedra import Facet, LabeledPolyhedron
from .potentials import (
    GridCorrection,
    NoConvergence,
    NotConvexHere,
    differentiation_matrix,
    lobatto_nodes,
)
from .quadrature import DivergentWeight, plan as build_plan


class NotAProduct(ValueError):
    """The polyhedron does not split as a product across coordinate blocks."""


# ---------------------------------------------------------------------------
# the weighted volume functional

def weighted_volume(P: LabeledPolyhedron, b, tol: float = 1e-12) -> float:
    """F(b): the e^{-<b,x>}-weighted volume of P, certified to tol."""
    return build_plan(P, b, tol=tol).exp_integral()


def grad_hess_F(P: LabeledPolyhedron, b, tol: float = 1e-12):
    """F(b) with its gradient -int x e^{-<b,x>} and Hessian of second moments."""
    pl = build_plan(P, b, tol=tol)
    n = P.dim
    F = pl.exp_integral()
    g = np.empty(n)
    H = np.empty((n, n))
    for j in range(n):
        alpha = tuple(int(i == j) for i in range(n))
        g[j] = -pl.moment(alpha)
    for j in range(n):
        for k in range(j, n):
            alpha = tuple(int(i == j) + int(i == k) for i in range(n))
            H[j, k] = H[k, j] = pl.moment(alpha)
    return F, g, H


@dataclass(frozen=True)
class SolitonVector:
    b: tuple[float, ...]
    F_value: float
    gradient_norm: float
    iterations: int


def _initial_weight(P: LabeledPolyhedron) -> np.ndarray:
    # the sum of unit facet normals pairs strictly positively with every
    # nonzero recession direction, so F is finite there
    W = np.array([f.normal for f in P.facets], dtype=float)
    return np.sum(W / np.linalg.norm(W, axis=1, keepdims=True), axis=0)


def find_soliton_vector(P: LabeledPolyhedron, tol: float = 1e-12,
                        max_iter: int = 200) -> SolitonVector:
    """Damped Newton minimization of the strictly convex functional F."""
    if P.is_bounded():
        b = np.zeros(P.dim)
    else:
        b = _initial_weight(P)
    F, g, H = grad_hess_F(P, b, tol=max(1e-14, 0.01 * tol))
    for it in range(1, max_iter + 1):
        if np.linalg.norm(g) <= tol * max(1.0, abs(F)):
            return SolitonVector(
                b=tuple(map(float, b)),
                F_value=F,
                gradient_norm=float(np.linalg.norm(g)),
                iterations=it - 1,
            )
        step = np.linalg.solve(H, -g)
        lam = 1.0
        while lam > 1e-16:
            try:
                Fn, gn, Hn = grad_hess_F(P, b + lam * step,
                                         tol=max(1e-14, 0.01 * tol))
            except DivergentWeight:
                lam *= 0.5
                continue
            if Fn < F or np.linalg.norm(gn) < 0.5 * np.linalg.norm(g):
                b = b + lam * step
                F, g, H = Fn, gn, Hn
                break
            lam *= 0.5
        else:
            raise NoConvergence("line search failed while minimizing F")
    raise NoConvergence(f"soliton vector did not converge in {max_iter} steps")


# ---------------------------------------------------------------------------
# stable residual of the soliton equation

def _prod_except(L: np.ndarray, skip) -> np.ndarray:
    mask = np.ones(L.shape[1], dtype=bool)
    for i in skip:
        mask[i] = False
    return np.prod(L[:, mask], axis=1)


def _density(P: LabeledPolyhedron, L, s_hess):
    """det(Hess(u_P + s)) times prod_i L_i, expanded so no term divides by L."""
    W = P.scaled_normal_matrix()
    N = len(P.facets)
    m = L.shape[0]
    if P.dim == 1:
        w = W[:, 0]
        out = np.zeros(m)
        for k in range(N):
            out += 0.5 * w[k] ** 2 * _prod_except(L, (k,))
        out += s_hess[:, 0, 0] * np.prod(L, axis=1)
        return out
    if P.dim == 2:
        out = np.zeros(m)
        for j, k in itertools.combinations(range(N), 2):
            cross = W[j, 0] * W[k, 1] - W[j, 1] * W[k, 0]
            if cross != 0.0:
                out += 0.25 * cross**2 * _prod_except(L, (j, k))
        detS = s_hess[:, 0, 0] * s_hess[:, 1, 1] - s_hess[:, 0, 1] ** 2
        for k in range(N):
            p = np.array([-W[k, 1], W[k, 0]])
            quad = np.einsum("mij,i,j->m", s_hess, p, p)
            out += 0.5 * quad * _prod_except(L, (k,))
        out += detS * np.prod(L, axis=1)
        return out
    raise ValueError("stable density implemented for dimensions 1 and 2")


def _residual_core(P: LabeledPolyhedron, b, X, s_val, s_grad, s_hess,
                   strict: bool = True):
    W = P.scaled_normal_matrix()
    a = P.offsets_array()
    L = X @ W.T + a
    scale = 1.0 + np.max(np.abs(a))
    if np.any(L < -1e-12 * scale):
        raise ValueError("residual requested outside the closed polyhedron")
    L = np.maximum(L, 0.0)
    D = _density(P, L, s_hess)
    if np.any(D <= 0.0):
        if strict:
            bad = X[np.argmin(D)]
            raise NotConvexHere(f"density nonpositive near {tuple(bad)}")
        return None
    ell = L - a
    R = 0.5 * np.sum(ell, axis=1) - X @ np.asarray(b, dtype=float)
    # general offsets leave uncancelled logarithmic factors; they vanish in
    # the shrinker normalization a_i = 2, making R smooth up to the boundary
    coefs = 1.0 - a / 2.0
    if np.any(coefs != 0.0):
        if np.any((L == 0.0) & (np.abs(coefs) > 0.0)[None, :]):
            raise ValueError(
                "boundary evaluation needs shrinker-normalized offsets"
            )
        R += np.log(np.where(L > 0, L, 1.0)) @ coefs
    R += np.einsum("mi,mi->m", s_grad, X) - s_val - np.log(D)
    return R


def _correction_arrays(correction, X, n):
    if correction is None:
        m = len(X)
        return np.zeros(m), np.zeros((m, n)), np.zeros((m, n, n))
    s_val = np.asarray(correction.value(X), dtype=float)
    s_grad = np.asarray(correction.gradient(X), dtype=float)
    s_hess = np.asarray(correction.hessian(X), dtype=float)
    return s_val, s_grad, s_hess


def residual(P: LabeledPolyhedron, b, x, correction=None):
    """R(x) for u = u_P + correction, stable up to the boundary of P.

    correction=None means the canonical potential itself.
    """
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    s_val, s_grad, s_hess = _correction_arrays(correction, X, P.dim)
    R = _residual_core(P, b, X, s_val, s_grad, s_hess, strict=True)
    return float(R[0]) if single else R


# ---------------------------------------------------------------------------
# product structure

@dataclass(frozen=True)
class ProductFactor:
    coordinates: tuple[int, ...]
    polyhedron: LabeledPolyhedron


def product_check(P: LabeledPolyhedron) -> list[ProductFactor]:
    """Split P into factors across independent coordinate blocks.

    Raises NotAProduct when the facet normals couple all coordinates into a
    single block (and n > 1).
    """
    n = P.dim
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        parent[find(i)] = find(j)

    for f in P.facets:
        support = [d for d, c in enumerate(f.normal) if c != 0]
        for d in support[1:]:
            union(support[0], d)
    blocks: dict[int, list[int]] = {}
    for d in range(n):
        blocks.setdefault(find(d), []).append(d)
    comps = sorted(tuple(sorted(v)) for v in blocks.values())
    if len(comps) == 1 and n > 1:
        raise NotAProduct("facet normals couple all coordinates")
    factors = []
    for coords in comps:
        facets = []
        for f in P.facets:
            if any(f.normal[d] != 0 for d in coords):
                facets.append(
                    Facet(
                        normal=tuple(f.normal[d] for d in coords),
                        label=f.label,
                        offset=f.offset,
                    )
                )
        factors.append(
            ProductFactor(
                coordinates=coords,
                polyhedron=LabeledPolyhedron(dim=len(coords), facets=tuple(facets)),
            )
        )
    return factors


# ---------------------------------------------------------------------------
# collocation solver

@dataclass(frozen=True)
class SolveResult:
    b: tuple[float, ...]
    correction: GridCorrection
    constant: float
    residual_deviation: float
    iterations: int
    grid: tuple[int, ...]
    domain: tuple[tuple[float, float], ...]
    truncated_axes: tuple[tuple[int, str], ...]
    truncation: float | None


def _solve_domain(P: LabeledPolyhedron, b, truncation):
    """Axis ranges for the collocation box, cutting unbounded axes at <b,x>=T."""
    n = P.dim
    lo = [None] * n
    hi = [None] * n
    for f in P.facets:
        support = [d for d, c in enumerate(f.normal) if c != 0]
        if len(support) != 1 or abs(f.normal[support[0]]) != 1:
            raise NotAProduct(
                "the collocation solver needs an axis-aligned product domain"
            )
        d = support[0]
        m = f.label
        if f.normal[d] == 1:
            lo[d] = -float(f.offset) / m
        else:
            hi[d] = float(f.offset) / m
    cuts = []
    T = truncation
    for d in range(n):
        if lo[d] is None or hi[d] is None:
            bd = float(b[d])
            if lo[d] is None and hi[d] is None:
                raise NotAProduct("axis is a full line; polyhedron is improper")
            if hi[d] is None:
                if bd <= 0:
                    raise DivergentWeight(
                        f"weight not integrable along axis {d}",
                        ray=tuple(int(i == d) for i in range(n)),
                    )
                hi[d] = T / bd
                cuts.append((d, "upper"))
            else:
                if bd >= 0:
                    raise DivergentWeight(
                        f"weight not integrable along axis {d}",
                        ray=tuple(-int(i == d) for i in range(n)),
                    )
                lo[d] = T / bd
                cuts.append((d, "lower"))
            if hi[d] <= lo[d]:
                raise ValueError("truncation level does not clear the domain")
    return list(zip(lo, hi)), tuple(cuts)


def solve(P: LabeledPolyhedron, b=None, grid=None, truncation: float = 12.0,
          tol: float = 1e-11, max_iter: int = 80,
          initial=None) -> SolveResult:
    """Solve the soliton equation for the correction s by spectral collocation.

    Nodes on a truncation plane trade their equation row for a vanishing
    second normal derivative of s. The affine gauge is pinned at the node
    nearest the domain center. Supports 1D and 2D product domains.
    """
    n = P.dim
    if n > 2:
        raise NotAProduct("the collocation solver supports dimensions 1 and 2")
    if b is None:
        b = np.array(find_soliton_vector(P).b)
    else:
        b = np.asarray(b, dtype=float)
    if grid is None:
        grid = (48,) if n == 1 else (24, 24)
    elif isinstance(grid, int):
        grid = (grid,) * n
    domain, cuts = _solve_domain(P, b, truncation)

    axes = [lobatto_nodes(lo, hi, g) for (lo, hi), g in zip(domain, grid)]
    if n == 1:
        X = axes[0][:, None]
        D1 = differentiation_matrix(axes[0])
        ops = {"x": D1, "xx": D1 @ D1}
    else:
        g0, g1 = np.meshgrid(axes[0], axes[1], indexing="ij")
        X = np.column_stack([g0.ravel(), g1.ravel()])
        Da = differentiation_matrix(axes[0])
        Db = differentiation_matrix(axes[1])
        I0 = np.eye(len(axes[0]))
        I1 = np.eye(len(axes[1]))
        ops = {
            "x": np.kron(Da, I1),
            "y": np.kron(I0, Db),
            "xx": np.kron(Da @ Da, I1),
            "yy": np.kron(I0, Db @ Db),
            "xy": np.kron(Da, Db),
        }
    m = len(X)

    cut_rows: list[tuple[int, str]] = []
    is_cut_node = np.zeros(m, dtype=bool)
    for d, side in cuts:
        coord = X[:, d]
        target = domain[d][1] if side == "upper" else domain[d][0]
        on = np.abs(coord - target) < 1e-12 * (1 + abs(target))
        is_cut_node |= on
        key = "xx" if d == 0 else "yy"
        for idx in np.where(on)[0]:
            cut_rows.append((idx, key))

    anchor = int(np.argmin(np.sum((X - X.mean(axis=0)) ** 2, axis=1)))

    def derivatives(svals):
        if n == 1:
            grad = (ops["x"] @ svals)[:, None]
            hess = (ops["xx"] @ svals)[:, None, None]
        else:
            gx = ops["x"] @ svals
            gy = ops["y"] @ svals
            grad = np.column_stack([gx, gy])
            hess = np.empty((m, 2, 2))
            hess[:, 0, 0] = ops["xx"] @ svals
            hess[:, 1, 1] = ops["yy"] @ svals
            hess[:, 0, 1] = hess[:, 1, 0] = ops["xy"] @ svals
        return grad, hess

    interior = ~is_cut_node

    def residual_vector(z):
        svals, c = z[:-1], z[-1]
        grad, hess = derivatives(svals)
        R = _residual_core(P, b, X, svals, grad, hess, strict=False)
        if R is None:
            return None
        rows = [R[interior] - c]
        for idx, key in cut_rows:
            rows.append(np.array([ops[key][idx] @ svals]))
        rows.append(np.array([svals[anchor]]))
        rows.append(grad[anchor])
        return np.concatenate(rows)

    if initial is not None:
        z = np.append(np.asarray(initial, dtype=float).ravel(), 0.0)
        if len(z) != m + 1:
            raise ValueError("initial correction grid has the wrong shape")
    else:
        z = np.zeros(m + 1)
    phi = residual_vector(z)
    if phi is None:
        raise NotConvexHere("initial correction leaves the density nonpositive")
    z[-1] = float(np.mean(phi[: interior.sum()])) + z[-1]
    phi = residual_vector(z)
    norm = float(np.linalg.norm(phi, np.inf))

    it = 0
    for it in range(1, max_iter + 1):
        if norm <= tol:
            break
        J = np.empty((len(phi), len(z)))
        for j in range(len(z)):
            h = 1e-7 * max(1.0, abs(z[j]))
            zp = z.copy()
            zp[j] += h
            pp = residual_vector(zp)
            if pp is None:
                zp[j] -= 2 * h
                pp = residual_vector(zp)
                if pp is None:
                    raise NoConvergence("density collapsed while forming Jacobian")
                J[:, j] = (phi - pp) / h
            else:
                J[:, j] = (pp - phi) / h
        step, *_ = np.linalg.lstsq(J, -phi, rcond=None)
        lam = 1.0
        improved = False
        while lam > 1e-12:
            zn = z + lam * step
            pn = residual_vector(zn)
            if pn is not None:
                nn = float(np.linalg.norm(pn, np.inf))
                if nn < norm:
                    z, phi, norm = zn, pn, nn
                    improved = True
                    break
            lam *= 0.5
        if not improved:
            break

    if norm > max(tol, 1e-6):
        raise NoConvergence(
            f"collocation residual stalled at {norm:.3e} after {it} iterations"
        )

    svals = z[:-1]
    grad, hess = derivatives(svals)
    R = _residual_core(P, b, X, svals, grad, hess, strict=True)
    c_star = float(np.mean(R[interior]))
    deviation = float(np.max(np.abs(R[interior] - c_star)))
    values = svals if n == 1 else svals.reshape(grid)
    corr = GridCorrection(axes, values)
    return SolveResult(
        b=tuple(map(float, b)),
        correction=corr,
        constant=c_star,
        residual_deviation=deviation,
        iterations=it,
        grid=tuple(grid),
        domain=tuple((float(lo), float(hi)) for lo, hi in domain),
        truncated_axes=tuple(cuts),
        truncation=truncation if cuts else None,
    )
