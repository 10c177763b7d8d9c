"""Symplectic potentials on labeled polyhedra and their admissibility checks.

The canonical potential is u_P(x) = 1/2 sum_i L_i log L_i with
L_i = <x, m_i n_i> + a_i. Corrections s are polynomials stored on tensor
Chebyshev grids; u = u_P + s. Admissibility near the boundary is probed on
geometric ladders approaching each facet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C

from .polyhedra import LabeledPolyhedron
from .quadrature import plan as build_plan, DivergentWeight


class OutOfDomain(ValueError):
    """Point outside the interior of the polyhedron."""


class NotConvexHere(ValueError):
    """The Hessian fails to be positive definite at the requested point."""


class NoConvergence(RuntimeError):
    """An iterative solve exhausted its iteration budget."""


def _as_batch(x, n):
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != n:
        raise ValueError(f"expected points in R^{n}")
    return X, single


# ---------------------------------------------------------------------------
# canonical potential

class CanonicalPotential:
    """The boundary-adapted potential determined by the labeled facets."""

    def __init__(self, P: LabeledPolyhedron):
        self.polyhedron = P
        self._W = P.scaled_normal_matrix()  # rows m_i n_i
        self._a = P.offsets_array()

    def _L(self, X):
        L = X @ self._W.T + self._a
        if np.any(L <= 0.0):
            raise OutOfDomain("point outside the interior of the polyhedron")
        return L

    def value(self, x):
        X, single = _as_batch(x, self.polyhedron.dim)
        L = self._L(X)
        v = 0.5 * np.sum(L * np.log(L), axis=1)
        return float(v[0]) if single else v

    def gradient(self, x):
        X, single = _as_batch(x, self.polyhedron.dim)
        L = self._L(X)
        G = 0.5 * (1.0 + np.log(L)) @ self._W
        return G[0] if single else G

    def hessian(self, x):
        X, single = _as_batch(x, self.polyhedron.dim)
        L = self._L(X)
        H = 0.5 * np.einsum("mi,ij,ik->mjk", 1.0 / L, self._W, self._W)
        return H[0] if single else H


def guillemin_potential(P: LabeledPolyhedron) -> CanonicalPotential:
    return CanonicalPotential(P)


def kahler_potential_canonical(P: LabeledPolyhedron, x):
    """The dual-side potential 1/2 sum_i (l_i - a_i log L_i) of the canonical pair."""
    u = CanonicalPotential(P)
    X, single = _as_batch(x, P.dim)
    L = u._L(X)
    ell = L - u._a
    v = 0.5 * np.sum(ell - u._a * np.log(L), axis=1)
    return float(v[0]) if single else v


# ---------------------------------------------------------------------------
# Chebyshev grids

def lobatto_nodes(lo: float, hi: float, count: int) -> np.ndarray:
    """Chebyshev-Lobatto points mapped to [lo, hi], ascending, endpoints included."""
    if count < 2:
        raise ValueError("need at least two nodes")
    k = np.arange(count)
    t = -np.cos(np.pi * k / (count - 1))
    return lo + (hi - lo) * (t + 1.0) / 2.0


def differentiation_matrix(nodes) -> np.ndarray:
    """Barycentric differentiation matrix for arbitrary distinct nodes."""
    x = np.asarray(nodes, dtype=float)
    m = len(x)
    w = np.ones(m)
    for j in range(m):
        diff = x[j] - np.delete(x, j)
        w[j] = 1.0 / np.prod(diff)
    D = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            if i != j:
                D[i, j] = (w[j] / w[i]) / (x[i] - x[j])
        D[i, i] = -np.sum(D[i, np.arange(m) != i])
    return D


class GridCorrection:
    """Polynomial correction s sampled on a tensor product of node axes.

    The stored values determine the unique tensor interpolant, evaluated and
    differentiated through its Chebyshev coefficients. Dimensions 1 and 2.
    """

    def __init__(self, axes, values):
        axes = tuple(np.asarray(a, dtype=float) for a in axes)
        values = np.asarray(values, dtype=float)
        if len(axes) not in (1, 2):
            raise ValueError("grid corrections support dimensions 1 and 2")
        if values.shape != tuple(len(a) for a in axes):
            raise ValueError("value grid shape does not match axes")
        for a in axes:
            if len(a) < 2 or np.any(np.diff(a) <= 0):
                raise ValueError("axes must be strictly increasing with >= 2 nodes")
        self.axes = axes
        self.values = values
        self.domain = tuple((float(a[0]), float(a[-1])) for a in axes)
        self._scale = np.array([2.0 / (hi - lo) for lo, hi in self.domain])
        self._coef = self._fit()

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(len(a) - 1 for a in self.axes)

    def _map(self, X):
        out = np.empty_like(X)
        for d, (lo, hi) in enumerate(self.domain):
            out[:, d] = (2.0 * X[:, d] - (lo + hi)) / (hi - lo)
        return out

    def _fit(self):
        mapped = [
            (2.0 * a - (lo + hi)) / (hi - lo)
            for a, (lo, hi) in zip(self.axes, self.domain)
        ]
        if self.dim == 1:
            V = C.chebvander(mapped[0], len(mapped[0]) - 1)
            return np.linalg.solve(V, self.values)
        V0 = C.chebvander(mapped[0], len(mapped[0]) - 1)
        V1 = C.chebvander(mapped[1], len(mapped[1]) - 1)
        return np.linalg.solve(V0, np.linalg.solve(V1, self.values.T).T)

    def _eval(self, coef, X):
        if self.dim == 1:
            return C.chebval(X[:, 0], coef)
        return C.chebval2d(X[:, 0], X[:, 1], coef)

    def value(self, x):
        X, single = _as_batch(x, self.dim)
        out = self._eval(self._coef, self._map(X))
        return float(out[0]) if single else out

    def gradient(self, x):
        X, single = _as_batch(x, self.dim)
        M = self._map(X)
        cols = []
        for d in range(self.dim):
            cd = C.chebder(self._coef, 1, axis=d) if self.dim > 1 else C.chebder(self._coef)
            cols.append(self._eval(cd, M) * self._scale[d])
        G = np.stack(cols, axis=-1)
        return G[0] if single else G

    def hessian(self, x):
        X, single = _as_batch(x, self.dim)
        M = self._map(X)
        H = np.empty((len(X), self.dim, self.dim))
        for i in range(self.dim):
            for j in range(i, self.dim):
                c = self._coef
                if self.dim == 1:
                    c = C.chebder(c, 2)
                else:
                    c = C.chebder(c, 1, axis=i)
                    c = C.chebder(c, 1, axis=j)
                val = self._eval(c, M) * self._scale[i] * self._scale[j]
                H[:, i, j] = val
                H[:, j, i] = val
        return H[0] if single else H

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "kind": "chebyshev-tensor",
            "axes": [list(map(float, a)) for a in self.axes],
            "values": self.values.tolist(),
            "orders": list(self.orders),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GridCorrection":
        if d.get("kind") != "chebyshev-tensor":
            raise ValueError(f"unknown correction kind {d.get('kind')!r}")
        g = cls(tuple(np.array(a) for a in d["axes"]), np.array(d["values"]))
        if "orders" in d and tuple(d["orders"]) != g.orders:
            raise ValueError("stored orders disagree with axis lengths")
        return g

    @classmethod
    def zeros(cls, domain, counts) -> "GridCorrection":
        axes = [lobatto_nodes(lo, hi, c) for (lo, hi), c in zip(domain, counts)]
        return cls(axes, np.zeros(tuple(counts)))

    @classmethod
    def from_function(cls, f, domain, counts) -> "GridCorrection":
        axes = [lobatto_nodes(lo, hi, c) for (lo, hi), c in zip(domain, counts)]
        if len(axes) == 1:
            vals = np.array([f(np.array([x])) for x in axes[0]])
        else:
            vals = np.array(
                [[f(np.array([x, y])) for y in axes[1]] for x in axes[0]]
            )
        return cls(axes, vals)


class CorrectedPotential:
    """u = u_P + s for a polynomial grid correction s."""

    def __init__(self, P: LabeledPolyhedron, correction: GridCorrection):
        if correction.dim != P.dim:
            raise ValueError("correction dimension does not match the polyhedron")
        self.polyhedron = P
        self.canonical = CanonicalPotential(P)
        self.correction = correction

    def value(self, x):
        return self.canonical.value(x) + self.correction.value(x)

    def gradient(self, x):
        return self.canonical.gradient(x) + self.correction.gradient(x)

    def hessian(self, x):
        return self.canonical.hessian(x) + self.correction.hessian(x)


def correction_of(u):
    """The correction part of a potential: None for the canonical one.

    Any object with value/gradient callables works as a correction; grid
    corrections are the concrete case produced by the solver.
    """
    if isinstance(u, CanonicalPotential):
        return None
    corr = getattr(u, "correction", None)
    if corr is None:
        raise TypeError("expected a canonical potential or one with a .correction")
    return corr


# ---------------------------------------------------------------------------
# Legendre transform

@dataclass(frozen=True)
class LegendrePair:
    x: tuple[float, ...]
    y: tuple[float, ...]
    primal_value: float
    dual_value: float


def legendre(u, x) -> LegendrePair:
    """Gradient image y = grad u(x) and the dual value <x,y> - u(x)."""
    x = np.asarray(x, dtype=float)
    y = u.gradient(x)
    val = u.value(x)
    return LegendrePair(
        x=tuple(map(float, x)),
        y=tuple(map(float, y)),
        primal_value=float(val),
        dual_value=float(x @ y - val),
    )


def legendre_inverse(u, y, x0=None, tol: float = 1e-12,
                     max_iter: int = 100) -> LegendrePair:
    """Solve grad u(x) = y by a damped Newton iteration staying in the interior."""
    P = u.polyhedron
    y = np.asarray(y, dtype=float)
    x = np.asarray(x0, dtype=float) if x0 is not None else P.interior_point()
    scale = 1.0 + float(np.linalg.norm(y))
    for _ in range(max_iter):
        g = u.gradient(x) - y
        if np.linalg.norm(g) <= tol * scale:
            return legendre(u, x)
        H = u.hessian(x)
        step = np.linalg.solve(H, -g)
        lam = 1.0
        base = float(np.linalg.norm(g))
        while lam > 1e-14:
            xn = x + lam * step
            if P.interior_contains(xn, margin=1e-300):
                try:
                    if float(np.linalg.norm(u.gradient(xn) - y)) < base:
                        break
                except OutOfDomain:
                    pass
            lam *= 0.5
        else:
            # steps below the float resolution of x: accept if already tight
            if base <= 1e-8 * scale:
                return legendre(u, x)
            raise NoConvergence("line search stalled inverting the gradient map")
        x = x + lam * step
    raise NoConvergence("gradient inversion did not reach tolerance")


# ---------------------------------------------------------------------------
# metric data

@dataclass(frozen=True)
class MetricData:
    point: tuple[float, ...]
    hessian: np.ndarray
    inverse: np.ndarray
    det: float


def metric(u, x) -> MetricData:
    """Hessian metric of u at x; requires positive definiteness."""
    x = np.asarray(x, dtype=float)
    H = u.hessian(x)
    try:
        El = np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        raise NotConvexHere(f"Hessian not positive definite at {tuple(x)}")
    det = float(np.prod(np.diag(El)) ** 2)
    return MetricData(
        point=tuple(map(float, x)),
        hessian=H,
        inverse=np.linalg.inv(H),
        det=det,
    )


# ---------------------------------------------------------------------------
# facet ladders and boundary conditions

def facet_ladder(P: LabeledPolyhedron, i: int, depth: int = 6):
    """Points approaching the interior of facet i geometrically: distances 10^-k."""
    W = P.scaled_normal_matrix()
    a = P.offsets_array()
    xstar = P.facet_interior_point(i)
    d = W[i] / np.linalg.norm(W[i])
    margins = np.delete(W @ xstar + a, i)
    norms = np.delete(np.linalg.norm(W, axis=1), i)
    t0 = 1.0
    if len(margins):
        t0 = min(1.0, float(np.min(margins / (2.0 * norms))))
    return [xstar + t0 * 10.0 ** (-k) * d for k in range(1, depth + 1)]


def _differences_decay(q, atol: float) -> bool:
    # a bounded limit shows differences shrinking; log or power growth keeps
    # them constant or growing along a geometric ladder
    d1 = abs(q[-1] - q[-2])
    d0 = abs(q[-2] - q[-3])
    return d1 <= max(0.5 * d0, atol * (1.0 + abs(q[-1])))


@dataclass(frozen=True)
class FacetBoundaryCheck:
    facet: int
    correction_bounded: bool
    gradient_bounded: bool
    density_bounded: bool
    density_value: float


@dataclass(frozen=True)
class BoundaryReport:
    checks: tuple[FacetBoundaryCheck, ...]
    correction_ok: bool
    density_ok: bool

    @property
    def ok(self) -> bool:
        return self.correction_ok and self.density_ok


def boundary_density(P: LabeledPolyhedron, u, x):
    """det(Hess u) times the product of facet values: finite and positive on
    the boundary exactly when the potential has the right singular structure."""
    X, single = _as_batch(x, P.dim)
    L = X @ P.scaled_normal_matrix().T + P.offsets_array()
    H = u.hessian(X)
    dets = np.linalg.det(H)
    out = dets * np.prod(L, axis=1)
    return float(out[0]) if single else out


def check_boundary_conditions(P: LabeledPolyhedron, u,
                              atol: float = 1e-6) -> BoundaryReport:
    """Probe both admissibility conditions on ladders toward every facet.

    (i) the correction and its gradient stay bounded;
    (ii) det(Hess u) * prod_i L_i stays bounded and strictly positive.
    """
    s = correction_of(u)
    checks = []
    for i in range(len(P.facets)):
        ladder = facet_ladder(P, i)
        if s is None:
            corr_ok = grad_ok = True
        else:
            sv = [s.value(x) for x in ladder]
            corr_ok = _differences_decay(sv, atol)
            grad_ok = True
            grads = np.array([s.gradient(x) for x in ladder])
            for c in range(P.dim):
                if not _differences_decay(grads[:, c], atol):
                    grad_ok = False
        dens = [boundary_density(P, u, x) for x in ladder]
        dens_ok = (
            _differences_decay(dens, atol)
            and 1e-8 <= dens[-1] <= 1e8
        )
        checks.append(
            FacetBoundaryCheck(
                facet=i,
                correction_bounded=corr_ok,
                gradient_bounded=grad_ok,
                density_bounded=dens_ok,
                density_value=float(dens[-1]),
            )
        )
    return BoundaryReport(
        checks=tuple(checks),
        correction_ok=all(c.correction_bounded and c.gradient_bounded for c in checks),
        density_ok=all(c.density_bounded for c in checks),
    )


# ---------------------------------------------------------------------------
# membership in the admissible space

@dataclass(frozen=True)
class EReport:
    hessian_positive: bool
    boundary_behaviour: bool
    gradient_surjective: bool
    integrable: bool
    note: str = (
        "sampled sufficient conditions at finitely many points; "
        "this is numerical evidence, not a certificate"
    )

    @property
    def in_space(self) -> bool:
        return (
            self.hessian_positive
            and self.boundary_behaviour
            and self.gradient_surjective
            and self.integrable
        )


def check_space_E(P: LabeledPolyhedron, u, b, seed: int = 0,
                  samples: int = 40) -> EReport:
    """Numerical membership test for the admissible potential space.

    Positive definiteness is sampled in the interior; properness of the
    gradient map is probed toward facets and along recession rays; weighted
    integrability of the potential uses a certified-tail quadrature plan.
    """
    rng = np.random.default_rng(seed)
    pts = P.sample_interior(rng, samples)
    hess_ok = True
    for x in pts:
        try:
            np.linalg.cholesky(u.hessian(x))
        except np.linalg.LinAlgError:
            hess_ok = False
            break

    report = check_boundary_conditions(P, u)
    W = P.scaled_normal_matrix()
    grad_blows = True
    for i in range(len(P.facets)):
        ladder = facet_ladder(P, i)
        q = [float(u.gradient(x) @ W[i]) / np.linalg.norm(W[i]) for x in ladder]
        if not (q[-1] < q[-2] < q[-3] and (q[-2] - q[-1]) >= 0.8 * (q[-3] - q[-2])):
            grad_blows = False

    rays = P.recession_rays()
    ray_growth = True
    x0 = P.interior_point()
    s = correction_of(u)
    for r in rays:
        w = np.array(r, dtype=float)
        w /= np.linalg.norm(w)
        t_hi = 8.0
        if s is not None and getattr(s, "domain", None) is not None:
            # stay on the correction grid: polynomials extrapolate wildly
            for d, (lo, hi) in enumerate(s.domain):
                if w[d] > 1e-12:
                    t_hi = min(t_hi, (hi - x0[d]) / w[d])
                elif w[d] < -1e-12:
                    t_hi = min(t_hi, (lo - x0[d]) / w[d])
        taus = [0.25 * t_hi, 0.5 * t_hi, t_hi]
        h = [float(u.gradient(x0 + tau * w) @ w) for tau in taus]
        if not (h[2] > h[1] > h[0] and h[2] - h[0] >= 0.05):
            ray_growth = False

    try:
        pl = build_plan(P, b, tol=1e-8)
        val = pl.integrate(lambda X: np.abs(u.value(X)))
        integrable = bool(np.isfinite(val))
    except DivergentWeight:
        integrable = False

    return EReport(
        hessian_positive=hess_ok,
        boundary_behaviour=report.ok,
        gradient_surjective=grad_blows and ray_growth,
        integrable=integrable,
    )
