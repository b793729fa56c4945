"""Metric geometry of lifted action-dependent systems.

A HerglotzSystem is the data (h_ij, A_i, V) of fields over (x, u, w).
Its lift is the (n+2)-dimensional metric, in coordinates (x1..xn, u, w):

    g = [[ h   A   0 ]
         [ A' -2V  -1 ]
         [ 0  -1   0 ]]

so the line element is h_ij dx^i dx^j + 2 A_i dx^i du - 2 V du^2
- 2 du dw.  The (u, w) corner is fixed: g_uw = -1 and g_ww = 0 pick the
normalization of the lift inside its conformal class.

All derivative quantities (metric derivatives, Christoffel symbols,
covariant gradients of vector fields) come from one forward-mode pass
over the coordinates; there is no symbolic differentiation and no
second-order jet anywhere.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Dual, Scalar
from .errors import AsymmetricMetricError, SingularMetricError
from .expr import Field, as_field

__all__ = [
    "Point", "HerglotzSystem", "FieldBundle", "BrinkmannMetric",
    "CoordinateMap", "NearlySingularKineticWarning",
    "covariant_sym_grad", "conformal_factor", "conformal_factor_closed_form",
    "conformal_pullback_check", "eval_vector_fields", "solve_kinetic",
]

_ASYMMETRY_TOL = 1e-12
_EIGEN_WARN = 1e-8
_SYM = "symmetrize"


class NearlySingularKineticWarning(UserWarning):
    """The kinetic block h has an eigenvalue close to zero."""


@dataclass
class Point:
    """A point (x, u, w) of the lifted space.  Treat as immutable."""

    x: np.ndarray
    u: float
    w: float

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)

    def coords(self) -> np.ndarray:
        return np.concatenate([self.x, [self.u, self.w]])

    @staticmethod
    def from_coords(coords: Sequence[float], n: int) -> "Point":
        coords = np.asarray(coords, dtype=float)
        return Point(coords[:n].copy(), float(coords[n]), float(coords[n + 1]))


@dataclass
class FieldBundle:
    """Values and coordinate gradients of (h, A, V) at one point.

    Index convention for gradients: axis 0 runs over the n+2 coordinates
    (x1..xn, u, w), so dh[c, i, j] is the c-th partial of h_ij.
    """

    h: np.ndarray    # (n, n)
    dh: np.ndarray   # (n+2, n, n)
    A: np.ndarray    # (n,)
    dA: np.ndarray   # (n+2, n)
    V: float
    dV: np.ndarray   # (n+2,)


class HerglotzSystem:
    """Field data (h, A, V) of an n-dimensional action-dependent system.

    `h` is an n x n nest of field sources (strings, numbers, callables or
    Fields), `A` a length-n list, `V` a single source.  Expression
    sources may reference x1..xn, u, w and any name in `params`.

    h is symmetrized on evaluation; if the two off-diagonal entries ever
    disagree by more than 1e-12 the evaluation raises
    AsymmetricMetricError, since that signals a typo rather than noise.
    """

    def __init__(self, n: int, h, A, V, params=None, name: str = ""):
        if n < 1:
            raise ValueError(f"dimension must be at least 1, got {n}")
        self.n = int(n)
        self.name = name or f"system(n={n})"
        self.params = dict(params or {})
        h = list(h)
        if len(h) != n or any(len(row) != n for row in h):
            raise ValueError(f"h must be {n}x{n}")
        if len(list(A)) != n:
            raise ValueError(f"A must have length {n}")
        self.h = [[as_field(h[i][j], n, self.params, f"h{i + 1}{j + 1}")
                   for j in range(n)] for i in range(n)]
        self.A = [as_field(a, n, self.params, f"A{i + 1}")
                  for i, a in enumerate(A)]
        self.V = as_field(V, n, self.params, "V")

    # -- raw field evaluation (generic over float/Dual coords) ---------

    def _h_entry(self, i: int, j: int, x, u, w) -> Scalar:
        a = self.h[i][j](x, u, w)
        if i == j:
            return a
        b = self.h[j][i](x, u, w)
        if abs(ad.value(a) - ad.value(b)) > _ASYMMETRY_TOL:
            raise AsymmetricMetricError(
                f"{self.name}: h[{i + 1},{j + 1}]={ad.value(a)!r} vs "
                f"h[{j + 1},{i + 1}]={ad.value(b)!r} at u={ad.value(u)!r}")
        return 0.5 * (a + b)

    def eval_fields(self, x, u, w):
        """(h entries, A entries, V) as scalars; x entries may be Duals."""
        n = self.n
        hs = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                v = self._h_entry(i, j, x, u, w)
                hs[i][j] = v
                hs[j][i] = v
        As = [self.A[i](x, u, w) for i in range(n)]
        return hs, As, self.V(x, u, w)

    def eval_values(self, point: Point):
        """(h, A, V) as plain float arrays at a point."""
        hs, As, V = self.eval_fields(list(point.x), point.u, point.w)
        h = np.array([[ad.value(v) for v in row] for row in hs])
        A = np.array([ad.value(a) for a in As])
        return h, A, ad.value(V)

    def eval_bundle(self, point: Point) -> FieldBundle:
        """Values plus all first coordinate derivatives, one seeded pass."""
        n = self.n
        m = n + 2
        coords = ad.seed(point.coords())
        hs, As, Vs = self.eval_fields(coords[:n], coords[n], coords[n + 1])
        h = np.empty((n, n))
        dh = np.empty((m, n, n))
        for i in range(n):
            for j in range(n):
                v, g = ad.value_and_grad(hs[i][j], m)
                h[i, j] = v
                dh[:, i, j] = g
        A = np.empty(n)
        dA = np.empty((m, n))
        for i in range(n):
            v, g = ad.value_and_grad(As[i], m)
            A[i] = v
            dA[:, i] = g
        V, dV = ad.value_and_grad(Vs, m)
        return FieldBundle(h, dh, A, dA, V, np.asarray(dV))

    def w_dependent(self, probes: Sequence[Point]) -> bool:
        """True if any field shows w-dependence at the probe points."""
        n = self.n
        for p in probes:
            b = self.eval_bundle(p)
            if (np.max(np.abs(b.dh[n + 1])) > 1e-13
                    or np.max(np.abs(b.dA[n + 1])) > 1e-13
                    or abs(b.dV[n + 1]) > 1e-13):
                return True
        return False


def _min_abs_eigenvalue(h: np.ndarray) -> float:
    n = h.shape[0]
    if n == 1:
        return abs(h[0, 0])
    if n == 2:
        # closed form avoids a LAPACK call in the stepping hot path
        tr = h[0, 0] + h[1, 1]
        disc = np.sqrt(max((h[0, 0] - h[1, 1]) ** 2 + 4.0 * h[0, 1] * h[1, 0], 0.0))
        return min(abs(0.5 * (tr - disc)), abs(0.5 * (tr + disc)))
    return float(np.min(np.abs(np.linalg.eigvalsh(h))))


def _h_inverse(h: np.ndarray, context: str) -> np.ndarray:
    if _min_abs_eigenvalue(h) < _EIGEN_WARN:
        warnings.warn("kinetic block h is nearly singular",
                      NearlySingularKineticWarning, stacklevel=3)
    n = h.shape[0]
    # closed forms dodge LAPACK dispatch overhead in the stepping loop
    if n == 1:
        a = h[0, 0]
        if a == 0.0:
            raise SingularMetricError(f"{context}: kinetic block is zero")
        return np.array([[1.0 / a]])
    if n == 2:
        det = h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0]
        if det == 0.0:
            raise SingularMetricError(f"{context}: kinetic block not invertible")
        return np.array([[h[1, 1], -h[0, 1]], [-h[1, 0], h[0, 0]]]) / det
    try:
        return np.linalg.inv(h)
    except np.linalg.LinAlgError as err:
        raise SingularMetricError(f"{context}: kinetic block not invertible "
                                  f"({err})") from None


def solve_kinetic(h: np.ndarray, rhs: np.ndarray, context: str) -> np.ndarray:
    """Solve h @ x = rhs with the same conditioning guards as _h_inverse."""
    if h.shape[0] <= 2:
        return _h_inverse(h, context) @ rhs
    if _min_abs_eigenvalue(h) < _EIGEN_WARN:
        warnings.warn("kinetic block h is nearly singular",
                      NearlySingularKineticWarning, stacklevel=3)
    try:
        return np.linalg.solve(h, rhs)
    except np.linalg.LinAlgError as err:
        raise SingularMetricError(f"{context}: kinetic block not invertible "
                                  f"({err})") from None


class BrinkmannMetric:
    """The lifted metric of a HerglotzSystem, with derivative machinery."""

    def __init__(self, system: HerglotzSystem):
        self.system = system
        self.dim = system.n + 2

    # -- assembly ------------------------------------------------------

    def eval(self, point: Point) -> np.ndarray:
        h, A, V = self.system.eval_values(point)
        return self._assemble(h, A, V)

    def _assemble(self, h: np.ndarray, A: np.ndarray, V: float) -> np.ndarray:
        n = self.system.n
        g = np.zeros((self.dim, self.dim))
        g[:n, :n] = h
        g[:n, n] = A
        g[n, :n] = A
        g[n, n] = -2.0 * V
        g[n, n + 1] = -1.0
        g[n + 1, n] = -1.0
        return g

    def eval_with_derivatives(self, point: Point, bundle: Optional[FieldBundle] = None):
        """(g, dg) with dg[c, mu, nu] the c-th coordinate partial."""
        n = self.system.n
        b = bundle if bundle is not None else self.system.eval_bundle(point)
        g = self._assemble(b.h, b.A, b.V)
        dg = np.zeros((self.dim, self.dim, self.dim))
        dg[:, :n, :n] = b.dh
        dg[:, :n, n] = b.dA
        dg[:, n, :n] = b.dA
        dg[:, n, n] = -2.0 * b.dV
        return g, dg

    # -- inverse (block closed form) -----------------------------------

    def inverse(self, point: Point, bundle: Optional[FieldBundle] = None) -> np.ndarray:
        if bundle is not None:
            h, A, V = bundle.h, bundle.A, bundle.V
        else:
            h, A, V = self.system.eval_values(point)
        return self._inverse_from(h, A, V)

    def _inverse_from(self, h: np.ndarray, A: np.ndarray, V: float) -> np.ndarray:
        n = self.system.n
        hinv = _h_inverse(h, self.system.name)
        hiA = hinv @ A
        ginv = np.zeros((self.dim, self.dim))
        ginv[:n, :n] = hinv
        ginv[:n, n + 1] = hiA
        ginv[n + 1, :n] = hiA
        ginv[n, n + 1] = -1.0
        ginv[n + 1, n] = -1.0
        ginv[n + 1, n + 1] = 2.0 * V + A @ hiA
        return ginv

    # -- Christoffel symbols -------------------------------------------

    def christoffel(self, point: Point, bundle: Optional[FieldBundle] = None) -> np.ndarray:
        """Gamma[mu, nu, rho] = (1/2) g^{mu s} (d_nu g_{s rho}
        + d_rho g_{s nu} - d_s g_{nu rho}); exactly symmetric in (nu, rho)."""
        b = bundle if bundle is not None else self.system.eval_bundle(point)
        g, dg = self.eval_with_derivatives(point, b)
        ginv = self._inverse_from(b.h, b.A, b.V)
        term = dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg
        return 0.5 * np.tensordot(ginv, term, axes=([1], [0]))

    def accelerations(self, point: Point, velocity: np.ndarray,
                      bundle: Optional[FieldBundle] = None) -> np.ndarray:
        """-Gamma^mu_{nu rho} v^nu v^rho without materializing Gamma.

        Same contraction as christoffel followed by two products, namely
        -g^{mu s} [ (v . d) g_{s rho} v^rho - (1/2) d_s (g v v) ]; used
        on the stepping hot path.
        """
        b = bundle if bundle is not None else self.system.eval_bundle(point)
        _, dg = self.eval_with_derivatives(point, b)
        ginv = self._inverse_from(b.h, b.A, b.V)
        v = velocity
        m = self.dim
        M = (v @ dg.reshape(m, m * m)).reshape(m, m)
        q = (dg @ v) @ v
        return -ginv @ (M @ v - 0.5 * q)


# -- vector fields over the lifted space -------------------------------

def eval_vector_fields(fields: Sequence, point: Point, n: int):
    """Values and coordinate gradients of a list of fields over (x, u, w).

    Returns (vals, grads) with grads[c, k] the c-th partial of field k.
    """
    m = n + 2
    coords = ad.seed(point.coords())
    x, u, w = coords[:n], coords[n], coords[n + 1]
    vals = np.empty(len(fields))
    grads = np.empty((m, len(fields)))
    for k, f in enumerate(fields):
        v, g = ad.value_and_grad(f(x, u, w), m)
        vals[k] = v
        grads[:, k] = g
    return vals, grads


def covariant_sym_grad(metric: BrinkmannMetric, gen, point: Point) -> np.ndarray:
    """S_{mu nu} = nabla_mu K_nu + nabla_nu K_mu for the vector field K
    with components (gen.dx, gen.du, gen.dw)."""
    system = metric.system
    b = system.eval_bundle(point)
    g, dg = metric.eval_with_derivatives(point, b)
    K, dK = eval_vector_fields(gen.component_fields(), point, system.n)
    K_low = g @ K
    dK_low = np.einsum("mns,s->mn", dg, K) + np.einsum("ns,ms->mn", g, dK)
    gamma = metric.christoffel(point, b)
    nabla = dK_low - np.einsum("smn,s->mn", gamma, K_low)
    return nabla + nabla.T


def conformal_factor(metric: BrinkmannMetric, gen, point: Point) -> float:
    """Trace part of the symmetrized covariant gradient:
    lambda = g^{mu nu} S_{mu nu} / (n + 2).

    For a conformal Killing field this is the factor in S = lambda g; for
    anything else it is just the trace projection.
    """
    S = covariant_sym_grad(metric, gen, point)
    ginv = metric.inverse(point)
    return float(np.tensordot(ginv, S, axes=2)) / metric.dim


def conformal_factor_closed_form(system: HerglotzSystem, gen, point: Point) -> float:
    """d_u(du) + d_w(dw) - A_i d_w(dx^i), the closed form the trace
    reproduces whenever the generator actually satisfies the symmetry
    identities.  Compared against conformal_factor only in tests."""
    n = system.n
    _, A, _ = system.eval_values(point)
    _, dK = eval_vector_fields(gen.component_fields(), point, n)
    return float(dK[n, n] + dK[n + 1, n + 1] - A @ dK[n + 1, :n])


# -- coordinate maps and conformal pullback ----------------------------

class CoordinateMap:
    """A smooth map of the lifted space, one field per output coordinate.

    Components are field sources over (x1..xn, u, w); the output has the
    same dimension n+2.
    """

    def __init__(self, n: int, components, params=None, name: str = "map"):
        self.n = n
        self.dim = n + 2
        if len(components) != self.dim:
            raise ValueError(f"need {self.dim} components, got {len(components)}")
        self.components = [as_field(c, n, params, f"{name}[{k}]")
                           for k, c in enumerate(components)]
        self.name = name

    def __call__(self, point: Point) -> Point:
        x, u, w = list(point.x), point.u, point.w
        vals = [ad.value(c(x, u, w)) for c in self.components]
        return Point.from_coords(vals, self.n)

    def value_and_jacobian(self, point: Point):
        """(image coords, J) with J[out, in] = d out / d in."""
        vals, grads = eval_vector_fields(self.components, point, self.n)
        return vals, grads.T


def conformal_pullback_check(metric_a: BrinkmannMetric, metric_b: BrinkmannMetric,
                             cmap: CoordinateMap, point: Point, omega,
                             params=None) -> float:
    """max | (J^T g_b(Phi(p)) J) - Omega(p) g_a(p) |.

    Zero means Phi pulls metric_b back to Omega times metric_a at p.
    `omega` is any field source over (x, u, w).
    """
    n = metric_a.system.n
    omega_f = as_field(omega, n, params, name="omega")
    vals, J = cmap.value_and_jacobian(point)
    g_b = metric_b.eval(Point.from_coords(vals, metric_b.system.n))
    g_a = metric_a.eval(point)
    om = ad.value(omega_f(list(point.x), point.u, point.w))
    return float(np.max(np.abs(J.T @ g_b @ J - om * g_a)))
