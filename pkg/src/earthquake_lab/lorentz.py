"""Linear algebra of R^{2,1} and R^{2,2}, the hyperboloid model of H^2.

Conventions
-----------
* Minkowski form on R^3: <u, v> = u1 v1 + u2 v2 - u3 v3; H^2 is the upper
  sheet <p, p> = -1, p3 > 0.
* A geodesic is stored as a unit spacelike normal n; its points are
  {p in H^2 : <p, n> = 0}.  The sign of n is the orientation.
* SL(2, R) acts on H^2 through the adjoint action on symmetric matrices:
  the point z = x + iy of the upper half-plane corresponds to
  S(z) = (1/y) [[|z|^2, x], [x, 1]], and A acts by S -> A S A^T.  In
  coordinates p = (S12, (S11 - S22)/2, (S11 + S22)/2), so that
  z = i is (0, 0, 1) and the imaginary axis is the geodesic with normal
  (1, 0, 0).
* The axis of a hyperbolic element A is the normal n with
  exp_boost(n, length(A)) == sl2_to_so21(A): the orientation of n
  encodes the translation direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import tol
from .errors import (Degenerate, NotHyperbolic, NotSpacelike, NotUnimodular,
                     NotUnitTimelike, PlanesDisjoint, ValidationError)

J = np.diag([1.0, 1.0, -1.0])
J4 = np.diag([1.0, 1.0, -1.0, -1.0])
ORIGIN = np.array([0.0, 0.0, 1.0])


def mdot(u, v):
    """Minkowski product along the last axis (broadcasts)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1] - u[..., 2] * v[..., 2]


def mdot4(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1] - u[..., 2] * v[..., 2] - u[..., 3] * v[..., 3]


def minkowski_cross(x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.stack([
        x[..., 1] * y[..., 2] - x[..., 2] * y[..., 1],
        x[..., 2] * y[..., 0] - x[..., 0] * y[..., 2],
        -x[..., 0] * y[..., 1] + x[..., 1] * y[..., 0],
    ], axis=-1)


def xi(x) -> np.ndarray:
    """Matrix of y -> x × y; an element of the Lie algebra o(2,1)."""
    x1, x2, x3 = np.asarray(x, dtype=float)
    return np.array([
        [0.0, -x3, x2],
        [x3, 0.0, -x1],
        [x2, -x1, 0.0],
    ])


def xi_inverse(L) -> np.ndarray:
    """Recover x from xi(x).  Assumes L is Minkowski-skew."""
    L = np.asarray(L, dtype=float)
    return np.array([-(L[1, 2] + L[2, 1]), L[0, 2] + L[2, 0], L[1, 0] - L[0, 1]]) / 2.0


def iso_inverse(M) -> np.ndarray:
    """Inverse of an element of O(2,1): J M^T J."""
    return J @ np.swapaxes(np.asarray(M, dtype=float), -1, -2) @ J


# -- points and geodesics -------------------------------------------------------

def as_point(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (3,) or not np.all(np.isfinite(p)):
        raise ValidationError("a point of H^2 is a finite 3-vector")
    if abs(mdot(p, p) + 1.0) > tol().hyperboloid or p[2] <= 0:
        raise ValidationError(f"not on the upper hyperboloid sheet: <p,p> = {mdot(p, p)!r}")
    return p


def normalize_point(v) -> np.ndarray:
    """Scale a future timelike vector onto the hyperboloid."""
    v = np.asarray(v, dtype=float)
    q = -mdot(v, v)
    if q <= 0:
        raise ValidationError("vector is not timelike")
    v = v / np.sqrt(q)
    return v if v[2] > 0 else -v


@dataclass(frozen=True, eq=False)
class Geodesic:
    """Oriented geodesic of H^2 given by a unit spacelike normal."""

    normal: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if n.shape != (3,):
            raise ValidationError("geodesic normal must be a 3-vector")
        if abs(mdot(n, n) - 1.0) > tol().spacelike_input:
            raise NotSpacelike(f"<n,n> = {mdot(n, n)!r}, expected 1")
        n = n / np.sqrt(mdot(n, n))
        n.setflags(write=False)
        object.__setattr__(self, "normal", n)

    def reversed(self) -> "Geodesic":
        return Geodesic(-self.normal)

    def contains(self, p, atol=1e-9) -> bool:
        return abs(float(mdot(p, self.normal))) <= atol

    def distance_to(self, p) -> float:
        return float(np.arcsinh(abs(mdot(p, self.normal))))

    def project(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return normalize_point(p - mdot(p, self.normal) * self.normal)

    def transformed(self, M) -> "Geodesic":
        return Geodesic(np.asarray(M, dtype=float) @ self.normal)

    def ideal_endpoints(self):
        """Endpoints in the upper half-plane boundary R ∪ {inf}, (backward, forward)."""
        n = self.normal
        # null vectors orthogonal to n span the light-cone directions of the geodesic
        K = xi(n)
        # eigenvectors of K with eigenvalues +1 / -1 are the forward / backward ends
        w, V = np.linalg.eig(K)
        w = w.real
        fwd = V[:, int(np.argmax(w))].real
        bwd = V[:, int(np.argmin(w))].real
        return _null_to_boundary(bwd), _null_to_boundary(fwd)


def _null_to_boundary(v):
    # a null vector v corresponds to S = [[v3+v2, v1],[v1, v3-v2]] of rank one, = c (x,1)(x,1)^T
    s11 = v[2] - v[1]
    if abs(s11) < 1e-12 * max(1.0, np.abs(v).max()):
        return float("inf")
    return float(v[0] / s11)


def h2_distance(p, q) -> float:
    return float(np.arccosh(max(1.0, -float(mdot(p, q)))))


def geodesic_point(p, q, s) -> np.ndarray:
    """Point at arclength fraction ``s`` along [p, q]."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = h2_distance(p, q)
    if d == 0.0:
        return p.copy()
    return (np.sinh((1.0 - s) * d) * p + np.sinh(s * d) * q) / np.sinh(d)


def unit_tangent(p, q) -> np.ndarray:
    """Unit tangent at p of the geodesic through p and q."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    v = q + mdot(p, q) * p
    return v / np.sqrt(mdot(v, v))


def geodesic_through(p, q) -> Geodesic:
    """Geodesic oriented from p to q (normal = p × q, rescaled)."""
    n = minkowski_cross(p, q)
    n = n / np.sqrt(mdot(n, n))
    g = Geodesic(n)
    # orient so that the forward tangent at p points towards q
    if mdot(xi(g.normal) @ np.asarray(p, dtype=float), q) < 0:
        g = g.reversed()
    return g


# -- boosts and the SL2 bridge ------------------------------------------------------

def exp_boost(n, t: float) -> np.ndarray:
    """Hyperbolic isometry with axis n^perp and signed translation length t.

    Closed form: xi(n) has eigenvalues (0, 1, -1) for unit spacelike n, so
    xi(n)^3 = xi(n) and exp(t xi(n)) = I + sinh t xi(n) + (cosh t - 1) xi(n)^2.
    """
    n = np.asarray(n, dtype=float)
    if abs(mdot(n, n) - 1.0) > tol().spacelike_input:
        raise NotSpacelike(f"<n,n> = {mdot(n, n)!r}, expected 1")
    K = xi(n)
    return np.eye(3) + np.sinh(t) * K + (np.cosh(t) - 1.0) * (K @ K)


def _sym_from_vec(p):
    p1, p2, p3 = p
    return np.array([[p3 + p2, p1], [p1, p3 - p2]])


def _vec_from_sym(S):
    return np.array([S[..., 0, 1], (S[..., 0, 0] - S[..., 1, 1]) / 2.0, (S[..., 0, 0] + S[..., 1, 1]) / 2.0])


_SYM_BASIS = [_sym_from_vec(e) for e in np.eye(3)]


def check_unimodular(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.shape[-2:] != (2, 2):
        raise ValidationError("expected a 2x2 matrix")
    # relative check: det of a matrix with large entries carries rounding ~ |A|^2 eps
    scale = np.maximum(1.0, np.sum(A * A, axis=(-2, -1)))
    if np.any(np.abs(np.linalg.det(A) - 1.0) > tol().unimodular * scale):
        raise NotUnimodular(f"det = {np.linalg.det(A)!r}")
    return A


def sl2_to_so21(A) -> np.ndarray:
    """Image of A in SO+(2,1) under the adjoint action; accepts a stack (..., 2, 2)."""
    A = check_unimodular(A)
    cols = [_vec_from_sym(A @ S @ np.swapaxes(A, -1, -2)) for S in _SYM_BASIS]
    # each col has shape (3, ...) -> assemble (..., 3, 3)
    M = np.stack(cols, axis=0)          # (3 cols, 3 rows, ...)
    return np.moveaxis(M, (0, 1), (-1, -2))


def so21_to_sl2(M) -> np.ndarray:
    """One of the two lifts of M in SO+(2,1) to SL(2, R)."""
    M = np.asarray(M, dtype=float)
    S11 = _sym_from_vec(M @ np.array([0.0, 0.5, 0.5]))    # = c1 c1^T
    S22 = _sym_from_vec(M @ np.array([0.0, -0.5, 0.5]))   # = c2 c2^T
    S12 = _sym_from_vec(M @ np.array([1.0, 0.0, 0.0]))    # = c1 c2^T + c2 c1^T
    c1 = _rank_one_root(S11)
    c2 = _rank_one_root(S22)
    cross = np.outer(c1, c2) + np.outer(c2, c1)
    if np.abs(cross + S12).max() < np.abs(cross - S12).max():
        c2 = -c2
    A = np.column_stack([c1, c2])
    if np.linalg.det(A) < 0:
        raise ValidationError("matrix is not in the identity component of O(2,1)")
    return A


def _rank_one_root(S):
    i = int(np.argmax(np.diag(S)))
    v = S[:, i] / np.sqrt(S[i, i])
    return v


def halfplane_to_hyperboloid(z) -> np.ndarray:
    z = complex(z)
    x, y = z.real, z.imag
    if y <= 0:
        raise ValidationError("point not in the upper half-plane")
    r2 = x * x + y * y
    return np.array([x / y, (r2 - 1.0) / (2.0 * y), (r2 + 1.0) / (2.0 * y)])


def hyperboloid_to_halfplane(p) -> complex:
    p = np.asarray(p, dtype=float)
    s11 = p[2] - p[1]
    return complex(p[0] / s11, 1.0 / s11)


def mobius(A, z) -> complex:
    a, b, c, d = np.asarray(A, dtype=float).ravel()
    return (a * z + b) / (c * z + d)


def _sl2_algebra_map():
    # derivative of sl2_to_so21 at I: X -> (S -> X S + S X^T) in p-coordinates
    basis = [np.array([[1.0, 0.0], [0.0, -1.0]]),
             np.array([[0.0, 1.0], [0.0, 0.0]]),
             np.array([[0.0, 0.0], [1.0, 0.0]])]
    cols = []
    for X in basis:
        L = np.column_stack([_vec_from_sym(X @ S + S @ X.T) for S in _SYM_BASIS])
        cols.append(xi_inverse(L))
    N = np.column_stack(cols)          # n = N @ coeffs
    return basis, np.linalg.inv(N)


_SL2_BASIS, _N_TO_COEFFS = _sl2_algebra_map()


def sl2_generator(n) -> np.ndarray:
    """The X in sl(2, R) whose adjoint image is xi(n)."""
    c = _N_TO_COEFFS @ np.asarray(n, dtype=float)
    return c[0] * _SL2_BASIS[0] + c[1] * _SL2_BASIS[1] + c[2] * _SL2_BASIS[2]


def sl2_boost(n, t: float) -> np.ndarray:
    """Lift of exp_boost(n, t) to SL(2, R) continuous in t (identity at t = 0)."""
    n = np.asarray(n, dtype=float)
    if abs(mdot(n, n) - 1.0) > tol().spacelike_input:
        raise NotSpacelike(f"<n,n> = {mdot(n, n)!r}, expected 1")
    # X^2 = I/4 for unit spacelike n, hence exp(tX) = cosh(t/2) I + 2 sinh(t/2) X
    return np.cosh(t / 2.0) * np.eye(2) + 2.0 * np.sinh(t / 2.0) * sl2_generator(n)


# -- hyperbolic elements ----------------------------------------------------------

def translation_length(A) -> float:
    A = check_unimodular(A)
    tr = abs(float(np.trace(A)))
    if tr <= 2.0 + tol().hyperbolic_trace:
        raise NotHyperbolic(f"|tr| = {tr!r} <= 2")
    return 2.0 * float(np.arccosh(tr / 2.0))


def iso_translation_length(M) -> float:
    c = (float(np.trace(M)) - 1.0) / 2.0
    if c <= 1.0 + tol().hyperbolic_trace:
        raise NotHyperbolic(f"cosh(length) = {c!r} <= 1")
    return float(np.arccosh(c))


def axis(A) -> Geodesic:
    """Oriented axis of a hyperbolic element given as Mat2 or Iso21."""
    A = np.asarray(A, dtype=float)
    if A.shape == (2, 2):
        length = translation_length(A)
        M = sl2_to_so21(A)
    elif A.shape == (3, 3):
        M = A
        length = iso_translation_length(M)
    else:
        raise ValidationError("axis expects a 2x2 or 3x3 matrix")
    K = (M - iso_inverse(M)) / (2.0 * np.sinh(length))
    n = xi_inverse(K)
    return Geodesic(n / np.sqrt(mdot(n, n)))


# -- crossings ----------------------------------------------------------------------

@dataclass(frozen=True)
class CrossingRecord:
    parameter: float     # arclength fraction along [p, q]
    side: int            # +1 if the normal points towards q, -1 otherwise


def crossing(g, p, q) -> Optional[CrossingRecord]:
    n = g.normal if isinstance(g, Geodesic) else np.asarray(g, dtype=float)
    a = float(mdot(p, n))
    b = float(mdot(q, n))
    eps = tol().crossing_degenerate
    if abs(a) < eps or abs(b) < eps:
        raise Degenerate("segment endpoint lies on the geodesic")
    if (a > 0) == (b > 0):
        return None
    return CrossingRecord(_crossing_parameter(p, q, a, b), 1 if b > 0 else -1)


def _crossing_parameter(p, q, a, b):
    d = h2_distance(p, q)
    u = np.arctanh(a * np.sinh(d) / (a * np.cosh(d) - b))
    return float(u / d)


# -- AdS -------------------------------------------------------------------------

def ads_angle(N1, N2) -> float:
    """Angle between spacelike planes of AdS from their unit timelike normals in R^{2,2}."""
    N1 = np.asarray(N1, dtype=float)
    N2 = np.asarray(N2, dtype=float)
    for N in (N1, N2):
        if N.shape != (4,) or abs(mdot4(N, N) + 1.0) > tol().ads_unit:
            raise NotUnitTimelike(f"<N,N> = {mdot4(N, N)!r}, expected -1")
    c = abs(float(mdot4(N1, N2)))
    if c < 1.0 - tol().ads_disjoint:
        raise PlanesDisjoint(f"|<N1,N2>| = {c!r} < 1")
    return float(np.arccosh(max(c, 1.0)))
