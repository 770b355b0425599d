"""Points of Teichmüller space of the genus-2 surface.

Pants decomposition (fixed): c1 = a1, c2 = a2, c3 = [a1, b1] = a1 b1 A1 B1.
The surface is the union of the one-holed tori <a1, b1> and <a2, b2>
glued along c3; cutting each torus along its a-curve yields the two pairs
of pants.

Fenchel–Nielsen coordinates (l1, l2, l3, t1, t2, t3) are built as follows.

* Torus i: ``A = diag(e^{l/2}, e^{-l/2})`` and ``B = S(m) · D(t)`` where
  S(m) is the translation of length m along the unit circle geodesic
  (perpendicular to the axis of A at i) and D(t) = diag(e^{t/2}, e^{-t/2})
  is the translation of length t along the axis of A.  The length m is
  fixed by tr[A, B] = -2 cosh(l3/2), i.e. sinh(m/2) = cosh(l3/4)/sinh(l/2).
* Twist zero for c3 aligns the feet of the common perpendiculars from
  axis(a1) and axis(a2) to the two copies of axis(c3); the twist t3
  conjugates the second torus by the translation of length t3 along the
  axis of c3.

Convention C1: positive twists are the direction in which the right
earthquake moves, so ``E_r`` along the weighted pants curve (c_i, w) for
time t adds exactly ``t * w`` to ``t_i`` (see ``earthquake``).  Twists are in
length units and unbounded (the chart is global).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import minimize

from . import lorentz as lz
from .config import tol
from .errors import (DegenerateLength, MarkingMismatch, NotHyperbolic,
                     ValidationError)
from .words import CurveWord, SurfaceGroup, as_curve, format_word, parse_word

GENUS2 = SurfaceGroup(2)
PANTS_CURVES = (CurveWord.parse("a1"), CurveWord.parse("a2"), CurveWord.parse("a1b1A1B1"))

# Sign multipliers turning the coordinate twist into the geometric one (convention C1).
TWIST_SIGNS = (-1.0, -1.0, -1.0)

# Words compared by the marked distance proxy: generators, pants curves,
# and products of pairs and triples of generators.
PROXY_WORDS = tuple(CurveWord.parse(w) for w in (
    "a1", "b1", "a2", "b2", "a1b1A1B1",
    "a1b1", "a1B1", "a2b2", "a2B2",
    "a1a2", "a1A2", "b1b2", "b1B2", "a1b2", "b1a2",
    "a1b1a2", "a1b1b2", "b1a2b2", "a1a2b2", "a1b1a2b2",
))


@dataclass(frozen=True)
class FNCoords:
    lengths: tuple
    twists: tuple

    def __post_init__(self):
        lengths = tuple(float(x) for x in self.lengths)
        twists = tuple(float(x) for x in self.twists)
        if len(lengths) != len(twists) or len(lengths) == 0:
            raise ValidationError("need as many twists as lengths")
        if not all(np.isfinite(lengths)) or not all(np.isfinite(twists)):
            raise ValidationError("FN coordinates must be finite")
        if any(x <= 0 for x in lengths):
            raise ValidationError(f"lengths must be positive, got {lengths}")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "twists", twists)

    @property
    def genus(self) -> int:
        return len(self.lengths) // 3 + 1

    def to_vector(self) -> np.ndarray:
        return np.array(self.lengths + self.twists)

    @classmethod
    def from_vector(cls, v) -> "FNCoords":
        v = [float(x) for x in v]
        k = len(v) // 2
        return cls(tuple(v[:k]), tuple(v[k:]))

    def with_twist(self, i: int, dt: float) -> "FNCoords":
        tw = list(self.twists)
        tw[i] += dt
        return FNCoords(self.lengths, tuple(tw))

    def to_dict(self) -> dict:
        return {"lengths": list(self.lengths), "twists": list(self.twists)}

    @classmethod
    def from_dict(cls, d) -> "FNCoords":
        try:
            return cls(tuple(d["lengths"]), tuple(d["twists"]))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad FNCoords payload: {exc}") from exc


def _inv2(A):
    return np.array([[A[1, 1], -A[0, 1]], [-A[1, 0], A[0, 0]]])


class HolonomyRep:
    """Marked assignment of SL(2, R) matrices to the generators a1, b1, ..., bg."""

    def __init__(self, matrices, group: SurfaceGroup = GENUS2):
        mats = np.array(matrices, dtype=float)
        if mats.shape != (group.rank, 2, 2):
            raise ValidationError(f"expected {group.rank} matrices of shape 2x2")
        lz.check_unimodular(mats)
        mats.setflags(write=False)
        self.group = group
        self.matrices = mats

    def __repr__(self):
        return f"{type(self).__name__}(genus={self.group.genus})"

    def letter(self, x: int) -> np.ndarray:
        A = self.matrices[abs(x) - 1]
        return A if x > 0 else _inv2(A)

    def word(self, letters) -> np.ndarray:
        if isinstance(letters, str):
            letters = parse_word(letters, self.group.genus)
        elif isinstance(letters, CurveWord):
            letters = letters.letters
        out = np.eye(2)
        for x in letters:
            out = out @ self.letter(x)
        return out

    @cached_property
    def so21(self) -> np.ndarray:
        """Generator images in SO+(2,1), shape (rank, 3, 3)."""
        return lz.sl2_to_so21(self.matrices)

    def letter_so21(self, x: int) -> np.ndarray:
        M = self.so21[abs(x) - 1]
        return M if x > 0 else lz.iso_inverse(M)

    def word_so21(self, letters) -> np.ndarray:
        if isinstance(letters, CurveWord):
            letters = letters.letters
        out = np.eye(3)
        for x in letters:
            out = out @ self.letter_so21(x)
        return out

    def relator_residual(self) -> float:
        R = self.word(self.group.relator)
        return float(min(np.linalg.norm(R - np.eye(2)), np.linalg.norm(R + np.eye(2))))

    def conjugated(self, g) -> "HolonomyRep":
        g = np.asarray(g, dtype=float)
        gi = np.linalg.inv(g)
        return HolonomyRep(g @ self.matrices @ gi, self.group)

    def to_dict(self) -> dict:
        return {
            "genus": self.group.genus,
            "generators": self.group.generator_names,
            "matrices": [[list(map(float, row)) for row in A] for A in self.matrices],
        }

    @classmethod
    def from_dict(cls, d) -> "HolonomyRep":
        try:
            group = SurfaceGroup(int(d.get("genus", 2)))
            return cls(d["matrices"], group)
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad holonomy payload: {exc}") from exc


class TeichPoint(HolonomyRep):
    """A normalized holonomy representation: canonical point of its conjugacy class.

    a1 is diagonal with attracting fixed point at infinity (axis 0 <-> inf), and
    the remaining freedom (translation along that axis) is fixed by
    sum_k M_k[0, 1]^2 = sum_k M_k[1, 0]^2, which puts i at the point of the axis
    minimizing sum_k |M_k|_F^2 (keeps entries, hence rounding, small).
    """

    def __init__(self, matrices, group: SurfaceGroup = GENUS2, *, _checked=False):
        super().__init__(matrices, group)
        if not _checked:
            res = normalization_residual(self)
            if res > 1e-10:
                raise ValidationError(f"representation is not normalized (residual {res:.2e})")

    @cached_property
    def fn(self) -> FNCoords:
        return holonomy_to_fn(self)

    def to_dict(self) -> dict:
        out = super().to_dict()
        out["marking"] = [str(w) for w in PROXY_WORDS]
        return out

    @classmethod
    def from_dict(cls, d) -> "TeichPoint":
        return normalize(HolonomyRep.from_dict(d))


def centering_conjugator(rep: HolonomyRep) -> np.ndarray:
    """SL2 matrix Q moving the point x minimizing sum_k cosh d(x, g_k x) to i.

    In the conjugated frame Q g Q^-1 the generators have the smallest entries,
    which keeps rounding in long products (lift enumeration, earthquakes) small.
    """
    M = rep.so21

    def F(v):
        x = np.array([v[0], v[1], np.sqrt(1.0 + v[0] ** 2 + v[1] ** 2)])
        return -float(np.sum(lz.mdot(x, M @ x)))

    res = minimize(F, np.zeros(2), method="BFGS", options={"gtol": 1e-10})
    x = np.array([res.x[0], res.x[1], np.sqrt(1.0 + res.x @ res.x)])
    z = lz.hyperboloid_to_halfplane(x)
    r = np.sqrt(z.imag)
    return np.array([[1.0 / r, -z.real / r], [0.0, r]])


def normalization_residual(rep: HolonomyRep) -> float:
    A = rep.matrices[0]
    res = abs(A[0, 1]) + abs(A[1, 0])
    if abs(A[0, 0]) <= abs(A[1, 1]):
        res += 1.0
    low, up = np.sum(rep.matrices[:, 1, 0] ** 2), np.sum(rep.matrices[:, 0, 1] ** 2)
    res += abs(low - up) / max(1.0, up)
    return float(res)


def _diagonalize_a1(rep: HolonomyRep) -> HolonomyRep:
    A = rep.matrices[0]
    w, V = np.linalg.eig(A)
    if np.iscomplexobj(w) and np.abs(w.imag).max() > 0:
        raise NotHyperbolic("a1 is not hyperbolic")
    w, V = w.real, V.real
    order = np.argsort(-np.abs(w))
    P = V[:, order]
    d = np.linalg.det(P)
    if d < 0:
        P[:, 1] = -P[:, 1]
        d = -d
    P = P / np.sqrt(d)
    return rep.conjugated(_inv2(P))


def _scaled(rep: HolonomyRep, s: float) -> np.ndarray:
    mats = np.diag([s, 1.0 / s]) @ rep.matrices @ np.diag([1.0 / s, s])
    mats[0, 0, 1] = 0.0
    mats[0, 1, 0] = 0.0
    return mats


def torus_frame(rep: HolonomyRep) -> HolonomyRep:
    """Conjugate determined by (a1, b1) alone: a1 diagonal, |b1[0,1]| = |b1[1,0]|."""
    rep1 = _diagonalize_a1(rep)
    B = rep1.matrices[1]
    return HolonomyRep(_scaled(rep1, (abs(B[1, 0]) / abs(B[0, 1])) ** 0.25), rep.group)


def normalize(rep: HolonomyRep) -> TeichPoint:
    """Conjugate into the canonical normal form of :class:`TeichPoint`."""
    rep1 = _diagonalize_a1(rep)
    M = rep1.matrices
    s = (np.sum(M[:, 1, 0] ** 2) / np.sum(M[:, 0, 1] ** 2)) ** 0.125
    return TeichPoint(_scaled(rep1, s), rep.group, _checked=True)


# -- construction -------------------------------------------------------------------

def _check_lengths(c: FNCoords):
    if len(c.lengths) != 3:
        raise ValidationError("holonomy construction is implemented for genus 2 (3 pants curves)")
    t = tol()
    for x in c.lengths:
        if x < t.min_length or x > t.max_length:
            raise DegenerateLength(f"pants length {x!r} outside [{t.min_length}, {t.max_length}]")


def _torus(length, boundary, twist_signed):
    """(A, B) of the symmetric one-holed torus, B twisted along the axis of A."""
    A = np.diag([np.exp(length / 2.0), np.exp(-length / 2.0)])
    sh = np.cosh(boundary / 4.0) / np.sinh(length / 2.0)
    m2 = np.arcsinh(sh)
    S = np.array([[np.cosh(m2), np.sinh(m2)], [np.sinh(m2), np.cosh(m2)]])
    D = np.diag([np.exp(twist_signed / 2.0), np.exp(-twist_signed / 2.0)])
    return A, S @ D


def _frame(axis_normal, point):
    """SO+(2,1) frame [forward tangent, normal direction, point] along an oriented geodesic."""
    e = lz.xi(axis_normal) @ point
    e = e / np.sqrt(lz.mdot(e, e))
    f = lz.minkowski_cross(point, e)
    f = f / np.sqrt(lz.mdot(f, f))
    F = np.column_stack([e, f, point])
    if np.linalg.det(F) < 0:
        F[:, 1] = -F[:, 1]
    return F


def _perpendicular_foot(n_from, n_to):
    """Foot on geodesic n_to of the common perpendicular with geodesic n_from."""
    n_perp = lz.minkowski_cross(n_from, n_to)
    p = lz.minkowski_cross(n_to, n_perp)
    return lz.normalize_point(p)


def _commutator(A, B):
    return A @ B @ _inv2(A) @ _inv2(B)


def _glue(l1, l2, l3):
    """Zero-twist gluing map g (SL2) carrying the second torus onto the far side of c3."""
    A1, B1 = _torus(l1, l3, 0.0)
    A2, B2 = _torus(l2, l3, 0.0)
    C1, C2 = _commutator(A1, B1), _commutator(A2, B2)
    n1, n2 = lz.axis(C1).normal, lz.axis(C2).normal
    p1 = _perpendicular_foot(lz.axis(A1).normal, n1)
    p2 = _perpendicular_foot(lz.axis(A2).normal, n2)
    F1, F2 = _frame(n1, p1), _frame(n2, p2)
    g = F1 @ np.diag([-1.0, -1.0, 1.0]) @ lz.iso_inverse(F2)
    return lz.so21_to_sl2(g), n1


def raw_holonomy(c: FNCoords) -> HolonomyRep:
    """Un-normalized representation built from FN coordinates."""
    _check_lengths(c)
    l1, l2, l3 = c.lengths
    s = TWIST_SIGNS
    t1, t2, t3 = (s[i] * c.twists[i] for i in range(3))
    A1, B1 = _torus(l1, l3, t1)
    A2, B2 = _torus(l2, l3, t2)
    g, n3 = _glue(l1, l2, l3)
    T = lz.sl2_boost(n3, t3) @ g
    Ti = _inv2(T)
    return HolonomyRep([A1, B1, T @ A2 @ Ti, T @ B2 @ Ti], GENUS2)


def fn_to_holonomy(c: FNCoords) -> TeichPoint:
    return normalize(raw_holonomy(c))


def _torus_twist(rep, a, b, length):
    """Signed twist of the torus <a, b> from traces (inverse of ``_torus``)."""
    tb = float(np.trace(rep.letter(b)))
    tab = float(np.trace(rep.letter(a) @ rep.letter(b)))
    th = (tab / tb - np.cosh(length / 2.0)) / np.sinh(length / 2.0)
    if abs(th) >= 1.0:
        raise ValidationError("representation is outside the Fenchel–Nielsen chart")
    return 2.0 * float(np.arctanh(th))


def holonomy_to_fn(rep: HolonomyRep) -> FNCoords:
    """FN coordinates of a marked genus-2 representation (the chart x)."""
    if rep.group.genus != 2:
        raise ValidationError("FN chart implemented for genus 2")
    lengths = tuple(lz.translation_length(rep.word(w)) for w in PANTS_CURVES)
    s = TWIST_SIGNS
    t1 = _torus_twist(rep, 1, 2, lengths[0])
    t2 = _torus_twist(rep, 3, 4, lengths[1])
    # both conjugated by the frame of (a1, b1), which they share
    ref = torus_frame(raw_holonomy(FNCoords(lengths, (s[0] * t1, s[1] * t2, 0.0))))
    u = torus_frame(rep)
    n3 = lz.axis(ref.word(PANTS_CURVES[2])).normal
    X = lz.sl2_generator(n3)
    w, P = np.linalg.eig(X)
    P = P.real[:, np.argsort(-w.real)]
    Pi = np.linalg.inv(P)
    M0 = Pi @ ref.matrices[2] @ P
    M1 = Pi @ u.matrices[2] @ P
    ratio = (M1[0, 1] * M0[1, 0]) / (M0[0, 1] * M1[1, 0])
    if not ratio > 0:
        raise ValidationError("representation is outside the Fenchel–Nielsen chart")
    t3 = 0.5 * float(np.log(ratio))
    return FNCoords(lengths, (s[0] * t1, s[1] * t2, s[2] * t3))


# -- lengths --------------------------------------------------------------------------

def curve_length(u: HolonomyRep, c) -> float:
    c = as_curve(c, u.group.genus)
    return lz.translation_length(u.word(c))


def lamination_length(u: HolonomyRep, lam) -> float:
    """Sum of w * length over the leaves; ``lam`` is anything ``as_multicurve`` accepts."""
    from .curves import as_multicurve  # curves imports this module
    lam = as_multicurve(lam)
    return float(sum(w * curve_length(u, c) for c, w in lam.items if w != 0.0))


def _as_point(u):
    if isinstance(u, FNCoords):
        return fn_to_holonomy(u)
    return u


def length_gradient(u, lam, mu=None, step: float | None = None) -> np.ndarray:
    """Central-difference gradient of l(lam) [+ l(mu)] in FN coordinates; O(step^2)."""
    c = u if isinstance(u, FNCoords) else holonomy_to_fn(u)
    h = tol().fd_step if step is None else step
    x = c.to_vector()

    def F(v):
        p = fn_to_holonomy(FNCoords.from_vector(v))
        val = lamination_length(p, lam)
        if mu is not None:
            val += lamination_length(p, mu)
        return val

    g = np.empty_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (F(x + e) - F(x - e)) / (2.0 * h)
    return g


def proxy_log_ratios(u: HolonomyRep, v: HolonomyRep, words=PROXY_WORDS) -> np.ndarray:
    if u.group != v.group:
        raise MarkingMismatch("representations of different surface groups")
    return np.array([np.log(curve_length(u, w) / curve_length(v, w)) for w in words])


def teich_distance_proxy(u, v, words=PROXY_WORDS) -> float:
    """max over a fixed word list of |log(l_u(w) / l_v(w))| (marking-sensitive)."""
    u, v = _as_point(u), _as_point(v)
    return float(np.abs(proxy_log_ratios(u, v, words)).max())


def twist(u, i: int, dt: float) -> TeichPoint:
    """Exact FN twist: shift the i-th twist coordinate by dt."""
    c = u if isinstance(u, FNCoords) else holonomy_to_fn(u)
    return fn_to_holonomy(c.with_twist(i, dt))


def dumps_point(u: TeichPoint) -> str:
    return json.dumps(u.to_dict(), sort_keys=True)


__all__ = [
    "FNCoords", "HolonomyRep", "TeichPoint", "PANTS_CURVES", "PROXY_WORDS", "GENUS2",
    "fn_to_holonomy", "holonomy_to_fn", "normalize", "curve_length", "lamination_length",
    "length_gradient", "teich_distance_proxy", "twist", "raw_holonomy", "format_word",
]
