"""Translation cocycles of affine deformations and their relation to earthquakes.

A weighted multicurve lam and a base point x0 give the R^3-valued map

    tau(alpha) = sum_i m_i w_i,

summed over the leaves crossed by [x0, h(alpha) x0] (unit normals pointing
towards h(alpha) x0).  It satisfies tau(ab) = tau(a) + h(a) tau(b); changing x0
changes it by a coboundary v - h(a) v.  Cohomology classes are represented by
the least-squares reduced cocycle.

Like earthquakes, cocycles of a holonomy h are computed in its balanced frame
Q h Q^-1 (``centering_conjugator``), where the generator matrices are small
enough for the relator to close to ~1e-10; the cocycle records Q and
``transported`` moves it to any other frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lorentz as lz
from .config import DEFAULT_BASE_POINT, tol
from .curves import as_multicurve
from .earthquake import crossing_data, raw_earthquake
from .errors import Degenerate, IllConditioned, RelatorBroken, ValidationError
from .lifts import stable_crossings
from .teichmueller import HolonomyRep, centering_conjugator
from .words import free_reduce, parse_word

SIGNS = ("+", "-")


@dataclass(frozen=True)
class TranslationCocycle:
    """Values on the generators of a surface group, over the SO+(2,1) holonomy ``holonomy``."""

    group: object
    values: np.ndarray        # (n_generators, 3)
    holonomy: np.ndarray      # (n_generators, 3, 3)
    frame: np.ndarray | None = None   # SL2 Q with holonomy = Q h Q^-1 for the input h

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        hol = np.asarray(self.holonomy, dtype=float)
        n = 2 * self.group.genus
        if values.shape != (n, 3) or hol.shape != (n, 3, 3):
            raise ValidationError("cocycle needs one 3-vector and one 3x3 matrix per generator")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "holonomy", hol)
        if self.frame is None:
            object.__setattr__(self, "frame", np.eye(2))

    def transported(self, g) -> "TranslationCocycle":
        """The cocycle g.tau over g h g^-1 (g in SL2); changes the class by nothing."""
        G = lz.sl2_to_so21(np.asarray(g, dtype=float))
        return TranslationCocycle(self.group, self.values @ G.T, G @ self.holonomy @ lz.iso_inverse(G),
                                  np.asarray(g) @ self.frame)

    def letter(self, x: int):
        """(h(x), tau(x)) for a signed letter x."""
        g = abs(x) - 1
        M, v = self.holonomy[g], self.values[g]
        if x > 0:
            return M, v
        Minv = lz.iso_inverse(M)
        return Minv, -Minv @ v

    def relator_residual(self) -> float:
        return float(np.abs(extend_cocycle(self, self.group.relator)).max())

    def scale(self) -> float:
        return float(np.abs(self.values).max(initial=0.0))

    def __add__(self, other: "TranslationCocycle") -> "TranslationCocycle":
        return TranslationCocycle(self.group, self.values + other.values, self.holonomy, self.frame)

    def __neg__(self) -> "TranslationCocycle":
        return TranslationCocycle(self.group, -self.values, self.holonomy, self.frame)

    def to_dict(self) -> dict:
        names = self.group.generator_names
        return {"generators": {n: [float(x) for x in v] for n, v in zip(names, self.values)}}

    def csv_rows(self) -> list:
        return [[n, *map(float, v)] for n, v in zip(self.group.generator_names, self.values)]


def _letters(w) -> tuple:
    if isinstance(w, str):
        return parse_word(w) if w else ()
    return tuple(w)


def extend_cocycle(tau: TranslationCocycle, w) -> np.ndarray:
    """tau(w) by the cocycle rule tau(ab) = tau(a) + h(a) tau(b)."""
    value = np.zeros(3)
    M = np.eye(3)
    for x in _letters(w):
        Mx, vx = tau.letter(x)
        value = value + M @ vx
        M = M @ Mx
    return value


def word_holonomy(tau: TranslationCocycle, w) -> np.ndarray:
    M = np.eye(3)
    for x in _letters(w):
        M = M @ tau.letter(x)[0]
    return M


def cocycle_value(h: HolonomyRep, lam, w, x0=None, depth: int = 8, max_depth: int = 14) -> np.ndarray:
    """tau^lam_+(w) evaluated directly from the crossings of [x0, h(w) x0] (balanced frame)."""
    lam = as_multicurve(lam)
    x0 = lz.as_point(DEFAULT_BASE_POINT if x0 is None else x0)
    Q = centering_conjugator(h)
    hb = h.conjugated(Q)
    letters = free_reduce(_letters(w))
    if not letters or lam.is_zero():
        return np.zeros(3)
    target = lz.sl2_to_so21(hb.word(letters)) @ x0
    if lz.h2_distance(x0, target) > tol().max_segment:
        raise Degenerate("segment too long for reliable lift enumeration",
                         length=lz.h2_distance(x0, target), limit=tol().max_segment)
    (cr,), _ = stable_crossings(hb, lam.curves, x0, [target], depth, max_depth)
    weights = lam.weights
    return sum((weights[c.curve] * c.normal for c in cr), np.zeros(3))


def coboundary(h, v) -> TranslationCocycle:
    """The cocycle alpha -> v - h(alpha) v; ``h`` a HolonomyRep or a cocycle (its holonomy and frame)."""
    v = np.asarray(v, dtype=float)
    if isinstance(h, TranslationCocycle):
        return TranslationCocycle(h.group, v[None, :] - h.holonomy @ v, h.holonomy, h.frame)
    hol = h.so21
    return TranslationCocycle(h.group, v[None, :] - hol @ v, hol)


def translation_cocycle(h: HolonomyRep, lam, x0=None, side: str = "+", depth: int = 8,
                        max_depth: int = 14) -> TranslationCocycle:
    """tau^lam_side(h) over the balanced-frame holonomy of h.

    ``x0`` is a point of the balanced frame (as for earthquakes).
    """
    if side not in SIGNS:
        raise ValidationError(f"side must be '+' or '-', got {side!r}")
    lam = as_multicurve(lam)
    Q = centering_conjugator(h)
    values = np.zeros((2 * h.group.genus, 3))
    if not lam.is_zero():
        data = crossing_data(h, lam.curves, x0, depth, max_depth)
        Q = data.frame
        weights = lam.weights
        for g, crossings in enumerate(data.per_generator):
            for c in crossings:
                values[g] += weights[c.curve] * c.normal
    if side == "-":
        values = -values
    tau = TranslationCocycle(h.group, values, h.conjugated(Q).so21, Q)
    res = tau.relator_residual()
    if res > tol().cocycle * max(1.0, tau.scale()):
        raise RelatorBroken("translation cocycle violates the relator", residual=res)
    return tau


def coboundary_reduce(tau: TranslationCocycle):
    """Subtract the coboundary v - h(alpha) v closest (least squares) to tau.

    Returns (reduced cocycle, v).
    """
    n = len(tau.values)
    A = (np.eye(3)[None] - tau.holonomy).reshape(3 * n, 3)
    b = tau.values.reshape(-1)
    cond = np.linalg.cond(A.T @ A)
    if not np.isfinite(cond) or cond > tol().max_condition:
        raise IllConditioned("coboundary normal system is ill-conditioned", condition=float(cond))
    v = np.linalg.lstsq(A, b, rcond=None)[0]
    reduced = TranslationCocycle(tau.group, (b - A @ v).reshape(n, 3), tau.holonomy, tau.frame)
    return reduced, v


@dataclass(frozen=True)
class XiPushReport:
    deviation: float          # best pairing
    pairing: str              # which pairing achieves it
    deviations: dict          # pairing -> max Frobenius deviation over generators
    cocycle_norm: float

    def to_dict(self) -> dict:
        return {"deviation": self.deviation, "pairing": self.pairing,
                "deviations": dict(self.deviations), "cocycle_norm": self.cocycle_norm}


def earthquake_derivative(h: HolonomyRep, lam, side: str, t_step: float = 1e-4, x0=None,
                          depth: int = 8, frame=None) -> np.ndarray:
    """d/dt [h_t(alpha) h(alpha)^-1] at t = 0 in o(2,1), per generator.

    Five-point central differences with step ``t_step``, after conjugating by
    ``frame`` (default: the balanced frame of h).
    """
    Q = centering_conjugator(h) if frame is None else frame
    sign = 1.0 if side == "right" else -1.0

    def at(s):
        return raw_earthquake(h, lam, sign * s, x0, depth).conjugated(Q).so21

    inv = lz.iso_inverse(h.conjugated(Q).so21)
    d = (8.0 * (at(t_step) - at(-t_step)) - (at(2 * t_step) - at(-2 * t_step))) / (12.0 * t_step)
    return d @ inv


def xi_push_check(h: HolonomyRep, lam, t_step: float = 1e-4, x0=None, depth: int = 8) -> XiPushReport:
    """Compare xi(tau^lam_pm(alpha)) with the derivatives of right and left earthquakes.

    Two pairings are tested: "+right/-left" (xi o tau_+ = e_r, xi o tau_- = e_l) and
    "+left/-right"; the deviation of each is the max Frobenius norm over generators
    and both signs.
    """
    lam = as_multicurve(lam)
    tau_p = translation_cocycle(h, lam, x0, "+", depth)
    tau_m = translation_cocycle(h, lam, x0, "-", depth)
    if lam.is_zero():
        devs = {"+right/-left": 0.0, "+left/-right": 0.0}
        return XiPushReport(0.0, "+right/-left", devs, 0.0)
    d_r = earthquake_derivative(h, lam, "right", t_step, x0, depth, tau_p.frame)
    d_l = earthquake_derivative(h, lam, "left", t_step, x0, depth, tau_p.frame)
    xp = np.array([lz.xi(v) for v in tau_p.values])
    xm = np.array([lz.xi(v) for v in tau_m.values])

    def dev(a, b):
        return float(np.linalg.norm(a - b, axis=(1, 2)).max())

    devs = {
        "+right/-left": max(dev(xp, d_r), dev(xm, d_l)),
        "+left/-right": max(dev(xp, d_l), dev(xm, d_r)),
    }
    best = min(devs, key=devs.get)
    norm = float(np.linalg.norm(xp, axis=(1, 2)).max())
    return XiPushReport(devs[best], best, devs, norm)


__all__ = [
    "TranslationCocycle", "extend_cocycle", "word_holonomy", "coboundary", "translation_cocycle", "cocycle_value",
    "coboundary_reduce", "xi_push_check", "XiPushReport", "earthquake_derivative",
]
