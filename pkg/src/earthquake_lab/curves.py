"""Weighted multicurves and geometric intersection numbers.

Intersection numbers are realized geometrically: i(a, b) is the number of
lifts of the geodesic b that cross one fundamental period of the axis of a
in the universal cover of a hyperbolic reference metric.  The answer is
topological, so any metric gives the same count.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import lorentz as lz
from .errors import Degenerate, ValidationError
from .lifts import stable_crossings
from .words import CurveWord, as_curve


@lru_cache(maxsize=1)
def reference_metric():
    """Default metric used for validating multicurves (all pants lengths 2, zero twists)."""
    from .teichmueller import FNCoords, fn_to_holonomy
    return fn_to_holonomy(FNCoords((2.0, 2.0, 2.0), (0.0, 0.0, 0.0)))


def _period_segment(rep, a: CurveWord, offset: float):
    A = rep.word(a)
    ax = lz.axis(A)
    p = ax.project(lz.ORIGIN)
    # slide along the axis so the endpoints avoid intersection points
    p = lz.exp_boost(ax.normal, offset) @ p
    return ax, p, lz.sl2_to_so21(A) @ p


def _crossing_count(rep, a: CurveWord, curves, depth: int, max_depth: int):
    """Number of lifts of each curve crossing one period of axis(a), excluding axis(a) itself."""
    last = None
    for attempt, offset in enumerate((0.1234567, 0.3141593, 0.2718282, 0.4142136, 0.1732051)):
        try:
            ax, p, q = _period_segment(rep, a, offset)
            (cr,), _ = stable_crossings(rep, curves, p, [q], depth, max_depth)
            counts = [0] * len(curves)
            for c in cr:
                if abs(abs(lz.mdot(c.normal, ax.normal)) - 1.0) < 1e-9 and \
                        np.abs(np.abs(c.normal) - np.abs(ax.normal)).max() < 1e-7:
                    continue
                counts[c.curve] += 1
            return counts
        except Degenerate as exc:
            last = exc
    raise last


def geometric_intersection(a, b, ref=None, depth: int = 8, max_depth: int = 14) -> int:
    """Transverse crossings of the geodesic representatives of a and b.

    For a = b this counts ordered pairs of branches at double points, i.e. twice
    the number of self-intersections (0 for a simple curve).
    """
    ref = reference_metric() if ref is None else ref
    a = as_curve(a, ref.group.genus)
    b = as_curve(b, ref.group.genus)
    if not (a.primitive and b.primitive):
        raise ValidationError("geometric_intersection expects primitive curves")
    return _crossing_count(ref, a, [b], depth, max_depth)[0]


@dataclass(frozen=True)
class WeightedMulticurve:
    """Finitely many disjoint, pairwise non-homotopic simple closed curves with weights >= 0."""

    items: tuple

    def __post_init__(self):
        items = []
        for c, w in self.items:
            w = float(w)
            if not np.isfinite(w) or w < 0.0:
                raise ValidationError(f"weights must be finite and >= 0, got {w!r}")
            items.append((as_curve(c), w))
        keys = [c.canonical for c, _ in items]
        if len(set(keys)) != len(keys):
            raise ValidationError("multicurve contains conjugate (or inverse) curves twice")
        object.__setattr__(self, "items", tuple(items))

    @classmethod
    def build(cls, items, ref=None, depth: int = 8, validate: bool = True) -> "WeightedMulticurve":
        lam = cls(tuple(items))
        if validate:
            lam.validate(ref, depth)
        return lam

    def validate(self, ref=None, depth: int = 8) -> "WeightedMulticurve":
        """Check simplicity and pairwise disjointness against a reference metric."""
        ref = reference_metric() if ref is None else ref
        curves = self.curves
        for i, c in enumerate(curves):
            if not c.primitive:
                raise ValidationError(f"{c} is a proper power")
            counts = _crossing_count(ref, c, curves, depth, depth + 6)
            if any(counts):
                j = next(k for k, n in enumerate(counts) if n)
                what = "is not simple" if i == j else f"meets {curves[j]}"
                raise ValidationError(f"{c} {what} ({counts[j]} crossings)")
        return self

    @property
    def curves(self) -> list:
        return [c for c, _ in self.items]

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.items])

    def scaled(self, t: float) -> "WeightedMulticurve":
        return WeightedMulticurve(tuple((c, t * w) for c, w in self.items))

    def with_weights(self, weights) -> "WeightedMulticurve":
        weights = list(weights)
        if len(weights) != len(self.items):
            raise ValidationError("weight vector has the wrong length")
        return WeightedMulticurve(tuple((c, w) for (c, _), w in zip(self.items, weights)))

    def is_zero(self) -> bool:
        return all(w == 0.0 for _, w in self.items)

    def to_list(self) -> list:
        return [{"word": str(c), "weight": w} for c, w in self.items]

    @classmethod
    def from_list(cls, data) -> "WeightedMulticurve":
        try:
            return cls(tuple((d["word"], d["weight"]) for d in data))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad multicurve payload: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_list())

    def __str__(self):
        return " + ".join(f"{w:g}*{c}" for c, w in self.items)


def as_multicurve(x) -> WeightedMulticurve:
    if isinstance(x, WeightedMulticurve):
        return x
    if isinstance(x, (str, CurveWord)):
        return WeightedMulticurve(((x, 1.0),))
    return WeightedMulticurve(tuple(x))


def intersection_matrix(lam, mu, ref=None, depth: int = 8, max_depth: int = 14) -> np.ndarray:
    ref = reference_metric() if ref is None else ref
    out = np.zeros((len(lam.items), len(mu.items)), dtype=int)
    for i, c in enumerate(lam.curves):
        out[i] = _crossing_count(ref, c, mu.curves, depth, max_depth)
    return out


def multicurve_intersection(lam, mu, ref=None, depth: int = 8, max_depth: int = 14) -> float:
    """Bilinear extension sum_ij w_i v_j i(c_i, d_j)."""
    lam, mu = as_multicurve(lam), as_multicurve(mu)
    M = intersection_matrix(lam, mu, ref, depth, max_depth)
    return float(lam.weights @ M @ mu.weights)


@dataclass(frozen=True)
class FillingCertificate:
    """Scan-bounded (heuristic) filling certificate."""

    fills: bool
    intersection: float
    scan_length: int
    words_scanned: int
    witness: str | None      # a scanned curve missing both multicurves, if any
    heuristic: bool = True

    def __bool__(self):
        return self.fills

    def to_dict(self) -> dict:
        return {"fills": self.fills, "intersection": self.intersection, "scan_length": self.scan_length,
                "words_scanned": self.words_scanned, "witness": self.witness,
                "heuristic": True, "note": "certificate only covers primitive words up to scan_length"}


def fills(lam, mu, ref=None, scan_length: int = 3, depth: int = 8) -> FillingCertificate:
    """Heuristic filling test: i(lam, mu) > 0 and every short primitive word meets lam or mu."""
    ref = reference_metric() if ref is None else ref
    lam, mu = as_multicurve(lam), as_multicurve(mu)
    support = [c for c, w in lam.items + mu.items if w > 0]
    total = multicurve_intersection(lam, mu, ref, depth)
    if total <= 0:
        return FillingCertificate(False, total, scan_length, 0, None)
    words = ref.group.cyclic_words(scan_length, primitive_only=True)
    for n, w in enumerate(words, 1):
        counts = _crossing_count(ref, w, support, depth, depth + 6)
        if not any(counts):
            return FillingCertificate(False, total, scan_length, n, str(w))
    return FillingCertificate(True, total, scan_length, len(words), None)


__all__ = [
    "WeightedMulticurve", "as_multicurve", "geometric_intersection", "multicurve_intersection",
    "intersection_matrix", "fills", "FillingCertificate", "reference_metric",
]
