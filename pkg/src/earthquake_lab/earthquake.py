"""Left and right earthquakes along weighted multicurves.

For a generator gamma, let w_1, ..., w_N be the unit normals of the lifted
leaves met by the segment [x0, gamma x0], in order from x0 and oriented
towards gamma x0, with weights m_i.  The right earthquake at time t is

    h_t(gamma) = exp(t m_1 xi(w_1)) ... exp(t m_N xi(w_N)) h(gamma),

computed in SL(2, R) with ``sl2_boost``.  The left earthquake is the same
one-parameter family at negative time, i.e. the inverse of the right one.
Crossing data depend only on the starting metric and the support of the
multicurve, so they are cached and shared by all times and weights.

All of this runs in the balanced frame of the representation (see
``centering_conjugator``), where generator matrices are smallest; the base
point x0 is given in that frame (default: the configured generic point) and
results are conjugated back, which changes nothing after normalization.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from . import lorentz as lz
from .config import DEFAULT_BASE_POINT, tol
from .curves import WeightedMulticurve, as_multicurve
from .errors import Degenerate, RelatorBroken, ValidationError
from .lifts import SegmentCrossing, stable_crossings
from .teichmueller import (FNCoords, HolonomyRep, TeichPoint, centering_conjugator, fn_to_holonomy,
                           holonomy_to_fn, normalize)

SIDES = ("left", "right")


@dataclass(frozen=True)
class EarthquakeSpec:
    lam: WeightedMulticurve
    side: str = "right"
    t: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "lam", as_multicurve(self.lam))
        if self.side not in SIDES:
            raise ValidationError(f"side must be 'left' or 'right', got {self.side!r}")
        t = float(self.t)
        if not np.isfinite(t) or t < 0:
            raise ValidationError("earthquake time must be finite and >= 0 (flip the side instead)")
        object.__setattr__(self, "t", t)

    @property
    def signed_time(self) -> float:
        return self.t if self.side == "right" else -self.t


@dataclass(frozen=True)
class Crossing:
    """One crossing of a segment with a weighted leaf."""

    curve: str
    weight: float
    parameter: float
    normal: np.ndarray        # unit normal pointing towards the segment's far endpoint


@dataclass(frozen=True)
class CrossingData:
    """Per-generator crossings of [x0, h(gamma) x0] with the lifted support.

    Everything is expressed in the balanced frame ``frame`` (an SL2 matrix Q);
    ``input_normal`` maps a normal back to the frame of the input holonomy.
    """

    frame: np.ndarray
    x0: np.ndarray
    depth: int
    per_generator: tuple      # tuple of tuples of lifts.SegmentCrossing

    def input_normal(self, n) -> np.ndarray:
        return lz.sl2_to_so21(np.linalg.inv(self.frame)) @ n


_CACHE: "OrderedDict[tuple, CrossingData]" = OrderedDict()
_CACHE_SIZE = 128


def _perturbed_base(x0, k: int):
    """Deterministic k-th perturbation of the base point by ~ tol().perturb."""
    if k == 0:
        return lz.as_point(x0)
    rng = np.random.default_rng(1000 + k)
    v = rng.standard_normal(2) * tol().perturb * k
    p = np.asarray(x0, dtype=float)
    return lz.normalize_point(np.array([p[0] + v[0], p[1] + v[1], p[2]]))


def _balanced(u: HolonomyRep):
    Q = centering_conjugator(u)
    return Q, u.conjugated(Q)


def crossing_data(u: HolonomyRep, curves, x0=None, depth: int = 8, max_depth: int = 14) -> CrossingData:
    """Crossing data of the support curves; ``x0`` is a point of the balanced frame."""
    x0 = np.asarray(DEFAULT_BASE_POINT if x0 is None else x0, dtype=float)
    curves = list(curves)
    key = (u.matrices.tobytes(), tuple(c.canonical for c in curves), x0.tobytes(), depth, max_depth)
    hit = _CACHE.get(key)
    if hit is not None:
        _CACHE.move_to_end(key)
        return hit
    Q, u = _balanced(u)
    last = None
    for k in range(tol().perturb_retries + 1):
        base = _perturbed_base(x0, k)
        targets = [M @ base for M in u.so21]
        try:
            per, used = stable_crossings(u, curves, base, targets, depth, max_depth)
            break
        except Degenerate as exc:
            last = exc
    else:
        raise Degenerate("base point on a leaf after perturbation retries", retries=tol().perturb_retries) from last
    data = CrossingData(Q, base, used, tuple(tuple(c) for c in per))
    _CACHE[key] = data
    if len(_CACHE) > _CACHE_SIZE:
        _CACHE.popitem(last=False)
    return data


def transport(data: CrossingData, u: HolonomyRep, curves):
    """Re-evaluate the crossing combinatorics of ``data`` on a nearby representation.

    Each crossing keeps its curve and group element; normals and parameters are
    recomputed.  Returns None if a crossing disappears or the order changes.
    """
    Q, uc = _balanced(u)
    x0 = data.x0
    axes = [lz.axis(uc.word(c)).normal for c in curves]
    per = []
    for gen, crossings in enumerate(data.per_generator):
        target = uc.so21[gen] @ x0
        new = []
        for c in crossings:
            n = lz.sl2_to_so21(uc.word(c.element)) @ axes[c.curve]
            try:
                rec = lz.crossing(n, x0, target)
            except Degenerate:
                return None
            if rec is None:
                return None
            new.append(SegmentCrossing(c.curve, rec.side * n, rec.parameter, c.element))
        if any(a.parameter >= b.parameter for a, b in zip(new, new[1:])):
            return None
        per.append(tuple(new))
    return CrossingData(Q, x0, data.depth, tuple(per))


def segment_crossings(u: HolonomyRep, lam, x0, target, depth: int = 8, max_depth: int = 14) -> list:
    """Crossings of [x0, target] with the lifted multicurve, sorted by parameter.

    Points and normals are in the frame of ``u`` itself.
    """
    lam = as_multicurve(lam)
    x0 = lz.as_point(x0)
    target = lz.as_point(target)
    if lz.h2_distance(x0, target) < 1e-14:
        return []
    # enumerate in the balanced frame, where far lifts keep their accuracy
    Q, ub = _balanced(u)
    G = lz.sl2_to_so21(Q)
    (cr,), _ = stable_crossings(ub, lam.curves, G @ x0, [G @ target], depth, max_depth)
    back = lz.iso_inverse(G)
    return [_decorate(c, lam, back) for c in cr]


def _decorate(c: SegmentCrossing, lam, back) -> Crossing:
    word, weight = lam.items[c.curve]
    n = back @ c.normal
    return Crossing(str(word), weight, c.parameter, n / np.sqrt(lz.mdot(n, n)))


def _deform(u: HolonomyRep, lam, data: CrossingData, signed_time: float) -> HolonomyRep:
    """Deformed holonomy in the balanced frame of ``data``."""
    weights = lam.weights
    u = u.conjugated(data.frame)
    mats = []
    for gen, crossings in enumerate(data.per_generator):
        P = np.eye(2)
        for c in crossings:
            m = weights[c.curve]
            if m != 0.0:
                P = P @ lz.sl2_boost(c.normal / np.sqrt(lz.mdot(c.normal, c.normal)), signed_time * m)
        mats.append(P @ u.matrices[gen])
    return HolonomyRep(mats, u.group)


def raw_earthquake(u: HolonomyRep, lam, signed_time: float, x0=None, depth: int = 8,
                   max_depth: int = 14, template: CrossingData | None = None) -> HolonomyRep:
    """Deformed holonomy in the frame of ``u`` (not normalized); positive time is right.

    ``template``: crossing data of a nearby representation to reuse (see ``transport``).
    """
    lam = as_multicurve(lam)
    if lam.is_zero() or signed_time == 0.0:
        return HolonomyRep(u.matrices, u.group)
    data = transport(template, u, lam.curves) if template is not None else None
    if data is None:
        data = crossing_data(u, lam.curves, x0, depth, max_depth)
    out = _deform(u, lam, data, signed_time)
    if out.relator_residual() > tol().relator_broken and template is not None:
        data = crossing_data(u, lam.curves, x0, depth, max_depth)
        out = _deform(u, lam, data, signed_time)
    if out.relator_residual() > tol().relator_broken:
        # missing crossings show up as a broken relator: look deeper once
        deeper = depth + 4
        data = crossing_data(u, lam.curves, x0, deeper, max(max_depth, deeper + 2))
        out = _deform(u, lam, data, signed_time)
        if out.relator_residual() > tol().relator_broken:
            raise RelatorBroken("relator not preserved by the earthquake",
                                residual=out.relator_residual(), depth=deeper)
    return out.conjugated(np.linalg.inv(data.frame))


def earthquake(u: HolonomyRep, spec: EarthquakeSpec, depth: int = 8, x0=None,
               max_depth: int = 14) -> TeichPoint:
    """E_side^{t lam}(u), normalized.

    Times beyond ``tol().max_quake_time`` are split into equal steps (semigroup law).
    """
    s = spec.signed_time
    n = max(1, int(np.ceil(abs(s) / tol().max_quake_time)))
    cur = u
    for _ in range(n):
        cur = normalize(raw_earthquake(cur, spec.lam, s / n, x0, depth, max_depth))
    return cur if isinstance(cur, TeichPoint) else normalize(cur)


def quake(u: HolonomyRep, lam, side: str, t: float, **kw) -> TeichPoint:
    return earthquake(u, EarthquakeSpec(as_multicurve(lam), side, t), **kw)


def infinitesimal_earthquake(u, lam, side: str = "left", step: float | None = None,
                             x0=None, depth: int = 8) -> np.ndarray:
    """d/dt x(E_side^{t lam}(u)) at t = 0 in the FN chart, by central differences."""
    if side not in SIDES:
        raise ValidationError(f"side must be 'left' or 'right', got {side!r}")
    if isinstance(u, FNCoords):
        u = fn_to_holonomy(u)
    lam = as_multicurve(lam)
    h = tol().infinitesimal_step if step is None else step
    sign = 1.0 if side == "right" else -1.0
    plus = holonomy_to_fn(raw_earthquake(u, lam, sign * h, x0, depth)).to_vector()
    minus = holonomy_to_fn(raw_earthquake(u, lam, -sign * h, x0, depth)).to_vector()
    return (plus - minus) / (2.0 * h)


def clear_cache():
    _CACHE.clear()


__all__ = [
    "EarthquakeSpec", "Crossing", "CrossingData", "crossing_data", "segment_crossings", "transport",
    "earthquake", "quake", "raw_earthquake", "infinitesimal_earthquake", "clear_cache",
]
