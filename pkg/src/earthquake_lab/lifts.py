"""Enumeration of lifts of closed geodesics crossing geodesic segments.

Group elements are generated breadth-first by word length (right
multiplication by a generator or its inverse), deduplicated by their orbit
point, and pruned to a tube around the query segments: only elements whose
orbit point lies within ``radius`` of some segment are kept and expanded.
A lift of a curve c crossing a segment at y has a representative g with
``d(g x0, y) <= d(x0, axis c) + l(c)/2``, which sets the tube radius; the
extra slack absorbs words whose intermediate orbit points leave the tube.
Completeness is checked heuristically by comparing depth L against L + 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import lorentz as lz
from .config import tol
from .errors import Degenerate, DepthUnstable
from .words import CurveWord, as_curve


def segment_distance(points, p, q) -> np.ndarray:
    """Hyperbolic distance from each row of ``points`` to the segment [p, q]."""
    points = np.atleast_2d(points)
    dpq = lz.h2_distance(p, q)
    dp = np.arccosh(np.maximum(-(points @ lz.J @ p), 1.0))
    dq = np.arccosh(np.maximum(-(points @ lz.J @ q), 1.0))
    if dpq < 1e-12:
        return dp
    n = lz.geodesic_through(p, q).normal
    s = points @ lz.J @ n
    dline = np.arcsinh(np.abs(s))
    # foot of the perpendicular: z - s n, renormalized; inside iff both endpoint
    # distances are at most the segment length plus the leg lengths allow.
    foot = points - s[:, None] * n[None, :]
    foot = foot / np.sqrt(np.maximum(-np.einsum("ij,jk,ik->i", foot, lz.J, foot), 1e-300))[:, None]
    fp = np.arccosh(np.maximum(-(foot @ lz.J @ p), 1.0))
    fq = np.arccosh(np.maximum(-(foot @ lz.J @ q), 1.0))
    inside = np.abs(fp + fq - dpq) < 1e-9 * max(1.0, dpq)
    return np.where(inside, dline, np.minimum(dp, dq))


@dataclass
class ElementCloud:
    """Group elements found by a pruned breadth-first search.

    Products are accumulated in SL(2, R), whose rounding error grows like the
    square root of the SO+(2,1) one; each element is converted once at the end.
    """

    sl2: np.ndarray           # (n, 2, 2)
    matrices: np.ndarray      # (n, 3, 3) SO+(2,1) images
    lengths: np.ndarray       # word length of the first word reaching each element
    words: list               # that word, as a letter tuple

    def __len__(self):
        return len(self.matrices)


def _point_keys(points, scale=1e4):
    return [tuple(k) for k in np.round(points[:, :2] * scale).astype(np.int64)]


def enumerate_elements(rep, x0, segments, radius: float, depth: int) -> ElementCloud:
    """All elements of word length <= depth reachable through the tube of the given radius."""
    x0 = np.asarray(x0, dtype=float)
    letters = rep.group.letters
    gens = np.array([rep.letter(x) for x in letters])
    mats = [np.eye(2)]
    lens = [0]
    words = [()]
    seen = set(_point_keys(x0[None, :]))
    frontier = np.eye(2)[None]
    fwords = [()]
    for level in range(1, depth + 1):
        cand = np.einsum("nij,mjk->nmik", frontier, gens).reshape(-1, 2, 2)
        cwords = [w + (x,) for w in fwords for x in letters]
        keep = np.array([not (len(w) > 1 and w[-2] == -w[-1]) for w in cwords])
        cand = cand[keep]
        cwords = [w for w, k in zip(cwords, keep) if k]
        if len(cand) == 0:
            break
        pts = lz.sl2_to_so21(cand) @ x0
        dist = np.full(len(cand), np.inf)
        for p, q in segments:
            dist = np.minimum(dist, segment_distance(pts, p, q))
        new_mats, new_words = [], []
        keys = _point_keys(pts)
        for i in np.flatnonzero(dist <= radius):
            if keys[i] in seen:
                continue
            seen.add(keys[i])
            new_mats.append(cand[i])
            new_words.append(cwords[i])
        if not new_mats:
            break
        frontier = np.array(new_mats)
        fwords = new_words
        mats.extend(new_mats)
        lens.extend([level] * len(new_mats))
        words.extend(new_words)
    sl2 = np.array(mats)
    return ElementCloud(sl2, lz.sl2_to_so21(sl2), np.array(lens), words)


@dataclass(frozen=True)
class Lift:
    """A lift g . axis(c) of curve number ``curve`` (index into the query list)."""

    curve: int
    normal: np.ndarray
    element: tuple            # a word g with this lift = g . axis(c)


def _canonical_sign(normals):
    idx = np.argmax(np.abs(normals), axis=1)
    s = np.sign(normals[np.arange(len(normals)), idx])
    return normals * s[:, None]


def dedupe_normals(normals, tol_merge: float):
    """Indices of representatives of distinct unoriented geodesics (tolerance clustering)."""
    if len(normals) == 0:
        return []
    canon = _canonical_sign(np.asarray(normals, dtype=float))
    scaled = canon / np.maximum(1.0, np.abs(canon).max(axis=1))[:, None]
    pairs = cKDTree(scaled).query_pairs(tol_merge, p=np.inf, output_type="ndarray")
    parent = np.arange(len(canon))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    return sorted({find(i) for i in range(len(canon))})


def curve_axes(rep, curves) -> list:
    return [lz.axis(rep.word(as_curve(c, rep.group.genus))) for c in curves]


def tube_radius(rep, curves, x0, slack: float | None = None) -> float:
    x0 = np.asarray(x0, dtype=float)
    s = tol().prune_slack if slack is None else slack
    r = 0.0
    for c, ax in zip(curves, curve_axes(rep, curves)):
        length = lz.translation_length(rep.word(as_curve(c, rep.group.genus)))
        r = max(r, ax.distance_to(x0) + length / 2.0)
    return r + s


def lifts_near(rep, curves, x0, segments, depth: int, slack: float | None = None) -> list:
    """Distinct lifts of the given curves among translates g . axis(c) with g in the tube."""
    curves = [as_curve(c, rep.group.genus) for c in curves]
    radius = tube_radius(rep, curves, x0, slack)
    cloud = enumerate_elements(rep, x0, segments, radius, depth)
    axes = curve_axes(rep, curves)
    out = []
    merge = tol().leaf_merge
    for ci, ax in enumerate(axes):
        normals = cloud.matrices @ ax.normal
        for i in dedupe_normals(normals, merge):
            # M preserves <n, n> = 1; recomputing it for far lifts (|n| ~ e^dist) only adds noise
            out.append(Lift(ci, normals[i], cloud.words[i]))
    return out


@dataclass(frozen=True)
class SegmentCrossing:
    curve: int
    normal: np.ndarray        # unit normal pointing towards the segment's far end
    parameter: float
    element: tuple


def crossings_of_segment(lifts, p, q) -> list:
    """Lifts crossing [p, q], sorted by arclength parameter, normals oriented towards q."""
    out = []
    # both endpoints on the leaf (up to the accuracy of a computed axis)
    eps = 1e-8
    for lift in lifts:
        if abs(lz.mdot(p, lift.normal)) < eps and abs(lz.mdot(q, lift.normal)) < eps:
            continue        # the segment runs along this leaf: no transverse crossing
        rec = lz.crossing(lift.normal, p, q)
        if rec is None:
            continue
        out.append(SegmentCrossing(lift.curve, rec.side * lift.normal, rec.parameter, lift.element))
    out.sort(key=lambda c: c.parameter)
    return out


def crossing_signature(crossings) -> tuple:
    return tuple((c.curve, round(c.parameter, 7)) for c in crossings)


def stable_crossings(rep, curves, x0, targets, depth: int, max_depth: int | None = None,
                     slack: float | None = None):
    """Crossings of [x0, y] for every y in ``targets``, stable between depth L and L + 2.

    Escalates L by 2 up to ``max_depth``; raises DepthUnstable if no stable
    depth is found.  Returns (list of crossing lists, depth used).
    """
    max_depth = depth if max_depth is None else max(depth, max_depth)
    x0 = np.asarray(x0, dtype=float)
    segments = [(x0, np.asarray(y, dtype=float)) for y in targets]

    def compute(L):
        lifts = lifts_near(rep, curves, x0, segments, L, slack)
        res = [crossings_of_segment(lifts, p, q) for p, q in segments]
        return res, [crossing_signature(r) for r in res]

    L = depth
    cur, sig = compute(L)
    while True:
        nxt, nsig = compute(L + 2)
        if nsig == sig:
            return cur, L
        if L + 2 >= max_depth:
            raise DepthUnstable(f"crossing counts still changing at depth {L + 2}", depth=L + 2)
        L += 2
        cur, sig = nxt, nsig


__all__ = [
    "segment_distance", "enumerate_elements", "ElementCloud", "Lift", "lifts_near",
    "crossings_of_segment", "SegmentCrossing", "stable_crossings", "tube_radius",
    "dedupe_normals", "CurveWord", "Degenerate",
]
