"""Closed forms and empirical harnesses for the intersection/length estimates.

* ``triangle_theta``: theta_0(kappa) = arctan(e sinh(kappa) / (1 + cosh(kappa))).
* ``main_estimate_sweep``: for random filling pairs solve E_l^lam(g) = E_r^mu(g)
  and tabulate i(lam, mu) / (l_g(lam) min(l_g(lam), h0)).
* ``recurrence_report``: counts n^r(x) of returns of the unit segment leaving a
  closed geodesic orthogonally to the right, sampled along one period.
* ``convexity_probe``: second differences of l_lam + l_mu along earthquake paths.

Constants produced here are empirical, per fixture, and not universal.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import lorentz as lz
from .config import DEFAULT_BASE_POINT, tol
from .curves import WeightedMulticurve, as_multicurve, intersection_matrix, multicurve_intersection
from .earthquake import quake
from .errors import DepthUnstable, NumericalFailure, ValidationError
from .fixed_point import continuation_solve, newton_solve
from .lifts import crossings_of_segment, lifts_near
from .teichmueller import FNCoords, TeichPoint, centering_conjugator, fn_to_holonomy, lamination_length
from .words import as_curve

log = logging.getLogger(__name__)

H0_GRID = (0.5, 1.0, 2.0, 4.0)
PANTS = ("a1", "a2", "a1b1A1B1")
DUAL = ("b1", "b2", "b1b2")


# -- closed form --------------------------------------------------------------------

def triangle_theta(kappa):
    """theta_0 = arctan(e sinh k / (1 + cosh k)); switches to e tanh(k/2) once cosh overflows."""
    k = np.asarray(kappa, dtype=float)
    if np.any(k < 0) or not np.all(np.isfinite(k)):
        raise ValidationError("kappa must be finite and >= 0")
    with np.errstate(over="ignore", invalid="ignore"):
        direct = np.arctan(np.e * np.sinh(k) / (1.0 + np.cosh(k)))
    out = np.where(k < 700.0, direct, np.arctan(np.e * np.tanh(k / 2.0)))
    return float(out) if out.ndim == 0 else out


def theta_half_angle(kappa):
    k = np.asarray(kappa, dtype=float)
    out = np.arctan(np.e * np.tanh(k / 2.0))
    return float(out) if out.ndim == 0 else out


# -- inequality sweep -----------------------------------------------------------------

@dataclass
class SweepReport:
    samples: list                       # per-sample dicts (serializable)
    h0_grid: tuple = H0_GRID
    seed: int = 0
    weight_range: tuple = (0.2, 1.0)

    @staticmethod
    def ratio(i, length, h0) -> float:
        return i / (length * min(length, h0))

    def solved(self) -> list:
        return [s for s in self.samples if s["status"] == "ok"]

    @property
    def excluded(self) -> int:
        return len(self.samples) - len(self.solved())

    def ratios(self, which: str = "lambda") -> dict:
        """h0 -> list of ratios, recomputed from the per-sample (i, l) data."""
        key = "l_lambda" if which == "lambda" else "l_mu"
        return {h0: [self.ratio(s["intersection"], s[key], h0) for s in self.solved()] for h0 in self.h0_grid}

    def aggregate(self) -> dict:
        out = {}
        for which in ("lambda", "mu"):
            out[which] = {
                str(h0): {"min": float(np.min(r)) if r else None, "median": float(np.median(r)) if r else None,
                          "eps0_candidate": float(np.min(r)) if r else None}
                for h0, r in self.ratios(which).items()
            }
        return out

    def all_positive(self) -> bool:
        return all(x > 0 for which in ("lambda", "mu") for r in self.ratios(which).values() for x in r)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed, "weight_range": list(self.weight_range), "h0_grid": list(self.h0_grid),
            "n_samples": len(self.samples), "excluded": self.excluded, "all_positive": self.all_positive(),
            "aggregate": self.aggregate(), "samples": self.samples,
            "note": "empirical, fixture-dependent candidates; not universal constants",
        }

    CSV_HEADER = ["index", "status", "intersection", "l_lambda", "l_mu"]

    def csv_rows(self) -> list:
        header = self.CSV_HEADER + [f"ratio_lambda_h0={h}" for h in self.h0_grid] + \
            [f"ratio_mu_h0={h}" for h in self.h0_grid]
        rows = [header]
        for s in self.samples:
            row = [s["index"], s["status"], s.get("intersection"), s.get("l_lambda"), s.get("l_mu")]
            for key in ("l_lambda", "l_mu"):
                for h in self.h0_grid:
                    row.append(self.ratio(s["intersection"], s[key], h) if s["status"] == "ok" else None)
            rows.append(row)
        return rows


def _sample_pair(seed: int, index: int, weight_range):
    rng = np.random.default_rng([seed, index])
    lo, hi = weight_range
    wl = rng.uniform(lo, hi, len(PANTS))
    wm = rng.uniform(lo, hi, len(DUAL))
    return (WeightedMulticurve(tuple(zip(PANTS, map(float, wl)))),
            WeightedMulticurve(tuple(zip(DUAL, map(float, wm)))))


def _support_intersections():
    lam = WeightedMulticurve(tuple((c, 1.0) for c in PANTS))
    mu = WeightedMulticurve(tuple((c, 1.0) for c in DUAL))
    return intersection_matrix(lam, mu)


def _solve_sample(args) -> dict:
    seed, index, weight_range, M = args
    lam, mu = _sample_pair(seed, index, weight_range)
    rec = {"index": index, "lambda": lam.to_list(), "mu": mu.to_list(),
           "intersection": float(lam.weights @ M @ mu.weights)}
    try:
        report = newton_solve(lam, mu, 1.0, mess=False)
        if not report.fixed_point_residual < tol().direct_tol:
            raise NumericalFailure("fixed-point residual too large", r=report.fixed_point_residual)
    except NumericalFailure as exc:
        log.warning("sweep sample %d excluded: %s", index, exc)
        rec.update(status=f"excluded: {type(exc).__name__}", l_lambda=None, l_mu=None)
        return rec
    g = fn_to_holonomy(report.solution)
    rec.update(status="ok", solution=report.solution.to_dict(), residual=report.fixed_point_residual,
               l_lambda=lamination_length(g, lam), l_mu=lamination_length(g, mu))
    return rec


def worker_count(default: int = 1) -> int:
    try:
        return max(1, int(os.environ.get("EARTHQUAKE_LAB_THREADS", default)))
    except ValueError as exc:
        raise ValidationError("EARTHQUAKE_LAB_THREADS must be an integer") from exc


def main_estimate_sweep(n_samples: int = 50, weight_range=(0.2, 1.0), seed: int = 0,
                        h0_grid=H0_GRID, workers: int | None = None) -> SweepReport:
    """Random weights on the pants/dual filling pair; per sample solve for g with
    E_l^lam(g) = E_r^mu(g) and record i(lam, mu), l_g(lam), l_g(mu)."""
    lo, hi = weight_range
    if not 0 < lo <= hi:
        raise ValidationError("weight_range must satisfy 0 < lo <= hi")
    M = _support_intersections()
    jobs = [(seed, k, (lo, hi), M) for k in range(n_samples)]
    workers = worker_count() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            samples = list(pool.map(_solve_sample, jobs))
    else:
        samples = [_solve_sample(j) for j in jobs]
    samples.sort(key=lambda s: s["index"])
    return SweepReport(samples, tuple(h0_grid), seed, (lo, hi))


def scaling_trend(lam, mu, ts=tuple(np.round(np.arange(1, 11) / 10.0, 10)), h0: float = 1.0) -> list:
    """Ratio i(t lam, t mu) / (l(t lam) min(l(t lam), h0)) along one continuation path."""
    lam, mu = as_multicurve(lam), as_multicurve(mu)
    ts = sorted(ts)
    steps = int(round(ts[-1] / ts[0]))
    report = continuation_solve(lam, mu, ts[-1], steps=steps)
    i1 = multicurve_intersection(lam, mu)
    out = []
    for t, v in zip(report.t_path[1:], report.path[1:]):
        g = fn_to_holonomy(FNCoords.from_vector(v))
        length = t * lamination_length(g, lam)
        out.append({"t": t, "intersection": t * t * i1, "l_lambda": length,
                    "ratio": t * t * i1 / (length * min(length, h0))})
    return out


# -- recurrence -----------------------------------------------------------------------

@dataclass
class RecurrenceReport:
    curve: str
    metric: dict
    length: float
    params: list
    counts: list
    depth: int
    beta: float                   # a witness beta with measure{n <= beta l} <= l/2
    beta_sup: float               # sup of such beta (not attained)
    measure: float                # measure estimate at beta
    quadrature_error: float       # l / n_samples

    @property
    def n_samples(self) -> int:
        return len(self.counts)

    def measure_at(self, beta: float) -> float:
        counts = np.asarray(self.counts)
        return self.length * float(np.mean(counts <= beta * self.length))

    def to_dict(self) -> dict:
        return {"curve": self.curve, "metric": self.metric, "length": self.length,
                "n_samples": self.n_samples, "depth": self.depth, "beta": self.beta,
                "beta_sup": self.beta_sup, "measure": self.measure, "half_length": self.length / 2.0,
                "quadrature_error": self.quadrature_error, "params": self.params, "counts": self.counts,
                "note": "empirical, fixture-dependent; not a universal constant"}

    def csv_rows(self) -> list:
        return [["param", "count"]] + [[p, n] for p, n in zip(self.params, self.counts)]


def _right_normal(p, T, n):
    """The one of +-n with (T, N) negatively oriented at p, i.e. pointing to the right of T."""
    s = np.linalg.det(np.array([p, T, n]))
    return n if s < 0 else -n


def _period_frame(u, c):
    """Balanced rep, axis normal, base foot p0 and orientation sign for the curve c."""
    hb = u.conjugated(centering_conjugator(u))
    A = hb.word(c)
    ax = lz.axis(A)
    length = lz.translation_length(A)
    p0 = ax.project(np.asarray(DEFAULT_BASE_POINT))
    Ap = lz.sl2_to_so21(A) @ p0
    plus = lz.exp_boost(ax.normal, length) @ p0
    sign = 1.0 if np.abs(plus - Ap).max() <= np.abs(lz.exp_boost(ax.normal, -length) @ p0 - Ap).max() else -1.0
    return hb, ax.normal, p0, sign, length


def _recurrence_segments(u, c, params):
    hb, n, p0, sign, length = _period_frame(u, c)
    delta = 1e-7
    segs = []
    for x in params:
        p = lz.exp_boost(n, sign * x * length) @ p0
        T = lz.unit_tangent(p, lz.exp_boost(n, sign * 0.5) @ p)
        R = _right_normal(p, T, n)
        R = R - lz.mdot(R, p) * (-p)          # re-project onto T_p
        R = R / np.sqrt(lz.mdot(R, R))
        segs.append((np.cosh(delta) * p + np.sinh(delta) * R, np.cosh(1.0) * p + np.sinh(1.0) * R))
    return hb, p0, segs, length


def _counts(hb, c, p0, segs, L):
    lifts = lifts_near(hb, [c], p0, segs, L)
    return [1 + len(crossings_of_segment(lifts, p, q)) for p, q in segs]


def _stable_counts(u, c, params, depth, max_depth):
    c = as_curve(c, u.group.genus)
    hb, p0, segs, length = _recurrence_segments(u, c, params)
    L = depth
    cur = _counts(hb, c, p0, segs, L)
    while True:
        nxt = _counts(hb, c, p0, segs, L + 2)
        if nxt == cur:
            return cur, L, length
        if L + 2 >= max_depth:
            raise DepthUnstable(f"recurrence counts still changing at depth {L + 2}", depth=L + 2)
        L += 2
        cur = nxt


def recurrence_count(u: TeichPoint, c, x_param: float, depth: int = 8, max_depth: int = 14) -> int:
    """n^r(x): intersections with c of the unit segment leaving c orthogonally to the
    right at the point with period parameter x_param, including x itself."""
    if not 0.0 <= x_param < 1.0:
        raise ValidationError("x_param must lie in [0, 1)")
    counts, _, _ = _stable_counts(u, c, [x_param], depth, max_depth)
    return counts[0]


def recurrence_report(u: TeichPoint, c, n_samples: int = 200, depth: int = 8, max_depth: int = 14) -> RecurrenceReport:
    params = [k / n_samples for k in range(n_samples)]
    counts, used, length = _stable_counts(u, c, params, depth, max_depth)
    values = np.sort(np.unique(counts))
    arr = np.asarray(counts)
    # smallest count value v with frac(n <= v) > 1/2; every beta < v / l works
    v_med = next(v for v in values if np.mean(arr <= v) > 0.5)
    below = values[values < v_med]
    v_prev = float(below[-1]) if len(below) else 0.0
    beta = (v_prev + v_med) / 2.0 / length
    report = RecurrenceReport(str(as_curve(c, u.group.genus)), u.fn.to_dict(), float(length), params,
                              [int(n) for n in counts], used, float(beta), float(v_med / length), 0.0,
                              float(length / n_samples))
    report.measure = report.measure_at(beta)
    return report


# -- convexity ------------------------------------------------------------------------

@dataclass
class ConvexityReport:
    ts: list
    values: list
    second_differences: list

    @property
    def min_second_difference(self) -> float:
        return float(min(self.second_differences))

    def to_dict(self) -> dict:
        return {"t": self.ts, "F": self.values, "second_differences": self.second_differences,
                "min_second_difference": self.min_second_difference}


def convexity_probe(u, lam, mu, nu, t_range=(-1.0, 1.0), n_points: int = 21, depth: int = 8) -> ConvexityReport:
    """F(t) = l_lam + l_mu at E_l^{t nu}(u) on a uniform grid (negative t: right earthquakes)."""
    if n_points < 3:
        raise ValidationError("need at least 3 grid points")
    lam, mu, nu = as_multicurve(lam), as_multicurve(mu), as_multicurve(nu)
    ts = np.linspace(t_range[0], t_range[1], n_points)
    F = []
    for t in ts:
        v = quake(u, nu, "left" if t >= 0 else "right", abs(float(t)), depth=depth)
        F.append(lamination_length(v, lam) + lamination_length(v, mu))
    F = np.array(F)
    d2 = F[2:] - 2.0 * F[1:-1] + F[:-2]
    return ConvexityReport([float(t) for t in ts], [float(x) for x in F], [float(x) for x in d2])


__all__ = [
    "triangle_theta", "theta_half_angle", "SweepReport", "main_estimate_sweep", "scaling_trend",
    "RecurrenceReport", "recurrence_count", "recurrence_report", "ConvexityReport", "convexity_probe",
    "H0_GRID", "PANTS", "DUAL", "worker_count",
]
