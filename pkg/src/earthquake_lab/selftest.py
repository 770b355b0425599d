"""Fast deterministic invariant suite behind ``earthquake-lab selftest``.

Every check returns a measured value and a threshold; the result dictionary
contains no timings, so equal seeds give byte-identical JSON.
"""

from __future__ import annotations

import math

import numpy as np

from . import lorentz as lz
from .cocycles import coboundary, coboundary_reduce, translation_cocycle, xi_push_check
from .curves import geometric_intersection
from .earthquake import infinitesimal_earthquake, quake
from .estimates import convexity_probe, recurrence_report, theta_half_angle, triangle_theta
from .fixed_point import minimize_length_sum, newton_solve
from .fixtures import GENERIC_FN, dual_multicurve, filling_pair, pants_multicurve, thick_fn
from .teichmueller import (FNCoords, PANTS_CURVES, curve_length, fn_to_holonomy, holonomy_to_fn,
                           teich_distance_proxy, twist)


def _construction(rng):
    worst = 0.0
    for _ in range(20):
        c = thick_fn(rng)
        u = fn_to_holonomy(c)
        err = max(abs(curve_length(u, w) - x) for w, x in zip(PANTS_CURVES, c.lengths))
        worst = max(worst, u.relator_residual(), err)
    return worst


def _roundtrip(rng):
    worst = 0.0
    for _ in range(10):
        c = thick_fn(rng)
        worst = max(worst, float(np.abs(holonomy_to_fn(fn_to_holonomy(c)).to_vector() - c.to_vector()).max()))
    return worst


def _quake_vs_twist(rng):
    u = fn_to_holonomy(GENERIC_FN)
    worst = 0.0
    for i, c in enumerate(PANTS_CURVES):
        w, t = rng.uniform(0.2, 2.0), rng.uniform(0.1, 2.0)
        v = quake(u, [(c, w)], "right", t)
        worst = max(worst, teich_distance_proxy(v, twist(u, i, w * t)))
    return worst


def _group_laws(rng):
    u = fn_to_holonomy(thick_fn(rng))
    lam = pants_multicurve(rng.uniform(0.2, 1.0, 3)) if rng.random() < 0.5 else dual_multicurve(rng.uniform(0.2, 1.0, 3))
    s, t = rng.uniform(0.1, 1.0, 2)
    inv = teich_distance_proxy(quake(quake(u, lam, "left", s), lam, "right", s), u)
    semi = teich_distance_proxy(quake(quake(u, lam, "right", s), lam, "right", t), quake(u, lam, "right", s + t))
    return inv, semi


def _intersections():
    cases = [("a1", "b1", 1), ("a1", "a2", 0), ("a1b1A1B1", "b1b2", 2), ("b1b2", "b1", 0)]
    return max(abs(geometric_intersection(a, b) - n) for a, b, n in cases)


def _k0():
    lam, mu = filling_pair()
    k0 = minimize_length_sum(lam, mu)
    e = infinitesimal_earthquake(k0, lam, "left") - infinitesimal_earthquake(k0, mu, "right")
    return float(np.abs(e).max()), k0


def run_selftest(seed: int = 0, echo=None) -> dict:
    rng = np.random.default_rng(seed)
    checks = []

    def record(name, value, threshold, passed=None):
        value = float(value)
        ok = bool(value < threshold) if passed is None else bool(passed)
        checks.append({"name": name, "passed": ok, "value": value, "threshold": threshold})
        if echo is not None:
            echo(f"{'PASS' if ok else 'FAIL'}  {name}: {value:.3e} (threshold {threshold:g})")

    record("construction_fidelity", _construction(rng), 1e-9)
    record("fn_roundtrip", _roundtrip(rng), 1e-9)
    record("quake_matches_twist", _quake_vs_twist(rng), 1e-6)
    inv, semi = _group_laws(rng)
    record("inverse_law", inv, 1e-7)
    record("semigroup_law", semi, 1e-6)
    record("intersection_numbers", _intersections(), 0.5)
    k0_dev, k0 = _k0()
    record("k0_left_right_meet", k0_dev, 1e-4)
    lam, mu = filling_pair()
    sol = newton_solve(lam, mu, 0.5, init=k0)
    record("fixed_point_t0.5", sol.fixed_point_residual, 1e-6)
    record("mess_relation_t0.5", sol.mess_residual, 1e-6)
    u = fn_to_holonomy(GENERIC_FN)
    xi = xi_push_check(u, "a1")
    record("xi_push_a1", xi.deviation, 1e-5, passed=xi.deviation < 1e-5 and xi.pairing == "+right/-left")
    tau = translation_cocycle(u, dual_multicurve())
    record("cocycle_relator", tau.relator_residual(), 1e-8)
    red, _ = coboundary_reduce(coboundary(tau, rng.normal(size=3)))
    record("coboundary_annihilation", np.abs(red.values).max(), 1e-8)
    ks = np.linspace(0.0, 50.0, 1000)
    record("theta_half_angle", np.abs(triangle_theta(ks) - theta_half_angle(ks)).max(), 1e-14)
    s = 0.7
    n1 = np.array([0.0, 0.0, 1.0, 0.0])
    n2 = np.array([math.sinh(s), 0.0, math.cosh(s), 0.0])
    record("ads_angle_boost", abs(lz.ads_angle(n1, n2) - s), 1e-12)
    conv = convexity_probe(u, lam, mu, "b1", (-0.5, 0.5), 11)
    record("convexity", -conv.min_second_difference, 1e-6)
    short = recurrence_report(fn_to_holonomy(FNCoords((0.05, 2.0, 2.0), (0.0, 0.0, 0.0))), "a1", 50)
    record("recurrence_short_curve", max(short.counts) - 1, 0.5)
    passed = all(c["passed"] for c in checks)
    return {"seed": seed, "passed": passed, "n_checks": len(checks),
            "n_failed": sum(not c["passed"] for c in checks), "checks": checks}


__all__ = ["run_selftest"]
