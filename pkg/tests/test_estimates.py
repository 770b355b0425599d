import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from earthquake_lab.errors import ValidationError
from earthquake_lab.estimates import (SweepReport, convexity_probe, main_estimate_sweep, recurrence_count,
                                      recurrence_report, theta_half_angle, triangle_theta)
from earthquake_lab.fixtures import dual_multicurve, filling_pair
from earthquake_lab.teichmueller import FNCoords, fn_to_holonomy


def test_theta_values():
    assert triangle_theta(0.0) == 0.0
    # sinh(ln 3) / (1 + cosh(ln 3)) = (4/3) / (8/3) = 1/2
    assert triangle_theta(math.log(3.0)) == pytest.approx(math.atan(math.e / 2), abs=1e-15)
    assert triangle_theta(math.log(3.0)) == pytest.approx(0.936472007566, abs=1e-12)
    ks = np.linspace(0.0, 50.0, 1000)
    assert np.abs(triangle_theta(ks) - theta_half_angle(ks)).max() < 1e-14
    with pytest.raises(ValidationError):
        triangle_theta(-1.0)


def test_theta_monotone_and_bounded():
    # strictly increasing; beyond kappa ~ 37 the float64 value sits at atan(e)
    assert np.all(np.diff(triangle_theta(np.linspace(1e-3, 20.0, 2000))) > 0)
    assert np.all(np.diff(triangle_theta(np.linspace(1e-3, 50.0, 2000))) >= -4e-16)   # one ulp
    assert triangle_theta(50.0) <= math.atan(math.e)
    assert triangle_theta(50.0) == pytest.approx(math.atan(math.e), abs=1e-15)
    assert np.isfinite(triangle_theta(1e4))


@given(st.floats(0.0, 30.0))
def test_theta_half_angle_identity(k):
    assert abs(triangle_theta(k) - theta_half_angle(k)) < 1e-14


def test_recurrence_short_curve():
    # collar half-width arcsinh(1/sinh(0.025)) ~ 4.4 > 1: no returns within length 1
    u = fn_to_holonomy(FNCoords((0.05, 2.0, 2.0), (0.0, 0.0, 0.0)))
    rep = recurrence_report(u, "a1", 40)
    assert rep.counts == [1] * 40
    assert recurrence_count(u, "a1", 0.3) == 1
    with pytest.raises(ValidationError):
        recurrence_count(u, "a1", 1.0)


def test_recurrence_long_curve():
    u = fn_to_holonomy(FNCoords((8.0, 2.0, 2.0), (0.3, 0.0, 0.0)))
    rep = recurrence_report(u, "a1", 100)
    assert min(rep.counts) >= 1 and max(rep.counts) > 1
    assert rep.beta > 0
    assert rep.measure <= rep.length / 2
    assert rep.measure == rep.measure_at(rep.beta)
    # the params are an equally spaced period grid
    assert np.allclose(np.diff(rep.params), 0.01)
    again = recurrence_report(u, "a1", 100)
    assert again.counts == rep.counts


def test_convexity_constant_case(generic_point):
    rep = convexity_probe(generic_point, [("b1", 1.0)], [("b1", 1.0)], [("b1", 1.0)], (-1, 1), 9)
    assert max(abs(x) for x in rep.second_differences) < 1e-8


def test_convexity_filling_pair(generic_point):
    lam, mu = filling_pair()
    coarse = convexity_probe(generic_point, lam, mu, dual_multicurve((0.3, 0.5, 0.2)), (-1, 1), 11)
    assert coarse.min_second_difference >= -1e-6
    fine = convexity_probe(generic_point, lam, mu, dual_multicurve((0.3, 0.5, 0.2)), (-1, 1), 21)
    # second differences scale like h^2: halving h quarters them
    ratio = np.mean(coarse.second_differences) / np.mean(fine.second_differences)
    assert 3.0 < ratio < 5.0
    with pytest.raises(ValidationError):
        convexity_probe(generic_point, lam, mu, lam, (-1, 1), 2)


@pytest.mark.slow
def test_small_sweep_is_deterministic_and_positive():
    a = main_estimate_sweep(3, seed=7)
    b = main_estimate_sweep(3, seed=7)
    assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)
    assert a.excluded == 0 and a.all_positive()
    # ratios are recomputed from the per-sample data
    s = a.samples[0]
    assert a.ratios()[1.0][0] == s["intersection"] / (s["l_lambda"] * min(s["l_lambda"], 1.0))
    assert len(a.csv_rows()) == 4


def test_sweep_report_excludes_failures():
    samples = [{"index": 0, "status": "ok", "intersection": 2.0, "l_lambda": 3.0, "l_mu": 1.0},
               {"index": 1, "status": "excluded: NewtonStalled", "intersection": 1.0,
                "l_lambda": None, "l_mu": None}]
    rep = SweepReport(samples)
    assert rep.excluded == 1
    assert rep.ratios()[0.5] == [2.0 / 1.5]
    assert rep.ratios("mu")[4.0] == [2.0]
    with pytest.raises(ValidationError):
        main_estimate_sweep(1, weight_range=(0.0, 1.0))
