import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from earthquake_lab import lorentz as lz
from earthquake_lab.earthquake import (EarthquakeSpec, earthquake, infinitesimal_earthquake, quake, raw_earthquake,
                                       segment_crossings)
from earthquake_lab.errors import ValidationError
from earthquake_lab.fixtures import GENERIC_FN, PANTS_WORDS, dual_multicurve, pants_multicurve, thick_fn
from earthquake_lab.teichmueller import (FNCoords, fn_to_holonomy, holonomy_to_fn, lamination_length,
                                         teich_distance_proxy, twist)


@pytest.mark.parametrize("i", range(3))
@pytest.mark.parametrize("w,t", [(0.3, 0.2), (1.0, 1.0), (2.0, 1.7)])
def test_pants_quake_is_a_twist(generic_point, i, w, t):
    # convention C1: a right earthquake of weight w for time t adds t*w to tau_i
    right = quake(generic_point, [(PANTS_WORDS[i], w)], "right", t)
    assert teich_distance_proxy(right, twist(generic_point, i, w * t)) < 1e-6
    shift = holonomy_to_fn(right).to_vector() - GENERIC_FN.to_vector()
    expected = np.zeros(6)
    expected[3 + i] = w * t
    assert np.abs(shift - expected).max() < 1e-6
    left = quake(generic_point, [(PANTS_WORDS[i], w)], "left", t)
    assert teich_distance_proxy(left, twist(generic_point, i, -w * t)) < 1e-6


def test_time_zero_and_zero_weight(generic_point):
    lam = dual_multicurve((0.4, 0.7, 0.2))
    assert teich_distance_proxy(quake(generic_point, lam, "right", 0.0), generic_point) < 1e-10
    assert teich_distance_proxy(quake(generic_point, dual_multicurve((0, 0, 0)), "left", 1.0),
                                generic_point) < 1e-10


def test_crossings_of_a_short_segment_across_a1(generic_point):
    # normal form: axis(a1) is the imaginary axis; a short horizontal segment crosses
    # it once, and (by the collar lemma) no other pants-curve lift
    p = lz.halfplane_to_hyperboloid(-0.1 + 1j)
    q = lz.halfplane_to_hyperboloid(0.1 + 1j)
    cr = segment_crossings(generic_point, pants_multicurve((0.5, 1.0, 1.0)), p, q)
    assert [c.curve for c in cr] == ["a1"]
    assert cr[0].weight == 0.5
    assert cr[0].parameter == pytest.approx(0.5)
    assert lz.mdot(cr[0].normal, q) > 0 > lz.mdot(cr[0].normal, p)
    assert segment_crossings(generic_point, pants_multicurve(), p, p) == []


def test_crossings_sorted_and_unit(generic_point):
    u = generic_point
    x0 = lz.normalize_point(np.array([0.1, 0.07, 1.0]))
    target = lz.sl2_to_so21(u.word("b1b2a1")) @ x0
    cr = segment_crossings(u, dual_multicurve(), x0, target)
    params = [c.parameter for c in cr]
    assert params == sorted(params) and all(0 < s < 1 for s in params)
    assert len(cr) >= 2
    for c in cr:
        # <n, n> of a far leaf (|n| ~ 1e5 here) is only computable to ~eps |n|^2
        assert abs(lz.mdot(c.normal, c.normal) - 1.0) < 1e-9 * max(1.0, c.normal @ c.normal)


@settings(max_examples=8)
@given(st.integers(0, 2 ** 31), st.sampled_from([0.1, 0.3, 0.7]), st.sampled_from([0.1, 0.3, 0.7]))
def test_semigroup_and_inverse(seed, s, t):
    rng = np.random.default_rng(seed)
    u = fn_to_holonomy(thick_fn(rng))
    lam = dual_multicurve(rng.uniform(0.2, 1.0, 3))
    two = quake(quake(u, lam, "right", s), lam, "right", t)
    assert teich_distance_proxy(two, quake(u, lam, "right", s + t)) < 1e-6
    back = quake(quake(u, lam, "left", t), lam, "right", t)
    assert teich_distance_proxy(back, u) < 1e-7


def test_length_preservation_and_relator(generic_point):
    lam = dual_multicurve((0.6, 0.9, 0.4))
    for side in ("left", "right"):
        v = quake(generic_point, lam, side, 1.3)
        assert v.relator_residual() < 1e-8
        assert lamination_length(v, lam) == pytest.approx(lamination_length(generic_point, lam), abs=1e-7)
        assert teich_distance_proxy(v, generic_point) > 0.05


def test_long_times_are_split(generic_point):
    lam = [("b1", 1.0)]
    a = quake(generic_point, lam, "right", 5.0)
    b = quake(quake(generic_point, lam, "right", 2.5), lam, "right", 2.5)
    assert teich_distance_proxy(a, b) < 1e-6


def test_base_point_independence(generic_point):
    lam = dual_multicurve((0.5, 0.8, 0.3))
    a = earthquake(generic_point, EarthquakeSpec(lam, "right", 0.9))
    b = earthquake(generic_point, EarthquakeSpec(lam, "right", 0.9), 
                   x0=lz.normalize_point(np.array([-0.2, 0.15, 1.0])))
    assert teich_distance_proxy(a, b) < 1e-7


def test_spec_validation():
    with pytest.raises(ValidationError):
        EarthquakeSpec(dual_multicurve(), "up", 1.0)
    with pytest.raises(ValidationError):
        EarthquakeSpec(dual_multicurve(), "left", -1.0)
    with pytest.raises(ValidationError):
        EarthquakeSpec(dual_multicurve(), "left", float("nan"))
    assert EarthquakeSpec(dual_multicurve(), "left", 2.0).signed_time == -2.0


def test_infinitesimal_earthquake(generic_point):
    lam = dual_multicurve((0.5, 0.8, 0.3))
    e_l = infinitesimal_earthquake(generic_point, lam, "left")
    e_r = infinitesimal_earthquake(generic_point, lam, "right")
    assert np.abs(e_r + e_l).max() < 1e-6
    e2 = infinitesimal_earthquake(generic_point, lam.scaled(2.0), "left")
    assert np.abs(e2 - 2 * e_l).max() < 1e-6
    for i, w in enumerate(PANTS_WORDS):
        e = infinitesimal_earthquake(generic_point, [(w, 0.7)], "right")
        expected = np.zeros(6)
        expected[3 + i] = 0.7
        assert np.abs(e - expected).max() < 1e-6


def test_raw_earthquake_keeps_frame(generic_point):
    # the raw deformation is conjugate (not equal) to the normalized one
    lam = dual_multicurve()
    raw = raw_earthquake(generic_point, lam, 0.4)
    assert teich_distance_proxy(raw, quake(generic_point, lam, "right", 0.4)) < 1e-8
    assert isinstance(holonomy_to_fn(raw), FNCoords)
