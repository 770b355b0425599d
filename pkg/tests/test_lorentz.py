import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from earthquake_lab import lorentz as lz
from earthquake_lab.errors import (Degenerate, NotHyperbolic, NotSpacelike, NotUnimodular,
                                   NotUnitTimelike, PlanesDisjoint)

finite = st.floats(-3.0, 3.0, allow_nan=False)
vec3 = st.tuples(finite, finite, finite).map(np.array)


def random_sl2(rng, scale=1.0):
    A = rng.normal(size=(2, 2)) * scale + np.eye(2)
    d = np.linalg.det(A)
    if d < 0:
        A[:, 0] *= -1
        d = -d
    return A / np.sqrt(d)


def random_point(rng, r=2.0):
    return lz.halfplane_to_hyperboloid(complex(rng.normal() * r, math.exp(rng.normal())))


@given(vec3, vec3)
def test_cross_is_minkowski_orthogonal(x, y):
    c = lz.minkowski_cross(x, y)
    scale = max(1.0, np.abs(x).max() * np.abs(y).max())
    assert abs(lz.mdot(c, x)) <= 1e-12 * scale * max(1.0, np.abs(x).max())
    assert abs(lz.mdot(c, y)) <= 1e-12 * scale * max(1.0, np.abs(y).max())


@given(vec3, vec3, vec3)
def test_xi_is_skew(x, y, z):
    K = lz.xi(x)
    assert abs(lz.mdot(K @ y, z) + lz.mdot(y, K @ z)) < 1e-10
    assert np.allclose(lz.xi_inverse(K), x)
    assert np.allclose(K @ y, lz.minkowski_cross(x, y))


def test_sl2_to_so21_is_homomorphism(rng):
    for _ in range(50):
        A, B = random_sl2(rng), random_sl2(rng)
        lhs = lz.sl2_to_so21(A @ B)
        rhs = lz.sl2_to_so21(A) @ lz.sl2_to_so21(B)
        assert np.abs(lhs - rhs).max() < 1e-9 * max(1.0, np.abs(lhs).max())
        M = lz.sl2_to_so21(A)
        assert np.allclose(M.T @ lz.J @ M, lz.J, atol=1e-9 * np.abs(M).max() ** 2)


def test_so21_roundtrip_up_to_sign(rng):
    for _ in range(20):
        A = random_sl2(rng)
        B = lz.so21_to_sl2(lz.sl2_to_so21(A))
        assert min(np.abs(A - B).max(), np.abs(A + B).max()) < 1e-9


def test_mobius_matches_adjoint_action(rng):
    for _ in range(20):
        A = random_sl2(rng)
        z = complex(rng.normal(), math.exp(rng.normal()))
        p = lz.halfplane_to_hyperboloid(lz.mobius(A, z))
        q = lz.sl2_to_so21(A) @ lz.halfplane_to_hyperboloid(z)
        assert np.allclose(p, q, atol=1e-9 * np.abs(q).max())


def test_exp_boost_one_parameter_group_and_axis(rng):
    p, q = random_point(rng), random_point(rng)
    g = lz.geodesic_through(p, q)
    s, t = 0.4, -1.3
    B = lz.exp_boost(g.normal, s)
    assert np.allclose(B.T @ lz.J @ B, lz.J, atol=1e-10)
    assert np.allclose(B @ lz.exp_boost(g.normal, t), lz.exp_boost(g.normal, s + t), atol=1e-10)
    assert np.allclose(B @ g.normal, g.normal, atol=1e-12)
    # points of the axis stay on the axis and move by |s|
    x = g.project(random_point(rng))
    y = B @ x
    assert abs(lz.mdot(y, g.normal)) < 1e-10
    assert lz.h2_distance(x, y) == pytest.approx(abs(s), abs=1e-9)


def test_sl2_boost_lifts_exp_boost(rng):
    n = lz.geodesic_through(random_point(rng), random_point(rng)).normal
    for t in (-2.0, 0.3, 1.7):
        assert np.allclose(lz.sl2_to_so21(lz.sl2_boost(n, t)), lz.exp_boost(n, t), atol=1e-9)
    assert np.allclose(lz.sl2_boost(n, 0.0), np.eye(2))


def test_translation_length_and_axis():
    ell = 1.7
    A = np.diag([math.exp(ell / 2), math.exp(-ell / 2)])
    assert lz.translation_length(A) == pytest.approx(ell)
    ax = lz.axis(A)
    # the axis of a diagonal matrix is the imaginary axis
    assert ax.contains(lz.halfplane_to_hyperboloid(2j))
    back, fwd = ax.ideal_endpoints()
    assert back == pytest.approx(0.0, abs=1e-9) and math.isinf(fwd)
    with pytest.raises(NotHyperbolic):
        lz.translation_length(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(NotUnimodular):
        lz.translation_length(np.diag([2.0, 2.0]))


def test_crossing_is_isometry_invariant(rng):
    for _ in range(30):
        p, q = random_point(rng), random_point(rng)
        g = lz.geodesic_through(random_point(rng), random_point(rng))
        M = lz.sl2_to_so21(random_sl2(rng, 0.5))
        a = lz.crossing(g, p, q)
        b = lz.crossing(g.transformed(M), M @ p, M @ q)
        assert (a is None) == (b is None)
        if a is not None:
            assert a.side == b.side
            assert a.parameter == pytest.approx(b.parameter, abs=1e-8)


def test_crossing_parameter_is_on_the_geodesic(rng):
    found = 0
    for _ in range(50):
        p, q = random_point(rng), random_point(rng)
        g = lz.geodesic_through(random_point(rng), random_point(rng))
        rec = lz.crossing(g, p, q)
        if rec is None:
            continue
        found += 1
        x = lz.geodesic_point(p, q, rec.parameter)
        assert abs(lz.mdot(x, g.normal)) < 1e-8 * max(1.0, np.abs(x).max())
        assert (lz.mdot(q, rec.side * g.normal) > 0)
    assert found > 5


def test_crossing_degenerate_endpoint():
    g = lz.Geodesic(np.array([1.0, 0.0, 0.0]))
    with pytest.raises(Degenerate):
        lz.crossing(g, lz.ORIGIN, lz.halfplane_to_hyperboloid(1 + 1j))


def test_geodesic_rejects_non_unit_normal():
    with pytest.raises(NotSpacelike):
        lz.Geodesic(np.array([0.0, 0.0, 1.0]))


def test_ads_angle_examples():
    N = np.array([0.0, 0.0, 1.0, 0.0])
    assert lz.ads_angle(N, N) == 0.0
    for s in (0.1, 0.7, 2.5):
        # a boost by s in the (x1, x3)-plane of R^{2,2}
        N2 = np.array([math.sinh(s), 0.0, math.cosh(s), 0.0])
        assert abs(lz.ads_angle(N, N2) - s) < 1e-12
        assert lz.ads_angle(N2, N) == lz.ads_angle(N, N2)


def test_ads_angle_errors():
    N = np.array([0.0, 0.0, 1.0, 0.0])
    with pytest.raises(NotUnitTimelike):
        # <N2, N2> = -(cosh^2 + sinh^2) != -1
        lz.ads_angle(N, np.array([0.0, 0.0, math.cosh(0.5), math.sinh(0.5)]))
    with pytest.raises(PlanesDisjoint):
        lz.ads_angle(N, np.array([0.0, 0.0, 0.0, 1.0]))


def test_halfplane_roundtrip(rng):
    for _ in range(20):
        z = complex(rng.normal(), math.exp(rng.normal()))
        p = lz.halfplane_to_hyperboloid(z)
        assert lz.mdot(p, p) == pytest.approx(-1.0)
        assert abs(lz.hyperboloid_to_halfplane(p) - z) < 1e-10 * max(1, abs(z))
