import numpy as np
import pytest

from earthquake_lab.curves import WeightedMulticurve
from earthquake_lab.errors import LocalMinimumNonzero, NonProper
from earthquake_lab.fixed_point import (BlowupResidual, blowup_phi, continuation_solve, direct_solve,
                                        fixed_point_residual, minimize_length_sum, newton_solve,
                                        recompute_report, verify_mess_relation)
from earthquake_lab.earthquake import infinitesimal_earthquake, quake
from earthquake_lab.fixtures import pants_multicurve
from earthquake_lab.teichmueller import (FNCoords, fn_to_holonomy, holonomy_to_fn, length_gradient,
                                         teich_distance_proxy, twist)


@pytest.fixture(scope="module")
def k0(pair):
    return minimize_length_sum(*pair)


@pytest.fixture(scope="module")
def half_solution(pair, k0):
    return continuation_solve(*pair, 0.5, steps=8, k0=k0)


def test_k0_is_a_critical_point(pair, k0):
    lam, mu = pair
    g = length_gradient(holonomy_to_fn(k0), lam, mu)
    assert np.abs(g).max() < 1e-5
    e = infinitesimal_earthquake(k0, lam, "left") - infinitesimal_earthquake(k0, mu, "right")
    assert np.abs(e).max() < 1e-4
    assert np.abs(blowup_phi(lam, mu, 0.0, k0)).max() < 1e-4


@pytest.mark.slow
def test_k0_independent_of_start(pair, k0):
    rng = np.random.default_rng(3)
    for _ in range(2):
        init = FNCoords(tuple(rng.uniform(0.8, 3.0, 3)), tuple(rng.uniform(-1, 1, 3)))
        assert teich_distance_proxy(minimize_length_sum(*pair, init=init), k0) < 1e-5


def test_single_curve_is_not_proper():
    single = WeightedMulticurve((("a1", 1.0),))
    with pytest.raises(NonProper):
        minimize_length_sum(single, single)


def test_phi_tends_to_its_t0_value(pair, k0):
    # ||phi(t) - phi(0)|| = O(t): successive halvings shrink it by ~2
    lam, mu = pair
    u = twist(k0, 0, 0.3)          # away from k0 so phi(0) != 0
    base = blowup_phi(lam, mu, 0.0, u)
    ts = [0.2, 0.1, 0.05, 0.025, 0.0125]
    errs = [np.abs(blowup_phi(lam, mu, t, u) - base).max() for t in ts]
    slopes = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(slopes - 1.0) < 0.15), slopes


def test_continuation_solution(pair, k0, half_solution):
    lam, mu = pair
    sol = half_solution
    assert sol.method == "continuation"
    assert sol.t_path[0] == 0.0 and sol.t_path[-1] == 0.5 and len(sol.path) == 9
    assert sol.phi_norm < 1e-6
    assert sol.fixed_point_residual < 1e-6
    assert sol.mess_residual < 1e-6
    # characterization: E_l^{t lam} u = E_r^{t mu} u
    u = fn_to_holonomy(sol.solution)
    assert teich_distance_proxy(quake(u, lam, "left", 0.5), quake(u, mu, "right", 0.5)) < 1e-6
    # the report is recomputed from the serialized solution
    again = recompute_report(lam, mu, 0.5, FNCoords.from_dict(sol.solution.to_dict()), "x")
    assert again.fixed_point_residual == pytest.approx(sol.fixed_point_residual, abs=1e-12)


def test_small_t_limit(pair, k0):
    sol = continuation_solve(*pair, 1e-3, steps=1, k0=k0)
    assert teich_distance_proxy(fn_to_holonomy(sol.solution), k0) < 1e-2
    assert sol.fixed_point_residual < 1e-6


@pytest.mark.slow
def test_direct_solve_seeded_at_continuation_output(pair, half_solution):
    lam, mu = pair
    rep = direct_solve(lam.scaled(0.5), mu.scaled(0.5), init=half_solution.solution, seeds=1)
    assert rep.fixed_point_residual < 1e-6
    d = teich_distance_proxy(fn_to_holonomy(rep.solution), fn_to_holonomy(half_solution.solution))
    assert d < 1e-5


def test_newton_matches_continuation(pair, k0, half_solution):
    sol = newton_solve(*pair, 0.5, init=k0)
    d = teich_distance_proxy(fn_to_holonomy(sol.solution), fn_to_holonomy(half_solution.solution))
    assert d < 1e-5


def test_mess_relation(pair, half_solution):
    lam, mu = pair
    u = fn_to_holonomy(half_solution.solution)
    rep = verify_mess_relation(u, lam.scaled(0.25), mu.scaled(0.25))
    assert max(rep.values()) < 1e-6
    zero = verify_mess_relation(u, lam.scaled(0.0), mu.scaled(0.0))
    assert max(zero.values()) < 1e-10
    far = twist(u, 1, 0.1)
    assert verify_mess_relation(far, lam.scaled(0.25), mu.scaled(0.25))["relation"] > 1e-3


def test_non_filling_pair_fails():
    lam = pants_multicurve()
    mu = pants_multicurve((2.0, 0.5, 1.0))
    with pytest.raises((NonProper, LocalMinimumNonzero)):
        direct_solve(lam, mu, seeds=1)


def test_blowup_residual_vanishes_at_fixed_points(pair, half_solution):
    F = BlowupResidual(*pair, 0.5)
    v = half_solution.solution.to_vector()
    assert np.abs(F(v)).max() < 1e-6 / 0.5
    J = F.jacobian(v)
    assert J.shape == (6, 6) and np.linalg.matrix_rank(J) == 6


def test_fixed_point_residual_detects_non_fixed_points(pair, k0):
    assert fixed_point_residual(*pair, k0, 0.5) > 1e-3


@pytest.mark.slow
def test_scale_coherence(pair, k0):
    # solutions for (t lam, t mu) form a continuous path starting near k0
    ts = np.arange(0.05, 0.45, 0.05)
    prev = k0
    for t in ts:
        sol = newton_solve(*pair, float(t), init=prev, mess=False)
        u = fn_to_holonomy(sol.solution)
        assert teich_distance_proxy(u, prev) < 0.1
        prev = u
