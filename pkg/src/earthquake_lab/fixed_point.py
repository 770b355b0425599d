"""Fixed points of compositions of left earthquakes.

u is fixed by E_l^{t mu} o E_l^{t lam} exactly when E_l^{t lam}(u) = E_r^{t mu}(u).
In the FN chart x the zeros of

    phi(t, u) = (x(E_l^{t lam} u) - x(E_r^{t mu} u)) / t,   phi(0, u) = e_l^lam(u) - e_r^mu(u)

are therefore the fixed points; at t = 0 the zero is the minimizer k0 of
l_lam + l_mu.  ``continuation_solve`` follows the zero from k0 along a t-grid
with damped Newton steps, ``direct_solve`` attacks the t-free equation with
a multistart least-squares solver, and ``verify_mess_relation`` checks the
left/right identities between the resulting metrics.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares, minimize

from .config import tol
from .curves import as_multicurve
from .earthquake import crossing_data, infinitesimal_earthquake, quake, raw_earthquake
from .errors import (EarthquakeLabError, LocalMinimumNonzero, MaxIterations, NewtonStalled, NonProper,
                     NumericalFailure)
from .teichmueller import (FNCoords, HolonomyRep, TeichPoint, fn_to_holonomy, holonomy_to_fn,
                           lamination_length, teich_distance_proxy)

log = logging.getLogger(__name__)

DEFAULT_INIT = FNCoords((2.0, 2.0, 2.0), (0.0, 0.0, 0.0))


def _as_vector(u) -> np.ndarray:
    if isinstance(u, FNCoords):
        return u.to_vector()
    if isinstance(u, HolonomyRep):
        return holonomy_to_fn(u).to_vector()
    return np.asarray(u, dtype=float)


def _point(v) -> TeichPoint:
    return fn_to_holonomy(FNCoords.from_vector(v))


# -- k0 ------------------------------------------------------------------------------

def _length_sum(v, lam, mu) -> float:
    try:
        u = _point(v)
    except EarthquakeLabError as exc:
        k = len(v) // 2
        # the construction loses precision before the escape box is reached
        if min(v[:k]) < 0.05 or max(v[:k]) > 0.8 * tol().escape_high:
            raise NonProper("length sum is not proper along the iterates (non-filling pair?)",
                            lengths=[float(x) for x in v[:k]]) from exc
        raise
    return lamination_length(u, lam) + lamination_length(u, mu)


def _fd_gradient(f, v, h):
    g = np.empty_like(v)
    for i in range(len(v)):
        e = np.zeros_like(v)
        e[i] = h
        g[i] = (f(v + e) - f(v - e)) / (2.0 * h)
    return g


def _check_proper(v, k):
    t = tol()
    lengths = v[:k]
    if lengths.min() <= t.escape_low * 1.0001 or lengths.max() >= t.escape_high * 0.9999:
        raise NonProper("length sum is not proper along the iterates (non-filling pair?)",
                        lengths=[float(x) for x in lengths])


def minimize_length_sum(lam, mu, init=None, return_info: bool = False):
    """Minimizer k0 of F = l_lam + l_mu over Teichmüller space (FN chart).

    L-BFGS-B with central-difference gradients, lengths boxed in
    [escape_low, escape_high]; a minimizer on the box signals NonProper.
    Finished by Newton steps with a finite-difference Hessian until
    ||grad F||_inf < grad_tol.
    """
    t = tol()
    lam, mu = as_multicurve(lam), as_multicurve(mu)
    v0 = _as_vector(DEFAULT_INIT if init is None else init)
    k = len(v0) // 2
    h = t.fd_step

    def f(v):
        return _length_sum(v, lam, mu)

    def fg(v):
        return f(v), _fd_gradient(f, v, h)

    bounds = [(t.escape_low, t.escape_high)] * k + [(None, None)] * k
    res = minimize(fg, v0, jac=True, method="L-BFGS-B", bounds=bounds,
                   options={"maxiter": t.max_iterations, "gtol": 1e-9, "ftol": 1e-15})
    v = res.x
    _check_proper(v, k)
    iters = int(res.nit)
    g = _fd_gradient(f, v, h)
    for _ in range(20):
        if np.abs(g).max() < t.grad_tol:
            break
        H = np.array([_fd_gradient(f, v + e, h) - _fd_gradient(f, v - e, h)
                      for e in np.eye(len(v)) * 1e-4]).T / 2e-4
        H = 0.5 * (H + H.T)
        step = np.linalg.lstsq(H, -g, rcond=None)[0]
        f0 = f(v)
        alpha = 1.0
        while alpha > 1e-3 and f(v + alpha * step) > f0 + 1e-12:
            alpha /= 2.0
        v = v + alpha * step
        _check_proper(v, k)
        g = _fd_gradient(f, v, h)
        iters += 1
    else:
        if np.abs(g).max() >= t.grad_tol:
            raise MaxIterations("gradient did not reach tolerance", grad=float(np.abs(g).max()))
    if iters >= t.max_iterations:
        raise MaxIterations("iteration budget exhausted", grad=float(np.abs(g).max()))
    u = _point(v)
    if return_info:
        return u, {"iterations": iters, "grad_inf": float(np.abs(g).max()), "value": f(v)}
    return u


# -- blow-up residual --------------------------------------------------------------------

class BlowupResidual:
    """phi(t, .) for fixed (lam, mu, t), with reuse of crossing combinatorics for Jacobians."""

    def __init__(self, lam, mu, t: float, depth: int = 8, x0=None):
        if t < 0:
            raise ValueError("t must be >= 0")
        self.lam = as_multicurve(lam)
        self.mu = as_multicurve(mu)
        self.t = float(t)
        self.depth = depth
        self.x0 = x0

    def _sides(self, u, templates=None):
        tl = tm = None
        if templates is not None:
            tl, tm = templates
        left = raw_earthquake(u, self.lam, -self.t, self.x0, self.depth, template=tl)
        right = raw_earthquake(u, self.mu, self.t, self.x0, self.depth, template=tm)
        return holonomy_to_fn(left).to_vector(), holonomy_to_fn(right).to_vector()

    def __call__(self, v, templates=None) -> np.ndarray:
        v = _as_vector(v)
        u = _point(v)
        if self.t == 0.0:
            return (infinitesimal_earthquake(u, self.lam, "left", x0=self.x0, depth=self.depth)
                    - infinitesimal_earthquake(u, self.mu, "right", x0=self.x0, depth=self.depth))
        a, b = self._sides(u, templates)
        return (a - b) / self.t

    def templates(self, v):
        u = _point(_as_vector(v))
        return (crossing_data(u, self.lam.curves, self.x0, self.depth),
                crossing_data(u, self.mu.curves, self.x0, self.depth))

    def jacobian(self, v, step: float | None = None) -> np.ndarray:
        v = _as_vector(v)
        h = tol().jacobian_step if step is None else step
        tpl = self.templates(v) if self.t > 0 else None
        cols = []
        for i in range(len(v)):
            e = np.zeros_like(v)
            e[i] = h
            cols.append((self(v + e, tpl) - self(v - e, tpl)) / (2.0 * h))
        return np.array(cols).T


def blowup_phi(lam, mu, t: float, u, depth: int = 8) -> np.ndarray:
    return BlowupResidual(lam, mu, t, depth)(u)


# -- reports ---------------------------------------------------------------------------

@dataclass
class SolveReport:
    solution: FNCoords
    t: float
    phi_norm: float
    fixed_point_residual: float
    mess_residual: float
    iterations: int
    method: str
    t_path: list = field(default_factory=list)
    path: list = field(default_factory=list)        # FN vectors along the t-path
    solutions: list = field(default_factory=list)   # distinct multistart solutions
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "t": self.t,
            "solution": self.solution.to_dict(),
            "residuals": {"phi_inf": self.phi_norm, "fixed_point_proxy": self.fixed_point_residual,
                          "mess": self.mess_residual},
            "iterations": self.iterations,
            "t_path": list(self.t_path),
            "path": [list(map(float, p)) for p in self.path],
            "solutions": [s.to_dict() for s in self.solutions],
            "notes": list(self.notes),
        }


def fixed_point_residual(lam, mu, u, t: float = 1.0, depth: int = 8) -> float:
    """Distance proxy between E_l^{t mu}(E_l^{t lam}(u)) and u."""
    u = _point(_as_vector(u))
    lam, mu = as_multicurve(lam), as_multicurve(mu)
    v = quake(quake(u, lam, "left", t, depth=depth), mu, "left", t, depth=depth)
    return teich_distance_proxy(v, u)


def recompute_report(lam, mu, t: float, solution, method: str, iterations: int = 0, mess: bool = True,
                     **extra) -> SolveReport:
    """Build a report whose residuals are recomputed from the serialized solution."""
    sol = FNCoords.from_vector(_as_vector(solution))
    sol = FNCoords.from_dict(sol.to_dict())
    u = fn_to_holonomy(sol)
    lam, mu = as_multicurve(lam), as_multicurve(mu)
    phi = BlowupResidual(lam, mu, t)(sol) if t > 0 else BlowupResidual(lam, mu, 0.0)(sol)
    fp = fixed_point_residual(lam, mu, u, t) if t > 0 else float("nan")
    m = float("nan")
    if mess and t > 0:
        m = verify_mess_relation(u, lam.scaled(t / 2.0), mu.scaled(t / 2.0))["relation"]
    return SolveReport(sol, t, float(np.abs(phi).max()), fp, m, iterations, method, **extra)


# -- continuation ----------------------------------------------------------------------

def _newton(F: BlowupResidual, v, max_iter: int, ftol: float):
    t = tol()
    f = F(v)
    fn = np.abs(f).max()
    iters = 0
    for iters in range(1, max_iter + 1):
        if fn < ftol:
            return v, fn, iters - 1
        J = F.jacobian(v)
        step = np.linalg.lstsq(J, -f, rcond=None)[0]
        alpha = 1.0
        for _ in range(t.newton_halvings + 1):
            try:
                v_new = v + alpha * step
                f_new = F(v_new)
                fn_new = np.abs(f_new).max()
            except EarthquakeLabError:
                fn_new = np.inf
            if fn_new < fn:
                break
            alpha /= 2.0
        else:
            return v, fn, iters
        v, f, fn = v_new, f_new, fn_new
    return v, fn, iters


def continuation_solve(lam, mu, t_target: float, steps: int = 32, init=None, depth: int = 8,
                       k0=None) -> SolveReport:
    """Follow the zero of phi(t, .) from k0 at t = 0 to t_target on a uniform grid."""
    if t_target <= 0:
        raise ValueError("t_target must be > 0")
    lam, mu = as_multicurve(lam), as_multicurve(mu)
    t = tol()
    if k0 is None:
        k0 = minimize_length_sum(lam, mu, init)
    v = _as_vector(k0)
    t_path, path = [0.0], [v.copy()]
    total = 0
    last_good = 0.0
    for j in range(1, steps + 1):
        tj = t_target * j / steps
        F = BlowupResidual(lam, mu, tj, depth)
        v_new, fn, it = _newton(F, v, t.newton_max_iter, t.newton_tol)
        total += it
        if fn >= t.newton_tol:
            raise NewtonStalled(f"Newton did not converge at t = {tj:g}", last_good_t=last_good,
                                phi_inf=float(fn), t=tj)
        v = v_new
        last_good = tj
        t_path.append(tj)
        path.append(v.copy())
        log.debug("t=%g |phi|=%.2e iters=%d", tj, fn, it)
    return recompute_report(lam, mu, t_target, v, "continuation", total, t_path=t_path, path=path)


def newton_solve(lam, mu, t: float = 1.0, init=None, depth: int = 8, mess: bool = True,
                 fallback_steps: int = 8) -> SolveReport:
    """Damped Newton on phi(t, .) started at ``init`` (default k0); falls back to
    continuation with ``fallback_steps`` steps if Newton stalls.
    """
    lam, mu = as_multicurve(lam), as_multicurve(mu)
    k0 = None
    if init is None:
        k0 = minimize_length_sum(lam, mu)
        init = k0
    v, fn, it = _newton(BlowupResidual(lam, mu, t, depth), _as_vector(init), tol().newton_max_iter,
                        tol().newton_tol)
    if fn < tol().newton_tol:
        return recompute_report(lam, mu, t, v, "newton", it, mess=mess, t_path=[t], path=[v])
    log.info("direct Newton stalled (|phi| = %.2e); continuing from k0", fn)
    return continuation_solve(lam, mu, t, fallback_steps, depth=depth, k0=k0)


# -- direct solve ------------------------------------------------------------------------

def _start_points(init, n: int, rng) -> list:
    v0 = _as_vector(DEFAULT_INIT if init is None else init)
    k = len(v0) // 2
    starts = [v0]
    while len(starts) < n:
        v = v0.copy()
        v[:k] = v0[:k] * np.exp(rng.normal(0.0, 0.2, k))
        v[k:] = v0[k:] + rng.normal(0.0, 0.3, k)
        starts.append(v)
    return starts


def direct_solve(lam, mu, init=None, seeds: int = 5, seed: int = 0, depth: int = 8) -> SolveReport:
    """Multistart least squares on x(E_l^lam u) - x(E_r^mu u); success iff the
    recomputed fixed-point proxy r(u) = d(E_l^mu E_l^lam u, u) is below direct_tol.
    """
    t = tol()
    lam, mu = as_multicurve(lam), as_multicurve(mu)
    F = BlowupResidual(lam, mu, 1.0, depth)
    rng = np.random.default_rng(seed)
    found, best = [], (np.inf, None)
    k = 3
    lower = np.r_[np.full(k, t.escape_low), np.full(k, -np.inf)]
    upper = np.r_[np.full(k, t.escape_high), np.full(k, np.inf)]
    for v0 in _start_points(init, seeds, rng):
        try:
            res = least_squares(F, v0, jac=F.jacobian, bounds=(lower, upper), method="trf",
                                xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=60)
            v = res.x
            _check_proper(v, k)
            r = fixed_point_residual(lam, mu, v, 1.0, depth)
        except NonProper:
            raise
        except NumericalFailure as exc:
            log.info("direct_solve start failed: %s", exc)
            continue
        if r < best[0]:
            best = (r, v)
        if r < t.direct_tol and all(teich_distance_proxy(_point(v), _point(w)) > 1e-5 for w in found):
            found.append(v)
    if not found:
        raise LocalMinimumNonzero("no start reached a fixed point", r=float(best[0]))
    report = recompute_report(lam, mu, 1.0, best[1], "direct", seeds,
                              solutions=[FNCoords.from_vector(w) for w in found])
    if len(found) > 1:
        report.notes.append(f"{len(found)} distinct fixed points found")
    return report


# -- Mess relation ----------------------------------------------------------------------

def verify_mess_relation(u, lam_plus, lam_minus, depth: int = 8) -> dict:
    """Residuals of rho_l = E_l^{2 lam+}(rho_r) = E_r^{2 lam-}(rho_r) with rho_r = u,
    and of the four identities through m+ = E_l^{lam+}(rho_r), m- = E_r^{lam-}(rho_r).
    """
    lp, lm = as_multicurve(lam_plus), as_multicurve(lam_minus)
    rho_r = u if isinstance(u, HolonomyRep) else _point(_as_vector(u))
    rho_l = quake(rho_r, lp.scaled(2.0), "left", 1.0, depth=depth)
    other = quake(rho_r, lm.scaled(2.0), "right", 1.0, depth=depth)
    m_plus = quake(rho_r, lp, "left", 1.0, depth=depth)
    m_minus = quake(rho_r, lm, "right", 1.0, depth=depth)
    d = teich_distance_proxy
    return {
        "relation": d(rho_l, other),
        "rho_l_from_m_plus": d(rho_l, quake(m_plus, lp, "left", 1.0, depth=depth)),
        "rho_r_from_m_plus": d(rho_r, quake(m_plus, lp, "right", 1.0, depth=depth)),
        "rho_l_from_m_minus": d(rho_l, quake(m_minus, lm, "right", 1.0, depth=depth)),
        "rho_r_from_m_minus": d(rho_r, quake(m_minus, lm, "left", 1.0, depth=depth)),
    }


__all__ = [
    "minimize_length_sum", "BlowupResidual", "blowup_phi", "continuation_solve", "direct_solve", "newton_solve",
    "verify_mess_relation", "SolveReport", "fixed_point_residual", "recompute_report",
]
