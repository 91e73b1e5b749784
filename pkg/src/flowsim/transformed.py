"""
Return map of the perturbed blown-up equation dr/dtheta = F0 + eps F1.

Switching happens at the fixed angles alpha + pi and alpha + 2 pi, so each
period is integrated as two separate DOP853 runs and no step straddles a
discontinuity of F1.

Two frames are available:
  comoving  eta = (log r - log(ff(theta) z)) / eps, deta/dtheta = F1 / r.
            The unperturbed part is carried by the flow factor, so the
            return map r(alpha + 2 pi) = z exp(eps eta) keeps full relative
            precision at very small eps.
  direct    rho = log r, drho/dtheta = f/g + eps F1 / r. Independent of the
            flow factor.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from ..blowup.weighted_polar import eval_F0, f_over_g, perturbation_rate
from ..core.errors import NonpositiveRadius, RadiusCollapse, StepFailure

logger = logging.getLogger(__name__)

FRAMES = ("comoving", "direct")
RADIUS_FLOOR = 1e-100
RADIUS_CEILING = 1e100
ATOL_FACTOR = 1e-2
LOG_FLOOR, LOG_CEILING = math.log(RADIUS_FLOOR), math.log(RADIUS_CEILING)


def rhs_transformed(problem, theta, r, eps, exact=False):
    if not r > 0:
        raise NonpositiveRadius(f"r = {r!r} at theta = {theta:.6f}")
    return eval_F0(problem.params, theta, r) + eps * perturbation_rate(problem, theta, r, eps, exact)


@dataclass
class StepLog:
    """Accepted step endpoints per integration segment."""
    segments: list = field(default_factory=list)

    def record(self, t):
        self.segments.append(np.asarray(t, dtype=float))

    def straddles(self, angles):
        """True if some accepted step has one of the angles strictly inside it."""
        for t in self.segments:
            lo, hi = np.minimum(t[:-1], t[1:]), np.maximum(t[:-1], t[1:])
            for angle in angles:
                if np.any((lo < angle) & (angle < hi)):
                    return True
        return False

    def rows(self):
        return [{"segment": k, "theta": float(theta)}
                for k, t in enumerate(self.segments) for theta in t]


@dataclass(frozen=True)
class PeriodResult:
    z: float
    eps: float
    radius: float
    displacement: float
    # eta(alpha + 2 pi) in the comoving frame, nan in the direct frame
    eta: float = float("nan")


def _radius_events(log_radius):
    def collapse(theta, y, *args):
        return log_radius(theta, y) - LOG_FLOOR
    collapse.terminal = True
    collapse.direction = -1

    def escape(theta, y, *args):
        return log_radius(theta, y) - LOG_CEILING
    escape.terminal = True
    escape.direction = 1
    return [collapse, escape]


def _exp_radius(log_r, theta):
    """exp(log_r), with StepFailure once the first-order equation has left every sane scale."""
    if not log_r < LOG_CEILING:
        raise StepFailure(f"radius exceeded {RADIUS_CEILING:g} at theta = {theta:.6f}; "
                          "eps is too large for the first-order equation here")
    r = math.exp(log_r)
    if r == 0.0:
        raise RadiusCollapse(f"radius underflowed at theta = {theta:.6f}")
    return r


def _run_segment(rhs, t0, t1, y0, tol, events, step_log, side):
    sol = solve_ivp(rhs, (t0, t1), [y0], method="DOP853", rtol=tol, atol=tol * ATOL_FACTOR,
                    events=events, args=(side,))
    if step_log is not None:
        step_log.record(sol.t)
    if sol.status == 1:
        if len(sol.t_events[0]):
            raise RadiusCollapse(f"radius fell below {RADIUS_FLOOR:g} at theta = {sol.t_events[0][0]:.6f}")
        raise StepFailure(f"radius exceeded {RADIUS_CEILING:g} at theta = {sol.t_events[1][0]:.6f}")
    if sol.status != 0:
        raise StepFailure(f"integration on [{t0:.4f}, {t1:.4f}] failed: {sol.message}")
    y_end = float(sol.y[0, -1])
    if not math.isfinite(y_end):
        raise RadiusCollapse(f"non-finite state at theta = {t1:.6f}")
    return y_end


def period_map(problem, ff, z, eps, tol=1e-12, frame="comoving", exact=False, step_log=None):
    """Integrate one full period from r(alpha) = z; returns a PeriodResult."""
    if not z > 0:
        raise NonpositiveRadius(f"initial radius z = {z!r}")
    if frame not in FRAMES:
        raise ValueError(f"frame must be one of {FRAMES}, got {frame!r}")
    alpha = problem.line.base_angle
    segments = ((alpha, alpha + math.pi, "+"), (alpha + math.pi, alpha + 2 * math.pi, "-"))
    params = problem.params

    if frame == "comoving":
        log_z = math.log(z)

        def log_radius(theta, y):
            return ff.w(theta) + log_z + eps * y[0]

        def rhs(theta, y, side):
            r = _exp_radius(log_radius(theta, y), theta)
            return [perturbation_rate(problem, theta, r, eps, exact, side) / r]

        events = _radius_events(log_radius)
        eta = 0.0
        for t0, t1, side in segments:
            eta = _run_segment(rhs, t0, t1, eta, tol, events, step_log, side)
        disp = z * math.expm1(eps * eta)
        return PeriodResult(z, eps, z + disp, disp, eta)

    def rhs(theta, y, side):
        r = _exp_radius(y[0], theta)
        return [f_over_g(params, theta) + eps * perturbation_rate(problem, theta, r, eps, exact, side) / r]

    events = _radius_events(lambda theta, y: y[0])
    rho = math.log(z)
    for t0, t1, side in segments:
        rho = _run_segment(rhs, t0, t1, rho, tol, events, step_log, side)
    disp = z * math.expm1(rho - math.log(z))
    return PeriodResult(z, eps, z + disp, disp)


def integrate_period(problem, ff, z, eps, tol=1e-12, frame="comoving", exact=False, step_log=None):
    return period_map(problem, ff, z, eps, tol, frame, exact, step_log).radius


def displacement(problem, ff, z, eps, tol=1e-12, frame="comoving", exact=False):
    return period_map(problem, ff, z, eps, tol, frame, exact).displacement


def scaled_residual(problem, ff, z, eps, tol=1e-12, frame="comoving", exact=False):
    """
    A function with the same zeros and signs as the displacement for eps > 0,
    but O(1) in size: eta(alpha + 2 pi) in the comoving frame.
    """
    res = period_map(problem, ff, z, eps, tol, frame, exact)
    if frame == "comoving":
        return res.eta
    return res.displacement / (eps * z) if eps else res.displacement
