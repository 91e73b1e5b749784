"""
The perturbed piecewise system in the original (x, y) coordinates.

Crossings of the switching line are located as terminal solve_ivp events on
the dense output, and the branch is switched exactly at the event point.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from ..blowup.weighted_polar import eval_g, weighted_polar_of
from ..core.errors import StepFailure
from ..core.problem import SwitchingLine

logger = logging.getLogger(__name__)

MAX_SWITCHES = 10000
ATOL_FACTOR = 1e-4


def planar_field(t, u, problem, eps, side):
    x, y = u
    params = problem.params
    if side == "+":
        p, q = problem.p_plus, problem.q_plus
    else:
        p, q = problem.p_minus, problem.q_minus
    return [
        params.a * x * x + params.b * y + eps * p(x, y),
        params.c * x ** 3 + params.d * x * y + eps * q(x, y),
    ]


def _switch_index(line):
    return 0 if line is SwitchingLine.VERTICAL_X0 else 1


def _initial_side(problem, u0, eps, time_sign):
    k = _switch_index(problem.line)
    if u0[k] > 0:
        return "+"
    if u0[k] < 0:
        return "-"
    # On the line: follow the + field if it points into the closed + half-plane.
    velocity = planar_field(0.0, u0, problem, eps, "+")[k] * time_sign
    return "+" if velocity >= 0 else "-"


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    switch_times: list = field(default_factory=list)

    def rows(self):
        return [{"t": float(t), "x": float(x), "y": float(y)} for t, x, y in zip(self.t, self.x, self.y)]

    def weighted_polar(self):
        return weighted_polar_of(self.x, self.y)


def _integrate_switched(problem, u0, eps, t_end, tol, stop_after=None):
    k = _switch_index(problem.line)
    time_sign = 1.0 if t_end >= 0 else -1.0
    side = _initial_side(problem, u0, eps, time_sign)

    ts, us, switches = [np.array([0.0])], [np.asarray(u0, dtype=float)[:, None]], []
    t0, u = 0.0, np.asarray(u0, dtype=float)
    while True:
        def crossing(t, state, *args):
            return state[k]
        crossing.terminal = True
        crossing.direction = -1 if side == "+" else 1

        sol = solve_ivp(planar_field, (t0, t_end), u, method="DOP853", rtol=tol,
                        atol=tol * ATOL_FACTOR, events=crossing, args=(problem, eps, side))
        if sol.status == -1:
            raise StepFailure(f"planar integration failed at t = {sol.t[-1]:.6g}: {sol.message}")
        ts.append(sol.t[1:])
        us.append(sol.y[:, 1:])
        if sol.status == 0:
            break

        t0 = float(sol.t_events[0][0])
        u = np.array(sol.y_events[0][0], dtype=float)
        u[k] = 0.0
        switches.append(t0)
        logger.debug("switch %d at t = %.12g, state = (%.6g, %.6g)", len(switches), t0, *u)
        if stop_after is not None and len(switches) >= stop_after:
            break
        if len(switches) > MAX_SWITCHES:
            raise StepFailure(f"more than {MAX_SWITCHES} switching events")
        side = "-" if side == "+" else "+"

    t = np.concatenate(ts)
    xy = np.concatenate(us, axis=1)
    return Trajectory(t, xy[0], xy[1], switches), u


def cartesian_orbit(problem, x0, y0, eps, t_max, tol=1e-12):
    """(t, x, y) samples from (x0, y0) to t = t_max; negative t_max integrates backward."""
    if x0 == 0 and y0 == 0:
        raise ValueError("the origin is an equilibrium; start elsewhere")
    traj, _ = _integrate_switched(problem, (x0, y0), eps, t_max, tol)
    return traj


@dataclass(frozen=True)
class ReturnResult:
    radius: float
    time: float
    switch_times: tuple


def cartesian_return_radius(problem, z, eps, tol=1e-12, t_limit=1e8):
    """
    Weighted radius at which the orbit through the point of the ray
    theta = alpha at radius z meets that ray again after one turn of theta.

    Time runs in whichever direction makes theta increase (the sign of g).
    """
    alpha = problem.line.base_angle
    start = (z * math.cos(alpha), z * z * math.sin(alpha))
    if problem.line is SwitchingLine.VERTICAL_X0:
        start = (0.0, -z * z)
    time_sign = 1.0 if eval_g(problem.params, alpha) > 0 else -1.0
    traj, u_end = _integrate_switched(problem, start, eps, time_sign * t_limit, tol, stop_after=2)
    if len(traj.switch_times) < 2:
        raise StepFailure(f"orbit from z = {z} did not return within |t| <= {t_limit:g}")
    radius, _ = weighted_polar_of(u_end[0], u_end[1])
    return ReturnResult(float(radius), traj.switch_times[-1], tuple(traj.switch_times))
