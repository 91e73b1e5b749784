"""
Weighted polar blow-up x = r cos(theta), y = r^2 sin(theta) of the centre
x' = a x^2 + b y, y' = c x^3 + d x y.

In these coordinates the unperturbed orbits satisfy dr/dtheta = r f/g with
    M = a cos^2 + b sin,           N = c cos^3 + d cos sin,
    f = cos M + sin N,             g = cos N - 2 sin M.
All evaluators accept scalars or numpy arrays.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from ..core.errors import GNearZero
from ..core.problem import branch_polys

logger = logging.getLogger(__name__)

WEIGHTS = (1, 2)
PERIOD = 2 * math.pi


@dataclass(frozen=True)
class BlowupSpec:
    base_angle: float
    weights: tuple = WEIGHTS
    period: float = PERIOD

    def __post_init__(self):
        if tuple(self.weights) != WEIGHTS:
            raise ValueError(f"weights must be {WEIGHTS}, got {self.weights}")
        if self.base_angle not in (-math.pi / 2, 0.0):
            raise ValueError(f"base angle must be -pi/2 or 0, got {self.base_angle}")

    @classmethod
    def for_line(cls, line):
        return cls(base_angle=line.base_angle)

    def to_cartesian(self, r, theta):
        return r * np.cos(theta), r ** 2 * np.sin(theta)


def eval_M(params, theta):
    return params.a * np.cos(theta) ** 2 + params.b * np.sin(theta)


def eval_N(params, theta):
    c = np.cos(theta)
    return params.c * c ** 3 + params.d * c * np.sin(theta)


def eval_f(params, theta):
    return np.cos(theta) * eval_M(params, theta) + np.sin(theta) * eval_N(params, theta)


def eval_g(params, theta):
    return np.cos(theta) * eval_N(params, theta) - 2.0 * np.sin(theta) * eval_M(params, theta)


def f_over_g(params, theta):
    return eval_f(params, theta) / eval_g(params, theta)


# ─────────────────────────────────────────────────────────────────────────────
# Non-vanishing guard on g
# ─────────────────────────────────────────────────────────────────────────────
def locate_g_minimum(params, n_samples=4096, n_refine=5):
    """(min |g|, argmin) from a uniform grid refined by bounded golden-section search."""
    if n_samples < 256:
        raise ValueError(f"n_samples must be >= 256, got {n_samples}")
    grid = np.linspace(0.0, PERIOD, n_samples, endpoint=False)
    absg = np.abs(eval_g(params, grid))
    step = PERIOD / n_samples

    best_val = float(absg.min())
    best_theta = float(grid[absg.argmin()])
    for k in np.argsort(absg)[:n_refine]:
        centre = grid[k]
        res = minimize_scalar(
            lambda t: abs(eval_g(params, t)),
            bounds=(centre - step, centre + step),
            method="bounded",
            options={"xatol": 1e-12},
        )
        if res.fun < best_val:
            best_val, best_theta = float(res.fun), float(res.x) % PERIOD
    return best_val, best_theta


def check_g_nonvanishing(params, n_samples=4096, floor=1e-8):
    if floor <= 0:
        raise ValueError(f"floor must be positive, got {floor}")
    minimum, theta = locate_g_minimum(params, n_samples)
    logger.debug("min |g| = %.6g at theta = %.6f", minimum, theta)
    if minimum < floor:
        raise GNearZero(minimum, theta, floor)
    return minimum


# ─────────────────────────────────────────────────────────────────────────────
# First-order perturbation term of dr/dtheta
# ─────────────────────────────────────────────────────────────────────────────
def eval_F0(params, theta, r):
    return f_over_g(params, theta) * r


def eval_F1(problem, theta, r, side=None):
    """(1 + sin^2) / (r^2 g^2) [r N p - M q], with p, q taken on the active branch."""
    params = problem.params
    p, q = branch_polys(problem, theta, side)
    s = np.sin(theta)
    num = r * eval_N(params, theta) * p.eval_weighted_polar(r, theta)
    num = num - eval_M(params, theta) * q.eval_weighted_polar(r, theta)
    return (1.0 + s * s) * num / (r * r * eval_g(params, theta) ** 2)


def perturbation_rate(problem, theta, r, eps, exact=False, side=None):
    """
    (dr/dtheta - F0) / eps.

    First order this is F1. The exact blow-up of the planar field gives
    (A g - r f B) / (g (r g + eps B)) with A = cos p + sin q / r and
    B = (cos q - 2 r sin p) / r^2, which tends to F1 as eps -> 0.
    """
    if not exact:
        return eval_F1(problem, theta, r, side)
    params = problem.params
    p, q = branch_polys(problem, theta, side)
    c, s = np.cos(theta), np.sin(theta)
    pv = p.eval_weighted_polar(r, theta)
    qv = q.eval_weighted_polar(r, theta)
    g = eval_g(params, theta)
    big_a = c * pv + s * qv / r
    big_b = (c * qv - 2.0 * r * s * pv) / (r * r)
    return (big_a * g - r * eval_f(params, theta) * big_b) / (g * (r * g + eps * big_b))


def weighted_polar_of(x, y):
    """(r, theta) with x = r cos(theta), y = r^2 sin(theta), theta in (-pi, pi]."""
    r2 = 0.5 * (x * x + np.sqrt(x ** 4 + 4.0 * y * y))
    r = np.sqrt(r2)
    return r, np.arctan2(y / r2, x / r)
