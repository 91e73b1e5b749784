import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .descartes import descartes_bound

logger = logging.getLogger(__name__)

GRID_POINTS = 512
MAX_BISECTIONS = 200
AUTO = "auto"


@dataclass(frozen=True)
class RootRecord:
    z_star: float
    bracket: tuple
    h_deriv: float
    simple: bool


@dataclass(frozen=True)
class RootReport:
    roots: list
    descartes_bound: int
    search_interval: tuple
    tolerance: float
    suspected_multiple: list = field(default_factory=list)

    @property
    def simple_roots(self):
        return [rec for rec in self.roots if rec.simple]

    @property
    def bound_attained(self):
        return len(self.roots) >= self.descartes_bound

    def rows(self):
        return [{"z_star": rec.z_star, "h_deriv": rec.h_deriv, "simple": rec.simple}
                for rec in self.roots]


def cauchy_bound(poly):
    terms = poly.nonzero()
    lead = terms[-1][1]
    rest = [abs(c) for _, c in terms[:-1]]
    return 1.0 + (max(rest) / abs(lead) if rest else 0.0)


def search_grid(z_min, z_max, n=GRID_POINTS):
    """Union of n uniform and n log-spaced points on [z_min, z_max]."""
    grid = np.concatenate([np.linspace(z_min, z_max, n), np.geomspace(z_min, z_max, n)])
    return np.unique(grid)


def local_scale(poly, z):
    """Largest |c_n| z^(n-1): the size h'(z) is compared against."""
    return max(abs(c) * z ** (n - 1) for n, c in poly.nonzero())


def bisect_sign_change(poly, lo, hi, tol):
    f_lo, f_hi = poly(lo), poly(hi)
    if not f_lo * f_hi < 0:
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    for _ in range(MAX_BISECTIONS):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = poly(mid)
        if f_mid == 0.0:
            return mid, (lo, hi)
        if f_lo * f_mid < 0:
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi), (lo, hi)


def isolate_positive_roots(poly, z_max=AUTO, tol=1e-12, simplicity_floor=1e-8):
    """
    Positive roots of a sparse polynomial by sign changes on a hybrid
    uniform/log grid, refined by bisection to width tol.
    """
    if poly.is_zero():
        logger.warning("zero averaged polynomial: every z is a root, nothing to isolate")
        return RootReport([], 0, (tol, 0.0), tol)
    bound = descartes_bound(poly)
    if z_max == AUTO or z_max is None:
        z_max = cauchy_bound(poly)
    z_max = float(z_max)
    if z_max <= tol:
        raise ValueError(f"z_max must exceed tol, got {z_max}")

    grid = search_grid(tol, z_max)
    values = poly(grid)
    signs = np.sign(values)

    roots, suspected = [], []
    k = 0
    while k < len(grid) - 1:
        if signs[k] * signs[k + 1] < 0:
            z_star, bracket = bisect_sign_change(poly, grid[k], grid[k + 1], tol)
            roots.append(_annotate(poly, z_star, bracket, simplicity_floor))
        elif signs[k + 1] == 0 and 0 < k + 1 < len(grid) - 1:
            lo, hi = grid[k], grid[k + 2]
            if signs[k] * signs[k + 2] < 0:
                roots.append(_annotate(poly, float(grid[k + 1]), (float(lo), float(hi)), simplicity_floor))
            else:
                suspected.append(float(grid[k + 1]))
            k += 1
        k += 1

    suspected.extend(_touching_minima(poly, grid, values, tol))
    roots.sort(key=lambda rec: rec.z_star)
    if len(roots) < bound:
        logger.info("found %d positive roots, Descartes bound %d not attained", len(roots), bound)
    return RootReport(roots, bound, (tol, z_max), tol, sorted(suspected))


def _annotate(poly, z_star, bracket, simplicity_floor):
    deriv = poly.derivative(z_star)
    simple = abs(deriv) > simplicity_floor * local_scale(poly, z_star)
    if not simple:
        logger.warning("root z* = %.12g fails the simplicity test: h'(z*) = %.3e", z_star, deriv)
    return RootRecord(float(z_star), (float(bracket[0]), float(bracket[1])), float(deriv), bool(simple))


def _touching_minima(poly, grid, values, tol):
    """Local minima of |h| that reach zero without a sign change."""
    out = []
    absv = np.abs(values)
    for k in range(1, len(grid) - 1):
        if values[k - 1] * values[k + 1] <= 0 or values[k] == 0:
            continue
        if not (absv[k] <= absv[k - 1] and absv[k] <= absv[k + 1]):
            continue
        if np.sign(values[k]) != np.sign(values[k - 1]):
            continue
        res = minimize_scalar(lambda z: abs(poly(z)), bounds=(grid[k - 1], grid[k + 1]),
                              method="bounded", options={"xatol": tol})
        if abs(res.fun) <= tol * max(1.0, local_scale(poly, res.x) * res.x):
            out.append(float(res.x))
    return out
