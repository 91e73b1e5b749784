"""
Flow factor of the unperturbed blown-up equation.

The unperturbed solution through r(alpha) = z is r0(theta; z) = ff(theta) z with
ff(theta) = exp(w(theta)) and w(theta) = integral of f/g from alpha to theta.
w is built once as piecewise Chebyshev interpolants of f/g, integrated
panel by panel, so point evaluation inside the averaging integrals is cheap.
"""
import bisect
import logging
import math

import numpy as np
from numpy.polynomial import Chebyshev

from ..core.errors import DomainExceeded, QuadratureFailure
from .weighted_polar import check_g_nonvanishing, f_over_g

logger = logging.getLogger(__name__)

PANEL_DEGREE = 24
MAX_PANELS = 4096
ROUNDOFF_FACTOR = 64
# Points beyond the domain edge tolerated as rounding of alpha + k*pi.
EDGE_SLACK = 1e-12


class FlowFactor:
    """
    Checkpointed exp(integral f/g) on [alpha - pi, alpha + 3 pi].

    checkpoints is the ordered list of (theta, w) at panel edges; it contains
    every multiple of pi/2 offset from alpha, hence every switching angle.
    err_bound is the accumulated tail estimate of the panel interpolants.
    """

    breakpoints = ()

    def __init__(self, params, alpha, tol=1e-12, degree=PANEL_DEGREE, max_panels=MAX_PANELS):
        if tol <= 0:
            raise ValueError(f"tol must be positive, got {tol}")
        self.params = params
        self.base_angle = float(alpha)
        self.tol = tol
        self.domain = (self.base_angle - math.pi, self.base_angle + 3 * math.pi)

        panels, self.err_bound = self._fit_panels(degree, max_panels)
        self._edges = [a for a, _, _ in panels] + [panels[-1][1]]
        self._antiderivs = [cheb.integ(lbnd=a) for a, _, cheb in panels]
        self._offsets = self._accumulate(panels)
        w_end = self._offsets[-1] + float(self._antiderivs[-1](self._edges[-1]))
        self.checkpoints = list(zip(self._edges, self._offsets + [w_end]))
        logger.debug(
            "flow factor alpha=%.4f: %d panels, err_bound=%.2e",
            self.base_angle, len(panels), self.err_bound,
        )

    # ─────────────────────────────────────────────────────────────────────────
    # Build
    # ─────────────────────────────────────────────────────────────────────────
    def _fit_panels(self, degree, max_panels):
        lo, hi = self.domain
        width_total = hi - lo
        breaks = [self.base_angle + k * math.pi / 2 for k in range(-2, 7)]
        fn = lambda t: f_over_g(self.params, t)

        panels, err = [], 0.0
        for a0, b0 in zip(breaks[:-1], breaks[1:]):
            stack = [(a0, b0)]
            while stack:
                a, b = stack.pop()
                cheb = Chebyshev.interpolate(fn, degree, domain=[a, b])
                coef = np.abs(cheb.coef)
                tail = float(coef[-4:].max())
                floor = max(self.tol / width_total, ROUNDOFF_FACTOR * np.finfo(float).eps * coef.max())
                est = tail * (b - a)
                if tail <= floor:
                    panels.append((a, b, cheb))
                    err += est
                else:
                    mid = 0.5 * (a + b)
                    stack.extend([(mid, b), (a, mid)])
                if len(panels) + len(stack) > max_panels:
                    raise QuadratureFailure(
                        f"flow factor needs more than {max_panels} panels for tol {self.tol:.1e}",
                        interval=(a0, b0),
                    )
        panels.sort(key=lambda item: item[0])
        return panels, err

    def _accumulate(self, panels):
        n = len(panels)
        k0 = self._edges.index(self.base_angle)
        offsets = [0.0] * n
        for k in range(k0 + 1, n):
            offsets[k] = offsets[k - 1] + float(self._antiderivs[k - 1](self._edges[k]))
        for k in range(k0 - 1, -1, -1):
            offsets[k] = offsets[k + 1] - float(self._antiderivs[k](self._edges[k + 1]))
        return offsets

    # ─────────────────────────────────────────────────────────────────────────
    # Evaluation
    # ─────────────────────────────────────────────────────────────────────────
    def _check_domain(self, theta):
        lo, hi = self.domain
        if not (lo - EDGE_SLACK <= theta <= hi + EDGE_SLACK):
            raise DomainExceeded(f"theta = {theta!r} outside flow factor domain [{lo:.6f}, {hi:.6f}]")

    def w(self, theta):
        if np.ndim(theta):
            return np.array([self.w(float(t)) for t in np.ravel(theta)]).reshape(np.shape(theta))
        theta = float(theta)
        self._check_domain(theta)
        k = bisect.bisect_right(self._edges, theta) - 1
        k = min(max(k, 0), len(self._antiderivs) - 1)
        if theta == self._edges[k]:
            return self._offsets[k]
        return self._offsets[k] + float(self._antiderivs[k](theta))

    def value(self, theta):
        return np.exp(self.w(theta))

    __call__ = value

    def breakpoints_in(self, a, b):
        return []

    def periodicity_defect(self):
        return abs(self.value(self.base_angle + 2 * math.pi) - 1.0)

    def rows(self):
        return [{"theta": t, "w": w, "value": math.exp(w)} for t, w in self.checkpoints]


def build_flow_factor(params, alpha, tol=1e-12, g_samples=4096, g_floor=1e-8):
    check_g_nonvanishing(params, g_samples, g_floor)
    return FlowFactor(params, alpha, tol)


def flow_factor_value(ff, theta):
    return ff.value(theta)
