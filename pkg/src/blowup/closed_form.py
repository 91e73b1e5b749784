"""
Closed-form flow factor for the centre (a, b, c, d) = (1, 1, -1/4, 3).

    ff(theta) = K exp(-5/2 A(theta)) / Q(theta)^(1/4)
    Q = -8 sin(t) - 8 sin(3t) - 28 cos(2t) + cos(4t) + 35

with K fixed by ff(alpha) = 1. The phase A is either the continuous
determination atan2(4 sin, 2 cos^2 - 4 sin), which is exp(integral f/g)
exactly, or the principal arctan of the same ratio ("printed" branch), which
jumps where sin(theta) = sqrt(2) - 1. The printed branch is what the
published coefficient tables were evaluated with.
"""
import math

import numpy as np

WORKED_PARAMS = (1.0, 1.0, -0.25, 3.0)
BRANCHES = ("continuous", "printed")
# sin(theta) = sqrt(2) - 1 makes 2 cos^2 - 4 sin vanish.
THETA_JUMP = math.asin(math.sqrt(2.0) - 1.0)


def _quartic(theta):
    return (-8 * np.sin(theta) - 8 * np.sin(3 * theta) - 28 * np.cos(2 * theta)
            + np.cos(4 * theta) + 35)


def _phase(theta, branch):
    num = 4 * np.sin(theta)
    den = 2 * np.cos(theta) ** 2 - 4 * np.sin(theta)
    if branch == "continuous":
        return np.arctan2(num, den)
    with np.errstate(divide="ignore"):
        return np.arctan(num / den)


class ClosedFormFlowFactor:
    err_bound = 0.0

    def __init__(self, params, alpha, branch="continuous"):
        if tuple(params.as_tuple()) != WORKED_PARAMS:
            raise ValueError(f"closed form only holds for params {WORKED_PARAMS}, got {params.as_tuple()}")
        if branch not in BRANCHES:
            raise ValueError(f"branch must be one of {BRANCHES}, got {branch!r}")
        self.params = params
        self.base_angle = float(alpha)
        self.branch = branch
        self.domain = (-math.inf, math.inf)
        self._log_k = -self._log_shape(self.base_angle)

    def _log_shape(self, theta):
        return -2.5 * _phase(theta, self.branch) - 0.25 * np.log(_quartic(theta))

    def w(self, theta):
        return self._log_shape(theta) + self._log_k

    def value(self, theta):
        return np.exp(self.w(theta))

    __call__ = value

    @property
    def leading_constant(self):
        return math.exp(self._log_k)

    def breakpoints_in(self, a, b):
        if self.branch == "continuous":
            return []
        out = []
        for k in range(math.floor(a / (2 * math.pi)) - 1, math.ceil(b / (2 * math.pi)) + 1):
            for t in (THETA_JUMP, math.pi - THETA_JUMP):
                t += 2 * math.pi * k
                if a < t < b:
                    out.append(t)
        return sorted(out)

    @property
    def breakpoints(self):
        return tuple(self.breakpoints_in(self.base_angle, self.base_angle + 2 * math.pi))
