"""
Error hierarchy for the averaging pipeline.

Every exception carries a ``stage`` tag; the CLI maps the tag to its exit code.
"""

EXIT_CODES = {
    "validation": 2,
    "averaging": 3,
    "roots": 4,
    "simulation": 5,
}


class AvgCyclesError(Exception):
    stage = "validation"

    @property
    def exit_code(self):
        return EXIT_CODES.get(self.stage, 1)


# ─────────────────────────────────────────────────────────────────────────────
# poly-core / validation
# ─────────────────────────────────────────────────────────────────────────────
class ParseError(AvgCyclesError):
    pass


class DuplicateTerm(ParseError):
    pass


class DegreeExceeded(AvgCyclesError):
    pass


class CenterConditionViolated(AvgCyclesError):
    def __init__(self, discriminant):
        self.discriminant = discriminant
        super().__init__(
            f"(d-2a)^2 + 8bc = {discriminant!r} is not negative; the origin is not a center"
        )


class GNearZero(AvgCyclesError):
    def __init__(self, minimum, theta, floor):
        self.minimum = minimum
        self.theta = theta
        self.floor = floor
        super().__init__(
            f"min |g| = {minimum:.3e} at theta = {theta:.6f} is below floor {floor:.1e}"
        )


class DomainExceeded(AvgCyclesError):
    pass


# ─────────────────────────────────────────────────────────────────────────────
# averaging
# ─────────────────────────────────────────────────────────────────────────────
class QuadratureFailure(AvgCyclesError):
    stage = "averaging"

    def __init__(self, message, interval=None):
        self.interval = interval
        if interval is not None:
            message = f"{message} on [{interval[0]:.6f}, {interval[1]:.6f}]"
        super().__init__(message)


class IndexOutOfRange(AvgCyclesError, ValueError):
    stage = "averaging"


class SymmetryViolation(AvgCyclesError):
    stage = "averaging"


# ─────────────────────────────────────────────────────────────────────────────
# roots
# ─────────────────────────────────────────────────────────────────────────────
class ZeroPolynomial(AvgCyclesError):
    stage = "roots"


# ─────────────────────────────────────────────────────────────────────────────
# flowsim
# ─────────────────────────────────────────────────────────────────────────────
class NonpositiveRadius(AvgCyclesError):
    stage = "simulation"


class RadiusCollapse(AvgCyclesError):
    stage = "simulation"


class StepFailure(AvgCyclesError):
    stage = "simulation"
