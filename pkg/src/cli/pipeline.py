import logging
import os

from ..averaging.coefficients import assemble_h, compute_table, solve_targets
from ..blowup.closed_form import ClosedFormFlowFactor
from ..blowup.flow_factor import FlowFactor
from ..blowup.weighted_polar import locate_g_minimum
from ..core.errors import GNearZero, ParseError
from ..core.problem import parse_document
from ..flowsim.fixed_points import VerificationConfig, find_fixed_points
from ..roots.isolation import isolate_positive_roots
from .manifest import RunManifest

logger = logging.getLogger(__name__)

VERIFICATION_KEYS = ("epsilons", "integrator_tol", "bisection_tol", "capture_window", "search_fraction")


def resolve_settings(base, document_verification, cli_overrides):
    """Defaults < document 'verification' block < command-line flags."""
    doc = {}
    for key, value in document_verification.items():
        if key not in VERIFICATION_KEYS:
            raise ParseError(f"unknown verification key {key!r}")
        doc[key] = tuple(float(v) for v in value) if key == "epsilons" else float(value)
    return base.updated(**doc).updated(**cli_overrides)


class Pipeline:
    """
    One problem carried through the stages, each cached and timed in the manifest.

    With printed_branch the coefficient stages use the principal-arctan closed
    form; the return-map stages always use the numerically built flow factor.
    """

    def __init__(self, document, settings, manifest, out_dir, printed_branch=False):
        self.document = document
        self.settings = settings
        self.manifest = manifest
        self.out_dir = out_dir
        self.printed_branch = printed_branch
        self._cache = {}
        manifest.tolerances = {
            "quad_tol": settings.quad_tol,
            "flow_tol": settings.flow_tol,
            "g_floor": settings.g_floor,
            "root_tol": settings.root_tol,
            "integrator_tol": settings.integrator_tol,
            "bisection_tol": settings.bisection_tol,
            "epsilons": list(settings.epsilons),
        }

    @classmethod
    def from_bytes(cls, config_bytes, settings, manifest, out_dir, cli_overrides=None, printed_branch=False):
        document = parse_document(config_bytes)
        settings = resolve_settings(settings, document.verification, cli_overrides or {})
        return cls(document, settings, manifest, out_dir, printed_branch)

    @classmethod
    def from_path(cls, path, settings, manifest, out_dir, cli_overrides=None, printed_branch=False):
        try:
            with open(path, "rb") as f:
                raw = f.read()
        except OSError as exc:
            raise ParseError(f"cannot read {path}: {exc}") from exc
        manifest.config_path = path
        return cls.from_bytes(raw, settings, manifest, out_dir, cli_overrides, printed_branch)

    def path(self, name):
        return os.path.join(self.out_dir, name)

    def _cached(self, key, stage, build):
        if key not in self._cache:
            with self.manifest.stage(stage):
                self._cache[key] = build()
        return self._cache[key]

    # ─────────────────────────────────────────────────────────────────────────
    # Stages
    # ─────────────────────────────────────────────────────────────────────────
    @property
    def params(self):
        return self.document.problem.params

    def g_minimum(self):
        def build():
            minimum, theta = locate_g_minimum(self.params, self.settings.g_samples)
            if minimum < self.settings.g_floor:
                raise GNearZero(minimum, theta, self.settings.g_floor)
            return minimum, theta
        return self._cached("g_min", "validate", build)

    def flow_factor(self):
        def build():
            self.g_minimum()
            return FlowFactor(self.params, self.document.problem.line.base_angle, self.settings.flow_tol)
        return self._cached("ff", "flow_factor", build)

    def coefficient_flow_factor(self):
        if not self.printed_branch:
            return self.flow_factor()

        def build():
            try:
                return ClosedFormFlowFactor(self.params, self.document.problem.line.base_angle, "printed")
            except ValueError as exc:
                raise ParseError(f"--printed-branch: {exc}") from exc
        return self._cached("ff_printed", "flow_factor", build)

    def problem(self):
        """The document's problem with every target coefficient solved for."""
        def build():
            if not self.document.targets:
                return self.document.problem
            return solve_targets(self.document.problem, self.coefficient_flow_factor(),
                                 self.document.targets, self.settings.quad_tol)
        return self._cached("problem", "targets", build)

    def table(self):
        return self._cached("table", "coefficients", lambda: compute_table(
            self.problem(), self.coefficient_flow_factor(), self.settings.quad_tol,
            self.settings.fast_symmetry, self.settings.threads))

    def averaged(self):
        return self._cached("averaged", "averaged", lambda: assemble_h(self.table()))

    def roots(self):
        return self._cached("roots", "roots", lambda: isolate_positive_roots(
            self.averaged(), self.settings.z_max, self.settings.root_tol, self.settings.simplicity_floor))

    def cycles(self, exact=False):
        if self.printed_branch:
            raise ParseError("return-map verification is not available with --printed-branch")
        cfg = VerificationConfig.from_settings(self.settings, exact=exact)
        return self._cached("cycles", "verify", lambda: find_fixed_points(
            self.problem(), self.flow_factor(), self.roots(), cfg, self.settings.threads))


def new_manifest(subcommand):
    return RunManifest(subcommand=subcommand)
