import logging
from dataclasses import asdict, dataclass, field

from scipy.optimize import brentq

from ..core.errors import RadiusCollapse, StepFailure
from ..core.parallel import parallel_map
from .transformed import period_map, scaled_residual

logger = logging.getLogger(__name__)

VERIFIED = "VERIFIED"
UNVERIFIED = "UNVERIFIED"
# Upper bound on |z_hat(eps2) - z*| / |z_hat(eps1) - z*|. A decade ladder gives
# about 1/10 when z_hat converges linearly in eps and about 1/100 when the
# first-order shift happens to vanish.
MAX_RATIO = 1.0 / 3.0


@dataclass(frozen=True)
class VerificationConfig:
    epsilons: tuple = (1e-3, 1e-4)
    integrator_tol: float = 1e-12
    bisection_tol: float = 1e-12
    capture_window: float = 50.0
    search_fraction: float = 0.25
    frame: str = "comoving"
    exact: bool = False

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        object.__setattr__(self, "epsilons", eps)
        if not eps or any(e <= 0 for e in eps):
            raise ValueError(f"epsilons must be positive, got {eps}")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError(f"epsilons must be strictly decreasing, got {eps}")
        for name in ("integrator_tol", "bisection_tol", "capture_window", "search_fraction"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def from_settings(cls, settings, **overrides):
        base = dict(
            epsilons=settings.epsilons,
            integrator_tol=settings.integrator_tol,
            bisection_tol=settings.bisection_tol,
            capture_window=settings.capture_window,
            search_fraction=settings.search_fraction,
        )
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)


@dataclass(frozen=True)
class FixedPointSample:
    eps: float
    z_hat: float = float("nan")
    residual: float = float("nan")
    drift: float = float("nan")
    within_capture: bool = False
    bracketed: bool = False
    window: tuple = ()
    failure: str = ""


@dataclass(frozen=True)
class RootVerification:
    z_star: float
    samples: list
    ratios: list
    status: str


@dataclass(frozen=True)
class CycleReport:
    records: list = field(default_factory=list)
    config: VerificationConfig = field(default_factory=VerificationConfig)

    @property
    def count_verified(self):
        return sum(1 for rec in self.records if rec.status == VERIFIED)

    def to_dict(self):
        return {
            "count_verified": self.count_verified,
            "config": asdict(self.config),
            "records": [asdict(rec) for rec in self.records],
        }


def search_windows(z_stars, eps, cfg):
    """
    Half-widths: capture window * eps, clipped to search fraction * gap to the
    nearest neighbour so that no window reaches another predicted root.
    """
    out = []
    for k, z in enumerate(z_stars):
        neighbours = [z]  # distance to the origin
        if k > 0:
            neighbours.append(z - z_stars[k - 1])
        if k + 1 < len(z_stars):
            neighbours.append(z_stars[k + 1] - z)
        out.append(min(cfg.capture_window * eps, cfg.search_fraction * min(neighbours)))
    return out


def _locate(task, problem, ff, cfg):
    z_star, eps, half_width = task
    lo, hi = max(z_star - half_width, 0.5 * z_star), z_star + half_width
    fn = lambda z: scaled_residual(problem, ff, z, eps, cfg.integrator_tol, cfg.frame, cfg.exact)
    try:
        f_lo, f_hi = fn(lo), fn(hi)
        if not f_lo * f_hi < 0:
            logger.warning("no sign change of the displacement on [%.10g, %.10g] at eps=%g", lo, hi, eps)
            return FixedPointSample(eps, window=(lo, hi))
        z_hat = brentq(fn, lo, hi, xtol=cfg.bisection_tol)
        residual = abs(period_map(problem, ff, z_hat, eps, cfg.integrator_tol, cfg.frame,
                                  cfg.exact).displacement)
    except (RadiusCollapse, StepFailure) as exc:
        logger.warning("return map failed near z* = %.10g at eps=%g: %s", z_star, eps, exc)
        return FixedPointSample(eps, window=(lo, hi), failure=str(exc))
    drift = abs(z_hat - z_star) / eps
    return FixedPointSample(eps, z_hat, residual, drift, drift <= cfg.capture_window, True, (lo, hi))


def convergence_ratios(z_star, samples):
    out = []
    for first, second in zip(samples, samples[1:]):
        d1, d2 = abs(first.z_hat - z_star), abs(second.z_hat - z_star)
        out.append(d2 / d1 if d1 > 0 else float("nan"))
    return out


def find_fixed_points(problem, ff, predicted, cfg, threads=1):
    """
    Return-map fixed points near each predicted root, at every eps of the ladder.

    A root is VERIFIED when at each eps a fixed point is bracketed within
    capture_window * eps of z* with residual within the bisection tolerance
    and, for ladders of two or more values, each successive drift ratio is
    at most MAX_RATIO.
    """
    roots = [rec for rec in predicted.roots if rec.simple]
    if len(roots) < len(predicted.roots):
        logger.warning("%d non-simple roots excluded from verification", len(predicted.roots) - len(roots))
    z_stars = [rec.z_star for rec in roots]
    if not z_stars:
        return CycleReport([], cfg)

    tasks = []
    for eps in cfg.epsilons:
        tasks.extend((z, eps, w) for z, w in zip(z_stars, search_windows(z_stars, eps, cfg)))
    samples = parallel_map(_locate, tasks, threads, problem=problem, ff=ff, cfg=cfg)

    records = []
    n_eps = len(cfg.epsilons)
    for k, z_star in enumerate(z_stars):
        mine = [samples[e * len(z_stars) + k] for e in range(n_eps)]
        ok = all(s.bracketed and s.within_capture and s.residual <= cfg.bisection_tol for s in mine)
        ratios = convergence_ratios(z_star, mine) if ok else []
        if ok and ratios:
            ok = all(0.0 <= r <= MAX_RATIO for r in ratios)
        status = VERIFIED if ok else UNVERIFIED
        if not ok:
            logger.warning("root z* = %.10g is UNVERIFIED", z_star)
        records.append(RootVerification(z_star, mine, ratios, status))
    return CycleReport(records, cfg)

