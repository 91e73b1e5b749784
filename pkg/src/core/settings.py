import os
from dataclasses import dataclass, replace

THREADS_ENV = "AVGCYCLES_THREADS"


@dataclass(frozen=True)
class Settings:
    # averaging
    quad_tol: float = 1e-9
    quad_rel_tol: float = 1e-11
    quad_limit: int = 200
    fast_symmetry: bool = False
    # blow-up
    flow_tol: float = 1e-12
    g_floor: float = 1e-8
    g_samples: int = 4096
    # roots
    root_tol: float = 1e-12
    simplicity_floor: float = 1e-8
    z_max: object = "auto"
    # flowsim
    integrator_tol: float = 1e-12
    bisection_tol: float = 1e-12
    epsilons: tuple = (1e-3, 1e-4)
    capture_window: float = 50.0
    search_fraction: float = 0.25
    # execution
    threads: int = 1

    @classmethod
    def from_env(cls, environ=None):
        environ = os.environ if environ is None else environ
        raw = environ.get(THREADS_ENV, "").strip()
        if not raw:
            return cls()
        try:
            threads = max(1, int(raw))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}")
        return cls(threads=min(threads, os.cpu_count() or 1))

    def updated(self, **overrides):
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})
