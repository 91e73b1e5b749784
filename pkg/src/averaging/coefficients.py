import logging
import math
from dataclasses import dataclass, field

from scipy.integrate import quad

from ..blowup.weighted_polar import eval_F1
from ..core.errors import IndexOutOfRange, QuadratureFailure, SymmetryViolation
from ..core.parallel import parallel_map
from ..core.problem import SwitchingLine
from .integrands import check_index_pair, coefficient_pairs, integrand_phi, integrand_psi
from .polynomial import AveragedPolynomial

logger = logging.getLogger(__name__)

QUAD_LIMIT = 200
QUAD_REL_TOL = 1e-11
SYMMETRY_FACTOR = 10.0


# ─────────────────────────────────────────────────────────────────────────────
# Half-period quadrature
# ─────────────────────────────────────────────────────────────────────────────
def half_periods(line):
    """((+ half), (- half)) angle intervals for the switching line."""
    alpha = line.base_angle
    return (alpha, alpha + math.pi), (alpha + math.pi, alpha + 2 * math.pi)


def integrate_half(fn, a, b, ff, tol, rel_tol=QUAD_REL_TOL, limit=QUAD_LIMIT):
    """
    Adaptive Gauss-Kronrod integral of fn over [a, b] split at the quarter
    period and at any breakpoints of the flow factor. Returns (value, err).
    """
    points = sorted({0.5 * (a + b), *ff.breakpoints_in(a, b)})
    result = quad(fn, a, b, points=points, epsabs=tol, epsrel=rel_tol, limit=limit, full_output=1)
    value, err = result[0], result[1]
    if len(result) > 3:
        message = result[3]
        if "roundoff" in message:
            logger.warning("quadrature on [%.4f, %.4f] hit roundoff: err=%.2e", a, b, err)
        else:
            raise QuadratureFailure(message.strip().splitlines()[0], interval=(a, b))
    return value, err


def phi_integral(problem, ff, i, j, half, tol):
    a, b = half
    return integrate_half(lambda t: integrand_phi(problem, ff, i, j, t), a, b, ff, tol)


def psi_integral(problem, ff, i, j, half, tol):
    a, b = half
    return integrate_half(lambda t: integrand_psi(problem, ff, i, j, t), a, b, ff, tol)


def compute_coefficient(problem, ff, i, j, tol=1e-9):
    """
    k_{i,j} = sum over both halves of  a_{i,j-1} int phi_{i,j} - b_{i-1,j} int psi_{i,j}.

    Coefficients that are absent from the perturbation skip their integral.
    """
    check_index_pair(i, j)
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    plus, minus = half_periods(problem.line)
    value, err = 0.0, 0.0
    for half, p, q in ((plus, problem.p_plus, problem.q_plus),
                       (minus, problem.p_minus, problem.q_minus)):
        a_coef = p.coefficient(i, j - 1) if j >= 1 else 0.0
        b_coef = q.coefficient(i - 1, j) if i >= 1 else 0.0
        if a_coef != 0.0:
            v, e = phi_integral(problem, ff, i, j, half, tol)
            value += a_coef * v
            err += abs(a_coef) * e
        if b_coef != 0.0:
            v, e = psi_integral(problem, ff, i, j, half, tol)
            value -= b_coef * v
            err += abs(b_coef) * e
    return value, err


def response_index(poly_name, i, j):
    """(family, i', j') of the integrand multiplying a perturbation coefficient."""
    if poly_name.startswith("p"):
        return "phi", i, j + 1
    return "psi", i + 1, j


def unit_response(problem, ff, poly_name, i, j, tol=1e-9):
    """
    Constant multiplying one perturbation coefficient in h(z), as (value, err, n).

    The x^i y^j term of p multiplies z^(i+2j+2); that of q multiplies z^(i+2j+1).
    """
    family, ii, jj = response_index(poly_name, i, j)
    plus, minus = half_periods(problem.line)
    half = plus if poly_name.endswith("plus") else minus
    if family == "phi":
        value, err = phi_integral(problem, ff, ii, jj, half, tol)
    else:
        value, err = psi_integral(problem, ff, ii, jj, half, tol)
        value = -value
    return value, err, ii + 2 * jj


def solve_targets(problem, ff, targets, tol=1e-9):
    """Set each targeted perturbation coefficient to target / unit response."""
    for target in targets:
        unit, _, n = unit_response(problem, ff, target.poly_name, target.i, target.j, tol)
        if unit == 0.0:
            raise QuadratureFailure(f"zero unit response for {target.poly_name}{(target.i, target.j)}")
        coef = target.coefficient / unit
        logger.info("%s(%d,%d) -> z^%d: unit response %.10g, coefficient %.10g",
                    target.poly_name, target.i, target.j, n, unit, coef)
        problem = problem.with_coefficient(target.poly_name, target.i, target.j, coef)
    return problem


# ─────────────────────────────────────────────────────────────────────────────
# Coefficient table and averaged polynomial
# ─────────────────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class CoefficientTable:
    line: SwitchingLine
    entries: dict = field(default_factory=dict)
    skipped: frozenset = frozenset()

    def __post_init__(self):
        for (i, j), (_, err) in self.entries.items():
            if i < 0 or j < 0 or not (1 <= i + j <= 4):
                raise IndexOutOfRange(f"table key ({i}, {j}) outside 1 <= i+j <= 4")
            if err < 0:
                raise ValueError(f"negative error estimate for ({i}, {j})")

    def value(self, i, j):
        return self.entries[(i, j)][0]

    def error(self, i, j):
        return self.entries[(i, j)][1]

    def rows(self):
        return [{"i": i, "j": j, "value": v, "err": e}
                for (i, j), (v, e) in sorted(self.entries.items())]


def _table_entry(pair, problem, ff, tol):
    return pair, compute_coefficient(problem, ff, pair[0], pair[1], tol)


def compute_table(problem, ff, tol=1e-9, fast_symmetry=False, threads=1):
    """
    All k_{i,j}. For the y = 0 line with fast_symmetry, even-i entries are
    recorded as exact zeros without integrating.
    """
    pairs = coefficient_pairs()
    skipped = set()
    if fast_symmetry and problem.line is SwitchingLine.HORIZONTAL_Y0:
        skipped = {p for p in pairs if p[0] % 2 == 0}
    todo = [p for p in pairs if p not in skipped]
    results = parallel_map(_table_entry, todo, threads, problem=problem, ff=ff, tol=tol)
    entries = dict(results)
    entries.update({p: (0.0, 0.0) for p in skipped})
    return CoefficientTable(problem.line, entries, frozenset(skipped))


def assemble_h(table):
    coeffs, provenance, errors = {}, {}, {}
    for (i, j), (value, err) in sorted(table.entries.items(), key=lambda kv: (kv[0][0] + 2 * kv[0][1], kv[0])):
        n = i + 2 * j
        coeffs[n] = coeffs.get(n, 0.0) + value
        errors[n] = errors.get(n, 0.0) + err
        provenance.setdefault(n, []).append((i, j))

    if table.line is SwitchingLine.HORIZONTAL_Y0:
        for n in [n for n in coeffs if n % 2 == 0]:
            if abs(coeffs[n]) > SYMMETRY_FACTOR * errors[n]:
                raise SymmetryViolation(
                    f"even exponent {n} has coefficient {coeffs[n]:.3e} "
                    f"above {SYMMETRY_FACTOR:g} x error {errors[n]:.3e}"
                )
            del coeffs[n]
    return AveragedPolynomial(coeffs, provenance, errors)


def h1_direct(problem, ff, z, tol=1e-9):
    """First-order averaged function as one integral of F1(s, ff(s) z) / ff(s) per half period."""
    if z <= 0:
        raise ValueError(f"z must be positive, got {z}")
    total = 0.0
    for a, b in half_periods(problem.line):
        v, _ = integrate_half(lambda t: eval_F1(problem, t, ff.value(t) * z) / ff.value(t), a, b, ff, tol)
        total += v
    return total


def even_index_integrals(problem, ff, tol=1e-9):
    """
    Raw phi/psi integrals over both halves for every even i, as rows
    (family, i, j, half, value, err). They vanish on the y = 0 line.
    """
    rows = []
    for i, j in coefficient_pairs():
        if i % 2:
            continue
        for label, half in zip(("+", "-"), half_periods(problem.line)):
            if j >= 1:
                v, e = phi_integral(problem, ff, i, j, half, tol)
                rows.append(("phi", i, j, label, v, e))
            if i >= 1:
                v, e = psi_integral(problem, ff, i, j, half, tol)
                rows.append(("psi", i, j, label, v, e))
    return rows
