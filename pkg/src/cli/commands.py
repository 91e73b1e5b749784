import functools
import logging
import sys

import pandas as pd

from ..averaging.coefficients import SYMMETRY_FACTOR, even_index_integrals, unit_response
from ..blowup.closed_form import ClosedFormFlowFactor
from ..core.errors import AvgCyclesError
from ..core.problem import SwitchingLine
from ..flowsim.cartesian import cartesian_orbit
from ..flowsim.fixed_points import VERIFIED
from ..flowsim.transformed import StepLog, period_map
from ..roots.descartes import descartes_bound
from .embedded import EXPECTED, PUBLISHED_CONSTANTS, document_bytes
from .output import write_csv, write_json
from .pipeline import Pipeline, new_manifest

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CRITERIA = 1
REL_TOL = 1e-6
ROOT_TOL = 1e-8
SYMMETRY_TOL = 1e-8
PERIODICITY_TOL = 1e-9


def guarded(fn):
    """Turn pipeline errors into stage-tagged exit codes."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except AvgCyclesError as exc:
            print(f"  [FAIL] {type(exc).__name__}: {exc}", file=sys.stderr)
            return exc.exit_code
    return wrapper


def _finish(pipe):
    pipe.manifest.write(pipe.path("manifest.json"))
    print(f"  [OK] outputs: {', '.join(pipe.manifest.outputs)}")
    return EXIT_OK


def _emit_coeffs(pipe):
    table = pipe.table()
    path = write_csv(pipe.path("coeffs.csv"), ["i", "j", "value", "err"], table.rows())
    pipe.manifest.add_output(path)
    print(f"  [OK] {len(table.entries)} coefficients k_ij -> {path}")


def _emit_averaged(pipe):
    poly = pipe.averaged()
    path = write_csv(pipe.path("averaged.csv"), ["n", "coefficient"], poly.rows())
    pipe.manifest.add_output(path)
    print(f"  [OK] h(z) = z^3 h1(z) with {len(poly.nonzero())} nonzero terms -> {path}")


def _emit_roots(pipe):
    report = pipe.roots()
    path = write_csv(pipe.path("roots.csv"), ["z_star", "h_deriv", "simple"], report.rows())
    pipe.manifest.add_output(path)
    pipe.manifest.summary.update(descartes_bound=report.descartes_bound, n_roots=len(report.roots),
                                 bound_attained=report.bound_attained,
                                 suspected_multiple=report.suspected_multiple)
    gap = "" if report.bound_attained else " (bound not attained)"
    print(f"  [OK] {len(report.roots)} positive roots, Descartes bound {report.descartes_bound}{gap} -> {path}")


def _emit_cycles(pipe, exact=False):
    report = pipe.cycles(exact)
    path = write_json(pipe.path("cycles.json"), report.to_dict())
    pipe.manifest.add_output(path)
    pipe.manifest.summary.update(count_verified=report.count_verified)
    print(f"  [OK] {report.count_verified}/{len(report.records)} predicted cycles verified -> {path}")


# ─────────────────────────────────────────────────────────────────────────────
# Subcommands
# ─────────────────────────────────────────────────────────────────────────────
@guarded
def cmd_validate(config_path, settings, out_dir, overrides=None, dump_flow=None):
    pipe = Pipeline.from_path(config_path, settings, new_manifest("validate"), out_dir, overrides)
    p = pipe.params
    print(f"  [OK] centre (a, b, c, d) = {p.as_tuple()}, discriminant {p.discriminant!r}")
    minimum, theta = pipe.g_minimum()
    print(f"  [OK] min|g| = {minimum!r} at theta = {theta!r}")
    pipe.manifest.summary.update(discriminant=p.discriminant, g_min=minimum, g_argmin=theta)
    if dump_flow:
        ff = pipe.flow_factor()
        pipe.manifest.add_output(write_csv(dump_flow, ["theta", "w", "value"], ff.rows()))
        print(f"  [OK] flow factor checkpoints ({len(ff.checkpoints)}) -> {dump_flow}")
    return _finish(pipe)


@guarded
def cmd_coeffs(config_path, settings, out_dir, overrides=None, printed_branch=False):
    pipe = Pipeline.from_path(config_path, settings, new_manifest("coeffs"), out_dir, overrides,
                              printed_branch=printed_branch)
    _emit_coeffs(pipe)
    return _finish(pipe)


@guarded
def cmd_averaged(config_path, settings, out_dir, overrides=None, printed_branch=False):
    pipe = Pipeline.from_path(config_path, settings, new_manifest("averaged"), out_dir, overrides,
                              printed_branch=printed_branch)
    _emit_coeffs(pipe)
    _emit_averaged(pipe)
    return _finish(pipe)


@guarded
def cmd_roots(config_path, settings, out_dir, overrides=None):
    pipe = Pipeline.from_path(config_path, settings, new_manifest("roots"), out_dir, overrides)
    _emit_averaged(pipe)
    _emit_roots(pipe)
    return _finish(pipe)


@guarded
def cmd_verify(config_path, settings, out_dir, overrides=None, exact=False, step_log=False):
    pipe = Pipeline.from_path(config_path, settings, new_manifest("verify"), out_dir, overrides)
    _emit_roots(pipe)
    _emit_cycles(pipe, exact)
    if step_log:
        _emit_step_logs(pipe, exact)
    return _finish(pipe)


def _emit_step_logs(pipe, exact=False):
    problem, ff = pipe.problem(), pipe.flow_factor()
    for k, rec in enumerate(pipe.roots().roots):
        for eps in pipe.settings.epsilons:
            log = StepLog()
            period_map(problem, ff, rec.z_star, eps, pipe.settings.integrator_tol, exact=exact, step_log=log)
            path = write_csv(pipe.path(f"steps_root{k + 1}_eps{eps:g}.csv"), ["segment", "theta"], log.rows())
            pipe.manifest.add_output(path)


@guarded
def cmd_orbit(config_path, settings, out_dir, x0, y0, eps, t_max, overrides=None):
    pipe = Pipeline.from_path(config_path, settings, new_manifest("orbit"), out_dir, overrides)
    with pipe.manifest.stage("orbit"):
        traj = cartesian_orbit(pipe.problem(), x0, y0, eps, t_max, pipe.settings.integrator_tol)
    path = write_csv(pipe.path("orbit.csv"), ["t", "x", "y"], traj.rows())
    pipe.manifest.add_output(path)
    pipe.manifest.summary.update(switch_times=traj.switch_times)
    print(f"  [OK] {len(traj.t)} samples, {len(traj.switch_times)} switching events -> {path}")
    return _finish(pipe)


@guarded
def cmd_pipeline(config_path, settings, out_dir, overrides=None, skip_verify=False, exact=False):
    pipe = Pipeline.from_path(config_path, settings, new_manifest("pipeline"), out_dir, overrides)
    print("[1/4] COEFFICIENTS")
    _emit_coeffs(pipe)
    print("[2/4] AVERAGED FUNCTION")
    _emit_averaged(pipe)
    print("[3/4] ROOTS")
    _emit_roots(pipe)
    print("[4/4] RETURN-MAP VERIFICATION")
    if skip_verify:
        print("  [--] skipped")
    else:
        _emit_cycles(pipe, exact)
    return _finish(pipe)


# ─────────────────────────────────────────────────────────────────────────────
# Reproduction of the two worked examples
# ─────────────────────────────────────────────────────────────────────────────
def _row(criterion, expected, observed, passed):
    status = "INFO" if passed is None else ("PASS" if passed else "FAIL")
    return {"criterion": criterion, "expected": expected, "observed": observed, "status": status}


def reproduce_rows(pipe, which, skip_verify=False):
    expected = EXPECTED[which]
    rows = []

    ff = pipe.flow_factor()
    defect = ff.periodicity_defect()
    rows.append(_row("flow factor periodicity", f"< {PERIODICITY_TOL:g}", f"{defect:.3e}",
                     defect < PERIODICITY_TOL))

    poly = pipe.averaged()
    for n, target in expected["coefficients"].items():
        got = poly.coefficient(n)
        rows.append(_row(f"coefficient z^{n}", target, repr(float(got)),
                         abs(got - target) <= REL_TOL * abs(target)))

    bound = descartes_bound(poly)
    rows.append(_row("Descartes bound", expected["descartes"], bound, bound == expected["descartes"]))

    report = pipe.roots()
    found = [rec.z_star for rec in report.roots]
    ok = len(found) == len(expected["roots"]) and all(
        abs(a - b) <= ROOT_TOL for a, b in zip(found, expected["roots"]))
    rows.append(_row("positive roots", [round(z, 6) for z in expected["roots"]],
                     [round(z, 10) for z in found], ok))
    rows.append(_row("all roots simple", True, all(rec.simple for rec in report.roots),
                     all(rec.simple for rec in report.roots)))

    if pipe.document.problem.line is SwitchingLine.HORIZONTAL_Y0:
        audit = even_index_integrals(pipe.problem(), ff, pipe.settings.quad_tol)
        worst = max(abs(r[4]) for r in audit)
        ok = all(abs(r[4]) < max(SYMMETRY_TOL, SYMMETRY_FACTOR * r[5]) for r in audit)
        rows.append(_row("even-i integrals vanish", f"< max({SYMMETRY_TOL:g}, {SYMMETRY_FACTOR:g} err)",
                         f"{worst:.3e}", ok))

    if not skip_verify:
        cycles = pipe.cycles()
        rows.append(_row("verified cycles", expected["cycles"], cycles.count_verified,
                         cycles.count_verified == expected["cycles"]))
        for rec in cycles.records:
            ratios = ", ".join(f"{r:.3f}" for r in rec.ratios)
            rows.append(_row(f"cycle near z*={rec.z_star:.6f}", VERIFIED,
                             f"{rec.status} (ratio {ratios})", rec.status == VERIFIED))

    printed = ClosedFormFlowFactor(pipe.params, ff.base_angle, "printed")
    for (poly_name, i, j), published in PUBLISHED_CONSTANTS[which].items():
        value, _, n = unit_response(pipe.document.problem, printed, poly_name, i, j, pipe.settings.quad_tol)
        true_value, _, _ = unit_response(pipe.document.problem, ff, poly_name, i, j, pipe.settings.quad_tol)
        rel = abs(value - published) / abs(published)
        # only the z^4 response is free of the flow factor
        passed = abs(true_value - published) <= REL_TOL * abs(published) if n == 4 else None
        rows.append(_row(f"published constant {poly_name}({i},{j}) z^{n}", published,
                         f"{value!r} (continuous branch {true_value:.10g}, rel diff {rel:.1e})", passed))
    return rows


@guarded
def cmd_reproduce(which, settings, out_dir, overrides=None, skip_verify=False):
    print(f"[reproduce] {which}")
    pipe = Pipeline.from_bytes(document_bytes(which), settings, new_manifest(f"reproduce {which}"),
                               out_dir, overrides)
    pipe.manifest.config_path = f"<embedded:{which}>"
    rows = reproduce_rows(pipe, which, skip_verify)

    frame = pd.DataFrame(rows, columns=["criterion", "expected", "observed", "status"])
    print(frame.to_string(index=False))
    path = write_csv(pipe.path(f"reproduce_{which}.csv"), list(frame.columns),
                     [{k: str(v) for k, v in row.items()} for row in rows])
    pipe.manifest.add_output(path)
    failed = int((frame["status"] == "FAIL").sum())
    pipe.manifest.summary.update(failed=failed, criteria=int((frame["status"] != "INFO").sum()))
    _finish(pipe)
    if failed:
        print(f"[reproduce] {failed} criteria failed", file=sys.stderr)
        return EXIT_CRITERIA
    print("[reproduce] all criteria passed")
    return EXIT_OK
