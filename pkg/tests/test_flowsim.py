import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.averaging.coefficients import solve_targets
from src.averaging.polynomial import AveragedPolynomial
from src.blowup.weighted_polar import f_over_g, perturbation_rate
from src.core.bivariate import BivarPoly
from src.core.errors import AvgCyclesError, NonpositiveRadius
from src.core.problem import Problem, SwitchingLine, Target
from src.flowsim.cartesian import cartesian_orbit, cartesian_return_radius
from src.flowsim.fixed_points import (
    UNVERIFIED, VERIFIED, CycleReport, VerificationConfig, find_fixed_points, search_windows,
)
from src.flowsim.transformed import (
    StepLog, displacement, integrate_period, period_map, rhs_transformed, scaled_residual,
)
from src.roots.isolation import isolate_positive_roots

FOUR_PI = 4 * math.pi


@pytest.fixture(scope="module")
def mild_y0(worked_params):
    return Problem(worked_params, SwitchingLine.HORIZONTAL_Y0,
                   p_plus=BivarPoly({(1, 0): 0.2}), q_minus=BivarPoly({(0, 1): 0.7}))


@pytest.fixture(scope="module")
def quadratic_only(worked_params):
    """p+ = x^2 on the x = 0 line: h(z) = 4 pi z^4 and deta/dtheta does not depend on eta."""
    return Problem(worked_params, SwitchingLine.VERTICAL_X0, p_plus=BivarPoly({(2, 0): 1.0}))


# ─────────────────────────────────────────────────────────────────────────────
# Transformed equation
# ─────────────────────────────────────────────────────────────────────────────
def test_rhs_without_perturbation(mild_x0):
    for theta in (0.0, 1.0, 2.5):
        assert rhs_transformed(mild_x0, theta, 1.7, 0.0) == pytest.approx(
            f_over_g(mild_x0.params, theta) * 1.7, rel=1e-15)


def test_rhs_rejects_nonpositive_radius(mild_x0):
    with pytest.raises(NonpositiveRadius):
        rhs_transformed(mild_x0, 0.3, 0.0, 1e-3)
    with pytest.raises(NonpositiveRadius):
        period_map(mild_x0, None, -1.0, 1e-3)


@pytest.mark.parametrize("line", list(SwitchingLine))
@pytest.mark.parametrize("z", [0.5, 1.0, 2.0, 5.0])
def test_unperturbed_period_map_is_identity(request, line, z):
    problem = request.getfixturevalue("mild_x0" if line is SwitchingLine.VERTICAL_X0 else "mild_y0")
    ff = request.getfixturevalue("ff_x0" if line is SwitchingLine.VERTICAL_X0 else "ff_y0")
    assert abs(displacement(problem, ff, z, 0.0, frame="direct")) < 1e-10
    assert displacement(problem, ff, z, 0.0) == 0.0
    assert integrate_period(problem, ff, z, 0.0, frame="direct") == pytest.approx(z, abs=1e-10)


def test_comoving_frame_reads_off_the_averaged_function(quadratic_only, ff_x0):
    assert scaled_residual(quadratic_only, ff_x0, 1.3, 1e-3) == pytest.approx(FOUR_PI, rel=1e-9)
    result = period_map(quadratic_only, ff_x0, 1.3, 1e-3)
    assert result.displacement == pytest.approx(1.3 * math.expm1(1e-3 * FOUR_PI), rel=1e-9)


def test_frames_agree(quadratic_only, ff_x0):
    comoving = period_map(quadratic_only, ff_x0, 0.8, 1e-3)
    direct = period_map(quadratic_only, ff_x0, 0.8, 1e-3, frame="direct")
    assert direct.displacement == pytest.approx(comoving.displacement, rel=1e-7)
    with pytest.raises(ValueError):
        period_map(quadratic_only, ff_x0, 0.8, 1e-3, frame="polar")


def test_displacement_sign_follows_h(thm11):
    z = 1.5
    h = thm11.averaged()
    eta = scaled_residual(thm11.problem(), thm11.flow_factor(), z, 1e-9)
    assert math.copysign(1, eta) == math.copysign(1, h(z))
    assert eta == pytest.approx(h(z) / z ** 4, rel=1e-2)


def test_steps_never_straddle_the_switching_line(mild_x0, ff_x0):
    log = StepLog()
    period_map(mild_x0, ff_x0, 1.5, 1e-4, step_log=log)
    alpha, mid, end = mild_x0.line.split_angles
    assert len(log.segments) == 2
    assert log.segments[0][0] == alpha and log.segments[0][-1] == mid
    assert log.segments[1][0] == mid and log.segments[1][-1] == end
    assert not log.straddles(mild_x0.line.split_angles)
    assert len(log.rows()) == sum(len(t) for t in log.segments)


def test_straddle_detection():
    log = StepLog()
    log.record([0.0, 1.0, 2.0])
    assert log.straddles([0.5])
    assert not log.straddles([1.0])


def test_runaway_radius_is_a_simulation_error(mild_x0, ff_x0):
    # eps = 1e-3 is far outside the first-order regime where ff(theta) z is tiny
    with pytest.raises(AvgCyclesError) as info:
        period_map(mild_x0, ff_x0, 1.2, 1e-3)
    assert info.value.exit_code == 5


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.2, max_value=5.0))
def test_displacement_scales_linearly_in_eps(quadratic_only, ff_x0, z):
    ratio = displacement(quadratic_only, ff_x0, z, 1e-3) / displacement(quadratic_only, ff_x0, z, 1e-4)
    assert 8.0 <= ratio <= 12.0


def fixed_step_radius(problem, z, eps, steps_per_half=50000):
    """Classical RK4 on log r with the branch forced per half turn."""
    params = problem.params

    def rate(theta, rho, side):
        r = math.exp(rho)
        return f_over_g(params, theta) + eps * perturbation_rate(problem, theta, r, eps, False, side) / r

    rho = math.log(z)
    alpha = problem.line.base_angle
    for t0, side in ((alpha, "+"), (alpha + math.pi, "-")):
        h = math.pi / steps_per_half
        for k in range(steps_per_half):
            t = t0 + k * h
            k1 = rate(t, rho, side)
            k2 = rate(t + h / 2, rho + h / 2 * k1, side)
            k3 = rate(t + h / 2, rho + h / 2 * k2, side)
            k4 = rate(t + h, rho + h * k3, side)
            rho += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return math.exp(rho)


@pytest.mark.slow
def test_period_map_matches_fixed_step_integration(thm11):
    problem, ff = thm11.problem(), thm11.flow_factor()
    expected = fixed_step_radius(problem, 1.0, 1e-4)
    assert integrate_period(problem, ff, 1.0, 1e-4, frame="direct") == pytest.approx(expected, abs=1e-8)


# ─────────────────────────────────────────────────────────────────────────────
# Fixed points
# ─────────────────────────────────────────────────────────────────────────────
def test_config_validation():
    with pytest.raises(ValueError):
        VerificationConfig(epsilons=(1e-4, 1e-3))
    with pytest.raises(ValueError):
        VerificationConfig(epsilons=(-1e-3,))
    with pytest.raises(ValueError):
        VerificationConfig(integrator_tol=0.0)
    assert VerificationConfig(epsilons=[1e-3]).epsilons == (1e-3,)


def test_search_windows():
    cfg = VerificationConfig()
    assert search_windows([1.0, 2.0, 3.0], 1e-3, cfg) == pytest.approx([0.05, 0.05, 0.05])
    assert search_windows([1.0, 2.0, 3.0], 1e-4, cfg) == pytest.approx([0.005, 0.005, 0.005])
    # clipped so that neighbouring windows stay apart
    assert search_windows([1.0, 1.1], 1e-3, cfg) == pytest.approx([0.025, 0.025])
    wide = VerificationConfig(capture_window=1e8)
    assert search_windows([1.0, 2.0], 1e-9, wide) == pytest.approx([0.1, 0.1])


def test_failed_return_map_leaves_root_unverified(mild_x0, ff_x0):
    predicted = isolate_positive_roots(AveragedPolynomial({1: -1.2, 2: 1.0}))
    report = find_fixed_points(mild_x0, ff_x0, predicted, VerificationConfig(epsilons=(1e-3,)))
    (record,) = report.records
    assert record.status == UNVERIFIED
    assert not record.samples[0].bracketed


def test_no_predicted_roots(mild_x0, ff_x0):
    report = find_fixed_points(mild_x0, ff_x0, isolate_positive_roots(AveragedPolynomial({})),
                               VerificationConfig())
    assert report.records == []
    assert report.count_verified == 0
    assert report.to_dict()["count_verified"] == 0


@pytest.mark.slow
def test_single_cycle_is_verified(quadratic_only, ff_x0):
    # p+_00 chosen so that h(z) = 4 pi (z^4 - z^2), root z* = 1
    problem = solve_targets(quadratic_only, ff_x0, [Target("p_plus", 0, 0, -FOUR_PI)])
    predicted = isolate_positive_roots(AveragedPolynomial({2: -FOUR_PI, 4: FOUR_PI}))
    cfg = VerificationConfig(epsilons=(1e-3, 1e-4), capture_window=1000.0)
    report = find_fixed_points(problem, ff_x0, predicted, cfg)
    assert isinstance(report, CycleReport)
    (record,) = report.records
    assert record.z_star == pytest.approx(1.0, abs=1e-10)
    assert record.status == VERIFIED
    for sample in record.samples:
        assert sample.bracketed and sample.within_capture
        assert abs(sample.z_hat - 1.0) <= cfg.capture_window * sample.eps
        assert sample.residual <= cfg.bisection_tol
    assert record.ratios[0] <= 1 / 3


# ─────────────────────────────────────────────────────────────────────────────
# Cartesian cross-checks
# ─────────────────────────────────────────────────────────────────────────────
def test_cartesian_return_matches_transformed(mild_x0, ff_x0):
    z, eps = 1.5, 1e-4
    planar = cartesian_return_radius(mild_x0, z, eps)
    blown_up = period_map(mild_x0, ff_x0, z, eps, frame="direct", exact=True)
    assert len(planar.switch_times) == 2
    assert planar.radius == pytest.approx(blown_up.radius, abs=1e-6)


def test_cartesian_return_on_worked_example(thm11):
    z, eps = 1.5, 1e-4
    planar = cartesian_return_radius(thm11.problem(), z, eps)
    blown_up = period_map(thm11.problem(), thm11.flow_factor(), z, eps, frame="direct", exact=True)
    assert planar.radius == pytest.approx(blown_up.radius, abs=1e-6)


def test_unperturbed_orbit_closes(mild_y0):
    assert cartesian_return_radius(mild_y0, 1.0, 0.0).radius == pytest.approx(1.0, abs=1e-7)


def test_orbit_follows_flow_factor(mild_x0, ff_x0):
    traj = cartesian_orbit(mild_x0, 0.5, 0.2, 0.0, -3.0)
    assert np.all(np.diff(traj.t) < 0)
    r, theta = traj.weighted_polar()
    z = r / ff_x0.value(theta)
    np.testing.assert_allclose(z, z[0], rtol=1e-6)
    assert traj.rows()[0] == {"t": 0.0, "x": 0.5, "y": 0.2}


def test_orbit_from_origin(mild_x0):
    with pytest.raises(ValueError):
        cartesian_orbit(mild_x0, 0.0, 0.0, 0.0, 1.0)
