import math

import pytest

from src.blowup.flow_factor import FlowFactor
from src.cli.embedded import document_bytes
from src.cli.pipeline import Pipeline, new_manifest
from src.core.bivariate import BivarPoly
from src.core.problem import Problem, SwitchingLine, validate_center
from src.core.settings import Settings


@pytest.fixture(scope="session")
def worked_params():
    return validate_center(1, 1, -0.25, 3)


@pytest.fixture(scope="session")
def ff_x0(worked_params):
    return FlowFactor(worked_params, SwitchingLine.VERTICAL_X0.base_angle)


@pytest.fixture(scope="session")
def ff_y0(worked_params):
    return FlowFactor(worked_params, SwitchingLine.HORIZONTAL_Y0.base_angle)


@pytest.fixture(scope="session")
def bare_x0(worked_params):
    return Problem(worked_params, SwitchingLine.VERTICAL_X0)


@pytest.fixture(scope="session")
def bare_y0(worked_params):
    return Problem(worked_params, SwitchingLine.HORIZONTAL_Y0)


@pytest.fixture(scope="session")
def mild_x0(worked_params):
    """Small perturbation on both branches; used where the orbit itself matters."""
    return Problem(
        worked_params,
        SwitchingLine.VERTICAL_X0,
        p_plus=BivarPoly({(0, 0): 0.3, (2, 0): 1.0}),
        q_minus=BivarPoly({(1, 0): -0.5}),
    )


def _pipeline(which, tmp_path_factory):
    out = tmp_path_factory.mktemp(which)
    return Pipeline.from_bytes(document_bytes(which), Settings(), new_manifest("test"), str(out))


@pytest.fixture(scope="session")
def thm11(tmp_path_factory):
    return _pipeline("thm11", tmp_path_factory)


@pytest.fixture(scope="session")
def thm12(tmp_path_factory):
    return _pipeline("thm12", tmp_path_factory)


@pytest.fixture(scope="session")
def thm11_coeffs():
    return {1: -5040, 2: 13068, 3: -13132, 4: 6769, 5: -1960, 6: 322, 7: -28, 8: 1}


@pytest.fixture(scope="session")
def thm12_coeffs():
    return {1: -6, 3: 11, 5: -6, 7: 1}


@pytest.fixture(scope="session")
def sqrt_roots():
    return [1.0, math.sqrt(2.0), math.sqrt(3.0)]
