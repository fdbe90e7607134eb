""" Test suite for the admission rule and the admission probability of a
DRx's p-DUE """
import math
import sys

sys.path.append("..")

import numpy as np
import pytest
from scipy import integrate

from d2dcell.constants.misc import Method
from d2dcell.errors import DegeneratePositionError
from d2dcell.geometry import CellGeometry
from d2dcell.mode_selection import *
from d2dcell.utils import dbm_to_watts

RHO_D = dbm_to_watts(-70.0)


def _admitted_share(d: float, p: ModeSelectionParams, r_range: float) -> float:
    """ Admission probability by integrating over the p-DUE offset from
    its DRx: r_d < k r_c holds on an arc of angles around the DRx """
    k = p.xi_ratio ** (1 / p.alpha_d)

    def over_offset(r: float) -> float:
        if r == 0:
            return 0.0
        cosine = ((r / k) ** 2 - d * d - r * r) / (2 * d * r)
        return 2 * r / r_range ** 2 * math.acos(max(-1.0, min(1.0, cosine))) / math.pi

    value, _ = integrate.quad(
        over_offset, 0.0, r_range, epsrel=1e-11, epsabs=1e-13, limit=400
    )
    return value


@pytest.fixture
def cell():
    """
    Default cell

    Returns:
        (CellGeometry)
    """
    return CellGeometry(500.0, 35.0)


@pytest.fixture
def equal_params():
    """
    alpha_C = alpha_D = 4 and xi = rho_D

    Returns:
        (ModeSelectionParams)
    """
    return ModeSelectionParams(xi=RHO_D, rho_d=RHO_D)


def test_mode_selection_params_exponent_order_enforced():
    """ Tests that alpha_C > alpha_D is refused """
    with pytest.raises(ValueError):
        ModeSelectionParams(alpha_c=4.0, alpha_d=3.5)


def test_mode_selection_params_nonpositive_power_raises_value_error():
    """ Tests that a zero threshold is refused """
    with pytest.raises(ValueError):
        ModeSelectionParams(xi=0.0)


def test_is_underlay_equality_not_admitted():
    """ Tests that rho_D r_d^a r_c^-a == xi is refused """
    p = ModeSelectionParams(xi=2.0, rho_d=2.0)
    assert is_underlay(1.0, 1.0, p) is False
    assert is_underlay(0.5, 1.0, p) is True


def test_is_underlay_vectorized(equal_params):
    """ Tests the rule on arrays of link and BS distances """
    admitted = is_underlay(
        np.array([10.0, 30.0, 5.0]), np.array([20.0, 20.0, 400.0]), equal_params
    )
    assert admitted.tolist() == [True, False, True]


def test_is_underlay_pdue_on_bs_raises_degenerate_position(equal_params):
    """ Tests that r_c = 0 is undefined """
    with pytest.raises(DegeneratePositionError):
        is_underlay(10.0, 0.0, equal_params)


def test_effective_d2d_range_limits(equal_params, cell):
    """ Tests min(R_D, R^(aC/aD) (xi/rho_D)^(1/aD)) on both branches """
    assert effective_d2d_range(equal_params, cell) == 35.0
    tight = equal_params.with_xi(RHO_D * 1e-12)
    assert effective_d2d_range(tight, cell) == pytest.approx(0.5)


def test_exclusion_radius_equal_exponents(equal_params):
    """ Tests that the exclusion radius is r_d when xi = rho_D """
    assert exclusion_radius(20.0, equal_params) == pytest.approx(20.0)
    assert exclusion_radius(
        20.0, equal_params.with_xi(RHO_D * 16)
    ) == pytest.approx(10.0)


@pytest.mark.parametrize("xi_ratio", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("d", [5.0, 20.0, 40.0, 100.0, 300.0])
def test_p_d2d_equal_alpha_matches_offset_integral(xi_ratio, d, cell):
    """ Tests the lens-based admission probability against a direct
    integral over the p-DUE position """
    p = ModeSelectionParams(xi=RHO_D * xi_ratio, rho_d=RHO_D)
    assert p_d2d_equal_alpha(d, p, cell) == pytest.approx(
        _admitted_share(d, p, cell.d2d_range), abs=1e-6
    )


def test_p_d2d_equal_alpha_far_drx_always_admitted(equal_params, cell):
    """ Tests that with xi = rho_D a DRx beyond 2 R_D always gets its
    p-DUE admitted """
    assert p_d2d_equal_alpha(70.0, equal_params, cell) == 1.0
    assert p_d2d_equal_alpha(0.0, equal_params, cell) == pytest.approx(0.5)


def test_p_d2d_equal_alpha_unequal_exponents_raises(cell):
    """ Tests that the exact branch needs equal exponents """
    with pytest.raises(ValueError):
        p_d2d_equal_alpha(
            10.0, ModeSelectionParams(alpha_c=3.5, alpha_d=4.0), cell
        )


def test_p_d2d_general_limits(cell):
    """ Tests that the Gamma approximation is 0 at the BS, near 0 close to
    it and near 1 far from it """
    p = ModeSelectionParams(xi=RHO_D, rho_d=RHO_D, alpha_c=3.5, alpha_d=4.0)
    assert p_d2d_general(0.0, p, cell) == 0.0
    assert p_d2d_general(1e-3, p, cell) < 0.01
    assert p_d2d_general(450.0, p, cell) > 0.99


def test_p_d2d_general_monotone_in_distance(cell):
    """ Tests that moving the DRx away from the BS never lowers the
    admission probability """
    p = ModeSelectionParams(xi=RHO_D, rho_d=RHO_D, alpha_c=3.5, alpha_d=4.0)
    values = [p_d2d_general(d, p, cell) for d in np.linspace(1.0, 500.0, 40)]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


def test_p_d2d_dispatches_on_exponents(equal_params, cell):
    """ Tests that equal exponents take the exact branch """
    assert p_d2d(20.0, equal_params, cell) == p_d2d_equal_alpha(
        20.0, equal_params, cell
    )
    mixed = ModeSelectionParams(alpha_c=3.5, alpha_d=4.0)
    assert p_d2d(20.0, mixed, cell) == p_d2d_general(20.0, mixed, cell)


@pytest.mark.parametrize("xi_ratio", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("d", [0.0, 5.0, 20.0, 40.0, 100.0, 300.0])
def test_p_d2d_quadrature_matches_equal_alpha(xi_ratio, d, cell):
    """ Tests that integrating the exact rule over the link length gives
    the lens-based probability """
    p = ModeSelectionParams(xi=RHO_D * xi_ratio, rho_d=RHO_D)
    assert p_d2d_quadrature(d, p, cell) == pytest.approx(
        p_d2d_equal_alpha(d, p, cell), abs=1e-7
    )


def test_p_d2d_quadrature_mixed_exponents_matches_offset_integral(cell):
    """ Tests alpha_C = 3.5 against a double integral over the p-DUE
    offset from its DRx """
    p = ModeSelectionParams(xi=RHO_D, rho_d=RHO_D, alpha_c=3.5, alpha_d=4.0)
    d = 30.0

    def admitted(r: float, phi: float) -> float:
        r_c = math.hypot(d + r * math.cos(phi), r * math.sin(phi))
        return float(is_underlay(r, r_c, p)) * r / (math.pi * 35.0 ** 2)

    reference, _ = integrate.dblquad(
        lambda phi, r: admitted(r, phi),
        0.0,
        35.0,
        0.0,
        2 * math.pi,
        epsabs=1e-8,
    )
    assert p_d2d_quadrature(d, p, cell) == pytest.approx(reference, abs=1e-4)


@pytest.mark.parametrize("d", [150.0, 300.0])
def test_p_d2d_general_close_to_exact_far_from_bs(d, cell):
    """ Tests the Gamma approximation against the exact branch where the
    p-DUE to BS distance is close to d """
    p = ModeSelectionParams(xi=RHO_D, rho_d=RHO_D)
    assert p_d2d_general(d, p, cell) == pytest.approx(
        p_d2d_equal_alpha(d, p, cell), abs=0.03
    )


@pytest.mark.parametrize("d", [200.0, 300.0, 450.0])
def test_p_d2d_general_close_to_quadrature_mixed_exponents(d, cell):
    """ Tests alpha_C = 3.5 from 200 m outward, where approximating the
    p-DUE to BS distance by d holds within 0.02 """
    p = ModeSelectionParams(xi=RHO_D, rho_d=RHO_D, alpha_c=3.5, alpha_d=4.0)
    assert p_d2d_general(d, p, cell) == pytest.approx(
        p_d2d_quadrature(d, p, cell), abs=0.02
    )


@pytest.mark.parametrize("method", [Method.AUTO, Method.QUADRATURE])
@pytest.mark.parametrize("alpha_c", [3.5, 4.0])
def test_p_d2d_non_decreasing_in_threshold(method, alpha_c, cell):
    """ Tests that a looser threshold never refuses a p-DUE it admitted """
    for d in (10.0, 60.0, 250.0):
        values = [
            p_d2d(
                d,
                ModeSelectionParams(
                    xi=RHO_D * ratio, rho_d=RHO_D, alpha_c=alpha_c
                ),
                cell,
                method,
            )
            for ratio in np.logspace(-3, 3, 13)
        ]
        assert all(b >= a - 1e-7 for a, b in zip(values, values[1:]))


def test_p_d2d_quadrature_method_dispatch(cell):
    """ Tests that Method.QUADRATURE overrides both analytic branches """
    mixed = ModeSelectionParams(xi=RHO_D, rho_d=RHO_D, alpha_c=3.5)
    assert p_d2d(50.0, mixed, cell, Method.QUADRATURE) == p_d2d_quadrature(
        50.0, mixed, cell
    )
    assert p_d2d(50.0, mixed, cell, "quadrature") == p_d2d_quadrature(
        50.0, mixed, cell
    )
