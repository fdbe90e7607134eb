""" Test suite for the interference MGFs. Closed-form and semi-closed
paths are checked against the quadrature reference path """
import logging
import math
import sys

sys.path.append("..")

import numpy as np
import pytest

from d2dcell.constants.misc import Method
import d2dcell.mgf as mgf_module
from d2dcell.errors import DomainError, NonConvergenceError, UnsupportedOrderError
from d2dcell.geometry import CellGeometry
from d2dcell.mgf import *
from d2dcell.mode_selection import ModeSelectionParams
from d2dcell.specfun import QuadratureSettings
from d2dcell.utils import dbm_to_watts

RHO_D = dbm_to_watts(-70.0)
RHO_BS = dbm_to_watts(-80.0)
S_BS = 1 / RHO_BS
S_DRX = 1 / RHO_D


def _params(alpha_c: float, alpha_d: float, xi_ratio: float = 1.0):
    return ModeSelectionParams(
        xi=RHO_D * xi_ratio,
        rho_d=RHO_D,
        rho_bs=RHO_BS,
        alpha_c=alpha_c,
        alpha_d=alpha_d,
    )


def _assert_same_mgf(fast: float, reference: float) -> None:
    """ Agreement on the value and on its distance from 1, which is where
    the interference actually shows """
    assert fast == pytest.approx(reference, rel=1e-6)
    assert 1 - fast == pytest.approx(1 - reference, rel=1e-3)


@pytest.fixture
def cell():
    """
    Default cell

    Returns:
        (CellGeometry)
    """
    return CellGeometry(500.0, 35.0)


@pytest.fixture
def settings():
    """
    MGF quadrature tolerances used by the reference paths

    Returns:
        (QuadratureSettings)
    """
    return QuadratureSettings(rel_tol=1e-9, abs_tol=1e-13, max_subdivisions=2000)


def test_exp_composition_derivatives_of_shifted_exponential():
    """ Tests exp(ln 2 + x): every derivative equals 2 """
    assert exp_composition_derivatives([math.log(2), 1.0, 0.0, 0.0]) == (
        pytest.approx([2.0, 2.0, 2.0, 2.0])
    )


def test_exp_composition_derivatives_of_quadratic_exponent():
    """ Tests exp(x + x^2 / 2) at 0: 1, 1, 2, 4 """
    assert exp_composition_derivatives([0.0, 1.0, 1.0, 0.0]) == pytest.approx(
        [1.0, 1.0, 2.0, 4.0]
    )


def test_product_derivatives_leibniz_rule():
    """ Tests (1 + x) exp(2x) at 0: 1, 3, 8 """
    assert product_derivatives([1.0, 1.0, 0.0], [1.0, 2.0, 4.0]) == (
        pytest.approx([1.0, 3.0, 8.0])
    )


def test_base_mgf_compute_not_implemented(cell):
    """ Tests that the base class leaves compute to subclasses """
    with pytest.raises(NotImplementedError):
        InterferenceMgf(_params(4.0, 4.0), cell).evaluate(1.0)


def test_evaluate_negative_s_raises_domain_error(cell):
    """ Tests that the MGF is only defined for s >= 0 """
    with pytest.raises(DomainError):
        SingleBsMgf(_params(4.0, 4.0), cell).evaluate(-1.0)


def test_evaluate_order_above_four_raises_unsupported_order(cell):
    """ Tests that Nakagami m above 5 is out of reach """
    with pytest.raises(UnsupportedOrderError):
        SingleBsMgf(_params(4.0, 4.0), cell).evaluate(S_BS, 5)


def test_drx_derivative_at_zero_raises_domain_error(cell):
    """ Tests that interference moments at a DRx are not finite """
    with pytest.raises(DomainError):
        SingleDrxMgf(_params(4.0, 4.0), cell, 100.0).evaluate(0.0, 1)
    with pytest.raises(DomainError):
        CueDrxMgf(_params(4.0, 4.0), cell, 100.0).evaluate(0.0, 1)


def test_mgf_at_zero_is_one(cell):
    """ Tests M(0) = 1 on every target """
    params = _params(4.0, 4.0)
    assert SingleBsMgf(params, cell).evaluate(0.0).value == 1.0
    assert SingleDrxMgf(params, cell, 100.0).evaluate(0.0).value == 1.0
    assert AggregateDrxMgf(params, cell, 100.0, 5e-5).evaluate(0.0).value == 1.0


def test_evaluations_reuse_higher_order_results(cell):
    """ Tests that a lower order request is served from a stored higher
    order evaluation """
    mgf = SingleBsMgf(_params(4.0, 4.0), cell)
    full = mgf.evaluate(S_BS, 1)
    partial = mgf.evaluate(S_BS, 0)
    assert partial.value == full.value
    assert partial.order == 0
    assert list(mgf.evaluations) == [(S_BS, 1)]


def test_single_bs_semi_closed_raises_value_error(cell):
    """ Tests that the BS target has no semi-closed path """
    with pytest.raises(ValueError):
        SingleBsMgf(_params(4.0, 4.0), cell, Method.SEMI_CLOSED)


@pytest.mark.parametrize(
    "alpha_c, alpha_d, xi_ratio",
    [(4.0, 4.0, 1.0), (3.5, 4.0, 1.0), (4.0, 4.0, 0.1), (3.0, 3.0, 10.0)],
)
def test_single_bs_closed_form_matches_quadrature(
    alpha_c, alpha_d, xi_ratio, cell, settings
):
    """ Tests the hypergeometric form against the double integral """
    params = _params(alpha_c, alpha_d, xi_ratio)
    fast = mgf_single_bs(S_BS, params, cell)
    reference = mgf_single_bs(
        S_BS, params, cell, Method.QUADRATURE, settings=settings
    )
    _assert_same_mgf(fast.value, reference.value)


def test_single_bs_first_derivative_matches_finite_difference(cell):
    """ Tests the quadrature derivative against central differences of the
    closed form """
    params = _params(4.0, 4.0)
    h = 1e-3 * S_BS
    slope = (
        bs_closed_form(S_BS + h, params, cell)
        - bs_closed_form(S_BS - h, params, cell)
    ) / (2 * h)
    derivative = mgf_single_bs(S_BS, params, cell, order=1).derivatives[0]
    assert derivative < 0
    assert derivative == pytest.approx(slope, rel=1e-4)


@pytest.mark.parametrize(
    "alpha, d", [(4.0, 100.0), (4.0, 450.0), (2.0, 250.0), (4.0, 0.0)]
)
def test_single_drx_closed_form_matches_quadrature(alpha, d, cell, settings):
    """ Tests the Psi1 form against receiver-centred quadrature """
    params = _params(alpha, alpha)
    fast = SingleDrxMgf(params, cell, d)
    assert fast.resolved_method() is Method.CLOSED_FORM
    reference = SingleDrxMgf(params, cell, d, Method.QUADRATURE, settings)
    _assert_same_mgf(fast.evaluate(S_DRX).value, reference.evaluate(S_DRX).value)


def test_single_drx_at_bs_position_equals_bs_mgf(cell):
    """ Tests that with equal exponents a DRx on the BS sees exactly the
    interference the BS sees """
    params = _params(4.0, 4.0)
    at_drx = mgf_single_drx(S_DRX, 0.0, params, cell).value
    at_bs = bs_closed_form(S_DRX, params, cell)
    _assert_same_mgf(at_drx, at_bs)


def test_single_drx_semi_closed_matches_closed_form(cell, settings):
    """ Tests that the semi-closed path agrees where both exist """
    params = _params(4.0, 4.0)
    semi = mgf_single_drx(
        S_DRX, 200.0, params, cell, Method.SEMI_CLOSED, settings=settings
    )
    closed = mgf_single_drx(S_DRX, 200.0, params, cell, Method.CLOSED_FORM)
    _assert_same_mgf(semi.value, closed.value)


def test_single_drx_semi_closed_matches_quadrature_mixed_exponents(
    cell, settings
):
    """ Tests alpha_C = 3.5, alpha_D = 4 where only semi-closed exists """
    params = _params(3.5, 4.0)
    fast = SingleDrxMgf(params, cell, 200.0)
    assert fast.resolved_method() is Method.SEMI_CLOSED
    reference = SingleDrxMgf(params, cell, 200.0, Method.QUADRATURE, settings)
    _assert_same_mgf(fast.evaluate(S_DRX).value, reference.evaluate(S_DRX).value)


def test_drx_method_resolution(cell):
    """ Tests auto resolution and the refused closed form at alpha_D = 3 """
    assert (
        SingleDrxMgf(_params(3.0, 3.0), cell, 10.0).resolved_method()
        is Method.QUADRATURE
    )
    assert (
        CueDrxMgf(
            _params(3.5, 4.0), cell, 10.0, Method.CLOSED_FORM
        ).resolved_method()
        is Method.SEMI_CLOSED
    )
    with pytest.raises(ValueError):
        SingleDrxMgf(
            _params(3.0, 3.0), cell, 10.0, Method.CLOSED_FORM
        ).evaluate(S_DRX)


@pytest.mark.parametrize("alpha", [2.0, 4.0])
def test_cue_at_bs_position_sees_constant_interference(alpha, cell):
    """ Tests that at d = 0 the CUE always delivers rho_BS, so its MGF is
    1 / (1 + s rho_BS) """
    s_rho = S_DRX * RHO_BS
    value = mgf_cue_drx(S_DRX, 0.0, _params(alpha, alpha), cell).value
    assert value == pytest.approx(1 / (1 + s_rho), rel=1e-12)


@pytest.mark.parametrize("alpha, d", [(4.0, 100.0), (4.0, 480.0), (2.0, 250.0)])
def test_cue_closed_form_matches_quadrature(alpha, d, cell, settings):
    """ Tests the beta2 form against the (r_z, theta) integral """
    params = _params(alpha, alpha)
    fast = mgf_cue_drx(S_DRX, d, params, cell)
    reference = mgf_cue_drx(
        S_DRX, d, params, cell, Method.QUADRATURE, settings=settings
    )
    _assert_same_mgf(fast.value, reference.value)


def test_cue_semi_closed_matches_quadrature_mixed_exponents(cell, settings):
    """ Tests the closed angular average with alpha_C = 3.5 """
    params = _params(3.5, 4.0)
    fast = mgf_cue_drx(S_DRX, 150.0, params, cell, Method.SEMI_CLOSED)
    reference = mgf_cue_drx(
        S_DRX, 150.0, params, cell, Method.QUADRATURE, settings=settings
    )
    _assert_same_mgf(fast.value, reference.value)


def test_aggregate_bs_composes_single_mgf(cell):
    """ Tests exp(lambda pi R^2 (M - 1)) and its first derivative """
    params = _params(4.0, 4.0)
    single = mgf_single_bs(S_BS, params, cell, order=1)
    aggregate = mgf_agg_bs(S_BS, 5e-5, params, cell, order=1)
    mean_count = 5e-5 * cell.area
    assert aggregate.value == pytest.approx(
        math.exp(mean_count * (single.value - 1))
    )
    assert aggregate.derivatives[0] == pytest.approx(
        mean_count * single.derivatives[0] * aggregate.value
    )


def test_aggregate_zero_density_has_no_interference(cell):
    """ Tests that lambda = 0 gives M = 1 with vanishing derivatives at the
    BS, and the bare CUE MGF at a DRx """
    params = _params(4.0, 4.0)
    assert mgf_agg_bs(S_BS, 0.0, params, cell, order=2).series == (
        1.0,
        0.0,
        0.0,
    )
    assert mgf_agg_drx(S_DRX, 120.0, 0.0, params, cell).value == (
        mgf_cue_drx(S_DRX, 120.0, params, cell).value
    )


def test_aggregate_drx_product_with_cue(cell):
    """ Tests that the DRx aggregate is the CUE MGF times the p-DUE
    aggregate """
    params = _params(4.0, 4.0)
    single = mgf_single_drx(S_DRX, 120.0, params, cell).value
    cue = mgf_cue_drx(S_DRX, 120.0, params, cell).value
    aggregate = mgf_agg_drx(S_DRX, 120.0, 5e-5, params, cell).value
    assert aggregate == pytest.approx(
        cue * math.exp(5e-5 * cell.area * (single - 1))
    )
    assert 0 < aggregate < 1


def test_mgf_derivatives_alternate_in_sign(cell):
    """ Tests that an MGF of a non-negative variable has derivatives of
    alternating sign """
    series = mgf_derivatives(
        AggregateBsMgf(_params(4.0, 4.0), cell, 5e-5), S_BS, 3
    )
    assert len(series) == 4
    assert series[0] > 0 and series[1] < 0 and series[2] > 0 and series[3] < 0


def test_single_drx_quadrature_small_threshold(cell, settings):
    """ Tests a tiny threshold where most links are refused and the kernel
    turns over inside the admitted region """
    params = _params(4.0, 4.0, 6.7e-5)
    s = 0.126 / RHO_D
    reference = SingleDrxMgf(params, cell, 113.9, Method.QUADRATURE, settings)
    _assert_same_mgf(
        drx_closed_form(s, 113.9, params, cell), reference.evaluate(s).value
    )


def test_single_drx_quadrature_failure_falls_back_to_semi_closed(
    cell, settings, monkeypatch, caplog
):
    """ Tests that a quadrature failure at alpha_D = 4 is logged and
    answered by the semi-closed path """

    def give_up(*args, **kwargs):
        raise NonConvergenceError("roundoff", estimate=0.0, error=1.0)

    params = _params(3.5, 4.0)
    monkeypatch.setattr(mgf_module, "pdue_excess", give_up)
    with caplog.at_level(logging.WARNING):
        value = mgf_single_drx(
            S_DRX, 200.0, params, cell, Method.QUADRATURE, settings=settings
        ).value
    assert "using the semi-closed path" in caplog.text
    assert value == drx_semi_closed(S_DRX, 200.0, params, cell, settings)


def test_single_drx_quadrature_failure_without_fallback_raises(
    cell, monkeypatch
):
    """ Tests that alpha_D = 3 has nothing to fall back on """

    def give_up(*args, **kwargs):
        raise NonConvergenceError("roundoff")

    monkeypatch.setattr(mgf_module, "pdue_excess", give_up)
    with pytest.raises(NonConvergenceError):
        mgf_single_drx(S_DRX, 200.0, _params(3.0, 3.0), cell)


@pytest.mark.parametrize("alpha_c", [3.5, 4.0])
@pytest.mark.parametrize("xi_ratio", [1e-4, 1e-5, 1e-6])
def test_single_bs_closed_form_excess_small_threshold(
    alpha_c, xi_ratio, cell, settings
):
    """ Tests 1 - M(s) at the BS against quadrature of the excess itself
    when almost every p-DUE is refused """
    params = _params(alpha_c, 4.0, xi_ratio)
    reference = -pdue_excess(
        S_BS,
        0,
        0.0,
        alpha_c,
        SingleBsMgf(params, cell, Method.QUADRATURE, settings),
    )
    assert reference > 0
    assert bs_closed_form_excess(S_BS, params, cell) == pytest.approx(
        reference, rel=1e-5
    )


@pytest.mark.parametrize("alpha_c", [3.5, 4.0])
def test_single_bs_closed_form_excess_continuous_across_branches(
    alpha_c, cell
):
    """ Tests that the 1/z series and the direct form meet where the
    arguments cross 1 """
    params = _params(alpha_c, 4.0)
    # w = 1 / (s xi) crosses 1 at s = 1 / xi
    s_cross = 1 / params.xi
    direct = bs_closed_form_excess(s_cross * (1 + 1e-9), params, cell)
    series = bs_closed_form_excess(s_cross * (1 - 1e-9), params, cell)
    assert series == pytest.approx(direct, rel=1e-6)


@pytest.mark.slow
def test_order_zero_paths_agree_on_random_points(cell, settings):
    """ Tests closed-form, semi-closed and quadrature paths on 50 random
    scenarios drawn over exponents, distances, thresholds and s """
    rng = np.random.default_rng(2017)
    for _ in range(50):
        alpha = float(rng.choice([2.0, 4.0]))
        params = _params(alpha, alpha, 10 ** rng.uniform(-1, 1))
        d = float(rng.uniform(0.0, cell.drx_reach))
        s = S_DRX * 10 ** rng.uniform(-1, 1)
        for mgf_function in (mgf_single_drx, mgf_cue_drx):
            values = [
                mgf_function(s, d, params, cell, method, settings=settings).value
                for method in Method
                if method is not Method.AUTO
            ]
            _assert_same_mgf(values[0], values[2])
            _assert_same_mgf(values[1], values[2])
        if alpha == 4.0:
            s_bs = S_BS * 10 ** rng.uniform(-1, 1)
            _assert_same_mgf(
                mgf_single_bs(s_bs, params, cell).value,
                mgf_single_bs(
                    s_bs, params, cell, Method.QUADRATURE, settings=settings
                ).value,
            )
