""" Moment generating functions of the interference at the BS and at a
DRx, with closed-form fast paths, quadrature reference paths and
derivatives in s """
import cmath
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from scipy import special  # type: ignore

from d2dcell.constants.defaults import MAX_DERIVATIVE_ORDER
from d2dcell.constants.misc import Method, Target
from d2dcell.errors import (
    DomainError,
    NonConvergenceError,
    UnsupportedOrderError,
)
from d2dcell.geometry import CellGeometry, arc_fraction
from d2dcell.mode_selection import (
    ModeSelectionParams,
    effective_d2d_range,
    exclusion_radius,
)
from d2dcell.specfun import (
    QuadratureSettings,
    definite_beta2,
    definite_psi1,
    gauss_hypergeometric_2f1,
    integrate_1d,
    integrate_nested,
)

logger = logging.getLogger(__name__)

CLOSED_FORM_EXPONENTS = (2.0, 4.0)


@dataclass(frozen=True)
class MgfValue:
    """
    Value of an interference MGF and its derivatives at s

    Attributes:
        s (float): Laplace variable, per watt
        value (float): MGF at s
        derivatives (Tuple[float, ...]): derivatives of order 1, 2, ...
    """

    s: float
    value: float
    derivatives: Tuple[float, ...] = ()

    @property
    def series(self) -> Tuple[float, ...]:
        """ (value, first derivative, second derivative, ...) """
        return (self.value,) + tuple(self.derivatives)

    @property
    def order(self) -> int:
        return len(self.derivatives)

    def truncated(self, order: int) -> "MgfValue":
        return MgfValue(self.s, self.value, tuple(self.derivatives[:order]))


@dataclass(frozen=True)
class InterfererGeometryContext:
    """
    Where interference is received and how far an admitted link can reach

    Attributes:
        target (Target): BS or a DRx
        d (float): DRx distance to the BS in meters, 0 for the BS
        tilde_r_d (float): effective maximum D2D link distance
    """

    target: Target
    d: float
    tilde_r_d: float

    @classmethod
    def build(
        cls,
        target: Target,
        d: float,
        params: ModeSelectionParams,
        geom: CellGeometry,
    ) -> "InterfererGeometryContext":
        if d < 0:
            raise DomainError(f"Negative receiver distance {d}")
        return cls(target, float(d), effective_d2d_range(params, geom))


def _kernel_excess(interference: float, s: float, order: int) -> float:
    """
    d^t/ds^t of 1/(1+sI), minus its value at I = 0. The Rayleigh fading
    of the interfering link is already averaged out
    """
    if s == 0:
        return 0.0 if order == 0 else (-1) ** order * math.factorial(
            order
        ) * interference ** order
    if interference == math.inf:
        return -1.0 if order == 0 else 0.0
    x = s * interference
    if order == 0:
        return -x / (1 + x)
    share = x / (1 + x)
    return (
        (-1) ** order
        * math.factorial(order)
        * share ** order
        / ((1 + x) * s ** order)
    )


def _received(power: float, distance: float, exponent: float) -> float:
    if distance <= 0:
        return math.inf
    return power / distance ** exponent


def exp_composition_derivatives(inner: Sequence[float]) -> List[float]:
    """
    Derivatives of exp(g) from those of g (Faa di Bruno for the
    exponential): A_n = sum_k C(n-1, k) g_(k+1) A_(n-1-k)

    Args:
        inner (Sequence[float]): g, g', g'', ...
    Returns:
        (List[float]): exp(g) and its derivatives up to the same order
    """
    series = [math.exp(inner[0])]
    for n in range(1, len(inner)):
        series.append(
            sum(
                special.comb(n - 1, k, exact=True)
                * inner[k + 1]
                * series[n - 1 - k]
                for k in range(n)
            )
        )
    return series


def product_derivatives(
    first: Sequence[float], second: Sequence[float]
) -> List[float]:
    """ Leibniz rule for the derivatives of a product """
    return [
        sum(
            special.comb(n, k, exact=True) * first[k] * second[n - k]
            for k in range(n + 1)
        )
        for n in range(min(len(first), len(second)))
    ]


class InterferenceMgf:
    """
    Base class for interference MGFs. Each object is bound to one scenario
    and one receiver; every value it computes is stored in evaluations

    Attributes:
        name (str): name of the MGF
        params (ModeSelectionParams)
        geom (CellGeometry)
        method (Method): evaluation path for the order-0 value
        settings (QuadratureSettings): tolerances for every quadrature
        evaluations (Dict[Tuple[float, int], MgfValue]): stored results
            keyed by (s, order)

    Methods:
        evaluate (s, order) -> MgfValue: value and derivatives at s
        compute (s, order) -> Tuple[float, ...]: uncached evaluation,
            implemented by subclasses
    """

    target: Target = Target.BS

    def __init__(
        self,
        params: ModeSelectionParams,
        geom: CellGeometry,
        method: Method = Method.AUTO,
        settings: Optional[QuadratureSettings] = None,
        d: float = 0.0,
    ) -> None:
        self.name: str = "Base interference MGF"
        self.params = params
        self.geom = geom
        self.method = Method(method)
        self.settings = settings or QuadratureSettings()
        self.context = InterfererGeometryContext.build(
            self.target, d, params, geom
        )
        self.evaluations: Dict[Tuple[float, int], MgfValue] = {}

    def __repr__(self) -> str:
        return (
            f"{self.name}(d={self.context.d}, method={self.method.value}, "
            f"evaluations={len(self.evaluations)})"
        )

    @property
    def d(self) -> float:
        return self.context.d

    def evaluate(self, s: float, order: int = 0) -> MgfValue:
        """
        MGF and its first `order` derivatives at s

        Args:
            s (float): Laplace variable, >= 0
            order (int): highest derivative, at most 4
        Raises:
            DomainError: if s < 0
            UnsupportedOrderError: if order > 4
        Returns:
            (MgfValue)
        """
        if s < 0:
            raise DomainError(f"MGF evaluated at negative s = {s}")
        if order < 0:
            raise ValueError(f"Negative derivative order {order}")
        if order > MAX_DERIVATIVE_ORDER:
            raise UnsupportedOrderError(
                f"Derivative order {order} above {MAX_DERIVATIVE_ORDER}"
            )
        for (known_s, known_order), known in self.evaluations.items():
            if known_s == s and known_order >= order:
                return known.truncated(order)

        series = self.compute(float(s), order)
        result = MgfValue(float(s), series[0], tuple(series[1:]))
        self.evaluations[(float(s), order)] = result
        logger.debug("%r at s=%g: %s", self, s, result.series)
        return result

    def compute(self, s: float, order: int) -> Tuple[float, ...]:
        """
        Uncached evaluation of the MGF and its derivatives

        Args:
            s (float)
            order (int)
        Returns:
            (Tuple[float, ...])
        """
        raise NotImplementedError("Function compute not implemented")


class SingleBsMgf(InterferenceMgf):
    """ MGF of the interference from one p-DUE, uniform in the cell,
    received at the BS. Refused p-DUEs contribute nothing """

    target = Target.BS

    def __init__(
        self,
        params: ModeSelectionParams,
        geom: CellGeometry,
        method: Method = Method.AUTO,
        settings: Optional[QuadratureSettings] = None,
    ) -> None:
        """ See parent docstring """
        super().__init__(params, geom, method, settings)
        self.name: str = "Single p-DUE MGF at BS"
        if self.method is Method.SEMI_CLOSED:
            raise ValueError("No semi-closed path for the BS target")

    def compute(self, s: float, order: int) -> Tuple[float, ...]:
        if s == 0:
            value = 1.0
        elif self.method is Method.QUADRATURE or self.params.alpha_d == 2:
            # alpha_D = 2 has no hypergeometric closed form
            value = 1.0 + pdue_excess(
                s, 0, 0.0, self.params.alpha_c, self
            )
        else:
            value = bs_closed_form(s, self.params, self.geom)
        derivatives = tuple(
            pdue_excess(s, t, 0.0, self.params.alpha_c, self)
            for t in range(1, order + 1)
        )
        return (value,) + derivatives


class SingleDrxMgf(InterferenceMgf):
    """ MGF of the interference from one p-DUE, uniform in the cell,
    received at a DRx a distance d from the BS """

    target = Target.DRX

    def __init__(
        self,
        params: ModeSelectionParams,
        geom: CellGeometry,
        d: float,
        method: Method = Method.AUTO,
        settings: Optional[QuadratureSettings] = None,
    ) -> None:
        """ See parent docstring """
        super().__init__(params, geom, method, settings, d)
        self.name: str = "Single p-DUE MGF at DRx"

    def resolved_method(self) -> Method:
        """ Order-0 path actually used for the configured exponents """
        alpha_c, alpha_d = self.params.alpha_c, self.params.alpha_d
        has_closed = self.params.equal_exponents and (
            alpha_d in CLOSED_FORM_EXPONENTS
        )
        has_semi = alpha_d in CLOSED_FORM_EXPONENTS
        if self.method is Method.QUADRATURE:
            return Method.QUADRATURE
        if self.method is Method.AUTO:
            if has_closed:
                return Method.CLOSED_FORM
            return Method.SEMI_CLOSED if has_semi else Method.QUADRATURE
        if not has_semi:
            raise ValueError(
                f"No {self.method.value} path for alpha_d = {alpha_d}"
            )
        if self.method is Method.CLOSED_FORM and not has_closed:
            logger.debug(
                "alpha_c=%g differs from alpha_d=%g, using semi-closed path",
                alpha_c,
                alpha_d,
            )
            return Method.SEMI_CLOSED
        return self.method

    def _quadrature_value(self, s: float) -> float:
        """ Order-0 value by double quadrature, replaced by the
        semi-closed path when QUADPACK gives up and alpha_D allows it """
        try:
            return 1.0 + pdue_excess(s, 0, self.d, self.params.alpha_d, self)
        except NonConvergenceError as err:
            if self.params.alpha_d not in CLOSED_FORM_EXPONENTS:
                raise
            logger.warning(
                "%s: quadrature failed at s=%g, d=%g (%s), using the "
                "semi-closed path",
                self.name,
                s,
                self.d,
                err,
            )
            return drx_semi_closed(
                s, self.d, self.params, self.geom, self.settings
            )

    def compute(self, s: float, order: int) -> Tuple[float, ...]:
        if s == 0 and order > 0:
            raise DomainError(
                "Interference moments at a DRx diverge, derivatives need s > 0"
            )
        method = self.resolved_method()
        if s == 0:
            value = 1.0
        elif method is Method.CLOSED_FORM:
            value = drx_closed_form(s, self.d, self.params, self.geom)
        elif method is Method.SEMI_CLOSED:
            value = drx_semi_closed(
                s, self.d, self.params, self.geom, self.settings
            )
        else:
            value = self._quadrature_value(s)
        derivatives = tuple(
            pdue_excess(s, t, self.d, self.params.alpha_d, self)
            for t in range(1, order + 1)
        )
        return (value,) + derivatives


class CueDrxMgf(InterferenceMgf):
    """ MGF of the CUE's interference at a DRx a distance d from the BS.
    The CUE is uniform over the cell area and inverts its channel to the
    BS """

    target = Target.DRX

    def __init__(
        self,
        params: ModeSelectionParams,
        geom: CellGeometry,
        d: float,
        method: Method = Method.AUTO,
        settings: Optional[QuadratureSettings] = None,
    ) -> None:
        """ See parent docstring """
        super().__init__(params, geom, method, settings, d)
        self.name: str = "CUE MGF at DRx"

    def resolved_method(self) -> Method:
        has_closed = self.params.equal_exponents and (
            self.params.alpha_d in CLOSED_FORM_EXPONENTS
        )
        has_semi = self.params.alpha_d in CLOSED_FORM_EXPONENTS
        if self.method is Method.QUADRATURE:
            return Method.QUADRATURE
        if self.method is Method.AUTO:
            if has_closed:
                return Method.CLOSED_FORM
            return Method.SEMI_CLOSED if has_semi else Method.QUADRATURE
        if not has_semi:
            raise ValueError(
                f"No {self.method.value} path for alpha_d = "
                f"{self.params.alpha_d}"
            )
        if self.method is Method.CLOSED_FORM and not has_closed:
            return Method.SEMI_CLOSED
        return self.method

    def compute(self, s: float, order: int) -> Tuple[float, ...]:
        if s == 0 and order > 0:
            raise DomainError(
                "CUE interference moments diverge, derivatives need s > 0"
            )
        method = self.resolved_method()
        if s == 0:
            value = 1.0
        elif method is Method.CLOSED_FORM:
            value = cue_closed_form(s, self.d, self.params, self.geom)
        elif method is Method.SEMI_CLOSED:
            value = cue_semi_closed(
                s, self.d, self.params, self.geom, self.settings
            )
        else:
            value = 1.0 + cue_excess(s, 0, self)
        derivatives = tuple(
            cue_excess(s, t, self) for t in range(1, order + 1)
        )
        return (value,) + derivatives


class AggregateBsMgf(InterferenceMgf):
    """
    MGF of the aggregate interference at the BS,
    exp(lambda pi R^2 (M(s) - 1)) with M the single p-DUE MGF

    Attributes:
        density (float): p-DUE density in users/m^2
        single (SingleBsMgf): single-interferer MGF it composes
    """

    target = Target.BS

    def __init__(
        self,
        params: ModeSelectionParams,
        geom: CellGeometry,
        density: float,
        method: Method = Method.AUTO,
        settings: Optional[QuadratureSettings] = None,
    ) -> None:
        """ See parent docstring """
        super().__init__(params, geom, method, settings)
        self.name: str = "Aggregate MGF at BS"
        if density < 0:
            raise ValueError(f"Negative density {density}")
        self.density = density
        self.single = SingleBsMgf(params, geom, method, settings)

    def compute(self, s: float, order: int) -> Tuple[float, ...]:
        if self.density == 0:
            return (1.0,) + (0.0,) * order
        mean_count = self.density * self.geom.area
        single = self.single.evaluate(s, order).series
        inner = [mean_count * (single[0] - 1.0)]
        inner += [mean_count * value for value in single[1:]]
        return tuple(exp_composition_derivatives(inner))


class AggregateDrxMgf(InterferenceMgf):
    """
    MGF of the aggregate interference at a DRx a distance d from the BS:
    CUE MGF times exp(lambda pi R^2 (M(s, d) - 1))

    Attributes:
        density (float): p-DUE density in users/m^2
        single (SingleDrxMgf)
        cue (CueDrxMgf)
    """

    target = Target.DRX

    def __init__(
        self,
        params: ModeSelectionParams,
        geom: CellGeometry,
        d: float,
        density: float,
        method: Method = Method.AUTO,
        settings: Optional[QuadratureSettings] = None,
    ) -> None:
        """ See parent docstring """
        super().__init__(params, geom, method, settings, d)
        self.name: str = "Aggregate MGF at DRx"
        if density < 0:
            raise ValueError(f"Negative density {density}")
        self.density = density
        self.single = SingleDrxMgf(params, geom, d, method, settings)
        self.cue = CueDrxMgf(params, geom, d, method, settings)

    def compute(self, s: float, order: int) -> Tuple[float, ...]:
        cue = self.cue.evaluate(s, order).series
        if self.density == 0:
            return tuple(cue)
        mean_count = self.density * self.geom.area
        single = self.single.evaluate(s, order).series
        inner = [mean_count * (single[0] - 1.0)]
        inner += [mean_count * value for value in single[1:]]
        return tuple(
            product_derivatives(cue, exp_composition_derivatives(inner))
        )


def pdue_excess(
    s: float, order: int, d: float, exponent: float, mgf: InterferenceMgf
) -> float:
    """
    Integral of the order-t kernel excess over admitted p-DUE positions,
    for a receiver d from the BS with path-loss exponent `exponent`.

    Positions are written in receiver-centred polar coordinates: for a
    p-DUE at distance D from the receiver, the admissible share of the
    circle is the part inside the annulus exclusion_radius(r_d) < r_c < R,
    available in closed form through arc_fraction. At d = 0 this is the
    BS double integral over (r_d, r_c).

    Args:
        s (float): Laplace variable
        order (int): derivative order of the kernel
        d (float): receiver distance to the BS
        exponent (float): alpha_C at the BS, alpha_D at a DRx
        mgf (InterferenceMgf): supplies the scenario and tolerances
    Returns:
        (float)
    """
    params, geom, settings = mgf.params, mgf.geom, mgf.settings
    radius = geom.radius
    tilde = mgf.context.tilde_r_d
    if tilde <= 0:
        return 0.0

    def over_distance(r_d: float) -> float:
        if r_d <= 0:
            return 0.0
        r_in = exclusion_radius(r_d, params)
        power = params.rho_d * r_d ** params.alpha_d

        def integrand(distance: float) -> float:
            share = arc_fraction(distance, d, radius) - arc_fraction(
                distance, d, r_in
            )
            if share <= 0:
                return 0.0
            excess = _kernel_excess(
                _received(power, distance, exponent), s, order
            )
            return excess * distance * share

        if d <= r_in:
            lo = r_in - d
        elif d <= radius:
            lo = 0.0
        else:
            lo = d - radius
        kinks = [abs(radius - d), abs(d - r_in), d + r_in]
        if s > 0:
            # the kernel turns over where s * interference = 1
            kinks.append((s * power) ** (1 / exponent))
        inner = integrate_1d(integrand, lo, d + radius, settings, kinks)
        return inner.value * r_d

    # links whose exclusion circle passes through the receiver
    crossing = (d ** params.alpha_c * params.xi_ratio) ** (
        1 / params.alpha_d
    )
    total = integrate_1d(over_distance, 0.0, tilde, settings, (crossing,))
    return 4 * total.value / (radius ** 2 * geom.d2d_range ** 2)


def cue_excess(s: float, order: int, mgf: InterferenceMgf) -> float:
    """ Kernel excess of the CUE term integrated over its position,
    BS-centred (r_z, theta) with the angle integrated numerically """
    params, geom = mgf.params, mgf.geom
    d = mgf.d
    radius = geom.radius
    half_exponent = params.alpha_d / 2

    def integrand(r_z: float, theta: float) -> float:
        squared = r_z * r_z + d * d - 2 * r_z * d * math.cos(theta)
        if squared <= 0:
            interference = math.inf
        else:
            interference = (
                params.rho_bs * r_z ** params.alpha_c / squared ** half_exponent
            )
        return _kernel_excess(interference, s, order) * r_z

    total = integrate_nested(
        integrand,
        (0.0, radius),
        lambda r_z: (0.0, math.pi, ()),
        mgf.settings,
        outer_points=(d,),
    )
    return 2 * total.value / (math.pi * radius ** 2)


def bs_closed_form(
    s: float, params: ModeSelectionParams, geom: CellGeometry
) -> float:
    """ Hypergeometric closed form of the single p-DUE MGF at the BS,
    1 - bs_closed_form_excess """
    return 1.0 - bs_closed_form_excess(s, params, geom)


def bs_closed_form_excess(
    s: float, params: ModeSelectionParams, geom: CellGeometry
) -> float:
    """
    1 - M(s) for the single p-DUE MGF at the BS, valid for alpha_D != 2.

    Both 2F1(1, b; 1 + b; -z) terms and 2F1(1, -c; 1 - c; -z) grow or
    decay like powers of z whose leading parts cancel between the link
    bracket, its z -> infinity limit and the reach term. For arguments
    beyond 1 the 1/z connection formulas drop those parts analytically,
    leaving series in -1/z. alpha_C = 2 (b = 1) keeps the direct form

    Args:
        s (float): > 0
        params (ModeSelectionParams)
        geom (CellGeometry)
    Returns:
        (float)
    """
    alpha_c, alpha_d = params.alpha_c, params.alpha_d
    if alpha_d == 2:
        raise ValueError("Closed form at the BS needs alpha_d != 2")
    radius, r_d = geom.radius, geom.d2d_range
    tilde = effective_d2d_range(params, geom)
    b = 2 / alpha_c
    c = 2 / alpha_d
    mix = alpha_c + alpha_d
    z = radius ** alpha_c / (s * params.rho_d * tilde ** alpha_d)
    w = 1 / (s * params.xi)
    reach_scale = (
        (1 / params.xi_ratio) ** b
        * tilde ** (2 + 2 * alpha_d / alpha_c)
        * alpha_c
        / (mix * radius ** 2 * r_d ** 2)
    )
    link_scale = tilde ** 2 / (mix * r_d ** 2)

    if z >= 1 and w >= 1 and b != 1:
        link = alpha_d * c / (1 + c) * gauss_hypergeometric_2f1(
            1, 1 + c, 2 + c, -1 / z
        ) / z + alpha_c * b / (b - 1) * gauss_hypergeometric_2f1(
            1, 1 - b, 2 - b, -1 / z
        ) / z
        reach = (
            b / (b - 1) * gauss_hypergeometric_2f1(1, 1 - b, 2 - b, -1 / w) / w
        )
        return link_scale * link - reach_scale * reach

    link = alpha_c * gauss_hypergeometric_2f1(
        1, b, 1 + b, -z
    ) + alpha_d * gauss_hypergeometric_2f1(1, -c, 1 - c, -z)
    # z -> infinity limit of the bracket, taken analytically
    at_zero = alpha_d * (math.pi * c / math.sin(math.pi * c)) * z ** c
    reach = gauss_hypergeometric_2f1(1, b, 1 + b, -w)
    return link_scale * (link - at_zero) - reach_scale * reach


def _log_annulus(u: float, shift: complex, d_squared: float) -> complex:
    """
    ln(V(u)) with V(u) = u + shift - d^2 + sqrt((u + shift - d^2)^2 +
    4 d^2 shift), the antiderivative in u = r_c^2 of the angle-averaged
    kernel. The cancelling form is swapped for its conjugate quotient
    """
    base = u + shift - d_squared
    root = cmath.sqrt(base * base + 4 * d_squared * shift)
    if (base * root.conjugate()).real < 0:
        value = 4 * d_squared * shift / (root - base)
    else:
        value = base + root
    return cmath.log(value)


def drx_semi_closed(
    s: float,
    d: float,
    params: ModeSelectionParams,
    geom: CellGeometry,
    settings: QuadratureSettings,
) -> float:
    """ Single p-DUE MGF at a DRx for alpha_D in {2, 4} and any alpha_C:
    the r_c and angle integrals are closed, r_d is integrated
    numerically """
    alpha_d = params.alpha_d
    if alpha_d not in CLOSED_FORM_EXPONENTS:
        raise ValueError(f"No semi-closed form for alpha_d = {alpha_d}")
    radius, r_range = geom.radius, geom.d2d_range
    tilde = effective_d2d_range(params, geom)
    s_rho = s * params.rho_d
    d_squared = d * d

    def integrand(r_d: float) -> float:
        if r_d <= 0:
            return 0.0
        u_lo = exclusion_radius(r_d, params) ** 2
        if alpha_d == 2:
            weight = s_rho * r_d ** 2
            shift: complex = weight
        else:
            weight = math.sqrt(s_rho) * r_d ** 2
            shift = -1j * weight
        step = _log_annulus(radius ** 2, shift, d_squared) - _log_annulus(
            u_lo, shift, d_squared
        )
        part = step.real if alpha_d == 2 else step.imag
        return weight * part * r_d

    total = integrate_1d(integrand, 0.0, tilde, settings).value
    return 1.0 - 2 * total / (radius ** 2 * r_range ** 2)


def drx_closed_form(
    s: float, d: float, params: ModeSelectionParams, geom: CellGeometry
) -> float:
    """ Single p-DUE MGF at a DRx in closed form for
    alpha_C = alpha_D in {2, 4}, through the Psi1 antiderivative """
    alpha = params.alpha_d
    if not (params.equal_exponents and alpha in CLOSED_FORM_EXPONENTS):
        raise ValueError("Closed form needs alpha_c = alpha_d in {2, 4}")
    radius, r_range = geom.radius, geom.d2d_range
    upper_x = effective_d2d_range(params, geom) ** 2
    s_rho = s * params.rho_d
    refused = 1 / params.xi_ratio
    r_sq, d_sq = radius ** 2, d * d
    norm = r_range ** 2 * r_sq

    if alpha == 2:
        cross = 4 * d_sq * s_rho
        outer = definite_psi1(0.0, upper_x, s_rho, r_sq - d_sq, cross)
        inner = definite_psi1(0.0, upper_x, s_rho + refused, -d_sq, cross)
        return 1.0 - s_rho * (outer - inner).real / norm

    root = math.sqrt(s_rho)
    cross = -4j * root * d_sq
    outer = definite_psi1(0.0, upper_x, -1j * root, r_sq - d_sq, cross)
    inner = definite_psi1(
        0.0, upper_x, math.sqrt(refused) - 1j * root, -d_sq, cross
    )
    return 1.0 - root * (outer - inner).imag / norm


def cue_semi_closed(
    s: float,
    d: float,
    params: ModeSelectionParams,
    geom: CellGeometry,
    settings: QuadratureSettings,
) -> float:
    """ CUE MGF at a DRx for alpha_D in {2, 4} and any alpha_C, with the
    angle integrated in closed form """
    alpha_c, alpha_d = params.alpha_c, params.alpha_d
    if alpha_d not in CLOSED_FORM_EXPONENTS:
        raise ValueError(f"No semi-closed form for alpha_d = {alpha_d}")
    radius = geom.radius
    s_rho = s * params.rho_bs

    def integrand(r_z: float) -> float:
        strength = s_rho * r_z ** alpha_c
        if alpha_d == 2:
            return (
                r_z
                * strength
                / math.sqrt(
                    (strength + (r_z - d) ** 2) * (strength + (r_z + d) ** 2)
                )
            )
        w = math.sqrt(strength)
        mean = 1 / (
            cmath.sqrt((r_z - d) ** 2 - 1j * w)
            * cmath.sqrt((r_z + d) ** 2 - 1j * w)
        )
        return r_z * w * mean.imag

    total = integrate_1d(integrand, 0.0, radius, settings, (d,)).value
    return 1.0 - 2 * total / radius ** 2


def cue_closed_form(
    s: float, d: float, params: ModeSelectionParams, geom: CellGeometry
) -> float:
    """ CUE MGF at a DRx in closed form for alpha_C = alpha_D in {2, 4},
    through the beta2 antiderivative """
    alpha = params.alpha_d
    if not (params.equal_exponents and alpha in CLOSED_FORM_EXPONENTS):
        raise ValueError("Closed form needs alpha_c = alpha_d in {2, 4}")
    r_sq, d_sq = geom.radius ** 2, d * d
    s_rho = s * params.rho_bs

    if alpha == 2:
        k = s_rho + 1
        step = definite_beta2(
            0.0, r_sq, k ** 2, d_sq * (s_rho - 1), 4 * d_sq ** 2 * s_rho
        )
        return 1.0 - s_rho * step.real / (r_sq * k ** 3)

    root = math.sqrt(s_rho)
    k = 1 - 1j * root
    step = definite_beta2(
        0.0, r_sq, k, d_sq * (k - 2) / k, -4j * root * d_sq ** 2 / k ** 2
    )
    return 1.0 - (root * step / (r_sq * k ** 2)).imag


def mgf_single_bs(
    s: float,
    params: ModeSelectionParams,
    geom: CellGeometry,
    method: Method = Method.AUTO,
    order: int = 0,
    settings: Optional[QuadratureSettings] = None,
) -> MgfValue:
    """ Single p-DUE MGF at the BS. See SingleBsMgf """
    return SingleBsMgf(params, geom, method, settings).evaluate(s, order)


def mgf_agg_bs(
    s: float,
    density: float,
    params: ModeSelectionParams,
    geom: CellGeometry,
    method: Method = Method.AUTO,
    order: int = 0,
    settings: Optional[QuadratureSettings] = None,
) -> MgfValue:
    """ Aggregate interference MGF at the BS. See AggregateBsMgf """
    return AggregateBsMgf(params, geom, density, method, settings).evaluate(
        s, order
    )


def mgf_single_drx(
    s: float,
    d: float,
    params: ModeSelectionParams,
    geom: CellGeometry,
    method: Method = Method.AUTO,
    order: int = 0,
    settings: Optional[QuadratureSettings] = None,
) -> MgfValue:
    """ Single p-DUE MGF at a DRx d from the BS. See SingleDrxMgf """
    return SingleDrxMgf(params, geom, d, method, settings).evaluate(s, order)


def mgf_cue_drx(
    s: float,
    d: float,
    params: ModeSelectionParams,
    geom: CellGeometry,
    method: Method = Method.AUTO,
    order: int = 0,
    settings: Optional[QuadratureSettings] = None,
) -> MgfValue:
    """ CUE MGF at a DRx d from the BS. See CueDrxMgf """
    return CueDrxMgf(params, geom, d, method, settings).evaluate(s, order)


def mgf_agg_drx(
    s: float,
    d: float,
    density: float,
    params: ModeSelectionParams,
    geom: CellGeometry,
    method: Method = Method.AUTO,
    order: int = 0,
    settings: Optional[QuadratureSettings] = None,
) -> MgfValue:
    """ Aggregate interference MGF at a DRx. See AggregateDrxMgf """
    return AggregateDrxMgf(
        params, geom, d, density, method, settings
    ).evaluate(s, order)


def mgf_derivatives(mgf: InterferenceMgf, s: float, order: int) -> List[float]:
    """
    MGF value followed by its derivatives up to `order`

    Args:
        mgf (InterferenceMgf): any MGF object
        s (float): Laplace variable
        order (int): at most 4
    Raises:
        UnsupportedOrderError: if order > 4
    Returns:
        (List[float])
    """
    return list(mgf.evaluate(s, order).series)
