""" Outage probabilities, average successful D2D transmissions, the
spectrum reuse ratio and the QoS-constrained threshold search """
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from scipy import optimize  # type: ignore

from d2dcell.constants.defaults import (
    DENSITY,
    M_CELLULAR,
    M_D2D,
    METRIC_QUADRATURE,
    MGF_QUADRATURE,
    QOS_OUTAGE_TOLERANCE,
    QOS_XI_RATIO_BOUNDS,
)
from d2dcell.constants.misc import Method
from d2dcell.errors import (
    BracketError,
    DomainError,
    NonConvergenceError,
    UndefinedMetricError,
)
from d2dcell.geometry import CellGeometry, drx_density
from d2dcell.mgf import AggregateBsMgf, AggregateDrxMgf
from d2dcell.mode_selection import (
    ModeSelectionParams,
    effective_d2d_range,
    p_d2d,
)
from d2dcell.specfun import QuadratureSettings, integrate_1d
from d2dcell.utils import linear_to_db

logger = logging.getLogger(__name__)

# Clamping beyond this is worth a warning rather than a debug line
CLAMP_WARNING = 1e-6


@dataclass(frozen=True)
class FadingSpec:
    """
    Nakagami-m shapes of the desired links. m = 1 is Rayleigh

    Attributes:
        m_cellular (int): CUE to BS link
        m_d2d (int): DUE to DRx link
    """

    m_cellular: int = M_CELLULAR
    m_d2d: int = M_D2D

    def __post_init__(self) -> None:
        for name in ("m_cellular", "m_d2d"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer: {value}")


@dataclass(frozen=True)
class NetworkConfig:
    """
    Full scenario in linear units

    Attributes:
        geometry (CellGeometry)
        mode (ModeSelectionParams)
        density (float): p-DUE density lambda in users/m^2
        quadrature (QuadratureSettings): tolerances inside MGFs
        metric_quadrature (QuadratureSettings): tolerances of the outer
            integral over the DRx distance
        method (Method): order-0 MGF evaluation path
    """

    geometry: CellGeometry = field(default_factory=CellGeometry)
    mode: ModeSelectionParams = field(default_factory=ModeSelectionParams)
    density: float = DENSITY
    quadrature: QuadratureSettings = field(
        default_factory=lambda: QuadratureSettings(**MGF_QUADRATURE)
    )
    metric_quadrature: QuadratureSettings = field(
        default_factory=lambda: QuadratureSettings(**METRIC_QUADRATURE)
    )
    method: Method = Method.AUTO

    def __post_init__(self) -> None:
        if not self.density >= 0:
            raise ValueError(f"Density must be non-negative: {self.density}")

    def with_xi(self, xi: float) -> "NetworkConfig":
        return replace(self, mode=self.mode.with_xi(xi))

    def with_density(self, density: float) -> "NetworkConfig":
        return replace(self, density=density)


@dataclass(frozen=True)
class QosSolution:
    """
    Outcome of the threshold search

    Attributes:
        xi (float): threshold in watts, inf when saturated
        outage (float): outage at the BS at xi
        saturated (bool): True when admitting every p-DUE keeps the
            outage below target
        iterations (int): root-finder iterations
    """

    xi: float
    outage: float
    saturated: bool = False
    iterations: int = 0

    def xi_db(self, rho_d: float) -> float:
        """ Threshold in dB relative to rho_D """
        return linear_to_db(self.xi / rho_d)


def outage_from_derivatives(
    series: Sequence[float], s: float, m: int
) -> float:
    """
    1 - sum_{t<m} (-s)^t / t! * A^(t)(s), clamped to [0, 1]

    Args:
        series (Sequence[float]): aggregate MGF and its derivatives, at
            least m entries
        s (float): m * gamma / rho
        m (int): Nakagami shape of the desired link
    Returns:
        (float)
    """
    raw = 1.0 - sum(
        (-s) ** t / math.factorial(t) * series[t] for t in range(m)
    )
    clamped = min(1.0, max(0.0, raw))
    if abs(raw - clamped) > CLAMP_WARNING:
        logger.warning("Outage %.3g clamped to %g", raw, clamped)
    elif raw != clamped:
        logger.debug("Outage %.3g clamped to %g", raw, clamped)
    return clamped


def _check_gamma(gamma: float) -> None:
    if not gamma > 0:
        raise ValueError(f"SIR threshold must be positive: {gamma}")


def outage_bs(
    gamma: float, config: NetworkConfig, fading: Optional[FadingSpec] = None
) -> float:
    """
    Outage probability of the CUE uplink at the BS

    Args:
        gamma (float): linear SIR threshold
        config (NetworkConfig)
        fading (FadingSpec): desired-link shapes, Rayleigh by default
    Returns:
        (float): probability
    """
    _check_gamma(gamma)
    fading = fading or FadingSpec()
    if config.density == 0:
        return 0.0
    m = fading.m_cellular
    s = m * gamma / config.mode.rho_bs
    mgf = AggregateBsMgf(
        config.mode,
        config.geometry,
        config.density,
        config.method,
        config.quadrature,
    )
    return outage_from_derivatives(mgf.evaluate(s, m - 1).series, s, m)


def outage_drx(
    gamma: float,
    d: float,
    config: NetworkConfig,
    fading: Optional[FadingSpec] = None,
) -> float:
    """
    Outage probability of an underlay DRx at distance d from the BS

    Args:
        gamma (float): linear SIR threshold
        d (float): DRx distance to the BS, in [0, R + R_D]
        config (NetworkConfig)
        fading (FadingSpec)
    Raises:
        DomainError: if d is outside [0, R + R_D]
    Returns:
        (float)
    """
    _check_gamma(gamma)
    if not 0 <= d <= config.geometry.drx_reach:
        raise DomainError(
            f"DRx distance {d} outside [0, {config.geometry.drx_reach}]"
        )
    fading = fading or FadingSpec()
    m = fading.m_d2d
    s = m * gamma / config.mode.rho_d
    mgf = AggregateDrxMgf(
        config.mode,
        config.geometry,
        d,
        config.density,
        config.method,
        config.quadrature,
    )
    return outage_from_derivatives(mgf.evaluate(s, m - 1).series, s, m)


def avg_dues(config: NetworkConfig) -> float:
    """
    Average number of p-DUEs admitted to underlay mode

    Args:
        config (NetworkConfig)
    Returns:
        (float)
    """
    geom, mode = config.geometry, config.mode
    radius, r_range = geom.radius, geom.d2d_range
    tilde = effective_d2d_range(mode, geom)
    refused = (
        mode.alpha_c
        / (mode.alpha_c + mode.alpha_d)
        * (1 / mode.xi_ratio) ** (2 / mode.alpha_c)
        * tilde ** (2 * mode.alpha_d / mode.alpha_c + 2)
        / (radius ** 2 * r_range ** 2)
    )
    return config.density * geom.area * (
        tilde ** 2 / r_range ** 2 - refused
    )


def avg_successful_transmissions(
    gamma: float, config: NetworkConfig, fading: Optional[FadingSpec] = None
) -> float:
    """
    Average number of DUEs whose DRx decodes, the integral over the DRx
    distance of success probability, admission probability and DRx
    density

    Args:
        gamma (float): linear SIR threshold
        config (NetworkConfig)
        fading (FadingSpec)
    Returns:
        (float)
    """
    _check_gamma(gamma)
    fading = fading or FadingSpec()
    if config.density == 0:
        return 0.0
    geom = config.geometry

    def integrand(d: float) -> float:
        admitted = p_d2d(
            d, config.mode, geom, config.method, config.quadrature
        )
        if admitted == 0:
            return 0.0
        success = 1.0 - outage_drx(gamma, d, config, fading)
        return success * admitted * drx_density(d, config.density, geom) * d

    edges = (geom.radius - geom.d2d_range, geom.radius)
    total = integrate_1d(
        integrand, 0.0, geom.drx_reach, config.metric_quadrature, edges
    )
    logger.debug("Average successful transmissions %s", total)
    return 2 * math.pi * total.value


def spectrum_reuse_ratio(
    gamma: float, config: NetworkConfig, fading: Optional[FadingSpec] = None
) -> float:
    """
    Share of admitted DUEs that transmit successfully

    Raises:
        UndefinedMetricError: when no DUE is expected
    Returns:
        (float): in [0, 1]
    """
    dues = avg_dues(config)
    if not dues > 0:
        raise UndefinedMetricError("No DUEs expected, reuse ratio undefined")
    ratio = avg_successful_transmissions(gamma, config, fading) / dues
    if ratio > 1:
        logger.debug("Reuse ratio %.9g capped at 1", ratio)
    return min(1.0, max(0.0, ratio))


def solve_xi_for_qos(
    target_outage_bs: float,
    gamma: float,
    config: NetworkConfig,
    fading: Optional[FadingSpec] = None,
    bounds: Sequence[float] = QOS_XI_RATIO_BOUNDS,
    tolerance: float = QOS_OUTAGE_TOLERANCE,
) -> QosSolution:
    """
    Largest admission threshold keeping the BS outage at the target,
    found by Brent's method on log(xi / rho_D)

    Args:
        target_outage_bs (float): in (0, 1)
        gamma (float): linear SIR threshold
        config (NetworkConfig)
        fading (FadingSpec)
        bounds (Sequence[float]): search interval of xi / rho_D
        tolerance (float): accepted |outage - target|
    Raises:
        BracketError: if the outage at the lower bound already exceeds
            the target
        NonConvergenceError: if the root misses the tolerance
    Returns:
        (QosSolution): xi = inf with saturated = True when even the upper
            bound stays below target
    """
    if not 0 < target_outage_bs < 1:
        raise ValueError(f"Target outage must be in (0, 1): {target_outage_bs}")
    rho_d = config.mode.rho_d

    def excess(log_ratio: float) -> float:
        xi = rho_d * math.exp(log_ratio)
        value = outage_bs(gamma, config.with_xi(xi), fading)
        logger.debug("xi/rho_D = %.6g -> outage %.6g", xi / rho_d, value)
        return value - target_outage_bs

    low, high = (math.log(bound) for bound in bounds)
    high_excess = excess(high)
    if high_excess < 0:
        logger.info(
            "Outage %.4g stays below target %g with every p-DUE admitted",
            high_excess + target_outage_bs,
            target_outage_bs,
        )
        return QosSolution(
            math.inf, high_excess + target_outage_bs, saturated=True
        )
    low_excess = excess(low)
    if low_excess > 0:
        raise BracketError(
            f"Outage above target {target_outage_bs} at xi/rho_D = "
            f"{bounds[0]}",
            low_excess + target_outage_bs,
            high_excess + target_outage_bs,
        )

    root, report = optimize.brentq(
        excess, low, high, xtol=1e-10, full_output=True, disp=False
    )
    xi = rho_d * math.exp(root)
    outage = outage_bs(gamma, config.with_xi(xi), fading)
    if not report.converged or abs(outage - target_outage_bs) > tolerance:
        raise NonConvergenceError(
            f"Threshold search ended at outage {outage:.6g}, target "
            f"{target_outage_bs}",
            estimate=xi,
            error=abs(outage - target_outage_bs),
        )
    logger.info(
        "xi = %.4g dB re rho_D gives outage %.6g",
        linear_to_db(xi / rho_d),
        outage,
    )
    return QosSolution(xi, outage, iterations=report.iterations)
