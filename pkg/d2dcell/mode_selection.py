""" BS-controlled underlay admission and the probability that a p-DUE is
admitted given where its DRx sits """
import math
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np  # type: ignore
from scipy import special  # type: ignore

from d2dcell.constants.defaults import EQUALITY_RTOL, GAMMA_APPROX_N
from d2dcell.constants.misc import Method
from d2dcell.errors import DegeneratePositionError, DomainError
from d2dcell.geometry import CellGeometry, lens_area
from d2dcell.specfun import (
    QuadratureSettings,
    integrate_1d,
    upper_incomplete_gamma,
)
from d2dcell.utils import dbm_to_watts

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class ModeSelectionParams:
    """
    Power-control and admission parameters, all in linear units

    Attributes:
        xi (float): admission threshold on the average interference a
            p-DUE may cause at the BS, watts
        rho_d (float): DRx receiver sensitivity, watts
        rho_bs (float): BS receiver sensitivity, watts
        alpha_c (float): path-loss exponent towards the BS
        alpha_d (float): path-loss exponent between users
        gamma_approx_n (int): terms of the Gamma approximation used when
            the exponents differ
    """

    xi: float = dbm_to_watts(-70.0)
    rho_d: float = dbm_to_watts(-70.0)
    rho_bs: float = dbm_to_watts(-80.0)
    alpha_c: float = 4.0
    alpha_d: float = 4.0
    gamma_approx_n: int = GAMMA_APPROX_N

    def __post_init__(self) -> None:
        for name in ("xi", "rho_d", "rho_bs"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 2 <= self.alpha_c <= self.alpha_d <= 6:
            raise ValueError(
                "Path-loss exponents must satisfy 2 <= alpha_c <= alpha_d "
                f"<= 6, got ({self.alpha_c}, {self.alpha_d})"
            )
        if int(self.gamma_approx_n) < 1:
            raise ValueError("gamma_approx_n must be >= 1")

    @property
    def xi_ratio(self) -> float:
        """ xi / rho_D """
        return self.xi / self.rho_d

    @property
    def equal_exponents(self) -> bool:
        return math.isclose(self.alpha_c, self.alpha_d, rel_tol=EQUALITY_RTOL)

    def with_xi(self, xi: float) -> "ModeSelectionParams":
        return replace(self, xi=xi)


def is_underlay(r_d: ArrayLike, r_c: ArrayLike, p: ModeSelectionParams):
    """
    Admission rule: rho_D r_d^alpha_D r_c^-alpha_C < xi. Equality is not
    admitted

    Args:
        r_d (ArrayLike): p-DUE to DRx distance(s), >= 0
        r_c (ArrayLike): p-DUE to BS distance(s), > 0
        p (ModeSelectionParams)
    Raises:
        DegeneratePositionError: if a p-DUE sits on the BS
    Returns:
        (Union[bool, np.ndarray])
    """
    r_d = np.asarray(r_d, dtype=float)
    r_c = np.asarray(r_c, dtype=float)
    if np.any(r_c <= 0):
        raise DegeneratePositionError("p-DUE collocated with the BS")
    admitted = p.rho_d * r_d ** p.alpha_d * r_c ** (-p.alpha_c) < p.xi
    return bool(admitted) if admitted.ndim == 0 else admitted


def effective_d2d_range(p: ModeSelectionParams, geom: CellGeometry) -> float:
    """ Longest link that can still be admitted somewhere in the cell,
    min(R_D, R^(alpha_C/alpha_D) (xi/rho_D)^(1/alpha_D)) """
    reach = geom.radius ** (p.alpha_c / p.alpha_d) * p.xi_ratio ** (
        1 / p.alpha_d
    )
    return min(geom.d2d_range, reach)


def exclusion_radius(r_d: float, p: ModeSelectionParams) -> float:
    """ Distance to the BS below which a p-DUE with link length r_d is
    refused, r_d^(alpha_D/alpha_C) (rho_D/xi)^(1/alpha_C) """
    return r_d ** (p.alpha_d / p.alpha_c) * (1 / p.xi_ratio) ** (
        1 / p.alpha_c
    )


def p_d2d_equal_alpha(
    d: float, p: ModeSelectionParams, geom: CellGeometry
) -> float:
    """
    Probability that the p-DUE of a DRx at distance d is admitted, exact
    for alpha_C = alpha_D.

    The refused positions r_d >= (xi/rho_D)^(1/alpha) r_c form an
    Apollonius disk (or its complement when xi < rho_D, or a half-plane when
    xi = rho_D). Its overlap with the disk of radius R_D around the DRx
    gives the probability, with containment and disjointness covering the
    inner and outer branches.

    Args:
        d (float): DRx distance to the BS, >= 0
        p (ModeSelectionParams): requires alpha_c == alpha_d
        geom (CellGeometry)
    Raises:
        ValueError: if the exponents differ
    Returns:
        (float)
    """
    if not p.equal_exponents:
        raise ValueError("Exact admission probability needs alpha_c == alpha_d")
    if d < 0:
        raise DomainError(f"Negative distance {d}")
    r_d = geom.d2d_range
    disk = math.pi * r_d ** 2

    if math.isclose(p.xi, p.rho_d, rel_tol=EQUALITY_RTOL):
        if d >= 2 * r_d:
            return 1.0
        segment = r_d ** 2 * math.acos(d / (2 * r_d)) - (d / 2) * math.sqrt(
            r_d ** 2 - d ** 2 / 4
        )
        return 1.0 - segment / disk

    ratio = p.xi_ratio ** (1 / p.alpha_d)
    spread = abs(ratio ** 2 - 1)
    center = ratio ** 2 * d / spread
    radius = ratio * d / spread
    if radius == 0:
        return 1.0 if ratio > 1 else 0.0
    overlap = lens_area(center, r_d, radius) / disk
    return 1.0 - overlap if ratio > 1 else overlap


def p_d2d_general(
    d: float, p: ModeSelectionParams, geom: CellGeometry
) -> float:
    """
    Admission probability for arbitrary exponents, approximating the
    p-DUE to BS distance by d and the step function by a Gamma CDF with
    N = gamma_approx_n terms

    Args:
        d (float): DRx distance to the BS, >= 0
        p (ModeSelectionParams)
        geom (CellGeometry)
    Returns:
        (float): clamped to [0, 1]
    """
    if d < 0:
        raise DomainError(f"Negative distance {d}")
    if d == 0:
        return 0.0
    n_terms = int(p.gamma_approx_n)
    factorial_root = math.exp(special.gammaln(n_terms + 1) / n_terms)
    shape = -2 / p.alpha_d
    r_d = geom.d2d_range

    total = 1.0
    for n in range(1, n_terms + 1):
        scale = n * n_terms * p.xi * d ** p.alpha_c / (factorial_root * p.rho_d)
        term = (
            (2 / p.alpha_d)
            * scale ** (2 / p.alpha_d)
            * upper_incomplete_gamma(shape, scale / r_d ** p.alpha_d)
            / r_d ** 2
        )
        total += (-1) ** n * special.comb(n_terms, n, exact=True) * term
    return min(1.0, max(0.0, total))


def p_d2d_quadrature(
    d: float,
    p: ModeSelectionParams,
    geom: CellGeometry,
    settings: Optional[QuadratureSettings] = None,
) -> float:
    """
    Admission probability for any exponents without approximating the
    p-DUE to BS distance. A p-DUE with link length r_d is admitted on the
    part of its circle around the DRx lying outside the exclusion disk of
    the BS, so only the integral over r_d is numerical

    Args:
        d (float): DRx distance to the BS, >= 0
        p (ModeSelectionParams)
        geom (CellGeometry)
        settings (QuadratureSettings): tolerances of the r_d integral
    Returns:
        (float)
    """
    if d < 0:
        raise DomainError(f"Negative distance {d}")
    r_range = geom.d2d_range

    def admitted_share(r_d: float) -> float:
        r_in = exclusion_radius(r_d, p)
        if d == 0:
            # limit d -> 0+: the exclusion circle cuts the link circle in half
            if math.isclose(r_d, r_in, rel_tol=EQUALITY_RTOL):
                return 0.5
            return 1.0 if r_d > r_in else 0.0
        cosine = (r_d ** 2 + d ** 2 - r_in ** 2) / (2 * r_d * d)
        return 1.0 - math.acos(min(1.0, max(-1.0, cosine))) / math.pi

    def integrand(r_d: float) -> float:
        if r_d <= 0:
            return 0.0
        return admitted_share(r_d) * 2 * r_d / r_range ** 2

    kinks = []
    if d == 0 and not p.equal_exponents:
        # link length at which the exclusion radius equals the link
        kinks.append(p.xi_ratio ** (1 / (p.alpha_d - p.alpha_c)))
    elif d > 0 and p.equal_exponents:
        # link lengths where the exclusion circle touches the link circle
        k = p.xi_ratio ** (1 / p.alpha_d)
        kinks.append(d / (1 + 1 / k))
        if k != 1:
            kinks.append(d / abs(1 - 1 / k))
    total = integrate_1d(integrand, 0.0, r_range, settings, kinks)
    return min(1.0, max(0.0, total.value))


def p_d2d(
    d: float,
    p: ModeSelectionParams,
    geom: CellGeometry,
    method: Method = Method.AUTO,
    settings: Optional[QuadratureSettings] = None,
) -> float:
    """ Exact branch for equal exponents, Gamma approximation otherwise.
    Method.QUADRATURE integrates the exact admission rule instead """
    if Method(method) is Method.QUADRATURE:
        return p_d2d_quadrature(d, p, geom, settings)
    if p.equal_exponents:
        return p_d2d_equal_alpha(d, p, geom)
    return p_d2d_general(d, p, geom)
