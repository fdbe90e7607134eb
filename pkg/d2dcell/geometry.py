""" Finite-disk geometry: lens areas, the DRx density and the D2D link
distance law """
import math
from dataclasses import dataclass
from typing import Union

import numpy as np  # type: ignore

from d2dcell.constants.defaults import CELL_RADIUS, D2D_RANGE
from d2dcell.errors import DomainError

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class CellGeometry:
    """
    Disk-shaped cell with the BS at its center

    Attributes:
        radius (float): cell radius R in meters
        d2d_range (float): p-DUE transmission range R_D in meters. A DRx
            lies uniformly within this distance of its p-DUE
    """

    radius: float = CELL_RADIUS
    d2d_range: float = D2D_RANGE

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError(f"Cell radius must be positive: {self.radius}")
        if not 0 < self.d2d_range < self.radius:
            raise ValueError(
                f"D2D range {self.d2d_range} not in (0, {self.radius})"
            )

    @property
    def area(self) -> float:
        return math.pi * self.radius ** 2

    @property
    def drx_reach(self) -> float:
        """ Farthest a DRx can be from the BS in the analysis model """
        return self.radius + self.d2d_range


def lens_area(d: ArrayLike, r1: ArrayLike, r2: ArrayLike) -> ArrayLike:
    """
    Area of the intersection of two disks

    Containment and disjointness are short-circuited before the lens
    formula is touched, so d = 0 is safe.

    Args:
        d (ArrayLike): distance between the centers, >= 0
        r1 (ArrayLike): radius of the first disk, > 0
        r2 (ArrayLike): radius of the second disk, > 0
    Returns:
        (ArrayLike): overlap area, float for scalar inputs
    """
    d, r1, r2 = np.broadcast_arrays(
        np.asarray(d, dtype=float),
        np.asarray(r1, dtype=float),
        np.asarray(r2, dtype=float),
    )
    contained = d <= np.abs(r1 - r2)
    disjoint = d >= r1 + r2
    partial = ~(contained | disjoint)

    # Placeholder distance keeps the lens branch finite where it is unused
    safe_d = np.where(partial, d, 1.0)
    cos1 = np.clip((safe_d ** 2 + r1 ** 2 - r2 ** 2) / (2 * safe_d * r1), -1, 1)
    cos2 = np.clip((safe_d ** 2 + r2 ** 2 - r1 ** 2) / (2 * safe_d * r2), -1, 1)
    kite = (
        (-safe_d + r1 + r2)
        * (safe_d + r1 - r2)
        * (safe_d - r1 + r2)
        * (safe_d + r1 + r2)
    )
    lens = (
        r1 ** 2 * np.arccos(cos1)
        + r2 ** 2 * np.arccos(cos2)
        - 0.5 * np.sqrt(np.maximum(kite, 0.0))
    )

    area = np.where(
        contained,
        math.pi * np.minimum(r1, r2) ** 2,
        np.where(disjoint, 0.0, lens),
    )
    return float(area) if area.ndim == 0 else area


def arc_fraction(distance: float, d: float, r: float) -> float:
    """
    Fraction of the circle of radius `distance` centred at a point `d`
    away from the origin that lies inside the origin-centred disk of
    radius r. Scalar only, it sits inside quadrature integrands

    Args:
        distance (float): circle radius, >= 0
        d (float): distance of the circle center from the origin, >= 0
        r (float): disk radius, >= 0
    Returns:
        (float): value in [0, 1]
    """
    if distance + d <= r:
        return 1.0
    if distance <= d - r or distance >= d + r:
        return 0.0
    cosine = (distance * distance + d * d - r * r) / (2 * d * distance)
    return math.acos(max(-1.0, min(1.0, cosine))) / math.pi


def drx_density(d: ArrayLike, density: float, geom: CellGeometry) -> ArrayLike:
    """
    Intensity of the DRx point process at distance d from the BS

    Args:
        d (ArrayLike): distance from the BS, >= 0
        density (float): p-DUE density lambda in users/m^2
        geom (CellGeometry)
    Returns:
        (ArrayLike): DRx density in users/m^2
    """
    d = np.asarray(d, dtype=float)
    r, r_d = geom.radius, geom.d2d_range
    edge = density * lens_area(d, r, r_d) / (math.pi * r_d ** 2)
    value = np.where(d < r - r_d, density, np.where(d > r + r_d, 0.0, edge))
    return float(value) if value.ndim == 0 else value


def d2d_distance_pdf(r_d: ArrayLike, geom: CellGeometry) -> ArrayLike:
    """
    Density of the p-DUE to DRx distance, 2 r_d / R_D^2

    Args:
        r_d (ArrayLike): link distance in [0, R_D]
        geom (CellGeometry)
    Raises:
        DomainError: if any r_d is outside [0, R_D]
    Returns:
        (ArrayLike)
    """
    values = np.asarray(r_d, dtype=float)
    if np.any(values < 0) or np.any(values > geom.d2d_range):
        raise DomainError(
            f"Link distance outside [0, {geom.d2d_range}]: {r_d}"
        )
    pdf = 2 * values / geom.d2d_range ** 2
    return float(pdf) if pdf.ndim == 0 else pdf
