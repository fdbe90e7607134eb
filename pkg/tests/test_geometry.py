""" Test suite for disk geometry: lens areas, arc fractions, the DRx
density and the link distance law """
import math
import sys

sys.path.append("..")

import numpy as np
import pytest
from scipy import integrate

from d2dcell.errors import DomainError
from d2dcell.geometry import *


def _lens_by_chords(d: float, r1: float, r2: float) -> float:
    """ Overlap of two disks as an integral of chord overlaps over y """

    def overlap(y: float) -> float:
        half1 = math.sqrt(max(r1 * r1 - y * y, 0.0))
        half2 = math.sqrt(max(r2 * r2 - y * y, 0.0))
        return max(0.0, min(half1, d + half2) - max(-half1, d - half2))

    reach = min(r1, r2)
    value, _ = integrate.quad(overlap, -reach, reach, epsrel=1e-11, limit=200)
    return value


@pytest.fixture
def cell():
    """
    Cell with the default system parameters

    Returns:
        (CellGeometry)
    """
    return CellGeometry(500.0, 35.0)


def test_cell_geometry_derived_values(cell):
    """ Tests the area and the farthest DRx distance """
    assert cell.area == pytest.approx(math.pi * 500.0 ** 2)
    assert cell.drx_reach == 535.0


@pytest.mark.parametrize("radius, d2d_range", [(0.0, 1.0), (100.0, 100.0)])
def test_cell_geometry_invalid_raises_value_error(radius, d2d_range):
    """ Tests that R > R_D > 0 is enforced """
    with pytest.raises(ValueError):
        CellGeometry(radius, d2d_range)


def test_lens_area_contained_disk():
    """ Tests that a disk inside another overlaps with its full area,
    including the concentric case """
    assert lens_area(0.0, 500.0, 35.0) == pytest.approx(math.pi * 35.0 ** 2)
    assert lens_area(400.0, 500.0, 35.0) == pytest.approx(math.pi * 35.0 ** 2)


def test_lens_area_disjoint_disks():
    """ Tests that separated disks do not overlap """
    assert lens_area(600.0, 500.0, 35.0) == 0.0


@pytest.mark.parametrize(
    "d, r1, r2", [(500.0, 500.0, 35.0), (480.0, 500.0, 35.0), (1.5, 1.0, 1.0)]
)
def test_lens_area_partial_overlap_matches_chords(d, r1, r2):
    """ Tests the lens formula against a chord integral """
    assert lens_area(d, r1, r2) == pytest.approx(
        _lens_by_chords(d, r1, r2), rel=1e-8
    )


def test_lens_area_vectorized_input():
    """ Tests that arrays of distances give an array of areas """
    areas = lens_area(np.array([0.0, 600.0]), 500.0, 35.0)
    assert isinstance(areas, np.ndarray)
    assert np.allclose(areas, [math.pi * 35.0 ** 2, 0.0])


def test_arc_fraction_inside_and_outside():
    """ Tests circles fully inside and fully outside the disk """
    assert arc_fraction(10.0, 100.0, 500.0) == 1.0
    assert arc_fraction(0.0, 100.0, 500.0) == 1.0
    assert arc_fraction(50.0, 600.0, 500.0) == 0.0
    assert arc_fraction(1200.0, 600.0, 500.0) == 0.0


def test_arc_fraction_half_circle():
    """ Tests that a circle meeting the boundary at right angles is half
    inside: distance^2 + d^2 = r^2 """
    assert arc_fraction(3.0, 4.0, 5.0) == pytest.approx(0.5)


def test_drx_density_inner_and_outer_regions(cell):
    """ Tests lambda well inside the cell and zero beyond R + R_D """
    assert drx_density(100.0, 5e-5, cell) == 5e-5
    assert drx_density(465.0, 5e-5, cell) == pytest.approx(5e-5)
    assert drx_density(536.0, 5e-5, cell) == 0.0


def test_drx_density_thins_near_the_edge(cell):
    """ Tests that the density decreases across the edge region """
    values = drx_density(np.linspace(466.0, 534.0, 20), 5e-5, cell)
    assert np.all(np.diff(values) < 0)
    assert np.all((values > 0) & (values < 5e-5))


def test_drx_density_integrates_to_mean_count(cell):
    """ Tests that every p-DUE has exactly one DRx: the DRx density
    integrates to lambda pi R^2 """
    total, _ = integrate.quad(
        lambda d: 2 * math.pi * d * drx_density(d, 5e-5, cell),
        0.0,
        cell.drx_reach,
        points=[465.0, 500.0],
        epsrel=1e-10,
    )
    assert total == pytest.approx(5e-5 * cell.area, rel=1e-8)


def test_d2d_distance_pdf_integrates_to_one(cell):
    """ Tests that 2 r / R_D^2 is a density on [0, R_D] """
    total, _ = integrate.quad(lambda r: d2d_distance_pdf(r, cell), 0.0, 35.0)
    assert total == pytest.approx(1.0)


def test_d2d_distance_pdf_outside_support_raises_domain_error(cell):
    """ Tests that link distances beyond R_D are rejected """
    with pytest.raises(DomainError):
        d2d_distance_pdf(np.array([10.0, 36.0]), cell)
