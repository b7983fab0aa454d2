"""Unit tests for the pulled-back area form and the Lagrangian property."""

import math
from dataclasses import replace
from unittest.mock import patch

import numpy as np
import pytest

from miniweyl import kahler, sphere
from miniweyl.diffeo import DiffeoChain, MobiusStep
from miniweyl.errors import ChartPole, MassDefect, NonPositiveDensity
from miniweyl.models import Antipodal, MobiusConjugated, MobiusMap, QuadratureGrid, SphereDiffeo, SpherePoint
from tests.helpers.factories import make_conjugated, make_perturbed


def _shipped_maps() -> list[SphereDiffeo]:
    return [Antipodal(), make_conjugated(np.random.default_rng(20)), make_perturbed(0.05)]


@pytest.mark.parametrize("psi", _shipped_maps())
def test_total_mass_is_four_pi(psi: SphereDiffeo) -> None:
    """omega_1 has the same total area as the round form."""
    data = kahler.pullback_area_data(psi)
    assert data.total_mass == pytest.approx(4.0 * math.pi, abs=1e-6)
    assert data.min_density > 0.0


def test_antipodal_density_is_one() -> None:
    """The antipodal map is an isometry, so omega_1 = omega_2."""
    rng = np.random.default_rng(21)
    z0, z1 = sphere.random_points(rng, 30)
    np.testing.assert_allclose(kahler.conformal_factor_arrays(Antipodal(), z0, z1), 1.0, atol=1e-12)


@pytest.mark.parametrize("psi", _shipped_maps())
def test_graph_is_lagrangian(psi: SphereDiffeo) -> None:
    """omega_1 + omega_2 vanishes on the tangent planes of the graph."""
    rng = np.random.default_rng(22)
    z0, z1 = sphere.random_points(rng, 200)
    residuals = [kahler.lagrangian_residual(psi, p) for p in sphere.points_from_arrays(z0, z1)]
    assert max(residuals) < 1e-8


def test_orientation_preserving_map_is_rejected() -> None:
    """A Möbius map pulls the round form back with the wrong sign."""
    chain = DiffeoChain((MobiusStep(np.array([[1.0, 0.5], [0.0, 1.0]], dtype=np.complex128)),))
    with pytest.raises(NonPositiveDensity):
        kahler.pullback_area_data(chain, QuadratureGrid(16, 32))


def test_orientation_preserving_graph_is_not_lagrangian() -> None:
    """For a holomorphic map the two forms add instead of cancelling."""
    chain = DiffeoChain((MobiusStep(np.eye(2, dtype=np.complex128)),))
    rng = np.random.default_rng(23)
    p = sphere.points_from_arrays(*sphere.random_points(rng, 1))[0]
    assert kahler.lagrangian_residual(chain, p) == pytest.approx(2.0)


def test_residual_at_a_chart_pole_is_rejected() -> None:
    """A non-finite form value is reported as a chart pole."""
    with (
        patch("miniweyl.kahler.conformal_factor_arrays", return_value=np.array([np.inf])),
        pytest.raises(ChartPole, match="hit a chart pole"),
    ):
        kahler.lagrangian_residual(Antipodal(), SpherePoint.from_affine(0.5))


def test_quadrature_weights_sum_to_sphere_area() -> None:
    """The product rule integrates 1 to 4 pi."""
    _, _, weights = kahler.quadrature_nodes(QuadratureGrid(8, 16))
    assert float(np.sum(weights)) == pytest.approx(4.0 * math.pi)


def test_coarse_grid_mass_defect() -> None:
    """A grid too coarse for a strongly distorted map cannot certify the mass."""
    squeeze = MobiusMap.from_matrix(np.diag([6.0, 1.0 / 6.0]).astype(np.complex128))
    psi = MobiusConjugated(squeeze, MobiusMap.from_matrix(np.eye(2)), Antipodal())
    with pytest.raises(MassDefect, match="off 4 pi"):
        kahler.pullback_area_data(psi, QuadratureGrid(4, 8))


def test_residual_uses_the_given_form() -> None:
    """Doubling omega_1 leaves one unit of omega_2 on the graph instead of cancelling."""
    psi = make_perturbed(0.05)
    data = kahler.pullback_area_data(psi)
    doubled = replace(data, conformal_factor=lambda z0, z1: 2.0 * data.conformal_factor(z0, z1))
    p = sphere.points_from_arrays(*sphere.random_points(np.random.default_rng(24), 1))[0]
    assert kahler.lagrangian_residual(psi, p, data) < 1e-8
    assert kahler.lagrangian_residual(psi, p, doubled) > 0.5


def test_residual_detects_form_of_another_map() -> None:
    """omega_1 built from the antipodal map does not make the graph of a perturbed map Lagrangian."""
    data = kahler.pullback_area_data(Antipodal())
    rng = np.random.default_rng(25)
    points = sphere.points_from_arrays(*sphere.random_points(rng, 20))
    residuals = [kahler.lagrangian_residual(make_perturbed(0.1), p, data) for p in points]
    assert max(residuals) > 1e-3
