"""Unit tests for spherical-harmonic fields and their flows."""

import math
from unittest.mock import patch

import numpy as np
import pytest

from miniweyl import harmonics
from miniweyl.errors import DescriptorError, FlowDivergence
from miniweyl.models import Harmonic, HarmonicKind, RealArray


def _unit_vectors(rng: np.random.Generator, count: int) -> RealArray:
    x = rng.standard_normal((count, 3))
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def test_degree_one_harmonic_is_height() -> None:
    """Y_10 restricts to the z coordinate."""
    solid = harmonics.solid_harmonic(1, 0)
    x = np.array([[0.0, 0.0, 1.0], [0.6, 0.0, 0.8]])
    np.testing.assert_allclose(harmonics.harmonic_value(solid, x), [1.0, 0.8])


def test_solid_harmonics_are_harmonic() -> None:
    """The Laplacian of a solid harmonic vanishes."""
    rng = np.random.default_rng(3)
    x = rng.standard_normal((4, 3))
    h = 1e-3
    for degree, order in [(2, 1), (3, -2), (4, 0), (4, 4)]:
        solid = harmonics.solid_harmonic(degree, order)
        laplacian = sum(
            harmonics.harmonic_value(solid, x + h * e)
            - 2.0 * harmonics.harmonic_value(solid, x)
            + harmonics.harmonic_value(solid, x - h * e)
            for e in np.eye(3)
        ) / h**2
        np.testing.assert_allclose(laplacian, 0.0, atol=1e-3)


@pytest.mark.parametrize("kind", list(HarmonicKind))
def test_fields_are_tangent(kind: HarmonicKind) -> None:
    """Both kinds of field are tangent to the unit sphere."""
    x = _unit_vectors(np.random.default_rng(0), 20)
    field = harmonics.vector_field((Harmonic(3, -2, kind, 0.7), Harmonic(2, 1, kind, -0.4)), x)
    np.testing.assert_allclose(np.sum(field * x, axis=-1), 0.0, atol=1e-12)


def test_rotational_flow_of_height_is_a_rotation() -> None:
    """The rotational field of z turns the sphere about the z axis."""
    term = (Harmonic(1, 0, HarmonicKind.ROTATIONAL, 1.0),)
    moved = harmonics.flow(term, 0.3, np.array([[1.0, 0.0, 0.0]]))
    np.testing.assert_allclose(moved[0], [math.cos(0.3), -math.sin(0.3), 0.0], atol=1e-9)


def test_zero_flow_is_identity() -> None:
    """A zero flow time returns a copy of the input."""
    x = _unit_vectors(np.random.default_rng(1), 5)
    moved = harmonics.flow((Harmonic(2, 0, HarmonicKind.GRADIENT, 0.2),), 0.0, x)
    np.testing.assert_array_equal(moved, x)
    assert moved is not x


def test_flow_step_budget() -> None:
    """A flow that would need too many steps is refused."""
    with pytest.raises(FlowDivergence, match="budget"):
        harmonics.flow((Harmonic(4, 0, HarmonicKind.GRADIENT, 100.0),), 1.0, np.array([[0.0, 0.0, 1.0]]))


def test_flow_rejects_non_finite_state() -> None:
    """A field that turns non-finite ends the flow with FlowDivergence."""
    with (
        patch("miniweyl.harmonics.vector_field", return_value=np.full((1, 3), np.nan)),
        pytest.raises(FlowDivergence, match="non-finite"),
    ):
        harmonics.flow((Harmonic(2, 0, HarmonicKind.GRADIENT, 0.1),), 1.0, np.array([[0.0, 0.0, 1.0]]))


@pytest.mark.parametrize(
    ("harmonic", "flow_time", "message"),
    [
        (Harmonic(5, 0, HarmonicKind.GRADIENT, 0.1), 1.0, "degree 5"),
        (Harmonic(2, 3, HarmonicKind.GRADIENT, 0.1), 1.0, "order 3"),
        (Harmonic(2, 1, HarmonicKind.ROTATIONAL, 0.2), 2.0, "exceeds the cap"),
    ],
)
def test_validate_harmonics(harmonic: Harmonic, flow_time: float, message: str) -> None:
    """Out-of-range descriptors are rejected."""
    with pytest.raises(DescriptorError, match=message):
        harmonics.validate_harmonics((harmonic,), flow_time)
