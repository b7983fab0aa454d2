"""Unit tests for sphere diffeomorphism descriptors."""

from unittest.mock import patch

import numpy as np
import pytest

from miniweyl import diffeo, sphere
from miniweyl.diffeo import DiffeoChain, MobiusStep
from miniweyl.errors import ChartPole, DescriptorError, NewtonStall
from miniweyl.models import Antipodal, FlowPerturbed, Harmonic, HarmonicKind, SpherePoint
from tests.helpers.factories import make_conjugated, make_perturbed, make_point


def test_antipodal_descriptor_matches_sphere() -> None:
    """The compiled antipodal descriptor is the antipodal map."""
    p = make_point(0.3 + 0.4j)
    assert sphere.chordal_distance(diffeo.diffeo_eval(Antipodal(), p), sphere.antipodal(p)) < 1e-15


def test_conjugated_is_post_base_pre() -> None:
    """MobiusConjugated applies pre, then the base, then post."""
    rng = np.random.default_rng(10)
    psi = make_conjugated(rng)
    p = make_point(-0.7 + 0.2j)
    expected = sphere.mobius_apply(psi.post, sphere.antipodal(sphere.mobius_apply(psi.pre, p)))
    assert sphere.chordal_distance(diffeo.diffeo_eval(psi, p), expected) < 1e-14


def test_zero_strength_flow_is_base() -> None:
    """The canonical perturbation with eps = 0 is the antipodal map."""
    p = make_point(1.2 - 0.5j)
    q = diffeo.diffeo_eval(diffeo.flow_perturbed_antipodal(0.0), p)
    assert sphere.chordal_distance(q, sphere.antipodal(p)) < 1e-14


def test_perturbation_moves_points() -> None:
    """A nonzero perturbation changes the map."""
    rng = np.random.default_rng(11)
    z0, z1 = sphere.random_points(rng, 50)
    q0, q1 = diffeo.apply_arrays(make_perturbed(0.05), z0, z1)
    a0, a1 = sphere.antipodal_arrays(z0, z1)
    assert np.max(sphere.chordal_distance_arrays(q0, q1, a0, a1)) > 1e-3


@pytest.mark.parametrize("psi", [Antipodal(), make_perturbed(0.05)])
def test_orientation_reversing(psi: Antipodal | FlowPerturbed) -> None:
    """Every shipped descriptor reverses orientation."""
    rng = np.random.default_rng(12)
    z0, z1 = sphere.random_points(rng, 100)
    assert np.all(diffeo.jacobian_determinants(psi, z0, z1) < 0)
    assert diffeo.compile_diffeo(psi).orientation_sign == -1


def test_mobius_chain_preserves_orientation() -> None:
    """A chain of Möbius steps alone is orientation-preserving."""
    chain = DiffeoChain((MobiusStep(np.array([[2.0, 0.0], [0.0, 0.5]], dtype=np.complex128)),))
    assert chain.orientation_sign == 1


def test_jacobian_matches_finite_differences() -> None:
    """The chained Wirtinger Jacobian agrees with central differences in chart 0."""
    psi = make_perturbed(0.05)
    w = 0.4 + 0.3j
    h = 1e-5

    def f(v: complex) -> complex:
        return diffeo.diffeo_eval(psi, make_point(v)).affine

    fx = (f(w + h) - f(w - h)) / (2 * h)
    fy = (f(w + 1j * h) - f(w - 1j * h)) / (2 * h)
    expected = np.array([[fx.real, fy.real], [fx.imag, fy.imag]])
    jac = diffeo.diffeo_jacobian(psi, make_point(w), chart_in=0, chart_out=0)
    np.testing.assert_allclose(jac, expected, atol=1e-5)


def test_antipodal_jacobian_determinant() -> None:
    """In chart 0 the antipodal map w -> -1/conj(w) has det -1/|w|^4."""
    w = 0.5 + 0.5j
    jac = diffeo.diffeo_jacobian(Antipodal(), make_point(w), chart_in=0, chart_out=0)
    assert np.linalg.det(jac) == pytest.approx(-1.0 / abs(w) ** 4)


def test_jacobian_rejects_pole() -> None:
    """Asking for a chart whose pole is the base point raises ChartPole."""
    with pytest.raises(ChartPole):
        diffeo.diffeo_jacobian(Antipodal(), SpherePoint(1.0, 0.0), chart_in=0)


@pytest.mark.parametrize("eps", [0.0, 0.05, 0.2])
def test_inverse_round_trip(eps: float) -> None:
    """diffeo_inverse undoes diffeo_eval."""
    psi = make_perturbed(eps)
    rng = np.random.default_rng(13)
    for p in sphere.points_from_arrays(*sphere.random_points(rng, 10)):
        back = diffeo.diffeo_inverse(psi, diffeo.diffeo_eval(psi, p))
        assert sphere.chordal_distance(back, p) < 1e-10


def test_inverse_of_conjugated() -> None:
    """Möbius-conjugated maps invert exactly."""
    rng = np.random.default_rng(14)
    psi = make_conjugated(rng)
    p = make_point(0.1 - 2.0j)
    assert sphere.chordal_distance(diffeo.diffeo_inverse(psi, diffeo.diffeo_eval(psi, p)), p) < 1e-12


def test_harmonic_degree_cap() -> None:
    """Harmonics above degree 4 are rejected."""
    psi = FlowPerturbed(Antipodal(), (Harmonic(5, 0, HarmonicKind.GRADIENT, 0.01),), 1.0)
    with pytest.raises(DescriptorError, match="degree"):
        diffeo.compile_diffeo(psi)


def test_harmonic_order_cap() -> None:
    """|order| may not exceed the degree."""
    psi = FlowPerturbed(Antipodal(), (Harmonic(2, 3, HarmonicKind.ROTATIONAL, 0.01),), 1.0)
    with pytest.raises(DescriptorError, match="order"):
        diffeo.compile_diffeo(psi)


def test_harmonic_strength_cap() -> None:
    """Flows stronger than the strength cap are rejected."""
    psi = FlowPerturbed(Antipodal(), (Harmonic(2, 1, HarmonicKind.GRADIENT, 1.0),), 1.0)
    with pytest.raises(DescriptorError):
        diffeo.compile_diffeo(psi)


def test_inverse_accepts_residual_at_iteration_cap() -> None:
    """Hitting the iteration cap with a small residual still returns the point."""
    psi = make_perturbed(0.05)
    p = make_point(0.3 + 0.4j)
    with patch("miniweyl.diffeo.NEWTON_TOLERANCE", 0.0), patch("miniweyl.diffeo.NEWTON_MAX_ITERATIONS", 3):
        back = diffeo.diffeo_inverse(psi, diffeo.diffeo_eval(psi, p))
    assert sphere.chordal_distance(back, p) < 1e-10


def test_inverse_stall_reports_history() -> None:
    """A residual above the acceptance level at the cap is a NewtonStall."""
    psi = make_perturbed(0.05)
    with (
        patch("miniweyl.diffeo.NEWTON_ACCEPT", -1.0),
        patch("miniweyl.diffeo.NEWTON_MAX_ITERATIONS", 2),
        pytest.raises(NewtonStall, match="did not converge in 2 iterations") as info,
    ):
        diffeo.diffeo_inverse(psi, make_point(0.3 + 0.4j))
    assert len(info.value.history) == 2
