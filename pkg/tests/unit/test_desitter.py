"""Unit tests for the closed-form de Sitter disk family."""

import cmath
import math

import numpy as np
import pytest

from miniweyl import desitter, moduli, sphere, welding
from miniweyl.models import Antipodal, DiskParam, SpherePoint
from tests.helpers.factories import make_point, near_identity_mobius, random_param


def test_identity_disk() -> None:
    """The identity matrix gives the disk (zeta, -zeta)."""
    first, second = desitter.desitter_disk(DiskParam(np.eye(2, dtype=np.complex128)), 0.5j)
    assert first.affine == pytest.approx(0.5j)
    assert second.affine == pytest.approx(-0.5j)


def test_disk_rejects_points_outside() -> None:
    """The family is only defined on the closed unit disk."""
    with pytest.raises(ValueError, match="outside"):
        desitter.desitter_disk(DiskParam(np.eye(2, dtype=np.complex128)), 1.5)


def test_boundary_lies_on_antipodal_graph() -> None:
    """Random SL(2,C) disks have their boundary on the graph of the antipodal map."""
    rng = np.random.default_rng(40)
    residuals = [desitter.boundary_on_graph_residual(random_param(rng)) for _ in range(100)]
    assert max(residuals) < 1e-12


def test_interior_points_are_off_the_graph() -> None:
    """Away from the boundary the two components are not antipodal."""
    rng = np.random.default_rng(41)
    first, second = desitter.desitter_disk(random_param(rng), 0.3)
    assert sphere.chordal_distance(second, sphere.antipodal(first)) > 1e-3


def test_desitter_disks_have_area_four_pi() -> None:
    """The omega_1 and omega_2 areas of every de Sitter disk add up to 4 pi."""
    rng = np.random.default_rng(42)
    for _ in range(20):
        param = DiskParam(near_identity_mobius(rng, 0.4).matrix)
        disk = welding.desitter_seed(param, 64)
        total = moduli.omega_area(disk) + moduli.first_projection_area(Antipodal(), disk)
        assert total == pytest.approx(4.0 * math.pi, abs=1e-7)


def test_automorphism_is_in_su11() -> None:
    """Unit-disk automorphism matrices preserve the form diag(1, -1)."""
    b = desitter.unit_disk_automorphism(0.3 - 0.4j, 1.1)
    j = np.diag([1.0, -1.0])
    np.testing.assert_allclose(b.conj().T @ j @ b, j, atol=1e-14)
    assert np.linalg.det(b) == pytest.approx(1.0)


def test_hermitian_form_is_coset_invariant() -> None:
    """Reparameterizing the disk leaves H = A J A^* unchanged."""
    rng = np.random.default_rng(43)
    param = random_param(rng)
    b = desitter.unit_disk_automorphism(0.5j, -0.7)
    np.testing.assert_allclose(
        desitter.hermitian_form(param.matrix @ b), desitter.hermitian_form(param.matrix), atol=1e-10
    )


def test_gauge_reduce_is_canonical() -> None:
    """Both members of a coset reduce to the same representative."""
    rng = np.random.default_rng(44)
    param = random_param(rng)
    moved = DiskParam(param.matrix @ desitter.unit_disk_automorphism(-0.2 + 0.6j, 2.0))
    first = desitter.gauge_reduce(param)
    second = desitter.gauge_reduce(moved)
    np.testing.assert_allclose(first.representative.matrix, second.representative.matrix, atol=1e-9)
    assert first.log_scale == pytest.approx(second.log_scale, abs=1e-10)


def test_gauge_reduce_keeps_the_disk() -> None:
    """The canonical representative lies in the same coset."""
    rng = np.random.default_rng(45)
    param = random_param(rng)
    reduced = desitter.gauge_reduce(param)
    np.testing.assert_allclose(
        desitter.hermitian_form(reduced.representative.matrix), reduced.hermitian_form, atol=1e-9
    )


def test_identity_coset_has_zero_scale() -> None:
    """The identity disk is the point t = 0."""
    reduced = desitter.gauge_reduce(DiskParam(np.eye(2, dtype=np.complex128)))
    assert reduced.log_scale == pytest.approx(0.0, abs=1e-14)


def _derivative_at(param: DiskParam, zeta: complex, h: float = 1e-6) -> complex:
    def f(v: complex) -> complex:
        return desitter.desitter_disk(param, v)[0].affine

    return (f(zeta + h) - f(zeta - h)) / (2 * h)


def test_center_point_param() -> None:
    """F1(0) = z, F2(0) = w and F1'(0) = radius."""
    z, w = 0.4 - 0.2j, -0.3 + 0.5j
    param = desitter.center_point_param(make_point(z), make_point(w), 1.7)
    first, second = desitter.desitter_disk(param, 0.0)
    assert first.affine == pytest.approx(z, abs=1e-12)
    assert second.affine == pytest.approx(w, abs=1e-12)
    assert _derivative_at(param, 0.0) == pytest.approx(1.7, abs=1e-7)


def test_center_point_param_rejects_graph_pair() -> None:
    """A centre pair on the graph has no disk through it."""
    z = make_point(0.5)
    with pytest.raises(ValueError, match="graph"):
        desitter.center_point_param(z, sphere.antipodal(z), 1.0)


def test_center_point_param_rejects_radius() -> None:
    """The radius must be positive."""
    with pytest.raises(ValueError, match="radius"):
        desitter.center_point_param(make_point(0.0), make_point(0.0), 0.0)


@pytest.mark.parametrize("direction", [0.0, 1.0, -2.5])
def test_contact_param(direction: float) -> None:
    """F1(1) = x with boundary tangent at the requested angle."""
    x = 0.6 + 0.8j
    param = desitter.contact_param(make_point(x), direction)
    assert desitter.desitter_disk(param, 1.0)[0].affine == pytest.approx(x, abs=1e-12)
    h = 1e-6
    tangent = (
        desitter.desitter_disk(param, cmath.exp(1j * h))[0].affine
        - desitter.desitter_disk(param, cmath.exp(-1j * h))[0].affine
    ) / (2 * h)
    assert cmath.phase(tangent / cmath.exp(1j * direction)) == pytest.approx(0.0, abs=1e-6)


def test_contact_param_rejects_infinity() -> None:
    """The contact point must be finite in the standard chart."""
    with pytest.raises(ValueError, match="finite"):
        desitter.contact_param(SpherePoint(1.0, 0.0), 0.0)


def test_two_point_param() -> None:
    """F1(1) = x and F1(-1) = y."""
    x, y = make_point(1.0 + 1j), make_point(-0.5)
    param = desitter.two_point_param(x, y)
    assert sphere.chordal_distance(desitter.desitter_disk(param, 1.0)[0], x) < 1e-12
    assert sphere.chordal_distance(desitter.desitter_disk(param, -1.0)[0], y) < 1e-12


def test_two_point_param_rejects_coincident_points() -> None:
    """The two boundary points must differ."""
    with pytest.raises(ValueError, match="distinct"):
        desitter.two_point_param(make_point(0.5), make_point(0.5))
