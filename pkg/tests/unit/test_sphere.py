"""Unit tests for Riemann-sphere arithmetic."""

import numpy as np
import pytest

from miniweyl import sphere
from miniweyl.models import MobiusMap, SpherePoint
from tests.helpers.factories import make_point, near_identity_mobius, random_matrix


def test_sphere_point_normalizes() -> None:
    """The homogeneous pair is rescaled to unit length."""
    p = SpherePoint(3.0, 4.0)
    assert abs(p.z0) ** 2 + abs(p.z1) ** 2 == pytest.approx(1.0)
    assert p.affine == pytest.approx(0.75)


def test_sphere_point_rejects_zero_pair() -> None:
    """(0, 0) is not a point of the sphere."""
    with pytest.raises(ValueError, match="not a point"):
        SpherePoint(0.0, 0.0)


def test_from_affine_infinity() -> None:
    """The affine point at infinity is [1 : 0]."""
    p = SpherePoint.from_affine(complex(np.inf, 0.0))
    assert p.z1 == 0
    assert np.isinf(abs(p.affine))


def test_antipodal_is_fixed_point_free_involution() -> None:
    """The antipodal map is an involution at chordal distance 2 from the identity."""
    rng = np.random.default_rng(1)
    for p in sphere.points_from_arrays(*sphere.random_points(rng, 50)):
        q = sphere.antipodal(p)
        assert sphere.chordal_distance(p, q) == pytest.approx(2.0)
        assert sphere.chordal_distance(sphere.antipodal(q), p) < 1e-14


def test_antipodal_negates_unit_vectors() -> None:
    """On unit vectors the antipodal map is x -> -x."""
    rng = np.random.default_rng(2)
    z0, z1 = sphere.random_points(rng, 20)
    x = sphere.to_unit_vectors(z0, z1)
    y = sphere.to_unit_vectors(*sphere.antipodal_arrays(z0, z1))
    np.testing.assert_allclose(y, -x, atol=1e-14)


def test_unit_vectors_round_trip() -> None:
    """from_unit_vectors inverts to_unit_vectors up to the projective phase."""
    rng = np.random.default_rng(3)
    z0, z1 = sphere.random_points(rng, 40)
    w0, w1 = sphere.from_unit_vectors(sphere.to_unit_vectors(z0, z1))
    assert np.max(sphere.chordal_distance_arrays(z0, z1, w0, w1)) < 1e-13


def test_north_pole_is_infinity() -> None:
    """[1 : 0] sits at the north pole."""
    x = sphere.to_unit_vectors(np.array([1.0 + 0j]), np.array([0j]))
    np.testing.assert_allclose(x[0], [0.0, 0.0, 1.0])


@pytest.mark.parametrize("chart", range(6))
def test_chart_round_trip(chart: int) -> None:
    """to_chart and from_chart are inverse in every tagged chart."""
    rng = np.random.default_rng(4)
    z0, z1 = sphere.random_points(rng, 30)
    w = sphere.to_chart(z0, z1, chart)
    back0, back1 = sphere.from_chart(w, chart)
    assert np.max(sphere.chordal_distance_arrays(z0, z1, back0, back1)) < 1e-12


@pytest.mark.parametrize("chart", [*range(6), make_point(0.3 - 0.7j)])
def test_chart_pole_maps_to_infinity(chart: int | SpherePoint) -> None:
    """The pole of a chart has coordinate infinity there."""
    p0, p1 = sphere.chart_pole_arrays(chart)
    assert np.isinf(abs(sphere.to_chart(p0, p1, chart)[0]))


def test_pole_chart_has_requested_pole() -> None:
    """A SpherePoint chart is the unitary chart with that pole."""
    pole = make_point(1.5 + 0.5j)
    assert sphere.chordal_distance(sphere.chart_pole(pole), pole) < 1e-14
    u = sphere.chart_matrix(pole)
    np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-14)


def test_standard_chart_poles() -> None:
    """Tags 0 and 1 have their poles at infinity and 0."""
    assert sphere.chordal_distance(sphere.chart_pole(0), SpherePoint(1.0, 0.0)) < 1e-15
    assert sphere.chordal_distance(sphere.chart_pole(1), SpherePoint(0.0, 1.0)) < 1e-15


def test_working_chart() -> None:
    """Points inside the unit disk use tag 0, points outside tag 1."""
    z0 = np.array([0.5, 2.0], dtype=np.complex128)
    z1 = np.ones(2, dtype=np.complex128)
    np.testing.assert_array_equal(sphere.working_chart(z0, z1), [0, 1])


def test_best_chart_avoids_points() -> None:
    """Points clustered at infinity push the best chart away from tag 0."""
    z0 = np.array([1.0, 1.0], dtype=np.complex128)
    z1 = np.array([0.0, 0.01], dtype=np.complex128)
    assert sphere.best_chart(z0, z1) == 1


def test_mobius_inverse_and_compose() -> None:
    """m o m^-1 is the identity on points."""
    rng = np.random.default_rng(5)
    m = MobiusMap.from_matrix(random_matrix(rng))
    identity = sphere.mobius_compose(m, sphere.mobius_inverse(m))
    for p in sphere.points_from_arrays(*sphere.random_points(rng, 10)):
        assert sphere.chordal_distance(sphere.mobius_apply(identity, p), p) < 1e-12


def test_from_matrix_normalizes_determinant() -> None:
    """Möbius maps are stored in SL(2,C)."""
    rng = np.random.default_rng(6)
    m = MobiusMap.from_matrix(random_matrix(rng, 3.0))
    assert sphere.mobius_determinant_defect(m) < 1e-12


def test_from_matrix_rejects_singular() -> None:
    """Singular matrices do not define Möbius maps."""
    with pytest.raises(ValueError, match="invertible"):
        MobiusMap.from_matrix(np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_mobius_apply_matches_arrays() -> None:
    """The scalar and array actions agree."""
    rng = np.random.default_rng(7)
    m = near_identity_mobius(rng)
    z0, z1 = sphere.random_points(rng, 10)
    a0, a1 = sphere.mobius_apply_arrays(m.matrix, z0, z1)
    for k, p in enumerate(sphere.points_from_arrays(z0, z1)):
        q = sphere.mobius_apply(m, p)
        assert sphere.chordal_distance(q, SpherePoint(complex(a0[k]), complex(a1[k]))) < 1e-14


def test_mobius_preserves_chordal_distance_for_unitary() -> None:
    """Unitary Möbius maps are rotations of the sphere."""
    rng = np.random.default_rng(8)
    u = MobiusMap.from_matrix(sphere.chart_matrix(make_point(0.2 + 0.9j)))
    p, q = sphere.points_from_arrays(*sphere.random_points(rng, 2))
    before = sphere.chordal_distance(p, q)
    after = sphere.chordal_distance(sphere.mobius_apply(u, p), sphere.mobius_apply(u, q))
    assert after == pytest.approx(before, abs=1e-14)


@pytest.mark.parametrize("antiholomorphic", [False, True])
def test_mobius_wirtinger_matches_difference(*, antiholomorphic: bool) -> None:
    """Wirtinger derivatives agree with central differences."""
    rng = np.random.default_rng(9)
    matrix = near_identity_mobius(rng).matrix
    w = np.array([0.3 + 0.1j])
    h = 1e-6
    _, a, b = sphere.mobius_wirtinger(matrix, w, antiholomorphic=antiholomorphic)

    def f(v: np.ndarray) -> np.ndarray:
        return sphere.mobius_wirtinger(matrix, v, antiholomorphic=antiholomorphic)[0]

    fx = (f(w + h) - f(w - h)) / (2 * h)
    fy = (f(w + 1j * h) - f(w - 1j * h)) / (2 * h)
    np.testing.assert_allclose(a, 0.5 * (fx - 1j * fy), atol=1e-8)
    np.testing.assert_allclose(b, 0.5 * (fx + 1j * fy), atol=1e-8)


def test_wirtinger_real_round_trip() -> None:
    """real_to_wirtinger inverts wirtinger_to_real."""
    a = np.array([1.0 + 2.0j, -0.5j])
    b = np.array([0.25 - 1.0j, 3.0 + 0j])
    back_a, back_b = sphere.real_to_wirtinger(sphere.wirtinger_to_real(a, b))
    np.testing.assert_allclose(back_a, a)
    np.testing.assert_allclose(back_b, b)


def test_round_density_total_area() -> None:
    """The round density integrates to 4 pi over the plane."""
    r = np.linspace(0.0, 200.0, 400001)
    integrand = 2 * np.pi * r * sphere.round_density(r.astype(np.complex128))
    assert np.trapezoid(integrand, r) == pytest.approx(4 * np.pi, rel=1e-4)


def test_spherical_angles_round_trip() -> None:
    """from_spherical_angles inverts spherical_angles."""
    p = make_point(0.4 - 1.3j)
    theta, phi = sphere.spherical_angles(p)
    q0, q1 = sphere.from_spherical_angles(np.array([theta]), np.array([phi]))
    assert sphere.chordal_distance(p, SpherePoint(complex(q0[0]), complex(q1[0]))) < 1e-14
