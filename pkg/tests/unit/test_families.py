"""Unit tests for seed disks, geodesic families and null-family endpoints."""

import math
from unittest.mock import patch

import numpy as np
import pytest

from miniweyl import families, moduli, sphere, welding
from miniweyl.continuation import DiskPath
from miniweyl.errors import NonMonotoneFamily, StepCollapse
from miniweyl.models import Antipodal, BoundaryContact, TangentKind, TwoBoundaryPoints
from tests.helpers.factories import make_center, make_conjugated, make_perturbed, make_point


def test_family_kinds() -> None:
    """Each selector cuts out one causal type."""
    assert families.family_kind(make_center()) == TangentKind.TIMELIKE
    assert families.family_kind(BoundaryContact(make_point(1.0), 0.0)) == TangentKind.NULL
    assert families.family_kind(TwoBoundaryPoints(make_point(1.0), make_point(-1.0))) == TangentKind.SPACELIKE


def test_antipodal_seed_is_identity_disk() -> None:
    """The centred seed for the antipodal map is (zeta, -zeta)."""
    disk = families.seed_disk(Antipodal(), make_center())
    expected = np.zeros(disk.degree + 1, dtype=np.complex128)
    expected[1] = 1.0
    np.testing.assert_allclose(disk.f1, expected, atol=1e-10)


def test_conjugated_seed_meets_constraints() -> None:
    """Seeds for Möbius-conjugated maps are carried across and re-solved."""
    psi = make_conjugated(np.random.default_rng(60))
    constraints = make_center(0.1, 0.2j, 1.0)
    disk = families.seed_disk(psi, constraints)
    residual, _ = welding.boundary_residual(psi, disk)
    assert residual < 1e-10
    assert welding.constraint_residual(disk, constraints) < 1e-10


def test_perturbed_seed_for_family_selector() -> None:
    """Free selectors reach perturbed maps through fixed homotopy steps."""
    psi = make_perturbed(0.05)
    constraints = TwoBoundaryPoints(make_point(1.0), make_point(-1.0))
    disk = families.seed_disk(psi, constraints)
    assert welding.constraint_residual(disk, constraints) < 1e-10
    assert disk.residual_norm < 1e-10


def test_seed_rejects_centre_on_graph() -> None:
    """A centre pair on the antipodal graph has no de Sitter disk."""
    with pytest.raises(ValueError, match="graph"):
        families.seed_disk(Antipodal(), make_center(0.5, -2.0, 1.0))


def test_timelike_family_areas() -> None:
    """Along F1 = r zeta the area of F2(D) is 4 pi / (1 + r^2), decreasing in r."""
    family = families.geodesic_family(Antipodal(), make_center(), (0.5, 2.0))
    assert family.kind == TangentKind.TIMELIKE
    radii = [abs(disk.f1[1]) for disk in family.disks]
    assert radii[0] == pytest.approx(0.5, abs=1e-9)
    assert radii[-1] == pytest.approx(2.0, abs=1e-9)
    for radius, omega in zip(radii, family.parameter_values, strict=True):
        assert omega == pytest.approx(4.0 * math.pi / (1.0 + radius**2), abs=1e-8)
    assert np.all(np.diff(family.parameter_values) < 0)


@pytest.mark.slow
def test_null_family_spans_area_range() -> None:
    """A null family runs monotonically from Omega near 0 to Omega near 4 pi."""
    contact = BoundaryContact(make_point(0.5), 0.0)
    family = families.geodesic_family(Antipodal(), contact, (0.5, 4.0 * math.pi - 0.5))
    omegas = np.array(family.parameter_values)
    assert family.kind == TangentKind.NULL
    assert omegas[0] <= 0.5
    assert omegas[-1] >= 4.0 * math.pi - 0.5
    assert np.all(np.diff(omegas) > 0)


@pytest.mark.slow
def test_spacelike_family_closes() -> None:
    """The disks through two boundary points form a closed loop."""
    family = families.geodesic_family(Antipodal(), TwoBoundaryPoints(make_point(1.0), make_point(-1.0)))
    assert family.kind == TangentKind.SPACELIKE
    assert family.closure_error is not None
    assert family.closure_error < 1e-6


@pytest.mark.slow
def test_null_endpoints_for_antipodal_map() -> None:
    """The null family through x starts at psi(x) and ends at x."""
    x = make_point(0.5 + 0.3j)
    past, future = families.null_family_endpoints(Antipodal(), BoundaryContact(x, 1.0))
    assert sphere.chordal_distance(past, sphere.antipodal(x)) < 5e-3
    assert sphere.chordal_distance(future, x) < 5e-3


def test_family_tangent_is_unit() -> None:
    """The family tangent is a unit null vector of the bordered system."""
    constraints = TwoBoundaryPoints(make_point(1.0), make_point(-1.0))
    disk = families.seed_disk(Antipodal(), constraints)
    tangent = families.family_tangent(Antipodal(), constraints, disk)
    assert np.linalg.norm(tangent) == pytest.approx(1.0)


@pytest.mark.slow
@pytest.mark.parametrize("eps", [0.02, 0.05])
def test_timelike_family_omega_is_strictly_monotone(eps: float) -> None:
    """Omega decreases strictly along time-like families of perturbed maps."""
    family = families.geodesic_family(make_perturbed(eps), make_center(), (0.5, 2.0))
    assert family.kind == TangentKind.TIMELIKE
    assert len(family.disks) > 2
    assert np.all(np.diff(family.parameter_values) < 0)


def test_check_monotone_accepts_either_direction() -> None:
    """Strictly increasing and strictly decreasing Omega both pass."""
    families.check_monotone((1.0, 2.0, 3.0), TangentKind.NULL)
    families.check_monotone((3.0, 2.0, 1.0), TangentKind.TIMELIKE)


@pytest.mark.parametrize(
    ("omegas", "member"),
    [((3.0, 2.0, 2.5, 1.0), 2), ((1.0, 2.0, 2.0, 3.0), 2), ((1.0, 2.0, 1.0), 1)],
)
def test_check_monotone_rejects_turning_omega(omegas: tuple[float, ...], member: int) -> None:
    """A family whose Omega stalls or turns back is a numerical failure."""
    with pytest.raises(NonMonotoneFamily, match=f"timelike family \\(breaks at member {member}\\)"):
        families.check_monotone(omegas, TangentKind.TIMELIKE)


def test_null_family_collapse_reports_area() -> None:
    """A collapsed half of a null family carries the Omega it reached."""
    contact = BoundaryContact(make_point(1.0), 0.0)
    seed = families.seed_disk(Antipodal(), contact)
    with (
        patch("miniweyl.continuation.continue_free", side_effect=StepCollapse("fell", last_good=seed)),
        pytest.raises(StepCollapse, match="stopped short of its area target") as info,
    ):
        families.geodesic_family(Antipodal(), contact)
    assert info.value.last_good is seed
    assert info.value.achieved == pytest.approx(moduli.omega_area(seed))


def test_null_family_collapse_without_disk() -> None:
    """Without a last disk there is no achieved Omega."""
    contact = BoundaryContact(make_point(1.0), 0.0)
    with (
        patch("miniweyl.continuation.continue_free", side_effect=StepCollapse("fell")),
        pytest.raises(StepCollapse, match="stopped short") as info,
    ):
        families.geodesic_family(Antipodal(), contact)
    assert info.value.achieved is None


def test_null_family_must_reach_both_ends() -> None:
    """Halves that stop inside the area range are rejected."""
    contact = BoundaryContact(make_point(1.0), 0.0)
    seed = families.seed_disk(Antipodal(), contact)
    with (
        patch("miniweyl.continuation.continue_free", return_value=DiskPath((seed,), (0.0,))),
        pytest.raises(StepCollapse, match="did not reach both ends"),
    ):
        families.geodesic_family(Antipodal(), contact)
