"""Unit tests for Legendrian lifts to projective 3-space."""

from unittest.mock import patch

import numpy as np
import pytest

from miniweyl import lift, welding
from miniweyl.errors import DerivativeZero
from miniweyl.models import Antipodal, HolomorphicDisk
from tests.helpers.factories import identity_disk, make_center, make_perturbed


@pytest.mark.parametrize("sign", [1, -1])
def test_identity_lift(sign: int) -> None:
    """For (zeta, -zeta) the fibre coordinate is the constant +-1."""
    lifted = lift.lift_disk(identity_disk(), sign)
    expected = np.zeros(lifted.base.degree + 1, dtype=np.complex128)
    expected[0] = sign
    np.testing.assert_allclose(lifted.mu, expected, atol=1e-14)
    assert lift.legendrian_residual(lifted) < 1e-14


def test_identity_lift_is_unit_tangent() -> None:
    """The identity lift sits on the unit tangent bundle of the antipodal graph."""
    residual = lift.boundary_utp_residual(Antipodal(), lift.lift_disk(identity_disk()))
    assert residual.worst < 1e-12


def test_perturbed_lift() -> None:
    """Lifts of solved disks for perturbed maps are Legendrian with unit boundary tangents."""
    psi = make_perturbed(0.05)
    disk = welding.solve_disk(psi, make_center(), identity_disk())
    lifted = lift.lift_disk(disk)
    assert lift.legendrian_residual(lifted) < 1e-10
    assert lift.boundary_utp_residual(psi, lifted).worst < 1e-8


def test_rotated_fibre_stays_legendrian() -> None:
    """Rotating the fibre is matched by the rotated contact form."""
    lifted = lift.rotate_fiber(lift.lift_disk(identity_disk()), 0.7)
    assert lifted.fiber_angle == pytest.approx(0.7)
    assert lifted.mu[0] == pytest.approx(np.exp(0.7j))
    assert lift.legendrian_residual(lifted) < 1e-14
    assert lift.boundary_utp_residual(Antipodal(), lifted).worst < 1e-12


def test_sign_choice_is_checked() -> None:
    """Only the two branches +1 and -1 exist."""
    with pytest.raises(ValueError, match="sign_choice"):
        lift.lift_disk(identity_disk(), 0)


def test_vanishing_derivative_is_rejected() -> None:
    """F1 = zeta^2 has a critical point inside the disk."""
    disk = HolomorphicDisk(
        f1=np.array([0.0, 0.0, 1.0], dtype=np.complex128),
        f2=np.array([0.0, -1.0, 0.0], dtype=np.complex128),
        chart1=0,
        chart2=0,
        residual_norm=0.0,
    )
    with pytest.raises(DerivativeZero, match="F1'"):
        lift.lift_disk(disk)


def test_derivative_vanishing_on_the_circle_is_rejected() -> None:
    """F1 = zeta + zeta^2 / 2 has F1'(-1) = 0 on the boundary."""
    disk = HolomorphicDisk(
        f1=np.array([0.0, 1.0, 0.5], dtype=np.complex128),
        f2=np.array([0.0, -1.0, 0.0], dtype=np.complex128),
        chart1=0,
        chart2=0,
        residual_norm=0.0,
    )
    with pytest.raises(DerivativeZero, match="F1' vanishes on the boundary circle"):
        lift.lift_disk(disk)


def test_under_resolved_fibre_still_lifts() -> None:
    """An unresolved spectral tail of mu is logged and the lift is returned."""
    with patch("miniweyl.welding.TAIL_TOLERANCE", -1.0):
        lifted = lift.lift_disk(identity_disk(), 1)
    assert lifted.mu[0] == pytest.approx(1.0, abs=1e-14)
