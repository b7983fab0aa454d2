"""Unit tests for parameter and free continuation of welded disks."""

from unittest.mock import patch

import numpy as np
import pytest

from miniweyl import continuation, welding
from miniweyl.errors import NewtonStall, StepCollapse
from miniweyl.models import Antipodal, BoundaryContact, HolomorphicDisk, TwoBoundaryPoints
from tests.helpers.factories import identity_disk, make_center, make_perturbed, make_point


def test_radius_path_reaches_target() -> None:
    """Centred antipodal disks are F1 = r zeta, F2 = -zeta / r."""
    path = continuation.radius_path(Antipodal(), make_center(), identity_disk(), 1.5)
    assert path.parameters[0] == 1.0
    assert path.parameters[-1] == 1.5
    expected = np.zeros(path.last.degree + 1, dtype=np.complex128)
    expected[1] = 1.5
    np.testing.assert_allclose(path.last.f1, expected, atol=1e-9)
    assert path.last.f2[1] == pytest.approx(-1.0 / 1.5, abs=1e-9)


def test_radius_path_downwards() -> None:
    """Parameters decrease monotonically when the target is below the start."""
    path = continuation.radius_path(Antipodal(), make_center(), identity_disk(), 0.6)
    assert np.all(np.diff(path.parameters) < 0)
    assert path.last.f1[1].real == pytest.approx(0.6, abs=1e-9)


def test_homotopy_to_perturbed_map() -> None:
    """Pseudo-arclength homotopy carries the identity disk to a solved disk of the target."""
    target = make_perturbed(0.05)
    path = continuation.homotopy(target, make_center(), identity_disk())
    residual, _ = welding.boundary_residual(target, path.last)
    assert residual < 1e-10
    assert path.parameters[-1] == 1.0


def test_natural_homotopy_keeps_reports() -> None:
    """Fixed increments record one weld report per parameter value."""
    path = continuation.homotopy(make_perturbed(0.05), make_center(), identity_disk(), steps=4)
    assert len(path.disks) == 5
    assert len(path.reports) == 5
    np.testing.assert_allclose(path.parameters, [0.0, 0.25, 0.5, 0.75, 1.0])


def test_flow_homotopy_scales_flow_time() -> None:
    """lambda = 0 is the base map and lambda = 1 the target."""
    target = make_perturbed(0.05)
    psi_at = continuation.flow_homotopy(target)
    assert psi_at(0.0).flow_time == 0.0
    assert psi_at(1.0).flow_time == target.flow_time


def test_parameter_continuation_rejects_families() -> None:
    """Selectors leaving a family cannot drive parameter continuation."""
    contact = BoundaryContact(make_point(1.0), 0.5 * np.pi)
    with pytest.raises(ValueError, match="isolated"):
        continuation.continue_parameter(
            lambda _lam: Antipodal(), lambda _lam: contact, identity_disk(), 0.0, 1.0
        )


def test_free_continuation_rejects_isolated_disks() -> None:
    """The centre selector has no family to trace."""
    with pytest.raises(ValueError, match="one-parameter"):
        continuation.continue_free(Antipodal(), make_center(), identity_disk(), lambda _d, _s: True)


def test_free_continuation_stays_on_family() -> None:
    """Every accepted disk of a two-point family solves the weld and the constraints."""
    constraints = TwoBoundaryPoints(make_point(1.0), make_point(-1.0))
    path = continuation.continue_free(
        Antipodal(), constraints, identity_disk(), lambda _disk, arclength: arclength > 0.2
    )
    assert len(path.disks) > 1
    assert np.all(np.diff(path.parameters) > 0)
    for disk in path.disks:
        assert disk.residual_norm < 1e-10
        assert welding.constraint_residual(disk, constraints) < 1e-10


def test_transport_tangent_is_unit() -> None:
    """Transported tangents are renormalized."""
    disk = identity_disk()
    moved = welding.rechart(Antipodal(), disk, make_point(5.0), 0)
    tangent = np.zeros(2 * (disk.degree + 1))
    tangent[1] = 1.0
    assert np.linalg.norm(continuation.transport_tangent(tangent, disk, moved)) == pytest.approx(1.0)


def test_free_continuation_runs_out_of_steps() -> None:
    """A stop rule that never holds ends in StepCollapse carrying the last disk."""
    constraints = TwoBoundaryPoints(make_point(1.0), make_point(-1.0))
    with pytest.raises(StepCollapse, match="not finished after 2 steps") as info:
        continuation.continue_free(
            Antipodal(), constraints, identity_disk(), lambda _d, _s: False, max_steps=2
        )
    assert isinstance(info.value.last_good, HolomorphicDisk)
    assert info.value.achieved is not None
    assert info.value.achieved > 0.0


def test_free_continuation_step_collapse() -> None:
    """When no corrector succeeds the step shrinks until it collapses."""
    constraints = TwoBoundaryPoints(make_point(1.0), make_point(-1.0))
    with (
        patch("miniweyl.continuation._correct", return_value=None),
        pytest.raises(StepCollapse, match="fell below") as info,
    ):
        continuation.continue_free(Antipodal(), constraints, identity_disk(), lambda _d, _s: True)
    assert info.value.achieved == 0.0


def test_parameter_continuation_step_collapse() -> None:
    """A collapse during parameter continuation reports the start as the achieved parameter."""
    with (
        patch("miniweyl.continuation.CORRECTOR_ITERATIONS", 0),
        pytest.raises(StepCollapse, match="fell below") as info,
    ):
        continuation.radius_path(Antipodal(), make_center(), identity_disk(), 1.5)
    assert info.value.achieved == 1.0


def test_parameter_continuation_step_budget() -> None:
    """Parameter continuation gives up after its step budget."""
    with (
        patch("miniweyl.continuation.MAX_CONTINUATION_STEPS", 0),
        pytest.raises(StepCollapse, match="did not reach 1.5"),
    ):
        continuation.radius_path(Antipodal(), make_center(), identity_disk(), 1.5)


def test_parameter_continuation_landing_failure() -> None:
    """A failed landing weld is reported with the last accepted disk."""
    start = welding.solve_disk(Antipodal(), make_center(), identity_disk())
    with (
        patch("miniweyl.welding.solve_disk", side_effect=[start, NewtonStall("stalled", (1e-3,))]),
        pytest.raises(StepCollapse, match="landing on parameter 1.01 failed") as info,
    ):
        continuation.radius_path(Antipodal(), make_center(), identity_disk(), 1.01)
    assert info.value.last_good is start
    assert info.value.achieved == 1.0


def test_natural_continuation_weld_failure() -> None:
    """A failed weld midway keeps the disks accepted before it."""
    real_weld = welding.weld
    calls: list[float] = []

    def weld(*args: object, **kwargs: object) -> object:
        calls.append(1.0)
        if len(calls) == 2:
            raise NewtonStall("stalled", (1e-3,))
        return real_weld(*args, **kwargs)  # pyright: ignore[reportArgumentType]

    with (
        patch("miniweyl.welding.weld", side_effect=weld),
        pytest.raises(StepCollapse, match="weld at parameter 0.5 failed") as info,
    ):
        continuation.homotopy(make_perturbed(0.05), make_center(), identity_disk(), steps=2)
    assert isinstance(info.value.last_good, HolomorphicDisk)
    assert info.value.achieved == 0.0


def test_natural_continuation_first_weld_failure() -> None:
    """Nothing is accepted when the first weld fails."""
    with (
        patch("miniweyl.welding.weld", side_effect=NewtonStall("stalled", (1e-3,))),
        pytest.raises(StepCollapse, match="weld at parameter 0 failed") as info,
    ):
        continuation.homotopy(make_perturbed(0.05), make_center(), identity_disk(), steps=2)
    assert info.value.last_good is None
    assert info.value.achieved is None
