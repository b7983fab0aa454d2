"""Continuation of welded disks along parameter paths and one-parameter families.

Three drivers share one pseudo-arclength core:

* `continue_parameter` follows a disk while a scalar parameter enters psi or
  the constraints (radius paths, psi-homotopies). The unknown is [x; lambda].
* `natural_continuation` takes fixed parameter values with a secant predictor,
  for short homotopies where every intermediate Newton history is wanted.
* `continue_free` traces the one-dimensional solution curve left by a
  BoundaryContact or TwoBoundaryPoints selector, switching charts between
  accepted steps when a boundary curve drifts toward a pole.

Steps grow after fast corrector convergence and halve on failure; falling
below MIN_STEP raises StepCollapse carrying the last accepted disk.
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.fft
import scipy.linalg

from . import diffeo, sphere, welding
from .diffeo import DiffeoChain
from .errors import ChartPole, NewtonStall, RankDeficient, StepCollapse
from .models import (
    CenterPoint,
    FlowPerturbed,
    HolomorphicDisk,
    RealArray,
    SphereDiffeo,
    WeldConstraints,
    WeldReport,
)
from .welding import WeldSystem, pack, unpack

logger = logging.getLogger(__name__)

INITIAL_STEP = 0.05
MIN_STEP = 1e-6
MAX_STEP = 0.5
GROWTH = 1.5
SHRINK = 0.5
CORRECTOR_ITERATIONS = 8
FAST_CORRECTOR = 3  # corrector iterations at or below which the step grows
CORRECTOR_TOLERANCE = 1e-12
PARAMETER_FD_STEP = 1e-6
MAX_CONTINUATION_STEPS = 2000

type Equations = Callable[[RealArray], tuple[RealArray, RealArray]]
type StopRule = Callable[[HolomorphicDisk, float], bool]


@dataclass(frozen=True, eq=False)
class DiskPath:
    """Accepted disks of a continuation run with their parameter (or arclength) values."""

    disks: tuple[HolomorphicDisk, ...]
    parameters: tuple[float, ...]
    rejected_steps: int = 0
    reports: tuple[WeldReport, ...] = field(default_factory=tuple)

    @property
    def last(self) -> HolomorphicDisk:
        """Final accepted disk."""
        return self.disks[-1]


def _orient(tangent: RealArray, previous: RealArray | None) -> RealArray:
    tangent = tangent / np.linalg.norm(tangent)
    if previous is not None and tangent @ previous < 0:
        return -tangent
    return tangent


def _correct(equations: Equations, predicted: RealArray, tangent: RealArray) -> tuple[RealArray, int] | None:
    """Gauss-Newton on the equations bordered by <X - predicted, tangent> = 0; None on failure."""
    x = predicted.copy()
    previous = np.inf
    for iteration in range(CORRECTOR_ITERATIONS):
        try:
            values, jacobian = equations(x)
        except ChartPole:
            return None  # pragma: no cover
        values = np.append(values, tangent @ (x - predicted))
        jacobian = np.vstack([jacobian, tangent])
        norm = float(np.linalg.norm(values))
        if not np.isfinite(norm) or norm > 10.0 * previous:
            return None  # pragma: no cover
        if norm <= CORRECTOR_TOLERANCE or (norm < welding.PLATEAU_LEVEL and norm > 0.5 * previous):
            return x, iteration
        q, r = scipy.linalg.qr(jacobian, mode="economic")
        diagonal = np.abs(np.diag(r))
        if diagonal.min() <= welding.RANK_RATIO * diagonal.max():
            return None  # pragma: no cover
        x = x + scipy.linalg.solve_triangular(r, -(q.T @ values))
        previous = norm
    return None


def _advance(
    equations: Equations, x: RealArray, tangent: RealArray, step: float
) -> tuple[RealArray, RealArray, float, int]:
    """One accepted pseudo-arclength step, shrinking the step on corrector failure.

    Returns:
        (x_new, tangent_new, step_taken, rejected): the corrected point, the
        oriented tangent there, the step that succeeded and the number of
        rejected attempts.

    Raises:
        StepCollapse: If the step falls below MIN_STEP (last_good is filled in by callers).
    """
    rejected = 0
    while step >= MIN_STEP:
        result = _correct(equations, x + step * tangent, tangent)
        if result is not None:
            x_new, iterations = result
            _, jacobian = equations(x_new)
            new_tangent = _orient(welding.null_vector(jacobian), tangent)
            taken = step
            if iterations <= FAST_CORRECTOR:
                taken = min(step * GROWTH, MAX_STEP)
            return x_new, new_tangent, taken, rejected
        rejected += 1
        step *= SHRINK
        logger.info("continuation step rejected; retrying with %.3e", step)
    msg = f"continuation step fell below {MIN_STEP:g}"
    raise StepCollapse(msg)


def _parameter_equations(
    psi_at: Callable[[float], SphereDiffeo | DiffeoChain],
    constraints_at: Callable[[float], WeldConstraints],
    disk: HolomorphicDisk,
) -> Equations:
    def equations(xl: RealArray) -> tuple[RealArray, RealArray]:
        x, lam = xl[:-1], float(xl[-1])
        system = WeldSystem(
            diffeo.compile_diffeo(psi_at(lam)), constraints_at(lam), disk.degree, disk.chart1, disk.chart2, x
        )
        values, jacobian = system.evaluate(x)
        assert jacobian is not None
        h = PARAMETER_FD_STEP * max(1.0, abs(lam))
        plus, _ = _at_parameter(psi_at, constraints_at, disk, x, lam + h).evaluate(x, jacobian=False)
        minus, _ = _at_parameter(psi_at, constraints_at, disk, x, lam - h).evaluate(x, jacobian=False)
        return values, np.column_stack([jacobian, (plus - minus) / (2.0 * h)])

    return equations


def _at_parameter(
    psi_at: Callable[[float], SphereDiffeo | DiffeoChain],
    constraints_at: Callable[[float], WeldConstraints],
    disk: HolomorphicDisk,
    reference: RealArray,
    lam: float,
) -> WeldSystem:
    return WeldSystem(
        diffeo.compile_diffeo(psi_at(lam)),
        constraints_at(lam),
        disk.degree,
        disk.chart1,
        disk.chart2,
        reference,
    )


def continue_parameter(
    psi_at: Callable[[float], SphereDiffeo | DiffeoChain],
    constraints_at: Callable[[float], WeldConstraints],
    seed: HolomorphicDisk,
    start: float,
    stop: float,
    *,
    initial_step: float = INITIAL_STEP,
) -> DiskPath:
    """Pseudo-arclength continuation of a disk from parameter `start` to `stop`.

    The seed must solve the problem at `start`; the last disk is landed exactly
    on `stop` by a fixed-parameter weld.

    Raises:
        StepCollapse: If the step collapses, carrying the last accepted disk and parameter.
        ValueError: If the constraints leave a family rather than isolated disks.
    """
    if welding.family_dimension(constraints_at(start)) != 0:
        msg = "parameter continuation needs constraints with isolated solutions"
        raise ValueError(msg)
    direction = 1.0 if stop >= start else -1.0
    disk = welding.solve_disk(psi_at(start), constraints_at(start), seed)
    disks, parameters = [disk], [start]
    equations = _parameter_equations(psi_at, constraints_at, disk)
    xl = np.append(pack(disk.f1), start)
    _, jacobian = equations(xl)
    tangent = welding.null_vector(jacobian)
    tangent = tangent if tangent[-1] * direction > 0 else -tangent
    step, rejected = initial_step, 0
    for _ in range(MAX_CONTINUATION_STEPS):
        lam = float(xl[-1])
        if direction * (lam + step * tangent[-1] - stop) >= 0.0 and tangent[-1] * direction > 0:
            fraction = (stop - lam) / tangent[-1]
            predicted = unpack(xl[:-1] + fraction * tangent[:-1])
            guess = welding.disk_from_f1(psi_at(stop), predicted, disk.chart1, disk.chart2)
            try:
                disks.append(welding.solve_disk(psi_at(stop), constraints_at(stop), guess))
            except (NewtonStall, RankDeficient, ChartPole) as e:
                msg = f"landing on parameter {stop:g} failed: {e}"
                raise StepCollapse(msg, last_good=disks[-1], achieved=parameters[-1]) from e
            parameters.append(stop)
            return DiskPath(tuple(disks), tuple(parameters), rejected)
        try:
            xl, tangent, step, attempts = _advance(equations, xl, tangent, step)
        except StepCollapse as e:
            raise StepCollapse(str(e), last_good=disks[-1], achieved=parameters[-1]) from e
        rejected += attempts
        disk = welding.disk_from_f1(psi_at(float(xl[-1])), unpack(xl[:-1]), disk.chart1, disk.chart2)
        disks.append(disk)
        parameters.append(float(xl[-1]))
        logger.debug("parameter %.6g accepted (step %.3e)", parameters[-1], step)
    msg = f"continuation did not reach {stop:g} in {MAX_CONTINUATION_STEPS} steps"
    raise StepCollapse(msg, last_good=disks[-1], achieved=parameters[-1])


def natural_continuation(
    psi_at: Callable[[float], SphereDiffeo | DiffeoChain],
    constraints_at: Callable[[float], WeldConstraints],
    seed: HolomorphicDisk,
    values: Sequence[float],
) -> DiskPath:
    """Weld at each parameter value in turn, predicting by the secant through the last two disks.

    Raises:
        StepCollapse: If a weld fails, carrying the last accepted disk and parameter.
    """
    disks: list[HolomorphicDisk] = []
    reports: list[WeldReport] = []
    guess = seed
    for index, lam in enumerate(values):
        try:
            disk, report = welding.weld(psi_at(lam), constraints_at(lam), guess)
        except (NewtonStall, RankDeficient, ChartPole) as e:
            msg = f"weld at parameter {lam:g} failed: {e}"
            last_good = disks[-1] if disks else None
            achieved = values[index - 1] if index else None
            raise StepCollapse(msg, last_good=last_good, achieved=achieved) from e
        disks.append(disk)
        reports.append(report)
        if index + 1 < len(values):
            coeffs = disk.f1
            if len(disks) > 1 and len(disks[-2].f1) == len(coeffs):
                ratio = (values[index + 1] - lam) / (lam - values[index - 1])
                coeffs = coeffs + ratio * (coeffs - disks[-2].f1)
            guess = welding.disk_from_f1(psi_at(values[index + 1]), coeffs, disk.chart1, disk.chart2)
    return DiskPath(tuple(disks), tuple(values), reports=tuple(reports))


def flow_homotopy(target: FlowPerturbed) -> Callable[[float], FlowPerturbed]:
    """psi_lambda: the target's flow run for lambda times its flow time (lambda = 0 is the base map)."""

    def psi_at(lam: float) -> FlowPerturbed:
        return FlowPerturbed(target.base, target.harmonics, lam * target.flow_time)

    return psi_at


def homotopy(
    target: FlowPerturbed,
    constraints: WeldConstraints,
    seed: HolomorphicDisk,
    steps: int | None = None,
) -> DiskPath:
    """Carry a disk solved for target.base over to `target`.

    With `steps` the homotopy parameter takes that many equal increments;
    otherwise pseudo-arclength continuation chooses the steps.
    """
    psi_at = flow_homotopy(target)
    if steps is not None:
        values = np.linspace(0.0, 1.0, steps + 1)
        return natural_continuation(psi_at, lambda _lam: constraints, seed, [float(v) for v in values])
    return continue_parameter(psi_at, lambda _lam: constraints, seed, 0.0, 1.0)


def radius_path(
    psi: SphereDiffeo | DiffeoChain, anchor: CenterPoint, seed: HolomorphicDisk, radius: float
) -> DiskPath:
    """Continue a CenterPoint disk from anchor.radius to `radius`."""
    return continue_parameter(
        lambda _r: psi,
        lambda r: CenterPoint(anchor.z, anchor.w, r),
        seed,
        anchor.radius,
        radius,
    )


def transport_tangent(tangent: RealArray, old: HolomorphicDisk, new: HolomorphicDisk) -> RealArray:
    """Re-express a packed F1 variation of `old` in the chart of `new` (same degree)."""
    m = welding.node_count(old.degree)
    w = welding.boundary_values(old.f1, m)
    transition = sphere.chart_matrix(new.chart1) @ sphere.chart_matrix(old.chart1).conj().T
    _, derivative, _ = sphere.mobius_wirtinger(transition, w, antiholomorphic=False)
    variation = derivative * welding.boundary_values(unpack(tangent), m)
    moved = pack(welding.pad(scipy.fft.fft(variation) / m, new.degree))
    return moved / np.linalg.norm(moved)


def continue_free(
    psi: SphereDiffeo | DiffeoChain,
    constraints: WeldConstraints,
    seed: HolomorphicDisk,
    stop: StopRule,
    *,
    initial_step: float = INITIAL_STEP,
    max_steps: int = MAX_CONTINUATION_STEPS,
    orientation: RealArray | None = None,
) -> DiskPath:
    """Trace the one-parameter family of disks satisfying `constraints` from `seed`.

    The walk stops after the first accepted disk for which stop(disk, arclength)
    holds. `orientation` picks the direction of travel (a packed F1 variation
    at the seed); by default the sign of the computed tangent is kept.

    Raises:
        StepCollapse: If the step collapses or max_steps is exhausted.
        ValueError: If the constraints isolate disks instead of leaving a family.
    """
    if welding.family_dimension(constraints) != 1:
        msg = "free continuation needs constraints leaving a one-parameter family"
        raise ValueError(msg)
    chain = diffeo.compile_diffeo(psi)
    disk = welding.solve_disk(chain, constraints, seed)
    disks, arclengths = [disk], [0.0]
    tangent: RealArray | None = orientation
    step, rejected, travelled = initial_step, 0, 0.0
    for _ in range(max_steps):
        x = pack(disk.f1)
        system = WeldSystem(chain, constraints, disk.degree, disk.chart1, disk.chart2, x)

        def equations(y: RealArray, system: WeldSystem = system) -> tuple[RealArray, RealArray]:
            values, jacobian = system.evaluate(y)
            assert jacobian is not None
            return values, jacobian

        _, jacobian = equations(x)
        tangent = _orient(welding.null_vector(jacobian), tangent)
        try:
            x_new, tangent, next_step, attempts = _advance(equations, x, tangent, step)
        except StepCollapse as e:
            raise StepCollapse(str(e), last_good=disk, achieved=travelled) from e
        rejected += attempts
        travelled += float(np.linalg.norm(x_new - x))
        step = next_step
        accepted = welding.disk_from_f1(chain, unpack(x_new), disk.chart1, disk.chart2)
        moved = welding.auto_rechart(chain, accepted)
        if moved is not accepted:
            tangent = transport_tangent(tangent, accepted, moved)
        disk = moved
        disks.append(disk)
        arclengths.append(travelled)
        if stop(disk, travelled):
            return DiskPath(tuple(disks), tuple(arclengths), rejected)
    msg = f"family not finished after {max_steps} steps"
    raise StepCollapse(msg, last_good=disk, achieved=travelled)
