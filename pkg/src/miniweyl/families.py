"""Geodesic families of disks and the endpoints of null families.

Each selector picks out a causal type of moduli geodesic: the disks through a
point of Z - P (CenterPoint, radius varying) are time-like, the disks tangent
to a direction at a point of the graph (BoundaryContact) are null, and the
disks through two boundary points (TwoBoundaryPoints) are space-like and close
up into loops.

Seeds come from the closed-form de Sitter family. Mobius conjugation carries
a seed across exactly; flow perturbations are reached by homotopy in the
flow time.
"""

import logging
import math

import numpy as np
import scipy.spatial.distance

from . import continuation, diffeo, moduli, sphere, welding
from .continuation import DiskPath
from .desitter import center_point_param, contact_param, two_point_param
from .diffeo import DiffeoChain
from .errors import NonMonotoneFamily, StepCollapse
from .models import (
    Antipodal,
    BoundaryContact,
    CenterPoint,
    Chart,
    ComplexArray,
    DiskParam,
    FlowPerturbed,
    GeodesicFamily,
    HolomorphicDisk,
    MobiusConjugated,
    MobiusMap,
    RealArray,
    SphereDiffeo,
    SpherePoint,
    TangentKind,
    TwoBoundaryPoints,
    WeldConstraints,
)
from .welding import WeldSystem, pack

logger = logging.getLogger(__name__)

HOMOTOPY_STEPS = 10  # flow-time increments when a free selector is carried to a perturbed map
RADIUS_SPAN = math.exp(2.0)  # default time-like span: radius / RADIUS_SPAN .. radius * RADIUS_SPAN
NULL_MARGIN = 0.05  # null families stop at Omega = NULL_MARGIN and 4 pi - NULL_MARGIN
ENDPOINT_DEGREE = 64
EXTRAPOLATION_WINDOW = 1.0  # disks with sqrt(area) below this feed the endpoint fit
EXTRAPOLATION_ORDER = 3
LOOP_MIN_TRAVEL = 1.0  # arclength before a space-like family may close
LOOP_CAPTURE = 0.3  # Hausdorff distance of boundary curves that counts as a return


def _pull_back(constraints: WeldConstraints, pre: MobiusMap, post: MobiusMap) -> WeldConstraints:
    """Constraints for the base map whose disks transform into disks meeting `constraints`."""
    match constraints:
        case CenterPoint(z=z, w=w, radius=radius):
            _, derivative, _ = sphere.mobius_wirtinger(
                pre.matrix, np.array([z.affine]), antiholomorphic=False
            )
            return CenterPoint(
                sphere.mobius_apply(pre, z),
                sphere.mobius_apply(sphere.mobius_inverse(post), w),
                radius * float(abs(derivative[0])),
            )
        case BoundaryContact(x=x, direction=direction):
            _, derivative, _ = sphere.mobius_wirtinger(
                pre.matrix, np.array([x.affine]), antiholomorphic=False
            )
            return BoundaryContact(sphere.mobius_apply(pre, x), direction + float(np.angle(derivative[0])))
        case TwoBoundaryPoints(x=x, y=y):
            return TwoBoundaryPoints(sphere.mobius_apply(pre, x), sphere.mobius_apply(pre, y))


def desitter_param(constraints: WeldConstraints) -> DiskParam:
    """A closed-form de Sitter disk meeting `constraints` in the standard chart."""
    match constraints:
        case CenterPoint(z=z, w=w, radius=radius):
            return center_point_param(z, w, radius)
        case BoundaryContact(x=x, direction=direction):
            return contact_param(x, direction)
        case TwoBoundaryPoints(x=x, y=y):
            return two_point_param(x, y)


def _unrotate(psi: SphereDiffeo | DiffeoChain, disk: HolomorphicDisk) -> HolomorphicDisk:
    """Reparameterize by a rotation of D so that F1'(0) is real positive."""
    phase = np.exp(-1j * np.angle(disk.f1[1]) * np.arange(len(disk.f1)))
    return welding.disk_from_f1(psi, disk.f1 * phase, disk.chart1, disk.chart2)


def seed_disk(
    psi: SphereDiffeo, constraints: WeldConstraints, degree: int = welding.DEFAULT_DEGREE
) -> HolomorphicDisk:
    """A solved disk for psi meeting `constraints`, continued from the de Sitter family.

    Raises:
        ValueError: If the constraints have no de Sitter counterpart (a centre on the graph).
        NewtonStall: If a weld along the way fails.
        StepCollapse: If the flow-time homotopy collapses.
    """
    match psi:
        case Antipodal():
            seed = welding.desitter_seed(desitter_param(constraints), degree)
            return welding.solve_disk(psi, constraints, seed)
        case MobiusConjugated(pre=pre, post=post, base=base):
            base_disk = seed_disk(base, _pull_back(constraints, pre, post), degree)
            moved = welding.transform_disk(psi, base_disk, pre, post)
            if isinstance(constraints, CenterPoint):
                moved = _unrotate(psi, moved)
            return welding.solve_disk(psi, constraints, moved)
        case FlowPerturbed(base=base):
            start = seed_disk(base, constraints, degree)
            steps = HOMOTOPY_STEPS if welding.family_dimension(constraints) else None
            return continuation.homotopy(psi, constraints, start, steps=steps).last


def family_kind(constraints: WeldConstraints) -> TangentKind:
    """Causal type of the geodesic cut out by a selector."""
    match constraints:
        case CenterPoint():
            return TangentKind.TIMELIKE
        case BoundaryContact():
            return TangentKind.NULL
        case TwoBoundaryPoints():
            return TangentKind.SPACELIKE


def family_tangent(
    psi: SphereDiffeo | DiffeoChain, constraints: WeldConstraints, disk: HolomorphicDisk
) -> RealArray:
    """Unit packed F1 variation along the one-parameter family through `disk`."""
    x = pack(disk.f1)
    system = WeldSystem(diffeo.compile_diffeo(psi), constraints, disk.degree, disk.chart1, disk.chart2, x)
    _, jacobian = system.evaluate(x)
    assert jacobian is not None
    return welding.null_vector(jacobian)


def _strictly_monotone(values: list[float]) -> bool:
    steps = np.diff(values)
    return bool(np.all(steps > 0) or np.all(steps < 0))


def check_monotone(omegas: tuple[float, ...], kind: TangentKind) -> None:
    """Omega must move strictly one way along time-like and null families.

    Raises:
        NonMonotoneFamily: Naming the first member where the direction breaks.
    """
    if _strictly_monotone(list(omegas)):
        return
    direction = np.sign(omegas[-1] - omegas[0])
    first = int(np.flatnonzero(np.sign(np.diff(omegas)) != direction)[0]) + 1
    msg = f"Omega is not strictly monotone along the {kind} family (breaks at member {first})"
    raise NonMonotoneFamily(msg)


def _omegas(disks: tuple[HolomorphicDisk, ...]) -> tuple[float, ...]:
    return tuple(moduli.omega_area(disk) for disk in disks)


def _join(backward: DiskPath, forward: DiskPath) -> tuple[HolomorphicDisk, ...]:
    """Disks of two paths leaving the same seed, in order from the end of `backward`."""
    return (*reversed(backward.disks), *forward.disks[1:])


def _outside(low: float, high: float) -> continuation.StopRule:
    def stop(disk: HolomorphicDisk, _arclength: float) -> bool:
        omega = moduli.omega_area(disk)
        return omega <= low or omega >= high

    return stop


def _trace_null(
    chain: DiffeoChain, contact: BoundaryContact, seed: HolomorphicDisk, low: float, high: float
) -> tuple[DiskPath, DiskPath]:
    """Both halves of a null family from `seed`, (towards Omega = low, towards Omega = high).

    Raises:
        StepCollapse: With the achieved Omega, if a half degenerates before its target.
    """
    tangent = family_tangent(chain, contact, seed)
    paths: list[DiskPath] = []
    for orientation in (tangent, -tangent):
        try:
            stop = _outside(low, high)
            paths.append(continuation.continue_free(chain, contact, seed, stop, orientation=orientation))
        except StepCollapse as e:
            last = e.last_good if isinstance(e.last_good, HolomorphicDisk) else None
            achieved = moduli.omega_area(last) if last is not None else None
            msg = f"null family stopped short of its area target: {e}"
            raise StepCollapse(msg, last_good=last, achieved=achieved) from e
    first, second = paths
    if moduli.omega_area(first.last) > moduli.omega_area(second.last):
        first, second = second, first
    if moduli.omega_area(first.last) > low or moduli.omega_area(second.last) < high:
        msg = "null family did not reach both ends of the area range"
        raise StepCollapse(msg, last_good=second.last, achieved=moduli.omega_area(second.last))
    return first, second


def _boundary_unit_vectors(disk: HolomorphicDisk) -> RealArray:
    (z0, z1), _ = welding.boundary_points(disk)
    return sphere.to_unit_vectors(z0, z1)


def _curve_distance(a: RealArray, b: RealArray) -> float:
    """Hausdorff distance between two sampled curves in R^3."""
    forward = scipy.spatial.distance.directed_hausdorff(a, b)[0]
    backward = scipy.spatial.distance.directed_hausdorff(b, a)[0]
    return float(max(forward, backward))


def _start_direction(points: RealArray) -> RealArray:
    """Chord through the neighbours of the sample at zeta = 1: the boundary orientation there."""
    return points[1] - points[-1]


class _LoopWatch:
    """Stop rule for space-like families: stop just past the closest return to the first disk."""

    def __init__(self, first: HolomorphicDisk) -> None:
        self.curve = _boundary_unit_vectors(first)
        self.direction = _start_direction(self.curve)
        self.previous = math.inf

    def __call__(self, disk: HolomorphicDisk, arclength: float) -> bool:
        if arclength < LOOP_MIN_TRAVEL:
            return False
        curve = _boundary_unit_vectors(disk)
        if _start_direction(curve) @ self.direction <= 0.0:
            self.previous = math.inf
            return False
        distance = _curve_distance(curve, self.curve)
        if distance < LOOP_CAPTURE and distance > self.previous:
            return True
        self.previous = distance if distance < LOOP_CAPTURE else math.inf
        return False


def loop_closure(
    psi: SphereDiffeo | DiffeoChain,
    constraints: TwoBoundaryPoints,
    first: HolomorphicDisk,
    returning: HolomorphicDisk,
) -> float:
    """Relative coefficient distance between `first` and the returning member re-solved onto it.

    The returning disk is re-expanded in the first disk's charts and solved on
    the hyperplane through the first disk normal to the family; a family that
    closes up lands back on the first disk.

    Raises:
        ChartPole: If the returning disk does not fit the first disk's charts.
        NewtonStall: If the re-solve fails.
    """
    chain = diffeo.compile_diffeo(psi)
    moved = welding.rechart(chain, returning, first.chart1, first.chart2)
    x0 = pack(first.f1)
    system = WeldSystem(chain, constraints, first.degree, first.chart1, first.chart2, x0)
    system = system.with_hyperplane(family_tangent(chain, constraints, first), x0)
    x, _, _ = welding.gauss_newton(system, pack(welding.pad(moved.f1, first.degree)))
    return float(np.linalg.norm(x - x0) / np.linalg.norm(x0))


def _timelike_family(
    psi: SphereDiffeo, anchor: CenterPoint, span: tuple[float, float] | None, degree: int
) -> GeodesicFamily:
    low, high = span if span is not None else (anchor.radius / RADIUS_SPAN, anchor.radius * RADIUS_SPAN)
    seed = seed_disk(psi, anchor, degree)
    down = continuation.radius_path(psi, anchor, seed, low)
    up = continuation.radius_path(psi, anchor, seed, high)
    disks = _join(down, up)
    omegas = _omegas(disks)
    check_monotone(omegas, TangentKind.TIMELIKE)
    return GeodesicFamily(TangentKind.TIMELIKE, disks, omegas, anchor)


def _null_family(
    psi: SphereDiffeo, contact: BoundaryContact, span: tuple[float, float] | None, degree: int
) -> GeodesicFamily:
    low, high = span if span is not None else (NULL_MARGIN, 4.0 * math.pi - NULL_MARGIN)
    chain = diffeo.compile_diffeo(psi)
    seed = seed_disk(psi, contact, degree)
    past, future = _trace_null(chain, contact, seed, low, high)
    disks = _join(past, future)
    omegas = _omegas(disks)
    check_monotone(omegas, TangentKind.NULL)
    return GeodesicFamily(TangentKind.NULL, disks, omegas, contact)


def _spacelike_family(psi: SphereDiffeo, anchors: TwoBoundaryPoints, degree: int) -> GeodesicFamily:
    chain = diffeo.compile_diffeo(psi)
    seed = seed_disk(psi, anchors, degree)
    path = continuation.continue_free(chain, anchors, seed, _LoopWatch(seed))
    disks = path.disks[:-1]
    closure = loop_closure(chain, anchors, disks[0], disks[-1])
    logger.info("space-like family closed after %d disks (closure %.2e)", len(disks), closure)
    return GeodesicFamily(TangentKind.SPACELIKE, disks, _omegas(disks), anchors, closure_error=closure)


def geodesic_family(
    psi: SphereDiffeo,
    constraints: WeldConstraints,
    span: tuple[float, float] | None = None,
    *,
    degree: int = welding.DEFAULT_DEGREE,
) -> GeodesicFamily:
    """Trace the geodesic of moduli space cut out by a selector.

    Args:
        psi: The boundary diffeomorphism.
        constraints: CenterPoint for a time-like family (the radius varies),
            BoundaryContact for a null family, TwoBoundaryPoints for a
            space-like loop.
        span: Radius interval for time-like families, Omega interval for null
            families (defaults: a factor e^2 either side of the anchor radius,
            and NULL_MARGIN inside (0, 4 pi)). Space-like families run until
            they close and ignore it.
        degree: Truncation degree of the seed.

    Returns:
        The family with Omega recorded for each disk; space-like families also
        carry their loop closure error.

    Raises:
        StepCollapse: If continuation collapses before the span is covered.
        NonMonotoneFamily: If Omega turns back along a time-like or null family.
    """
    match constraints:
        case CenterPoint():
            return _timelike_family(psi, constraints, span, degree)
        case BoundaryContact():
            return _null_family(psi, constraints, span, degree)
        case TwoBoundaryPoints():
            return _spacelike_family(psi, constraints, degree)


def _curve_centroid(coeffs: ComplexArray, chart: Chart, m: int) -> RealArray:
    """Arclength-weighted mean of a boundary curve's unit vectors."""
    zeta = welding.boundary_nodes(m)
    w = welding.boundary_values(coeffs, m)
    speed = np.abs(zeta * welding.boundary_values(welding.derivative_coeffs(coeffs), m))
    weights = speed * np.sqrt(sphere.round_density(w))
    points = sphere.to_unit_vectors(*sphere.from_chart(w, chart))
    return weights @ points / weights.sum()


def _limit_point(scales: RealArray, centroids: RealArray) -> SpherePoint:
    """Extrapolate centroids of shrinking curves to scale 0 by a polynomial fit."""
    order = min(EXTRAPOLATION_ORDER, len(scales) - 1)
    fit = np.polynomial.polynomial.polyfit(scales, centroids, order)
    z0, z1 = sphere.from_unit_vectors(fit[0])
    return SpherePoint(complex(z0), complex(z1))


def _shrinking_end(disks: tuple[HolomorphicDisk, ...], areas: RealArray, *, second: bool) -> SpherePoint:
    """Limit point of the projection whose area `areas` tends to zero along `disks`."""
    scales = np.sqrt(np.maximum(areas, 0.0))
    window = scales <= EXTRAPOLATION_WINDOW
    if window.sum() <= EXTRAPOLATION_ORDER:
        window = np.zeros_like(window)
        window[np.argsort(scales)[: EXTRAPOLATION_ORDER + 1]] = True
    chosen = [disk for disk, keep in zip(disks, window, strict=True) if keep]
    centroids = np.array(
        [
            _curve_centroid(d.f2, d.chart2, welding.node_count(d.degree))
            if second
            else _curve_centroid(d.f1, d.chart1, welding.node_count(d.degree))
            for d in chosen
        ]
    )
    return _limit_point(scales[window], centroids)


def null_family_endpoints(
    psi: SphereDiffeo,
    contact: BoundaryContact,
    *,
    margin: float = NULL_MARGIN,
    degree: int = ENDPOINT_DEGREE,
) -> tuple[SpherePoint, SpherePoint]:
    """Past and future limit points of the null family through `contact`.

    Towards Omega = 0 the second projection shrinks to a point of the second
    sphere (the past point); towards Omega = 4 pi the first projection shrinks
    to a point of the first sphere (the future point). Both are extrapolated
    from the centroids of the shrinking boundary curves. For contact at z the
    past point is psi(z) and the future point is z.

    Raises:
        StepCollapse: If the family degenerates early, carrying the last disk and its Omega.
    """
    chain = diffeo.compile_diffeo(psi)
    seed = seed_disk(psi, contact, degree)
    past, future = _trace_null(chain, contact, seed, margin, 4.0 * math.pi - margin)
    past_areas = np.array(_omegas(past.disks))
    future_areas = 4.0 * math.pi - np.array(_omegas(future.disks))
    past_point = _shrinking_end(past.disks, past_areas, second=True)
    future_point = _shrinking_end(future.disks, future_areas, second=False)
    logger.debug("null family endpoints: past %s, future %s", past_point.affine, future_point.affine)
    return past_point, future_point
