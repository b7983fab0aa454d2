"""Null geodesics through conformal infinity, refocusing and the scattering map.

Geodesics are integrated in the compactified chart with coordinate time T as
the independent variable. Writing V = (1, dx/dT), the Weyl geodesic equation in
projective form reads

    d^2 x^i / dT^2 = -Gamma^i(V, V) + Gamma^T(V, V) V^i,

in which the singular alpha_hat terms cancel on null vectors. After every
accepted step the spatial velocity is rescaled onto the null cone, and
trajectories leaving the unit disk of their chart switch between charts 0
and 1 (w -> 1/w). Endpoints on the final infinity are obtained by Taylor steps
from one and two collar widths away, combined by Richardson extrapolation.
"""

import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rungekutta, sphere
from .differences import SPRAY_STEP
from .errors import MultipleSignChanges, TrappedGeodesic
from .models import (
    ComplexArray,
    JacobiTransport,
    NullPath,
    RealArray,
    RefocusReport,
    ScatteringSample,
    SpherePoint,
    WeylChartStructure,
)
from .weyl import connection_arrays

logger = logging.getLogger(__name__)

RTOL = 1e-10
ATOL = 1e-12
REFOCUS_TOLERANCE = 1e-4  # dispersion above which a scattering sample is flagged
CHART_SWITCH_RADIUS = 2.0
JACOBIAN_STEP = 1e-4
JACOBI_FD_STEP = 1e-4
REFOCUS_RATIO = 1e-4  # |J(end)| / max |J| below which a geodesic counts as refocusing

_POSITION = slice(0, 2)
_VELOCITY = slice(2, 4)
_JACOBI_POSITION = slice(4, 6)
_JACOBI_VELOCITY = slice(6, 8)
_LOG_SIGMA = 8
_AFFINE = 9


def spray_terms(
    structure: WeylChartStructure, t: float, position: RealArray, velocity: RealArray, chart: int
) -> tuple[RealArray, RealArray]:
    """Projective acceleration d^2x/dT^2 and Gamma^T(V, V) for batches of shape (n, 2)."""
    points = np.concatenate([np.full((len(position), 1), t), position], axis=1)
    gamma, _ = connection_arrays(structure, points, chart, SPRAY_STEP, richardson=False)
    v = np.concatenate([np.ones((len(velocity), 1)), velocity], axis=1)
    contracted = np.einsum("nkij,ni,nj->nk", gamma, v, v)
    return -contracted[:, 1:] + contracted[:, :1] * velocity, contracted[:, 0]


def _null_coefficients(
    structure: WeylChartStructure, t: float, position: RealArray, velocity: RealArray, chart: int
) -> tuple[RealArray, RealArray, RealArray]:
    points = np.concatenate([np.full((len(position), 1), t), position], axis=1)
    g = structure.g_hat(points, chart)
    quadratic = np.einsum("nij,ni,nj->n", g[:, 1:, 1:], velocity, velocity)
    linear = np.einsum("ni,ni->n", g[:, 0, 1:], velocity)
    return quadratic, linear, g[:, 0, 0]


def null_scale(
    structure: WeylChartStructure, t: float, position: RealArray, velocity: RealArray, chart: int
) -> RealArray:
    """Positive s with g_hat((1, s v), (1, s v)) = 0."""
    a, b, c = _null_coefficients(structure, t, position, velocity, chart)
    return (-b + np.sqrt(b * b - a * c)) / a


def transverse_component(
    structure: WeylChartStructure,
    t: float,
    position: RealArray,
    velocity: RealArray,
    variation: RealArray,
    chart: int,
) -> RealArray:
    """Signed component of a spatial variation orthogonal to the velocity (chart independent)."""
    points = np.concatenate([np.full((len(position), 1), t), position], axis=1)
    h = structure.g_hat(points, chart)[:, 1:, 1:]
    cross = velocity[:, 0] * variation[:, 1] - velocity[:, 1] * variation[:, 0]
    speed = np.sqrt(np.einsum("nij,ni,nj->n", h, velocity, velocity))
    return np.sqrt(np.linalg.det(h)) * cross / speed


def _invert_chart(rows: RealArray, *, jacobi: bool) -> RealArray:
    """Re-express states in the chart related by w -> 1/w."""
    out = rows.copy()
    w = rows[:, 0] + 1j * rows[:, 1]
    w_dot = rows[:, 2] + 1j * rows[:, 3]
    new_w, new_w_dot = 1.0 / w, -w_dot / w**2
    out[:, 0], out[:, 1] = new_w.real, new_w.imag
    out[:, 2], out[:, 3] = new_w_dot.real, new_w_dot.imag
    if jacobi:
        dw = rows[:, 4] + 1j * rows[:, 5]
        dw_dot = rows[:, 6] + 1j * rows[:, 7]
        new_dw = -dw / w**2
        new_dw_dot = -dw_dot / w**2 + 2.0 * dw * w_dot / w**3
        out[:, 4], out[:, 5] = new_dw.real, new_dw.imag
        out[:, 6], out[:, 7] = new_dw_dot.real, new_dw_dot.imag
    return out


@dataclass
class _NullSystem:
    """Right-hand side and projection for a batch of null geodesics (and Jacobi fields)."""

    structure: WeylChartStructure
    charts: np.ndarray
    jacobi: bool = False
    drift: RealArray = field(default_factory=lambda: np.zeros(0))
    chart_history: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.drift = np.zeros(len(self.charts))

    def spray(self, t: float, position: RealArray, velocity: RealArray) -> tuple[RealArray, RealArray]:
        acceleration = np.empty_like(velocity)
        time_part = np.empty(len(velocity))
        for tag in np.unique(self.charts):
            mask = self.charts == tag
            acceleration[mask], time_part[mask] = spray_terms(
                self.structure, t, position[mask], velocity[mask], int(tag)
            )
        return acceleration, time_part

    def rhs(self, t: float, y: RealArray) -> RealArray:
        position, velocity = y[:, _POSITION], y[:, _VELOCITY]
        acceleration, time_part = self.spray(t, position, velocity)
        if not self.jacobi:
            return np.concatenate([velocity, acceleration], axis=1)
        dx, dv = y[:, _JACOBI_POSITION], y[:, _JACOBI_VELOCITY]
        size = np.maximum(np.max(np.abs(y[:, 4:8]), axis=1, keepdims=True), 1e-300)
        eps = JACOBI_FD_STEP / size
        plus, _ = self.spray(t, position + eps * dx, velocity + eps * dv)
        minus, _ = self.spray(t, position - eps * dx, velocity - eps * dv)
        d_acceleration = (plus - minus) / (2.0 * eps)
        sigma = np.exp(y[:, _LOG_SIGMA])
        return np.concatenate(
            [velocity, acceleration, dv, d_acceleration, time_part[:, None], sigma[:, None]], axis=1
        )

    def project(self, t: float, y: RealArray) -> RealArray:
        y = y.copy()
        for tag in np.unique(self.charts):
            mask = self.charts == tag
            position, velocity = y[mask, _POSITION], y[mask, _VELOCITY]
            a, b, c = _null_coefficients(self.structure, t, position, velocity, int(tag))
            drift = np.abs(a + 2.0 * b + c) / (np.abs(c) + a)
            self.drift[mask] = np.maximum(self.drift[mask], drift)
            y[mask, _VELOCITY] *= ((-b + np.sqrt(b * b - a * c)) / a)[:, None]
        radius = np.hypot(y[:, 0], y[:, 1])
        switch = radius > CHART_SWITCH_RADIUS
        if np.any(switch):
            y[switch] = _invert_chart(y[switch], jacobi=self.jacobi)
            self.charts = np.where(switch, 1 - self.charts, self.charts)
        self.chart_history.append(self.charts.copy())
        return y


def _chart_points(position: RealArray, charts: np.ndarray) -> tuple[ComplexArray, ComplexArray]:
    w = position[:, 0] + 1j * position[:, 1]
    z0 = np.empty(len(w), dtype=np.complex128)
    z1 = np.empty(len(w), dtype=np.complex128)
    for tag in np.unique(charts):
        mask = charts == tag
        z0[mask], z1[mask] = sphere.from_chart(w[mask], int(tag))
    return z0, z1


@dataclass(frozen=True, eq=False)
class _Run:
    """Raw output of one batch integration."""

    trajectory: rungekutta.Trajectory
    charts: np.ndarray  # chart per accepted step and trajectory, shape (steps + 1, batch)
    system: _NullSystem
    t_start: float  # boundary time of the initial infinity
    t_end: float  # boundary time of the final infinity
    far_index: int  # accepted step at two collar widths from the final infinity


def _start_state(
    system: _NullSystem,
    z0: ComplexArray,
    z1: ComplexArray,
    angles: RealArray,
    t_boundary: float,
    t_collar: float,
) -> RealArray:
    structure = system.structure
    charts = system.charts
    w = np.empty(len(z0), dtype=np.complex128)
    for tag in np.unique(charts):
        mask = charts == tag
        w[mask] = sphere.to_chart(z0[mask], z1[mask], int(tag))
    position = np.stack([w.real, w.imag], axis=1)
    direction = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    scale = np.empty(len(w))
    for tag in np.unique(charts):
        mask = charts == tag
        scale[mask] = null_scale(structure, t_collar, position[mask], direction[mask], int(tag))
    velocity = direction * scale[:, None]
    acceleration, _ = system.spray(t_collar, position, velocity)
    dt = t_collar - t_boundary
    state = [position + dt * velocity + 0.5 * dt * dt * acceleration, velocity + dt * acceleration]
    if system.jacobi:
        normal = np.stack([-np.sin(angles), np.cos(angles)], axis=1) * scale[:, None]
        state += [dt * normal, normal, np.zeros((len(w), 2))]
    return np.concatenate(state, axis=1)


def _run(
    structure: WeylChartStructure,
    z0: ComplexArray,
    z1: ComplexArray,
    angles: RealArray,
    *,
    future: bool,
    jacobi: bool = False,
    rtol: float = RTOL,
) -> _Run:
    sign = 1.0 if future else -1.0
    t_start, t_end = structure.t_minus, structure.t_plus
    if not future:
        t_start, t_end = t_end, t_start
    collar = structure.collar
    system = _NullSystem(structure, sphere.working_chart(z0, z1).astype(np.int64), jacobi=jacobi)
    y0 = _start_state(system, z0, z1, angles, t_start, t_start + sign * collar)
    first = rungekutta.integrate(
        system.rhs,
        t_start + sign * collar,
        y0,
        t_end - 2.0 * sign * collar,
        rtol=rtol,
        atol=ATOL,
        project=system.project,
    )
    # the second leg resumes from the projected state already recorded
    system.chart_history.pop()
    second = rungekutta.integrate(
        system.rhs,
        t_end - 2.0 * sign * collar,
        first.states[-1],
        t_end - sign * collar,
        rtol=rtol,
        atol=ATOL,
        project=system.project,
    )
    trajectory = rungekutta.Trajectory(
        times=np.concatenate([first.times, second.times[1:]]),
        states=np.concatenate([first.states, second.states[1:]]),
        rejected_steps=first.rejected_steps + second.rejected_steps,
        step_sizes=first.step_sizes + second.step_sizes,
    )
    if not np.all(np.isfinite(trajectory.states[-1])):
        msg = f"null geodesics of {structure.name!r} did not reach the final collar"
        raise TrappedGeodesic(msg)
    return _Run(trajectory, np.stack(system.chart_history), system, t_start, t_end, len(first.times) - 1)


def _taylor_endpoint(run: _Run, index: int) -> tuple[RealArray, RealArray, RealArray, np.ndarray]:
    t = run.trajectory.times[index]
    state = run.trajectory.states[index]
    charts = run.charts[index]
    position, velocity = state[:, _POSITION], state[:, _VELOCITY]
    acceleration = np.empty_like(velocity)
    for tag in np.unique(charts):
        mask = charts == tag
        acceleration[mask], _ = spray_terms(run.system.structure, t, position[mask], velocity[mask], int(tag))
    dt = run.t_end - t
    end_position = position + dt * velocity + 0.5 * dt * dt * acceleration
    end_velocity = velocity + dt * acceleration
    z0, z1 = _chart_points(end_position, charts)
    return sphere.to_unit_vectors(z0, z1), end_position, end_velocity, charts


def _paths(run: _Run, z0: ComplexArray, z1: ComplexArray, angles: RealArray) -> list[NullPath]:
    near, end_position, end_velocity, charts = _taylor_endpoint(run, len(run.trajectory.times) - 1)
    far, _, _, _ = _taylor_endpoint(run, run.far_index)
    # Taylor remainders scale with the cube of the extrapolation distance
    combined = (8.0 * near - far) / 7.0
    errors = np.linalg.norm(near - far, axis=1) / 7.0
    e0, e1 = sphere.from_unit_vectors(combined)

    w = end_position[:, 0] + 1j * end_position[:, 1]
    w_dot = end_velocity[:, 0] + 1j * end_velocity[:, 1]
    end_charts = sphere.working_chart(e0, e1)
    w_dot = np.where(end_charts != charts, -w_dot / w**2, w_dot)

    paths: list[NullPath] = []
    for k in range(len(z0)):
        position = run.trajectory.states[:, k, _POSITION]
        p0, p1 = _chart_points(position, run.charts[:, k])
        paths.append(
            NullPath(
                times=run.trajectory.times,
                points=sphere.points_from_arrays(p0, p1),
                start=SpherePoint(complex(z0[k]), complex(z1[k])),
                start_direction=float(angles[k]),
                end=SpherePoint(complex(e0[k]), complex(e1[k])),
                end_direction=float(np.angle(w_dot[k])),
                extrapolation_error=float(errors[k]),
                max_null_drift=float(run.system.drift[k]),
                future_directed=run.t_end > run.t_start,
            )
        )
    return paths


def integrate_null_fan(
    structure: WeylChartStructure,
    z0: ComplexArray,
    z1: ComplexArray,
    angles: RealArray,
    *,
    future: bool = True,
    rtol: float = RTOL,
) -> list[NullPath]:
    """Integrate a batch of null geodesics with shared step sizes.

    Args:
        structure: The compactified structure.
        z0: Homogeneous coordinates of the start points on the initial infinity.
        z1: Second homogeneous coordinates, same shape as z0.
        angles: Angle of dx/dT at each start, in the working chart of the start point.
        future: Integrate from the past infinity to the future one (else backwards).
        rtol: Relative tolerance of the Dormand-Prince controller.

    Raises:
        StepBudgetExceeded: If the integrator runs out of steps.
        TrappedGeodesic: If some geodesic does not reach the final collar.
    """
    z0 = np.asarray(z0, dtype=np.complex128)
    z1 = np.asarray(z1, dtype=np.complex128)
    angles = np.asarray(angles, dtype=np.float64)
    run = _run(structure, z0, z1, angles, future=future, rtol=rtol)
    return _paths(run, z0, z1, angles)


def integrate_null_geodesic(
    structure: WeylChartStructure,
    p: SpherePoint,
    direction: float,
    *,
    future: bool = True,
    rtol: float = RTOL,
) -> NullPath:
    """Integrate one null geodesic from p on one infinity to the other.

    Raises:
        StepBudgetExceeded: If the integrator runs out of steps.
        TrappedGeodesic: If the geodesic does not reach the final collar.
    """
    return integrate_null_fan(
        structure, np.array([p.z0]), np.array([p.z1]), np.array([direction]), future=future, rtol=rtol
    )[0]


def fan_angles(n_directions: int) -> RealArray:
    """Directions spread uniformly over the circle of null directions."""
    return 2.0 * np.pi * np.arange(n_directions) / n_directions


def _summarize(source: SpherePoint, paths: Sequence[NullPath]) -> RefocusReport:
    e0, e1 = sphere.point_arrays([path.end for path in paths])
    vectors = sphere.to_unit_vectors(e0, e1)
    mean = np.mean(vectors, axis=0)
    m0, m1 = sphere.from_unit_vectors(mean)
    pairwise = np.linalg.norm(vectors[:, None, :] - vectors[None, :, :], axis=-1)
    return RefocusReport(
        source=source,
        mean_endpoint=SpherePoint(complex(m0), complex(m1)),
        dispersion=float(np.max(pairwise)),
        endpoints=tuple(path.end for path in paths),
    )


def refocus_check(
    structure: WeylChartStructure, p: SpherePoint, n_directions: int = 32, *, rtol: float = RTOL
) -> RefocusReport:
    """Integrate a fan of future null geodesics from p and measure how well they refocus."""
    angles = fan_angles(n_directions)
    z0 = np.full(n_directions, p.z0)
    z1 = np.full(n_directions, p.z1)
    return _summarize(p, integrate_null_fan(structure, z0, z1, angles, rtol=rtol))


def scattering_jacobian(
    structure: WeylChartStructure,
    p: SpherePoint,
    h: float = JACOBIAN_STEP,
    n_directions: int = 4,
) -> tuple[RealArray, int]:
    """Central-difference Jacobian of p -> q between the working charts of p and q.

    Returns:
        The real 2x2 matrix and the sign of its determinant.
    """
    chart_in = int(sphere.working_chart(np.array([p.z0]), np.array([p.z1]))[0])
    w = complex(sphere.to_chart(np.array([p.z0]), np.array([p.z1]), chart_in)[0])
    shifts = np.array([0.0, h, -h, 1j * h, -1j * h])
    s0, s1 = sphere.from_chart(w + shifts, chart_in)
    angles = np.tile(fan_angles(n_directions), len(shifts))
    paths = integrate_null_fan(structure, np.repeat(s0, n_directions), np.repeat(s1, n_directions), angles)
    ends = [
        _summarize(
            SpherePoint(complex(s0[k]), complex(s1[k])),
            paths[k * n_directions : (k + 1) * n_directions],
        )
        for k in range(len(shifts))
    ]
    q = ends[0].mean_endpoint
    chart_out = int(sphere.working_chart(np.array([q.z0]), np.array([q.z1]))[0])
    e0, e1 = sphere.point_arrays([report.mean_endpoint for report in ends])
    values = sphere.to_chart(e0, e1, chart_out)
    fx = (values[1] - values[2]) / (2.0 * h)
    fy = (values[3] - values[4]) / (2.0 * h)
    matrix = np.array([[fx.real, fy.real], [fx.imag, fy.imag]])
    return matrix, int(np.sign(np.linalg.det(matrix)))


def grid_points(n_theta: int, n_phi: int) -> tuple[SpherePoint, ...]:
    """Cell-centred (theta, phi) grid, avoiding the poles."""
    theta = np.pi * (np.arange(n_theta) + 0.5) / n_theta
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    theta_grid, phi_grid = np.meshgrid(theta, phi, indexing="ij")
    return sphere.points_from_arrays(*sphere.from_spherical_angles(theta_grid.ravel(), phi_grid.ravel()))


def scattering_sample(
    structure: WeylChartStructure, p: SpherePoint, n_directions: int = 8, *, with_jacobian: bool = False
) -> ScatteringSample:
    """Refocus at p and record the image point, optionally with the Jacobian determinant."""
    report = refocus_check(structure, p, n_directions)
    det = None
    if with_jacobian:
        matrix, _ = scattering_jacobian(structure, p)
        det = float(np.linalg.det(matrix))
    return ScatteringSample(
        p=p,
        q=report.mean_endpoint,
        dispersion=report.dispersion,
        jacobian_det=det,
        failed=report.dispersion > REFOCUS_TOLERANCE,
    )


def scattering_map(
    structure: WeylChartStructure,
    points: Sequence[SpherePoint] | tuple[int, int],
    n_directions: int = 8,
    *,
    with_jacobian: bool = False,
    workers: int = 1,
) -> list[ScatteringSample]:
    """Scattering map sampled at explicit points or on an (n_theta, n_phi) grid.

    Samples whose dispersion exceeds REFOCUS_TOLERANCE are returned with
    `failed` set rather than raising.
    """
    if isinstance(points, tuple) and len(points) == 2 and all(isinstance(n, int) for n in points):
        points = grid_points(*points)

    def sample(p: SpherePoint) -> ScatteringSample:
        return scattering_sample(structure, p, n_directions, with_jacobian=with_jacobian)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(sample, points))
    else:
        samples = [sample(p) for p in points]
    failed = sum(s.failed for s in samples)
    if failed:
        logger.warning("%d of %d scattering samples failed to refocus", failed, len(samples))
    return samples


@dataclass(frozen=True, eq=False)
class AffineSamples:
    """Transverse Jacobi data and the Weyl-affine parameter along one geodesic."""

    times: RealArray  # coordinate time at accepted steps
    affine: RealArray  # Weyl-affine parameter, zero at the middle time
    transverse: RealArray  # transverse part of the Jacobi field vanishing at the start
    end_transverse: float  # the same, extrapolated to the final infinity
    defining: RealArray  # defining function u at accepted steps


def affine_samples(structure: WeylChartStructure, path: NullPath, *, rtol: float = RTOL) -> AffineSamples:
    """Re-integrate `path` with its Jacobi field and Weyl-affine parameter."""
    z0, z1 = np.array([path.start.z0]), np.array([path.start.z1])
    direction = np.array([path.start_direction])
    run = _run(structure, z0, z1, direction, future=path.future_directed, jacobi=True, rtol=rtol)
    times = run.trajectory.times
    states = run.trajectory.states[:, 0, :]
    charts = run.charts[:, 0]
    transverse = np.array(
        [
            transverse_component(
                structure,
                float(t),
                states[k : k + 1, _POSITION],
                states[k : k + 1, _VELOCITY],
                states[k : k + 1, _JACOBI_POSITION],
                int(charts[k]),
            )[0]
            for k, t in enumerate(times)
        ]
    )
    middle = 0.5 * (run.t_start + run.t_end)
    order = np.argsort(times)
    affine = states[:, _AFFINE] - np.interp(middle, times[order], states[order, _AFFINE])
    slope = (transverse[-1] - transverse[-2]) / (times[-1] - times[-2])
    end_transverse = float(transverse[-1] + slope * (run.t_end - times[-1]))
    defining = np.array(
        [
            structure.u(np.array([[t, states[k, 0], states[k, 1]]]), int(charts[k]))[0]
            for k, t in enumerate(times)
        ]
    )
    return AffineSamples(times, affine, transverse, end_transverse, defining)


def count_sign_changes(values: RealArray, floor: float = 0.0) -> list[int]:
    """Indices k with a sign change between values[k] and values[k + 1], ignoring |v| <= floor."""
    signs = np.sign(np.where(np.abs(values) <= floor, 0.0, values))
    nonzero = np.flatnonzero(signs)
    return [int(nonzero[i]) for i in range(len(nonzero) - 1) if signs[nonzero[i]] != signs[nonzero[i + 1]]]


def jacobi_transport(structure: WeylChartStructure, path: NullPath) -> JacobiTransport:
    """Sign structure of the Jacobi 2-frame determinant along a null geodesic.

    The frame's first field is t J with J the Jacobi field vanishing at the start
    and t the Weyl-affine parameter (zero at the middle time) when J returns to
    zero at the final infinity; otherwise it is J itself. The second field is
    normalized against the velocity, so the determinant's sign is the sign of
    the first field's transverse part.

    Raises:
        MultipleSignChanges: If the determinant changes sign more than once.
    """
    samples = affine_samples(structure, path)
    scale = float(np.max(np.abs(samples.transverse)))
    end_ratio = abs(samples.end_transverse) / scale
    refocuses = end_ratio < REFOCUS_RATIO
    frame = samples.affine * samples.transverse if refocuses else samples.transverse
    changes = count_sign_changes(frame, floor=1e-12 * float(np.max(np.abs(frame))))
    if len(changes) > 1:
        times = ", ".join(f"{samples.times[k]:.4g}" for k in changes)
        msg = f"Jacobi frame determinant changes sign {len(changes)} times (near T = {times})"
        raise MultipleSignChanges(msg)
    crossing = None
    if changes:
        k = changes[0]
        f0, f1 = frame[k], frame[k + 1]
        crossing = float(samples.times[k] + (samples.times[k + 1] - samples.times[k]) * f0 / (f0 - f1))
    end_sign = int(np.sign(frame[-1]) * np.sign(frame[0]))
    logger.debug("Jacobi transport: refocuses=%s, end ratio %.3e", refocuses, end_ratio)
    return JacobiTransport(
        sign_change_parameter=crossing, end_sign=end_sign, refocuses=refocuses, end_ratio=end_ratio
    )


def affine_log_slope(structure: WeylChartStructure, path: NullPath, u_max: float = 0.05) -> float:
    """Regression slope of log|t| against -log u near the final infinity (1 for de Sitter)."""
    samples = affine_samples(structure, path)
    middle = 0.5 * (structure.t_minus + structure.t_plus)
    ahead = (samples.times - middle) * (1.0 if path.future_directed else -1.0) > 0
    near_end = ahead & (samples.defining < u_max) & (np.abs(samples.affine) > 0)
    slope, _ = np.polyfit(-np.log(samples.defining[near_end]), np.log(np.abs(samples.affine[near_end])), 1)
    return float(slope)
