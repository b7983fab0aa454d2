"""Evaluation, Jacobians and inverses of SphereDiffeo descriptors.

A descriptor is compiled into a DiffeoChain: a flat tuple of primitive steps
(Möbius matrices, the antipodal map, harmonic flows) applied left to right.
Every step knows how to act on homogeneous arrays and how to report its
Wirtinger derivatives (d/dw, d/dw-bar) between two unitary charts, so
Jacobians of arbitrary chains follow from the chain rule

    a = a_f a_g + b_f conj(b_g),    b = a_f b_g + b_f conj(a_g).

Möbius and antipodal steps are differentiated exactly; flow steps use central
differences with step FLOW_FD_STEP in chart coordinates.
"""

import logging
from dataclasses import dataclass

import numpy as np

from . import harmonics, sphere
from .errors import ChartPole, NewtonStall
from .models import (
    Antipodal,
    Chart,
    ComplexArray,
    FlowPerturbed,
    Harmonic,
    HarmonicKind,
    MobiusConjugated,
    RealArray,
    SphereDiffeo,
    SpherePoint,
)

logger = logging.getLogger(__name__)

FLOW_FD_STEP = 1e-6
NEWTON_MAX_ITERATIONS = 50
NEWTON_TOLERANCE = 1e-13  # chordal residual at which Newton stops
NEWTON_ACCEPT = 1e-11  # largest residual accepted when the iteration cap is hit

_CHART_STACK = np.stack(sphere.CHART_MATRICES)
_K = np.array([[0.0, -1.0], [1.0, 0.0]], dtype=np.complex128)

type Charts = Chart | sphere.IntArray


@dataclass(frozen=True, eq=False)
class MobiusStep:
    """Projective-linear step by an SL(2,C) matrix."""

    matrix: ComplexArray


@dataclass(frozen=True)
class AntipodalStep:
    """The antipodal map."""


@dataclass(frozen=True)
class FlowStep:
    """Time-`flow_time` flow of a harmonic vector field."""

    harmonics: tuple[Harmonic, ...]
    flow_time: float


type Step = MobiusStep | AntipodalStep | FlowStep


@dataclass(frozen=True, eq=False)
class DiffeoChain:
    """A composition of primitive steps, applied in order."""

    steps: tuple[Step, ...]

    @property
    def orientation_sign(self) -> int:
        """+1 for orientation-preserving chains, -1 for reversing ones."""
        reversals = sum(isinstance(step, AntipodalStep) for step in self.steps)
        return -1 if reversals % 2 else 1


def _flatten(psi: SphereDiffeo) -> tuple[Step, ...]:
    match psi:
        case Antipodal():
            return (AntipodalStep(),)
        case MobiusConjugated(pre=pre, post=post, base=base):
            return (MobiusStep(pre.matrix), *_flatten(base), MobiusStep(post.matrix))
        case FlowPerturbed(base=base, harmonics=terms, flow_time=flow_time):
            harmonics.validate_harmonics(terms, flow_time)
            return (*_flatten(base), FlowStep(terms, flow_time))


def compile_diffeo(psi: SphereDiffeo | DiffeoChain) -> DiffeoChain:
    """Flatten a descriptor into its step chain (chains pass through unchanged).

    Raises:
        DescriptorError: If a flow descriptor violates the harmonic caps.
    """
    if isinstance(psi, DiffeoChain):
        return psi
    return DiffeoChain(_flatten(psi))


def flow_perturbed_antipodal(eps: float, flow_time: float = 1.0) -> FlowPerturbed:
    """The standard perturbation family: antipodal map followed by a two-harmonic flow."""
    return FlowPerturbed(
        base=Antipodal(),
        harmonics=(
            Harmonic(degree=2, order=1, kind=HarmonicKind.GRADIENT, coefficient=eps),
            Harmonic(degree=3, order=-2, kind=HarmonicKind.ROTATIONAL, coefficient=eps / 2.0),
        ),
        flow_time=flow_time,
    )


def _apply_step(step: Step, z0: ComplexArray, z1: ComplexArray) -> tuple[ComplexArray, ComplexArray]:
    match step:
        case MobiusStep(matrix=matrix):
            return sphere.mobius_apply_arrays(matrix, z0, z1)
        case AntipodalStep():
            return sphere.antipodal_arrays(z0, z1)
        case FlowStep(harmonics=terms, flow_time=flow_time):
            moved = harmonics.flow(terms, flow_time, sphere.to_unit_vectors(z0, z1))
            return sphere.from_unit_vectors(moved)


def _inverse_step(step: Step) -> Step:
    match step:
        case MobiusStep(matrix=matrix):
            return MobiusStep(np.array([[matrix[1, 1], -matrix[0, 1]], [-matrix[1, 0], matrix[0, 0]]]))
        case AntipodalStep():
            return step
        case FlowStep(harmonics=terms, flow_time=flow_time):
            return FlowStep(terms, -flow_time)


def apply_arrays(
    psi: SphereDiffeo | DiffeoChain, z0: ComplexArray, z1: ComplexArray
) -> tuple[ComplexArray, ComplexArray]:
    """Evaluate a diffeomorphism on arrays of homogeneous coordinates."""
    z0 = np.asarray(z0, dtype=np.complex128)
    z1 = np.asarray(z1, dtype=np.complex128)
    for step in compile_diffeo(psi).steps:
        z0, z1 = _apply_step(step, z0, z1)
    return z0, z1


def diffeo_eval(psi: SphereDiffeo | DiffeoChain, p: SpherePoint) -> SpherePoint:
    """Evaluate psi at one point.

    Raises:
        FlowDivergence: If a flow step exceeds its step budget.
    """
    z0, z1 = apply_arrays(psi, np.array([p.z0]), np.array([p.z1]))
    return SpherePoint(complex(z0[0]), complex(z1[0]))


def _chart_matrices(charts: Charts, shape: tuple[int, ...]) -> ComplexArray:
    if isinstance(charts, SpherePoint):
        return np.broadcast_to(sphere.chart_matrix(charts), (*shape, 2, 2))
    return np.broadcast_to(_CHART_STACK[np.asarray(charts)], (*shape, 2, 2))


def _batched_mobius(
    matrices: ComplexArray, w: ComplexArray, *, antiholomorphic: bool
) -> tuple[ComplexArray, ComplexArray, ComplexArray]:
    arg = np.conj(w) if antiholomorphic else w
    den = matrices[..., 1, 0] * arg + matrices[..., 1, 1]
    value = (matrices[..., 0, 0] * arg + matrices[..., 0, 1]) / den
    det = matrices[..., 0, 0] * matrices[..., 1, 1] - matrices[..., 0, 1] * matrices[..., 1, 0]
    derivative = det / den**2
    zero = np.zeros_like(derivative)
    if antiholomorphic:
        return value, zero, derivative
    return value, derivative, zero


def _flow_wirtinger(
    step: FlowStep, w: ComplexArray, chart_in: Charts, chart_out: Charts
) -> tuple[ComplexArray, ComplexArray, ComplexArray]:
    h = FLOW_FD_STEP
    shifts = np.array([0.0, h, -h, 1j * h, -1j * h])
    stencil = w[None, ...] + shifts.reshape((5,) + (1,) * w.ndim)
    if isinstance(chart_in, SpherePoint):
        z0, z1 = sphere.from_chart(stencil, chart_in)
    else:
        tags_in = np.broadcast_to(np.asarray(chart_in), w.shape)
        z0 = np.empty(stencil.shape, dtype=np.complex128)
        z1 = np.empty(stencil.shape, dtype=np.complex128)
        for tag in np.unique(tags_in):
            mask = np.broadcast_to(tags_in == tag, stencil.shape)
            z0[mask], z1[mask] = sphere.from_chart(stencil[mask], int(tag))
    out0, out1 = _apply_step(step, z0, z1)
    if not isinstance(chart_out, SpherePoint):
        chart_out = np.broadcast_to(np.asarray(chart_out), stencil.shape)
    values = _to_charts(out0, out1, chart_out)
    fx = (values[1] - values[2]) / (2.0 * h)
    fy = (values[3] - values[4]) / (2.0 * h)
    return values[0], 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)


def _to_charts(z0: ComplexArray, z1: ComplexArray, charts: Charts) -> ComplexArray:
    u = _chart_matrices(charts, z0.shape)
    num = u[..., 0, 0] * z0 + u[..., 0, 1] * z1
    den = u[..., 1, 0] * z0 + u[..., 1, 1] * z1
    return num / den


def _step_wirtinger(
    step: Step, z0: ComplexArray, z1: ComplexArray, chart_in: Charts, chart_out: Charts
) -> tuple[ComplexArray, ComplexArray, ComplexArray]:
    w = _to_charts(z0, z1, chart_in)
    u_in = _chart_matrices(chart_in, z0.shape)
    u_out = _chart_matrices(chart_out, z0.shape)
    u_in_h = np.conj(np.swapaxes(u_in, -1, -2))
    match step:
        case MobiusStep(matrix=matrix):
            return _batched_mobius(u_out @ matrix @ u_in_h, w, antiholomorphic=False)
        case AntipodalStep():
            return _batched_mobius(u_out @ _K @ np.conj(u_in_h), w, antiholomorphic=True)
        case FlowStep():
            return _flow_wirtinger(step, w, chart_in, chart_out)


def wirtinger_arrays(
    psi: SphereDiffeo | DiffeoChain,
    z0: ComplexArray,
    z1: ComplexArray,
    chart_in: Charts | None = None,
    chart_out: Charts | None = None,
) -> tuple[ComplexArray, ComplexArray, ComplexArray, ComplexArray]:
    """Chart value and Wirtinger derivatives of psi at arrays of points.

    Intermediate points of the chain are expressed in their working charts. The
    input and output charts default to the working charts of p and psi(p).

    Returns:
        (w_in, w_out, a, b): input and output chart coordinates and the
        derivatives d psi/dw and d psi/dw-bar.
    """
    z0 = np.asarray(z0, dtype=np.complex128)
    z1 = np.asarray(z1, dtype=np.complex128)
    steps = compile_diffeo(psi).steps
    first_chart = sphere.working_chart(z0, z1) if chart_in is None else chart_in
    w_in = _to_charts(z0, z1, first_chart)
    a = np.ones_like(z0)
    b = np.zeros_like(z0)
    current = first_chart
    w_out = w_in
    for index, step in enumerate(steps):
        n0, n1 = _apply_step(step, z0, z1)
        last = index == len(steps) - 1
        target = sphere.working_chart(n0, n1) if not last or chart_out is None else chart_out
        w_out, a_f, b_f = _step_wirtinger(step, z0, z1, current, target)
        a, b = a_f * a + b_f * np.conj(b), a_f * b + b_f * np.conj(a)
        z0, z1, current = n0, n1, target
    return w_in, w_out, a, b


def _check_pole(p: SpherePoint, chart: Chart) -> None:
    if sphere.chordal_distance(p, sphere.chart_pole(chart)) < sphere.POLE_DISTANCE:
        msg = f"point {p.affine} lies at the pole of chart {chart}"
        raise ChartPole(msg)


def diffeo_jacobian(
    psi: SphereDiffeo | DiffeoChain,
    p: SpherePoint,
    chart_in: Chart | None = None,
    chart_out: Chart | None = None,
) -> RealArray:
    """Real 2x2 Jacobian of psi at p between affine charts at p and psi(p).

    Args:
        psi: The diffeomorphism.
        p: Base point.
        chart_in: Chart tag at p; defaults to the working chart of p.
        chart_out: Chart tag at psi(p); defaults to the working chart of psi(p).

    Raises:
        ChartPole: If p or psi(p) sits at the pole of a requested chart.
    """
    q = diffeo_eval(psi, p)
    if chart_in is not None:
        _check_pole(p, chart_in)
    if chart_out is not None:
        _check_pole(q, chart_out)
    _, _, a, b = wirtinger_arrays(psi, np.array([p.z0]), np.array([p.z1]), chart_in, chart_out)
    return sphere.wirtinger_to_real(a, b)[0]


def jacobian_determinants(psi: SphereDiffeo | DiffeoChain, z0: ComplexArray, z1: ComplexArray) -> RealArray:
    """det of the chart Jacobian |a|^2 - |b|^2 at arrays of points (working charts)."""
    _, _, a, b = wirtinger_arrays(psi, z0, z1)
    return np.abs(a) ** 2 - np.abs(b) ** 2


def inverse_arrays(
    psi: SphereDiffeo | DiffeoChain, q0: ComplexArray, q1: ComplexArray
) -> tuple[ComplexArray, ComplexArray]:
    """Solve psi(p) = q for arrays of targets.

    The seed runs the inverted steps in reverse order; Newton iterations in the
    working charts then remove the discretization error of the inverted flows.

    Raises:
        NewtonStall: If the residual stays above NEWTON_ACCEPT after the iteration cap.
    """
    chain = compile_diffeo(psi)
    q0 = np.asarray(q0, dtype=np.complex128)
    q1 = np.asarray(q1, dtype=np.complex128)
    p0, p1 = q0, q1
    for step in reversed(chain.steps):
        p0, p1 = _apply_step(_inverse_step(step), p0, p1)
    if not any(isinstance(step, FlowStep) for step in chain.steps):
        return p0, p1

    target_chart = sphere.working_chart(q0, q1)
    target = _to_charts(q0, q1, target_chart)
    history: list[float] = []
    for _ in range(NEWTON_MAX_ITERATIONS):
        f0, f1 = apply_arrays(chain, p0, p1)
        residual = float(np.max(sphere.chordal_distance_arrays(f0, f1, q0, q1), initial=0.0))
        history.append(residual)
        if residual < NEWTON_TOLERANCE:
            return p0, p1
        chart = sphere.working_chart(p0, p1)
        w, value, a, b = wirtinger_arrays(chain, p0, p1, chart, target_chart)
        delta = _solve_wirtinger(a, b, target - value)
        p0, p1 = _from_charts(w + delta, chart)
    if history[-1] > NEWTON_ACCEPT:
        msg = f"diffeo inverse did not converge in {NEWTON_MAX_ITERATIONS} iterations"
        raise NewtonStall(msg, tuple(history))
    logger.debug("diffeo inverse accepted at residual %.3e", history[-1])
    return p0, p1


def _solve_wirtinger(a: ComplexArray, b: ComplexArray, rhs: ComplexArray) -> ComplexArray:
    # a d + b conj(d) = r  =>  d = (conj(a) r - b conj(r)) / (|a|^2 - |b|^2)
    return (np.conj(a) * rhs - b * np.conj(rhs)) / (np.abs(a) ** 2 - np.abs(b) ** 2)


def _from_charts(w: ComplexArray, charts: Charts) -> tuple[ComplexArray, ComplexArray]:
    u_h = np.conj(np.swapaxes(_chart_matrices(charts, w.shape), -1, -2))
    return sphere.normalize(u_h[..., 0, 0] * w + u_h[..., 0, 1], u_h[..., 1, 0] * w + u_h[..., 1, 1])


def diffeo_inverse(psi: SphereDiffeo | DiffeoChain, q: SpherePoint) -> SpherePoint:
    """The point p with psi(p) = q.

    Raises:
        NewtonStall: If the Newton refinement does not converge.
    """
    z0, z1 = inverse_arrays(psi, np.array([q.z0]), np.array([q.z1]))
    return SpherePoint(complex(z0[0]), complex(z1[0]))
