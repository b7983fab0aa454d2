"""Real spherical harmonics and the flows of their vector fields on S^2.

Each harmonic Y_lm is evaluated as the restriction of a homogeneous solid harmonic
H(x) = Re or Im of (x + i y)^|m| Q(z, |x|^2), where Q collects the power
coefficients of the m-th derivative of the Legendre polynomial P_l. Cosine-type
harmonics use the real part (m >= 0), sine-type the imaginary part (m < 0).

The field of a gradient harmonic is the tangential part of grad H; the field of
a rotational harmonic is x cross grad H. Both are tangent to the unit sphere,
and the rotational fields are divergence-free, so their flows preserve area.
"""

import math
from dataclasses import dataclass
from functools import cache

import numpy as np
from numpy.polynomial import Legendre, Polynomial

from .errors import DescriptorError, FlowDivergence
from .models import Harmonic, HarmonicKind, RealArray

MAX_DEGREE = 4
MAX_STRENGTH = 0.3  # cap on |coefficient| * flow time

# Largest RK4 step, in units of (flow time) * (field speed bound)
STEP_SCALE = 0.01
MIN_STEPS = 16
MAX_STEPS = 20_000


@dataclass(frozen=True)
class SolidHarmonic:
    """Power-series data of one normalized real solid harmonic."""

    degree: int
    order: int
    terms: tuple[tuple[int, int, float], ...]  # (power of z, power of |x|^2, coefficient)

    @property
    def sine_type(self) -> bool:
        """True for the Im-part (negative order) harmonics."""
        return self.order < 0


@cache
def solid_harmonic(degree: int, order: int) -> SolidHarmonic:
    """Build (and memoize) the solid harmonic of the given degree and order."""
    m = abs(order)
    derivative = Legendre.basis(degree).deriv(m).convert(kind=Polynomial).coef
    norm = math.sqrt(math.factorial(degree - m) / math.factorial(degree + m))
    terms: list[tuple[int, int, float]] = []
    for j, coefficient in enumerate(derivative):
        if coefficient == 0.0 or (degree - m - j) % 2:
            continue
        terms.append((j, (degree - m - j) // 2, float(coefficient) * norm))
    return SolidHarmonic(degree, order, tuple(terms))


def validate_harmonics(harmonics: tuple[Harmonic, ...], flow_time: float) -> None:
    """Enforce the degree and strength caps on a flow descriptor.

    Raises:
        DescriptorError: If any degree, order or strength is out of range.
    """
    for harmonic in harmonics:
        if not 1 <= harmonic.degree <= MAX_DEGREE:
            msg = f"harmonic degree {harmonic.degree} outside 1..{MAX_DEGREE}"
            raise DescriptorError(msg)
        if abs(harmonic.order) > harmonic.degree:
            msg = f"harmonic order {harmonic.order} exceeds degree {harmonic.degree}"
            raise DescriptorError(msg)
        if abs(harmonic.coefficient) * abs(flow_time) > MAX_STRENGTH + 1e-12:
            msg = (
                f"|coefficient| * flow time = {abs(harmonic.coefficient * flow_time):.3g} "
                f"exceeds the cap {MAX_STRENGTH}"
            )
            raise DescriptorError(msg)


def _q_and_partials(
    harmonic: SolidHarmonic, z: RealArray, s: RealArray
) -> tuple[RealArray, RealArray, RealArray]:
    q = np.zeros_like(z)
    q_z = np.zeros_like(z)
    q_s = np.zeros_like(z)
    for j, k, c in harmonic.terms:
        q += c * z**j * s**k
        if j:
            q_z += c * j * z ** (j - 1) * s**k
        if k:
            q_s += c * k * z**j * s ** (k - 1)
    return q, q_z, q_s


def harmonic_value(harmonic: SolidHarmonic, x: RealArray) -> RealArray:
    """H at points x of shape (..., 3)."""
    m = abs(harmonic.order)
    s = np.sum(x * x, axis=-1)
    q, _, _ = _q_and_partials(harmonic, x[..., 2], s)
    value = (x[..., 0] + 1j * x[..., 1]) ** m * q
    return value.imag if harmonic.sine_type else value.real


def harmonic_gradient(harmonic: SolidHarmonic, x: RealArray) -> RealArray:
    """grad H at points x of shape (..., 3)."""
    m = abs(harmonic.order)
    xi = x[..., 0] + 1j * x[..., 1]
    s = np.sum(x * x, axis=-1)
    q, q_z, q_s = _q_and_partials(harmonic, x[..., 2], s)
    power = xi**m
    lower = m * xi ** (m - 1) if m else np.zeros_like(xi)
    grad = np.stack(
        [
            lower * q + power * q_s * 2.0 * x[..., 0],
            1j * lower * q + power * q_s * 2.0 * x[..., 1],
            power * (q_z + q_s * 2.0 * x[..., 2]),
        ],
        axis=-1,
    )
    return grad.imag if harmonic.sine_type else grad.real


def vector_field(harmonics: tuple[Harmonic, ...], x: RealArray) -> RealArray:
    """Tangent vector field sum(coefficient * field_k) at unit vectors x, shape (..., 3)."""
    total = np.zeros_like(x)
    for harmonic in harmonics:
        solid = solid_harmonic(harmonic.degree, harmonic.order)
        grad = harmonic_gradient(solid, x)
        if harmonic.kind is HarmonicKind.GRADIENT:
            # Euler: x . grad H = l H for a degree-l homogeneous H
            radial = harmonic.degree * harmonic_value(solid, x)
            field = grad - radial[..., None] * x
        else:
            field = np.cross(x, grad)
        total += harmonic.coefficient * field
    return total


def speed_bound(harmonics: tuple[Harmonic, ...]) -> float:
    """Crude upper bound on the field speed on the unit sphere."""
    # |grad Y_lm| on the unit sphere is at most l (l + 1) for the normalized basis used here
    return sum(abs(h.coefficient) * h.degree * (h.degree + 1) for h in harmonics)


def flow_step_count(harmonics: tuple[Harmonic, ...], flow_time: float) -> int:
    """Number of fixed RK4 steps used for the time-`flow_time` flow."""
    strength = abs(flow_time) * speed_bound(harmonics)
    return max(MIN_STEPS, math.ceil(strength / STEP_SCALE))


def flow(harmonics: tuple[Harmonic, ...], flow_time: float, x: RealArray) -> RealArray:
    """Time-`flow_time` flow of the harmonic field applied to unit vectors x.

    Uses classical RK4 in R^3 with a projection back to the sphere after each step.

    Raises:
        FlowDivergence: If the step count exceeds MAX_STEPS or the state stops being finite.
    """
    if flow_time == 0.0 or all(h.coefficient == 0.0 for h in harmonics):
        return np.array(x, dtype=np.float64, copy=True)
    steps = flow_step_count(harmonics, flow_time)
    if steps > MAX_STEPS:
        msg = f"harmonic flow needs {steps} steps, budget is {MAX_STEPS}"
        raise FlowDivergence(msg)
    h = flow_time / steps
    state = np.array(x, dtype=np.float64, copy=True)
    for _ in range(steps):
        k1 = vector_field(harmonics, state)
        k2 = vector_field(harmonics, state + 0.5 * h * k1)
        k3 = vector_field(harmonics, state + 0.5 * h * k2)
        k4 = vector_field(harmonics, state + h * k3)
        state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        state /= np.linalg.norm(state, axis=-1, keepdims=True)
    if not np.all(np.isfinite(state)):
        msg = "harmonic flow produced non-finite points"
        raise FlowDivergence(msg)
    return state
