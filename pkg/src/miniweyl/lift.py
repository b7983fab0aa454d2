"""Legendrian lifts of disks to projective 3-space.

Projective 3-space minus two skew lines fibres over CP^1 x CP^1, with the
points over (F1, F2) written z = (lambda F1, lambda, mu F2, mu). The complex
contact form

    theta = z1 dz2 - z2 dz1 + z3 dz4 - z4 dz3

pulls back along a disk to -lambda^2 dF1 - mu^2 dF2, so with lambda = 1 the
lift is Legendrian exactly when mu^2 = -F1'/F2'. mu is built spectrally: the
logarithm of -F1'/F2' on the boundary circle, halved and exponentiated, with
the branch at zeta = 0 fixed by the sign choice.

Rotating the fibre (z3, z4) -> e^{i a} (z3, z4) multiplies the second half of
theta by e^{2 i a}; a rotated lift is checked against the correspondingly
rotated form.
"""

import logging
import math

import numpy as np
import scipy.fft

from . import diffeo, kahler, sphere, welding
from .diffeo import DiffeoChain
from .errors import DerivativeZero
from .models import ComplexArray, HolomorphicDisk, LiftedDisk, SphereDiffeo, UtpResidual

logger = logging.getLogger(__name__)

RADIAL_SAMPLES = 5  # circles |zeta| = r, r evenly spaced in [0, 1], for the Legendrian check
DERIVATIVE_FLOOR = 1e-10  # relative size below which a derivative counts as vanishing


def _check_nonvanishing(derivative: ComplexArray, label: str) -> None:
    """Raise DerivativeZero unless boundary values of a derivative wind zero times about 0."""
    size = np.abs(derivative)
    if size.min() <= DERIVATIVE_FLOOR * size.max():
        msg = f"{label} vanishes on the boundary circle"
        raise DerivativeZero(msg)
    turns = np.sum(np.angle(np.roll(derivative, -1) / derivative)) / (2.0 * math.pi)
    zeros = round(turns)
    if zeros != 0:
        msg = f"{label} has {zeros} zero(s) inside the disk"
        raise DerivativeZero(msg)


def lift_disk(disk: HolomorphicDisk, sign_choice: int = 1) -> LiftedDisk:
    """The Legendrian lift with mu(0) in the right half-plane (sign_choice = 1) or its negative.

    Raises:
        ValueError: If sign_choice is not +1 or -1.
        DerivativeZero: If F1' or F2' vanishes on the closed disk.
    """
    if sign_choice not in (1, -1):
        msg = f"sign_choice must be +1 or -1, got {sign_choice}"
        raise ValueError(msg)
    m = welding.node_count(disk.degree)
    d1 = welding.boundary_values(welding.derivative_coeffs(disk.f1), m)
    d2 = welding.boundary_values(welding.derivative_coeffs(disk.f2), m)
    _check_nonvanishing(d1, "F1'")
    _check_nonvanishing(d2, "F2'")
    ratio = -d1 / d2
    log = np.log(np.abs(ratio)) + 1j * np.unwrap(np.angle(ratio))
    log -= 2j * math.pi * round(float(np.mean(log).imag) / (2.0 * math.pi))
    mu = sign_choice * np.exp(0.5 * log)
    coeffs = welding.pad(scipy.fft.fft(mu) / m, disk.degree)
    tail = welding.spectral_tail(coeffs)
    if tail > welding.TAIL_TOLERANCE:
        logger.warning("mu is under-resolved at N = %d (tail %.2e)", disk.degree, tail)
    return LiftedDisk(disk, coeffs, sign_choice)


def rotate_fiber(lifted: LiftedDisk, angle: float) -> LiftedDisk:
    """Apply (z3, z4) -> e^{i angle} (z3, z4) to a lift."""
    rotated = lifted.mu * np.exp(1j * angle)
    return LiftedDisk(lifted.base, rotated, lifted.sign_choice, lifted.fiber_angle + angle)


def contact_form(lifted: LiftedDisk, zeta: ComplexArray) -> ComplexArray:
    """theta(dz/dzeta) at points of the disk, with the fibre half rotated back by the lift's angle."""
    poly = np.polynomial.polynomial.polyval
    base = lifted.base
    f1, f2, mu = poly(zeta, base.f1), poly(zeta, base.f2), poly(zeta, lifted.mu)
    df1 = poly(zeta, welding.derivative_coeffs(base.f1))
    df2 = poly(zeta, welding.derivative_coeffs(base.f2))
    dmu = poly(zeta, welding.derivative_coeffs(lifted.mu))
    z1, z2, z3, z4 = f1, np.ones_like(f1), mu * f2, mu
    dz1, dz2, dz3, dz4 = df1, np.zeros_like(f1), dmu * f2 + mu * df2, dmu
    fibre = np.exp(-2j * lifted.fiber_angle) * (z3 * dz4 - z4 * dz3)
    return z1 * dz2 - z2 * dz1 + fibre


def legendrian_residual(lifted: LiftedDisk) -> float:
    """sup |theta(dz/dzeta)| over a polar grid of the closed disk, relative to sup |F1'|."""
    m = welding.node_count(lifted.base.degree)
    radii = np.linspace(0.0, 1.0, RADIAL_SAMPLES)
    zeta = (radii[:, None] * welding.boundary_nodes(m)[None, :]).ravel()
    derivative = np.polynomial.polynomial.polyval(zeta, welding.derivative_coeffs(lifted.base.f1))
    scale = float(np.max(np.abs(derivative)))
    return float(np.max(np.abs(contact_form(lifted, zeta)))) / scale


def boundary_utp_residual(psi: SphereDiffeo | DiffeoChain, lifted: LiftedDisk) -> UtpResidual:
    """How far the lift's boundary is from the unit tangent bundle of graph(psi).

    With t1, t2 the boundary velocities of F1 and F2, the lift represents the
    tangent vector V = (1 / (s^2 lambda^2), -1 / (s^2 mu^2)), where the
    normalization s^2 = |t|_h / t1 makes its first component a positive
    multiple of t1. On the unit tangent bundle V is a real tangent vector of
    the graph with h(V, V) = 1; h is the product of the omega_1 metric on the
    first factor and the round metric on the second.
    """
    chain = diffeo.compile_diffeo(psi)
    base = lifted.base
    m = welding.node_count(base.degree)
    zeta = welding.boundary_nodes(m)
    w1 = welding.boundary_values(base.f1, m)
    w2 = welding.boundary_values(base.f2, m)
    p0, p1 = sphere.from_chart(w1, base.chart1)
    q0, q1 = sphere.from_chart(w2, base.chart2)
    g0, g1 = diffeo.apply_arrays(chain, p0, p1)
    graph_distance = float(np.max(sphere.chordal_distance_arrays(g0, g1, q0, q1)))

    t1 = 1j * zeta * welding.boundary_values(welding.derivative_coeffs(base.f1), m)
    t2 = 1j * zeta * welding.boundary_values(welding.derivative_coeffs(base.f2), m)
    _, _, a, b = diffeo.wirtinger_arrays(chain, p0, p1, chart_in=base.chart1, chart_out=base.chart2)
    predicted = a * t1 + b * np.conj(t1)
    tangent_reality = float(np.max(np.abs(t2 - predicted) / np.abs(t2)))

    density1 = kahler.conformal_factor_arrays(chain, p0, p1) * sphere.round_density(w1)
    density2 = sphere.round_density(w2)
    speed = np.sqrt(density1 * np.abs(t1) ** 2 + density2 * np.abs(t2) ** 2)
    mu = welding.boundary_values(lifted.mu, m) * np.exp(-1j * lifted.fiber_angle)
    s2 = speed / t1
    v1 = 1.0 / s2
    v2 = -1.0 / (s2 * mu**2)
    norm = density1 * np.abs(v1) ** 2 + density2 * np.abs(v2) ** 2
    unit_norm = float(np.max(np.abs(norm - 1.0)))
    return UtpResidual(graph_distance, tangent_reality, unit_norm)
