"""Area functionals of welded disks and the conformal structure of the disk moduli space.

Omega is the round area of F2(D), computed from the boundary by Stokes with
the potential 2 Im(conj(w) dw) / (1 + |w|^2) of the round form. The area of
F1(D) against omega_1 = -psi^* omega_2 is an interior quadrature instead, so
the identity Omega + A_1 = 4 pi checks the two representations against each
other.

Moduli tangents are the nullspace of the gauge-fixed linearized weld operator.
Each one carries the normal field n = dF2 - (F2'/F1') dF1, and on the circle
rho = n / sigma is real for sigma = -2i b conj(i zeta F1'), b being the
anti-holomorphic derivative of psi. Zeros of n classify the tangent: two
simple boundary zeros for space-like, one double boundary zero for null, one
interior zero for time-like.
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.fft
import scipy.linalg
import scipy.optimize

from . import diffeo, kahler, sphere, welding
from .diffeo import DiffeoChain
from .errors import AmbiguousZeros, ChartPole, ConeFitFailure, NonIntegral, RankDeficient
from .models import ComplexArray, HolomorphicDisk, ModuliTangent, RealArray, SphereDiffeo, TangentKind
from .welding import pack, unpack

logger = logging.getLogger(__name__)

RADIAL_NODES = 64
INTEGRALITY_TOLERANCE = 0.01
NULLITY = 3
SPECTRAL_GAP = 1e6  # smallest acceptable ratio between the 4th and 3rd smallest singular values
REFINEMENT = 4  # boundary samples per collocation node when classifying
REALITY_TOLERANCE = 1e-9
NULL_MARGIN = 1e-9
AMBIGUOUS_MARGIN = 1e-6
CONE_SAMPLES = 64
CONE_FIT_TOLERANCE = 1e-3  # smallest over second-smallest singular value of the cone fit


def omega_area(disk: HolomorphicDisk) -> float:
    """Round area of F2(D), as a boundary integral along F2(dD).

    Raises:
        ChartPole: If F2's boundary values are not finite in its chart.
    """
    m = welding.node_count(disk.degree)
    zeta = welding.boundary_nodes(m)
    w = welding.boundary_values(disk.f2, m)
    if not np.all(np.isfinite(w)):
        msg = f"F2 is not finite in chart {disk.chart2}"
        raise ChartPole(msg)
    dw = 1j * zeta * welding.boundary_values(welding.derivative_coeffs(disk.f2), m)
    integrand = 2.0 * np.imag(np.conj(w) * dw) / (1.0 + np.abs(w) ** 2)
    return float(2.0 * math.pi * np.mean(integrand))


def first_projection_area(
    psi: SphereDiffeo | DiffeoChain, disk: HolomorphicDisk, radial_nodes: int = RADIAL_NODES
) -> float:
    """omega_1-area of F1(D), by Gauss-Legendre in the radius and the trapezoid rule in angle."""
    m = welding.node_count(disk.degree)
    nodes, weights = np.polynomial.legendre.leggauss(radial_nodes)
    radius = 0.5 * (nodes + 1.0)
    zeta = (radius[:, None] * welding.boundary_nodes(m)[None, :]).ravel()
    w = np.polynomial.polynomial.polyval(zeta, disk.f1)
    speed = np.abs(np.polynomial.polynomial.polyval(zeta, welding.derivative_coeffs(disk.f1))) ** 2
    z0, z1 = sphere.from_chart(w, disk.chart1)
    density = kahler.conformal_factor_arrays(psi, z0, z1) * sphere.round_density(w) * speed
    radial_weights = 0.5 * weights * radius * (2.0 * math.pi / m)
    return float(np.sum(density.reshape(radial_nodes, m) * radial_weights[:, None]))


def double_degree(psi: SphereDiffeo | DiffeoChain, disk: HolomorphicDisk) -> int:
    """Degree of the sphere map gluing F1 on D to psi^-1(F2) on the reflected disk.

    Raises:
        NonIntegral: If the area sum is farther than INTEGRALITY_TOLERANCE from a multiple of 4 pi.
    """
    value = (first_projection_area(psi, disk) + omega_area(disk)) / (4.0 * math.pi)
    degree = round(value)
    if abs(value - degree) > INTEGRALITY_TOLERANCE:
        msg = f"glued map has non-integral degree {value:.6f}"
        raise NonIntegral(msg)
    return degree


@dataclass(frozen=True, eq=False)
class TangentSpace:
    """Linearized moduli data at one disk.

    The basis vectors are orthonormal in the packed F1-coefficient space, so the
    coordinates of a tangent are basis_matrix @ pack(delta_coeffs).
    """

    disk: HolomorphicDisk
    basis: tuple[ModuliTangent, ...]
    singular_values: tuple[float, ...]
    sigma: ComplexArray  # boundary trivialization on the refined grid
    basis_matrix: RealArray  # (3, 2N + 2)

    def coordinates(self, tangent: ModuliTangent) -> RealArray:
        """Coordinates of a tangent in the basis."""
        return self.basis_matrix @ pack(tangent.delta_coeffs)

    def combine(self, coords: RealArray) -> ModuliTangent:
        """The tangent with the given basis coordinates (unclassified)."""
        coords = np.asarray(coords, dtype=np.float64)
        return ModuliTangent(
            delta_coeffs=unpack(coords @ self.basis_matrix),
            normal_boundary=sum(
                (c * t.normal_boundary for c, t in zip(coords, self.basis, strict=True)),
                np.zeros_like(self.basis[0].normal_boundary),
            ),
            classification=None,
            form_value=None,
            interior_zeros=None,
        )


def _boundary_derivatives(
    chain: DiffeoChain, disk: HolomorphicDisk, m: int
) -> tuple[ComplexArray, ComplexArray, ComplexArray]:
    """dpsi/dw and dpsi/dw-bar at F1(dD) (chart1 -> chart2), and F2'/F1' there."""
    w = welding.boundary_values(disk.f1, m)
    z0, z1 = sphere.from_chart(w, disk.chart1)
    _, _, a, b = diffeo.wirtinger_arrays(chain, z0, z1, chart_in=disk.chart1, chart_out=disk.chart2)
    slope = welding.boundary_values(welding.derivative_coeffs(disk.f2), m) / welding.boundary_values(
        welding.derivative_coeffs(disk.f1), m
    )
    return a, b, slope


def _normal_values(
    delta: ComplexArray, a: ComplexArray, b: ComplexArray, slope: ComplexArray, m: int
) -> ComplexArray:
    """Boundary values of n = dF2 - (F2'/F1') dF1 for an F1 variation, dF2 = dpsi(dF1)."""
    d_f1 = welding.boundary_values(delta, m)
    return a * d_f1 + b * np.conj(d_f1) - slope * d_f1


def trivialization(psi: SphereDiffeo | DiffeoChain, disk: HolomorphicDisk, m: int) -> ComplexArray:
    """sigma = -2i b conj(i zeta F1') on m boundary nodes; n / sigma is real on the circle."""
    chain = diffeo.compile_diffeo(psi)
    _, b, _ = _boundary_derivatives(chain, disk, m)
    zeta = welding.boundary_nodes(m)
    tangent = 1j * zeta * welding.boundary_values(welding.derivative_coeffs(disk.f1), m)
    return -2j * b * np.conj(tangent)


def tangent_space(psi: SphereDiffeo | DiffeoChain, disk: HolomorphicDisk) -> TangentSpace:
    """Nullspace of the linearized weld operator with the disk-automorphism gauge removed.

    Raises:
        RankDeficient: If the nullspace is not cleanly three-dimensional.
    """
    chain = diffeo.compile_diffeo(psi)
    m = welding.node_count(disk.degree)
    _, d_spectrum = welding.linearize(chain, disk.f1, disk.chart1, disk.chart2, m)
    cut = m // 3
    kept = d_spectrum[m - cut :]
    generators = welding.gauge_generators(disk.f1, welding.ALL_GAUGE_FIELDS)
    generators = generators / np.linalg.norm(generators, axis=1, keepdims=True)
    operator = np.vstack([kept.real, kept.imag, generators])
    _, singular, vt = scipy.linalg.svd(operator, full_matrices=False)
    gap = singular[-NULLITY - 1] / max(singular[-NULLITY], np.finfo(float).tiny)
    if gap < SPECTRAL_GAP:
        msg = f"linearized weld nullspace is not three-dimensional (singular value gap {gap:.3e})"
        raise RankDeficient(msg, tuple(float(s) for s in singular))
    basis_matrix = vt[-NULLITY:]
    fine = REFINEMENT * m
    a, b, slope = _boundary_derivatives(chain, disk, fine)
    sigma = trivialization(chain, disk, fine)
    basis: list[ModuliTangent] = []
    for row in basis_matrix:
        delta = unpack(row)
        rho = _normal_values(delta, a, b, slope, fine) / sigma
        imaginary = float(np.max(np.abs(rho.imag)) / max(float(np.max(np.abs(rho))), np.finfo(float).tiny))
        if imaginary > REALITY_TOLERANCE:
            logger.warning("normal field off the real trivialization by %.3e", imaginary)
        basis.append(ModuliTangent(delta, rho.real.copy(), None, None, None))
    return TangentSpace(disk, tuple(basis), tuple(float(s) for s in singular), sigma, basis_matrix)


def linearized_tangent_basis(
    psi: SphereDiffeo | DiffeoChain, disk: HolomorphicDisk
) -> tuple[ModuliTangent, ...]:
    """Orthonormal basis of the three-dimensional moduli tangent space at a disk."""
    return tangent_space(psi, disk).basis


def express_normal(space: TangentSpace, normal_coeffs: ComplexArray) -> RealArray:
    """Basis coordinates of the tangent whose normal field has the given Taylor coefficients.

    The fit is least squares on rho = n / sigma along the circle.
    """
    fine = len(space.sigma)
    rho = welding.boundary_values(np.asarray(normal_coeffs, dtype=np.complex128), fine) / space.sigma
    columns = np.stack([t.normal_boundary for t in space.basis], axis=1)
    coords, *_ = scipy.linalg.lstsq(columns, rho.real)
    return coords


def _cyclic_sign_changes(values: RealArray) -> int:
    positive = values > 0.0
    return int(np.count_nonzero(positive != np.roll(positive, 1)))


def _interior_zeros(normal: ComplexArray) -> int | None:
    """Zeros of n inside the disk by the argument principle; None when n vanishes on the circle."""
    magnitude = np.abs(normal)
    if magnitude.min() <= NULL_MARGIN * magnitude.max():
        return None
    turning = np.angle(np.roll(normal, -1) / normal).sum() / (2.0 * math.pi)
    return round(float(turning))


def _periodic_minimum(values: RealArray) -> float:
    """Minimum of the trigonometric interpolant of equispaced samples on the circle.

    The sampled minimum is refined within one node spacing, so double zeros
    that fall between nodes are resolved to the accuracy of the interpolant.
    """
    n = len(values)
    k = int(np.argmin(values))
    coeffs = scipy.fft.rfft(values) / n
    weights = np.full(len(coeffs), 2.0)
    weights[0] = 1.0
    if n % 2 == 0:
        weights[-1] = 1.0
    frequencies = np.arange(len(coeffs))

    def interpolant(theta: float) -> float:
        return float(np.sum(weights * (coeffs * np.exp(1j * frequencies * theta)).real))

    spacing = 2.0 * math.pi / n
    center = k * spacing
    fit = scipy.optimize.minimize_scalar(
        interpolant, bounds=(center - spacing, center + spacing), method="bounded", options={"xatol": 1e-13}
    )
    return min(float(fit.fun), float(values[k]))


def cone_indicator(rho: RealArray) -> float:
    """min(s rho) / max |rho| with s the sign of rho's largest value: > 0 time-like, < 0 space-like.

    The minimum is taken over the interpolated boundary field, not just its samples.
    """
    scale = float(np.max(np.abs(rho)))
    if scale == 0.0:
        return 0.0
    sign = np.sign(rho[np.argmax(np.abs(rho))])
    return _periodic_minimum(sign * rho) / scale


def classify_tangent(
    space: TangentSpace, tangent: ModuliTangent, form: RealArray | None = None
) -> ModuliTangent:
    """Causal type of a tangent from the zeros of its normal field.

    Near-degenerate zero patterns are settled by the sign of `form` when given.

    Raises:
        AmbiguousZeros: If the zeros are within AMBIGUOUS_MARGIN of degenerating and
            no conformal form decides, the zero pattern is not one of the three types, or a
            time-like boundary pattern is not matched by exactly one interior zero.
    """
    rho = tangent.normal_boundary
    scale = float(np.max(np.abs(rho)))
    if scale == 0.0:
        msg = "zero tangent has no causal type"
        raise AmbiguousZeros(msg)
    changes = _cyclic_sign_changes(rho)
    if changes == 0:
        margin = float(np.min(np.abs(rho))) / scale
    elif changes == 2:  # noqa: PLR2004
        margin = min(float(np.max(rho)), float(np.max(-rho))) / scale
    else:
        msg = f"normal field changes sign {changes} times on the boundary"
        raise AmbiguousZeros(msg)
    coords = space.coordinates(tangent)
    value, decisive = None, False
    if form is not None:
        value = float(coords @ form @ coords)
        decisive = abs(value) > AMBIGUOUS_MARGIN * float(np.linalg.norm(form)) * float(coords @ coords)
    if margin <= NULL_MARGIN:
        kind = TangentKind.NULL
    elif margin >= AMBIGUOUS_MARGIN:
        kind = TangentKind.TIMELIKE if changes == 0 else TangentKind.SPACELIKE
    elif value is not None and decisive:
        kind = TangentKind.SPACELIKE if value > 0 else TangentKind.TIMELIKE
    else:
        msg = f"boundary zeros within {margin:.2e} of degenerating"
        raise AmbiguousZeros(msg)
    zeros = _interior_zeros(rho * space.sigma)
    if kind == TangentKind.TIMELIKE and zeros is not None and zeros != 1:
        msg = f"time-like boundary pattern but the normal field has {zeros} interior zeros"
        raise AmbiguousZeros(msg)
    return replace(tangent, classification=kind, form_value=value, interior_zeros=zeros)


def _null_directions(space: TangentSpace, u: RealArray, v: RealArray) -> list[RealArray]:
    def indicator(phi: float) -> float:
        return cone_indicator(space.combine(math.cos(phi) * u + math.sin(phi) * v).normal_boundary)

    phis = np.linspace(0.0, math.pi, CONE_SAMPLES + 1)
    values = [indicator(float(phi)) for phi in phis]
    roots: list[RealArray] = []
    for left, right, h_left, h_right in zip(phis[:-1], phis[1:], values[:-1], values[1:], strict=True):
        if h_left == 0.0:
            roots.append(math.cos(left) * u + math.sin(left) * v)
        elif h_left * h_right < 0.0:
            phi = scipy.optimize.brentq(indicator, float(left), float(right), xtol=1e-14)
            roots.append(math.cos(phi) * u + math.sin(phi) * v)
    return roots


def moduli_conformal_form(space: TangentSpace, seed: int = 0) -> RealArray:
    """Quadratic form on basis coordinates whose null cone is the null tangents.

    Null directions are located by root finding on the projective circles of
    coordinate planes (random planes are added until the cone is pinned down),
    and the unique symmetric form through them is fitted by SVD. The result has
    unit Frobenius norm, signature (+, +, -) and is positive on space-like
    tangents.

    Raises:
        ConeFitFailure: If too few null directions are found, the fit is not
            sharp, or the fitted form is not Lorentzian.
    """
    rng = np.random.default_rng(seed)
    identity = np.eye(NULLITY)
    planes = [(identity[i], identity[j]) for i in range(NULLITY) for j in range(i + 1, NULLITY)]
    nulls: list[RealArray] = []
    for _ in range(24):
        u, v = planes.pop(0) if planes else tuple(np.linalg.qr(rng.standard_normal((NULLITY, 2)))[0].T)
        nulls += _null_directions(space, u, v)
        if len(nulls) >= 8 and not planes:  # noqa: PLR2004
            break
    if len(nulls) < 6:  # noqa: PLR2004
        msg = f"only {len(nulls)} null directions found"
        raise ConeFitFailure(msg)
    rows = np.array([[*(c**2), 2 * c[0] * c[1], 2 * c[0] * c[2], 2 * c[1] * c[2]] for c in nulls])
    _, singular, vt = scipy.linalg.svd(rows)
    sharpness = singular[-1] / singular[-2]
    if sharpness > CONE_FIT_TOLERANCE:
        msg = f"null directions do not lie on one quadric cone (fit ratio {sharpness:.2e})"
        raise ConeFitFailure(msg)
    q = vt[-1]
    form = np.array([[q[0], q[3], q[4]], [q[3], q[1], q[5]], [q[4], q[5], q[2]]])
    candidates = rng.standard_normal((64, NULLITY))
    timelike = max(candidates, key=lambda c: cone_indicator(space.combine(c).normal_boundary))
    if timelike @ form @ timelike > 0:
        form = -form
    eigenvalues = scipy.linalg.eigvalsh(form)
    if not (eigenvalues[0] < 0 < eigenvalues[1]):
        msg = f"fitted form has eigenvalues {eigenvalues}, not signature (+, +, -)"
        raise ConeFitFailure(msg)
    logger.debug("conformal form fitted from %d null directions (ratio %.2e)", len(nulls), sharpness)
    return form / np.linalg.norm(form)
