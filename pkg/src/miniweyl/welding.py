"""Spectral welding of holomorphic disks with boundary on the graph of psi.

A disk is carried by the Taylor coefficients of F1 alone. On the unit circle
G = psi(F1) is sampled at M = 4N nodes; the disk closes up exactly when G has
no negative Fourier modes, and F2 is then the non-negative part of G. The
unknowns are packed as the real vector [Re a; Im a] of F1's coefficients and
solved for by Gauss-Newton on the negative modes (kept up to M/3, the 2/3
rule) bordered with the constraint rows of a WeldConstraints selector and the
phase conditions that remove the disk-automorphism gauge.

Charts:
    F1 and F2 live in fixed unitary charts during a solve. A chart is only
    usable while its pole stays outside the image of the closed disk, so the
    seeds and `rechart` pick charts by expanding the boundary curve and
    rejecting expansions with negative modes.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.linalg

from . import diffeo, sphere
from .desitter import desitter_disk_arrays
from .diffeo import DiffeoChain
from .errors import ChartPole, NewtonStall, RankDeficient
from .models import (
    Antipodal,
    BoundaryContact,
    CenterPoint,
    Chart,
    ComplexArray,
    DiskParam,
    HolomorphicDisk,
    MobiusMap,
    RealArray,
    SphereDiffeo,
    SpherePoint,
    TwoBoundaryPoints,
    WeldConstraints,
    WeldReport,
)

logger = logging.getLogger(__name__)

DEFAULT_DEGREE = 32
MAX_DEGREE = 128
OVERSAMPLING = 4
RESIDUAL_TOLERANCE = 1e-10
CONSTRAINT_TOLERANCE = 1e-10
TAIL_TOLERANCE = 1e-8
POLE_MARGIN = 0.1  # chordal distance of boundary values from the chart pole
RECHART_DISTANCE = 0.5  # keep the current chart while its pole is at least this far away
EXPANSION_TOLERANCE = 1e-6  # relative negative-mode energy of a usable chart expansion
CENTROID_FLOOR = 1e-3  # boundary centroids shorter than this have no preferred side
RANK_RATIO = 1e-10
MAX_ITERATIONS = 30
SOLVE_TOLERANCE = 1e-12
STEP_TOLERANCE = 1e-13
PLATEAU_LEVEL = 1e-9  # below this a stalled residual counts as the least-squares floor

# Disk-automorphism vector fields v(zeta) as polynomial coefficients; the gauge
# acts on F1 by F1' v.
ROTATION = np.array([0.0, 1j])
HYPERBOLIC_REAL = np.array([1.0, 0.0, -1.0])  # fixes +1 and -1
HYPERBOLIC_IMAGINARY = np.array([1j, 0.0, 1j])  # fixes +i and -i
PARABOLIC_ONE = np.array([1j, -2j, 1j])  # fixes +1 only
ALL_GAUGE_FIELDS = (ROTATION, HYPERBOLIC_REAL, HYPERBOLIC_IMAGINARY)


def pack(coeffs: ComplexArray) -> RealArray:
    """Real unknown vector [Re a; Im a] of complex coefficients."""
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    return np.concatenate([coeffs.real, coeffs.imag])


def unpack(x: RealArray) -> ComplexArray:
    """Inverse of `pack`."""
    half = len(x) // 2
    return x[:half] + 1j * x[half:]


def pad(coeffs: ComplexArray, degree: int) -> ComplexArray:
    """Coefficients truncated or zero-padded to the given degree."""
    out = np.zeros(degree + 1, dtype=np.complex128)
    keep = min(len(coeffs), degree + 1)
    out[:keep] = coeffs[:keep]
    return out


def node_count(degree: int) -> int:
    """Number of boundary collocation nodes for a truncation degree."""
    return OVERSAMPLING * degree


def boundary_nodes(m: int) -> ComplexArray:
    """The m-th roots of unity e^{2 pi i j / m}."""
    return np.exp(2j * np.pi * np.arange(m) / m)


def boundary_values(coeffs: ComplexArray, m: int) -> ComplexArray:
    """Values of the polynomial with the given coefficients at the m boundary nodes."""
    return m * scipy.fft.ifft(pad(np.asarray(coeffs, dtype=np.complex128), m - 1))


def derivative_coeffs(coeffs: ComplexArray) -> ComplexArray:
    """Taylor coefficients of the derivative (degree lowered by one)."""
    return np.arange(1, len(coeffs)) * coeffs[1:]


def spectral_tail(coeffs: ComplexArray) -> float:
    """|a_N| / max |a_k|, the resolution indicator of a truncated series."""
    magnitudes = np.abs(coeffs)
    return float(magnitudes[-1] / max(float(np.max(magnitudes)), np.finfo(float).tiny))


def negative_modes(spectrum: ComplexArray) -> ComplexArray:
    """Fourier modes -M/2 .. -1 of an FFT spectrum of length M (Nyquist counted as negative)."""
    return spectrum[len(spectrum) // 2 :]


def _check_margin(w: ComplexArray, chart: Chart, label: str) -> None:
    distance = float(np.min(2.0 / np.sqrt(1.0 + np.abs(w) ** 2))) if np.all(np.isfinite(w)) else 0.0
    if distance < POLE_MARGIN:
        msg = f"{label} comes within chordal distance {distance:.3g} of the pole of chart {chart}"
        raise ChartPole(msg)


def _chart_value(p: SpherePoint, chart: Chart) -> complex:
    w = complex(sphere.to_chart(np.array([p.z0]), np.array([p.z1]), chart)[0])
    if not np.isfinite(w):
        msg = f"constraint point {p.affine} sits at the pole of chart {chart}"
        raise ChartPole(msg)
    return w


def _boundary_image(
    chain: DiffeoChain, f1: ComplexArray, chart1: Chart, chart2: Chart, m: int
) -> tuple[ComplexArray, ComplexArray]:
    """F1 and G = psi(F1) at the boundary nodes, in their charts."""
    w = boundary_values(f1, m)
    _check_margin(w, chart1, "F1")
    g = sphere.to_chart(*diffeo.apply_arrays(chain, *sphere.from_chart(w, chart1)), chart2)
    _check_margin(g, chart2, "psi(F1)")
    return w, g


def disk_from_f1(
    psi: SphereDiffeo | DiffeoChain, f1: ComplexArray, chart1: Chart = 0, chart2: Chart = 0
) -> HolomorphicDisk:
    """The disk with the given F1, its F2 read off as the non-negative part of psi(F1).

    Raises:
        ChartPole: If F1 or psi(F1) approaches the pole of its chart on the boundary.
    """
    f1 = np.array(f1, dtype=np.complex128)
    degree = len(f1) - 1
    m = node_count(degree)
    _, g = _boundary_image(diffeo.compile_diffeo(psi), f1, chart1, chart2, m)
    spectrum = scipy.fft.fft(g) / m
    return HolomorphicDisk(
        f1=f1,
        f2=spectrum[: degree + 1].copy(),
        chart1=chart1,
        chart2=chart2,
        residual_norm=float(np.linalg.norm(negative_modes(spectrum))),
    )


def boundary_residual(
    psi: SphereDiffeo | DiffeoChain, disk: HolomorphicDisk, nodes: int | None = None
) -> tuple[float, ComplexArray]:
    """L2 norm of the negative-frequency part of psi(F1) on the circle, and the full spectrum.

    The spectrum is ordered as numpy's FFT (non-negative modes first); `nodes`
    overrides the default 4N collocation nodes.

    Raises:
        ChartPole: If the boundary values approach a chart pole.
    """
    m = nodes or node_count(disk.degree)
    _, g = _boundary_image(diffeo.compile_diffeo(psi), disk.f1, disk.chart1, disk.chart2, m)
    spectrum = scipy.fft.fft(g) / m
    return float(np.linalg.norm(negative_modes(spectrum))), spectrum


def chart_expansion(
    z0: ComplexArray, z1: ComplexArray, chart: Chart, degree: int
) -> tuple[ComplexArray, float]:
    """Taylor coefficients of a boundary curve sampled at equispaced nodes, in one chart.

    Returns:
        (coeffs, defect): the first degree + 1 coefficients and the relative
        energy of the negative modes, which is small only when the chart's pole
        lies outside the image of the disk.
    """
    w = sphere.to_chart(z0, z1, chart)
    if not np.all(np.isfinite(w)):
        return np.zeros(degree + 1, dtype=np.complex128), np.inf
    spectrum = scipy.fft.fft(w) / len(w)
    total = max(float(np.linalg.norm(spectrum)), np.finfo(float).tiny)
    return pad(spectrum, degree), float(np.linalg.norm(negative_modes(spectrum))) / total


def _pole_candidates(z0: ComplexArray, z1: ComplexArray) -> list[Chart]:
    candidates: list[Chart] = [*range(len(sphere.CHART_MATRICES))]
    points = sphere.to_unit_vectors(z0, z1)
    gaps = np.linalg.norm(np.roll(points, -1, axis=0) - points, axis=-1)
    weights = 0.5 * (gaps + np.roll(gaps, 1))  # arclength weights of the ordered samples
    centroid = weights @ points / weights.sum()
    if np.linalg.norm(centroid) > CENTROID_FLOOR:
        for direction in (centroid, -centroid):
            p0, p1 = sphere.from_unit_vectors(direction)
            candidates.append(SpherePoint(complex(p0), complex(p1)))
    return candidates


def choose_chart(z0: ComplexArray, z1: ComplexArray, degree: int, current: Chart | None = None) -> Chart:
    """Chart for a disk with the given boundary samples.

    The current chart is kept while its pole stays RECHART_DISTANCE away;
    otherwise the usable chart whose pole is farthest from the curve wins.
    Besides the six coordinate charts, the charts whose poles sit at the
    centres of the two caps cut out by the curve are tried, so that a disk
    covering almost the whole sphere still has a chart.

    Raises:
        ChartPole: If no chart has its pole outside the image.
    """
    distances: dict[Chart, float] = {}
    candidates = _pole_candidates(z0, z1)
    if current is not None and current not in candidates:
        candidates.insert(0, current)
    for chart in candidates:
        _, defect = chart_expansion(z0, z1, chart, degree)
        if defect <= EXPANSION_TOLERANCE:
            pole = sphere.chart_pole_arrays(chart)
            distances[chart] = float(np.min(sphere.chordal_distance_arrays(z0, z1, *pole)))
    if not distances:
        msg = "every chart pole lies inside the disk image"
        raise ChartPole(msg)
    if current in distances and distances[current] >= RECHART_DISTANCE:
        return current
    return max(distances, key=distances.__getitem__)


def boundary_points(
    disk: HolomorphicDisk, m: int | None = None
) -> tuple[tuple[ComplexArray, ComplexArray], ...]:
    """Homogeneous boundary samples of F1 and F2."""
    m = m or node_count(disk.degree)
    first = sphere.from_chart(boundary_values(disk.f1, m), disk.chart1)
    second = sphere.from_chart(boundary_values(disk.f2, m), disk.chart2)
    return first, second


def rechart(
    psi: SphereDiffeo | DiffeoChain, disk: HolomorphicDisk, chart1: Chart, chart2: Chart
) -> HolomorphicDisk:
    """Re-expand a disk with F1 in `chart1` and F2 in `chart2`.

    Raises:
        ChartPole: If the pole of `chart1` lies inside the image of F1.
    """
    if (chart1, chart2) == (disk.chart1, disk.chart2):
        return disk
    (z0, z1), _ = boundary_points(disk)
    coeffs, defect = chart_expansion(z0, z1, chart1, disk.degree)
    if defect > EXPANSION_TOLERANCE:
        msg = f"the pole of chart {chart1} lies inside the image of F1"
        raise ChartPole(msg)
    logger.info("rechart: F1 %s -> %s, F2 %s -> %s", disk.chart1, chart1, disk.chart2, chart2)
    return disk_from_f1(psi, coeffs, chart1, chart2)


def auto_rechart(psi: SphereDiffeo | DiffeoChain, disk: HolomorphicDisk) -> HolomorphicDisk:
    """Move a disk to better charts once a boundary curve drifts toward a pole."""
    first, second = boundary_points(disk)
    chart1 = choose_chart(*first, disk.degree, current=disk.chart1)
    chart2 = choose_chart(*second, disk.degree, current=disk.chart2)
    return rechart(psi, disk, chart1, chart2)


def transform_disk(
    psi: SphereDiffeo | DiffeoChain, disk: HolomorphicDisk, pre: MobiusMap, post: MobiusMap
) -> HolomorphicDisk:
    """Carry a disk for `base` to the disk (pre^-1 F1, post F2) for psi = post o base o pre.

    The new factors are re-expanded in charts chosen afresh.

    Raises:
        ChartPole: If no chart accommodates one of the transformed boundary curves.
    """
    first, second = boundary_points(disk)
    first = sphere.mobius_apply_arrays(sphere.mobius_inverse(pre).matrix, *first)
    second = sphere.mobius_apply_arrays(post.matrix, *second)
    chart1 = choose_chart(*first, disk.degree, current=0)
    chart2 = choose_chart(*second, disk.degree, current=0)
    coeffs, _ = chart_expansion(*first, chart1, disk.degree)
    return disk_from_f1(psi, coeffs, chart1, chart2)


def desitter_seed(
    param: DiskParam, degree: int = DEFAULT_DEGREE, psi: SphereDiffeo | DiffeoChain | None = None
) -> HolomorphicDisk:
    """The closed-form de Sitter disk of `param`, expanded in suitable charts.

    With psi omitted the residual is measured against the antipodal map, for
    which the disk is exact.
    """
    m = node_count(degree)
    (f0, f1), (g0, g1) = desitter_disk_arrays(param.matrix, boundary_nodes(m))
    chart1 = choose_chart(f0, f1, degree, current=0)
    chart2 = choose_chart(g0, g1, degree, current=0)
    coeffs, _ = chart_expansion(f0, f1, chart1, degree)
    return disk_from_f1(psi if psi is not None else Antipodal(), coeffs, chart1, chart2)


def gauge_generators(f1: ComplexArray, fields: tuple[ComplexArray, ...]) -> RealArray:
    """Packed variations F1' v of F1 along disk-automorphism fields v, one row per field."""
    derivative = derivative_coeffs(f1)
    degree = len(f1) - 1
    return np.stack([pack(pad(np.convolve(derivative, field), degree)) for field in fields])


def gauge_fields(constraints: WeldConstraints) -> tuple[ComplexArray, ...]:
    """Automorphism fields left free by a selector's point conditions."""
    match constraints:
        case CenterPoint():
            return ()
        case BoundaryContact():
            return (HYPERBOLIC_REAL, PARABOLIC_ONE)
        case TwoBoundaryPoints():
            return (HYPERBOLIC_REAL,)


def family_dimension(constraints: WeldConstraints) -> int:
    """Dimension of the solution family a selector leaves after gauge fixing."""
    return 0 if isinstance(constraints, CenterPoint) else 1


def _constraint_equations(
    constraints: WeldConstraints,
    f1: ComplexArray,
    mean: complex,
    d_mean: ComplexArray | None,
    chart1: Chart,
    chart2: Chart,
) -> tuple[RealArray, RealArray]:
    n = len(f1)
    k = np.arange(n)
    ones, zeros = np.ones(n), np.zeros(n)
    at_one = (np.concatenate([ones, zeros]), np.concatenate([zeros, ones]))
    match constraints:
        case CenterPoint(z=z, w=w, radius=radius):
            zc, wc = _chart_value(z, chart1), _chart_value(w, chart2)
            unit = np.eye(2 * n)
            d_mean = np.zeros(2 * n, dtype=np.complex128) if d_mean is None else d_mean
            values = [
                (f1[0] - zc).real,
                (f1[0] - zc).imag,
                f1[1].imag,
                f1[1].real - radius,
                (mean - wc).real,
                (mean - wc).imag,
            ]
            rows = [unit[0], unit[n], unit[n + 1], unit[1], d_mean.real, d_mean.imag]
        case BoundaryContact(x=x, direction=direction):
            xc = _chart_value(x, chart1)
            tilt = 1j * np.exp(-1j * direction)
            values = [(f1.sum() - xc).real, (f1.sum() - xc).imag, (tilt * (k * f1).sum()).imag]
            rows = [*at_one, np.concatenate([k * tilt.imag, k * tilt.real])]
        case TwoBoundaryPoints(x=x, y=y):
            xc, yc = _chart_value(x, chart1), _chart_value(y, chart1)
            signs = (-1.0) ** k
            at_minus_one = f1 @ signs
            values = [
                (f1.sum() - xc).real,
                (f1.sum() - xc).imag,
                (at_minus_one - yc).real,
                (at_minus_one - yc).imag,
            ]
            rows = [*at_one, np.concatenate([signs, zeros]), np.concatenate([zeros, signs])]
    return np.array(values, dtype=np.float64), np.array(rows, dtype=np.float64)



def linearize(
    chain: DiffeoChain, f1: ComplexArray, chart1: Chart, chart2: Chart, m: int
) -> tuple[ComplexArray, ComplexArray]:
    """Spectrum of psi(F1) on m nodes and its derivative along each packed coefficient of F1.

    The variation is dG = a dF1 + b conj(dF1) with the Wirtinger derivatives of
    psi between the two charts; column j of the derivative is the spectrum of dG
    for the j-th real unknown.

    Raises:
        ChartPole: If a boundary curve approaches its chart pole.
    """
    w = boundary_values(f1, m)
    _check_margin(w, chart1, "F1")
    z0, z1 = sphere.from_chart(w, chart1)
    _, g, a, b = diffeo.wirtinger_arrays(chain, z0, z1, chart_in=chart1, chart_out=chart2)
    _check_margin(g, chart2, "psi(F1)")
    powers = boundary_nodes(m)[:, None] ** np.arange(len(f1))[None, :]
    d_real = a[:, None] * powers + b[:, None] * np.conj(powers)
    d_imag = 1j * (a[:, None] * powers - b[:, None] * np.conj(powers))
    columns = np.concatenate([d_real, d_imag], axis=1)
    return scipy.fft.fft(g) / m, scipy.fft.fft(columns, axis=0) / m


@dataclass(frozen=True, eq=False)
class WeldSystem:
    """Bordered real equations whose zeros are the constrained disks in fixed charts.

    Rows are, in order: the retained negative modes of psi(F1), the selector's
    constraints, phase conditions against `reference` for the gauge fields the
    selector leaves free, and an optional hyperplane <x - anchor, tangent> = 0.
    """

    chain: DiffeoChain
    constraints: WeldConstraints
    degree: int
    chart1: Chart
    chart2: Chart
    reference: RealArray
    tangent: RealArray | None = None
    anchor: RealArray | None = None

    @property
    def nodes(self) -> int:
        """Boundary collocation nodes."""
        return node_count(self.degree)

    def with_hyperplane(self, tangent: RealArray, anchor: RealArray) -> "WeldSystem":
        """The same system bordered by the hyperplane through `anchor` normal to `tangent`."""
        return WeldSystem(
            self.chain,
            self.constraints,
            self.degree,
            self.chart1,
            self.chart2,
            self.reference,
            tangent,
            anchor,
        )

    def evaluate(self, x: RealArray, *, jacobian: bool = True) -> tuple[RealArray, RealArray | None]:
        """Equation values at x and, unless disabled, their Jacobian.

        Raises:
            ChartPole: If a boundary curve approaches its chart pole.
        """
        m = self.nodes
        f1 = unpack(x)
        if jacobian:
            spectrum, d_spectrum = linearize(self.chain, f1, self.chart1, self.chart2, m)
        else:
            _, g = _boundary_image(self.chain, f1, self.chart1, self.chart2, m)
            spectrum, d_spectrum = scipy.fft.fft(g) / m, None
        cut = m // 3
        kept = spectrum[m - cut :]
        values = [kept.real, kept.imag]
        rows: list[RealArray] = []
        if d_spectrum is not None:
            rows += [d_spectrum[m - cut :].real, d_spectrum[m - cut :].imag]
        c_values, c_rows = _constraint_equations(
            self.constraints,
            f1,
            complex(spectrum[0]),
            None if d_spectrum is None else d_spectrum[0],
            self.chart1,
            self.chart2,
        )
        values.append(c_values)
        rows.append(c_rows)
        fields = gauge_fields(self.constraints)
        if fields:
            generators = gauge_generators(unpack(self.reference), fields)
            values.append(generators @ (x - self.reference))
            rows.append(generators)
        if self.tangent is not None and self.anchor is not None:
            values.append(np.array([self.tangent @ (x - self.anchor)]))
            rows.append(self.tangent[None, :])
        return np.concatenate(values), np.concatenate(rows) if jacobian else None


def constraint_residual(disk: HolomorphicDisk, constraints: WeldConstraints) -> float:
    """Largest violation of a selector's constraints by a disk."""
    mean = complex(disk.f2[0])
    values, _ = _constraint_equations(constraints, disk.f1, mean, None, disk.chart1, disk.chart2)
    return float(np.max(np.abs(values)))


def null_vector(jacobian: RealArray) -> RealArray:
    """Right singular vector of the smallest singular value."""
    _, _, vt = scipy.linalg.svd(jacobian, full_matrices=False)
    return vt[-1]


def gauss_newton(
    system: WeldSystem, x0: RealArray, max_iterations: int = MAX_ITERATIONS
) -> tuple[RealArray, tuple[float, ...], RealArray]:
    """Gauss-Newton on a bordered system with dense QR least-squares steps.

    Returns:
        (x, history, singular_values): the solution, the residual norm before
        every step, and the singular values of the final Jacobian.

    Raises:
        NewtonStall: If the iteration diverges or runs out of iterations.
        RankDeficient: If the bordered Jacobian loses rank.
    """
    x = np.array(x0, dtype=np.float64, copy=True)
    history: list[float] = []
    for iteration in range(max_iterations):
        values, jacobian = system.evaluate(x)
        assert jacobian is not None
        norm = float(np.linalg.norm(values))
        history.append(norm)
        logger.debug("gauss-newton iteration %d: residual %.3e", iteration, norm)
        if not np.isfinite(norm) or norm > 1e3 * max(history[0], 1.0):
            msg = f"Gauss-Newton diverged at iteration {iteration} (residual {norm:.3e})"
            raise NewtonStall(msg, tuple(history))
        q, r = scipy.linalg.qr(jacobian, mode="economic")
        diagonal = np.abs(np.diag(r))
        if diagonal.min() <= RANK_RATIO * diagonal.max():
            singular = scipy.linalg.svdvals(jacobian)
            msg = f"bordered weld Jacobian is rank deficient (smallest singular value {singular[-1]:.3e})"
            raise RankDeficient(msg, tuple(float(s) for s in singular))
        plateau = len(history) > 1 and PLATEAU_LEVEL > norm > 0.5 * history[-2]
        if norm <= SOLVE_TOLERANCE or plateau:
            return x, tuple(history), scipy.linalg.svdvals(jacobian)
        step = scipy.linalg.solve_triangular(r, -(q.T @ values))
        x = x + step
        if np.linalg.norm(step) <= STEP_TOLERANCE * (1.0 + np.linalg.norm(x)):
            values, jacobian = system.evaluate(x)
            assert jacobian is not None
            history.append(float(np.linalg.norm(values)))
            return x, tuple(history), scipy.linalg.svdvals(jacobian)
    msg = f"Gauss-Newton did not converge in {max_iterations} iterations (residual {history[-1]:.3e})"
    raise NewtonStall(msg, tuple(history))


def square_system(
    psi: SphereDiffeo | DiffeoChain, constraints: WeldConstraints, seed: HolomorphicDisk
) -> WeldSystem:
    """Bordered system with an isolated zero near the seed.

    Phase conditions are taken at the seed; selectors leaving a one-parameter
    family are additionally cut by the hyperplane through the seed normal to
    the family tangent there.
    """
    x = pack(seed.f1)
    system = WeldSystem(diffeo.compile_diffeo(psi), constraints, seed.degree, seed.chart1, seed.chart2, x)
    if family_dimension(constraints) == 0:
        return system
    _, jacobian = system.evaluate(x)
    assert jacobian is not None
    return system.with_hyperplane(null_vector(jacobian), x)


def weld(
    psi: SphereDiffeo | DiffeoChain,
    constraints: WeldConstraints,
    seed: HolomorphicDisk,
    max_iterations: int = MAX_ITERATIONS,
) -> tuple[HolomorphicDisk, WeldReport]:
    """Solve for a constrained disk, raising the degree while the spectral tail is unresolved.

    Raises:
        NewtonStall: If Gauss-Newton fails, or converges to a residual above tolerance.
        RankDeficient: If the constraints leave an unexpected nullspace.
        ChartPole: If a boundary curve approaches its chart pole.
    """
    chain = diffeo.compile_diffeo(psi)
    current = seed
    while True:
        system = square_system(chain, constraints, current)
        x, history, singular = gauss_newton(system, pack(current.f1), max_iterations)
        disk = disk_from_f1(chain, unpack(x), current.chart1, current.chart2)
        tail = spectral_tail(disk.f1)
        if tail <= TAIL_TOLERANCE or disk.degree >= MAX_DEGREE:
            break
        degree = min(2 * disk.degree, MAX_DEGREE)
        logger.info("spectral tail %.2e at N = %d; raising the degree to %d", tail, disk.degree, degree)
        current = disk_from_f1(chain, pad(disk.f1, degree), disk.chart1, disk.chart2)
    if tail > TAIL_TOLERANCE:
        logger.warning("spectral tail %.2e still above %.0e at N = %d", tail, TAIL_TOLERANCE, disk.degree)
    violation = constraint_residual(disk, constraints)
    if disk.residual_norm > RESIDUAL_TOLERANCE or violation > CONSTRAINT_TOLERANCE:
        msg = (
            f"weld stalled: boundary residual {disk.residual_norm:.3e}, "
            f"constraint violation {violation:.3e}"
        )
        raise NewtonStall(msg, history)
    speed = np.abs(boundary_values(derivative_coeffs(disk.f1), node_count(disk.degree)))
    if speed.min() <= 1e-8 * speed.max():  # pragma: no cover
        logger.warning("F1' nearly vanishes on the boundary (min %.3e)", speed.min())
    report = WeldReport(
        iterations=len(history) - 1,
        residual_history=history,
        singular_values=tuple(float(s) for s in singular),
    )
    logger.debug("weld converged in %d iterations, residual %.3e", report.iterations, disk.residual_norm)
    return disk, report


def solve_disk(
    psi: SphereDiffeo | DiffeoChain, constraints: WeldConstraints, seed: HolomorphicDisk
) -> HolomorphicDisk:
    """The disk satisfying `constraints` nearest to `seed`; see `weld` for the errors raised."""
    disk, _ = weld(psi, constraints, seed)
    return disk
