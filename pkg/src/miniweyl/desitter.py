"""The closed-form de Sitter disk family and the compactified de Sitter structure.

A matrix A = [[a, b], [c, d]] in SL(2,C) gives the holomorphic disk

    zeta -> ([a zeta + b : c zeta + d], [-conj(d) zeta - conj(c) : conj(b) zeta + conj(a)])

whose boundary circle lies on the graph of the antipodal map. Right
multiplication of A by a unit-disk automorphism matrix B in SU(1,1) only
reparameterizes the disk, so disks correspond to cosets A SU(1,1). The coset
is captured by the Hermitian form H = A diag(1, -1) A^*, which has eigenvalues
e^{2t} and -e^{-2t}; its eigenvectors give the canonical representative.
"""

import logging

import numpy as np

from . import sphere
from .models import (
    ComplexArray,
    DeSitterModuliPoint,
    DiskParam,
    RealArray,
    SpherePoint,
    WeylChartStructure,
)

logger = logging.getLogger(__name__)

BOUNDARY_SAMPLES = 256
DESITTER_COLLAR = 1e-3

_J = np.diag([1.0, -1.0]).astype(np.complex128)


def second_component_matrix(matrix: ComplexArray) -> ComplexArray:
    """Matrix [[-conj d, -conj c], [conj b, conj a]] of the disk's second component."""
    a, b, c, d = np.conj(matrix).ravel()
    return np.array([[-d, -c], [b, a]], dtype=np.complex128)


def desitter_disk_arrays(
    matrix: ComplexArray, zeta: ComplexArray
) -> tuple[tuple[ComplexArray, ComplexArray], tuple[ComplexArray, ComplexArray]]:
    """Both components of the disk of `matrix` at an array of parameters."""
    zeta = np.asarray(zeta, dtype=np.complex128)
    ones = np.ones_like(zeta)
    first = sphere.mobius_apply_arrays(matrix, zeta, ones)
    second = sphere.mobius_apply_arrays(second_component_matrix(matrix), zeta, ones)
    return first, second


def desitter_disk(param: DiskParam, zeta: complex) -> tuple[SpherePoint, SpherePoint]:
    """Evaluate the de Sitter disk of `param` at a point of the closed unit disk.

    Raises:
        ValueError: If |zeta| > 1.
    """
    if abs(zeta) > 1.0 + 1e-14:
        msg = f"|zeta| = {abs(zeta)} lies outside the closed unit disk"
        raise ValueError(msg)
    a, b, c, d = param.matrix.ravel()
    first = SpherePoint(a * zeta + b, c * zeta + d)
    second = SpherePoint(-np.conj(d) * zeta - np.conj(c), np.conj(b) * zeta + np.conj(a))
    return first, second


def boundary_on_graph_residual(param: DiskParam, samples: int = BOUNDARY_SAMPLES) -> float:
    """Largest chordal distance between F2 and antipodal(F1) on the boundary circle."""
    theta = 2.0 * np.pi * np.arange(samples) / samples
    (f0, f1), (g0, g1) = desitter_disk_arrays(param.matrix, np.exp(1j * theta))
    h0, h1 = sphere.antipodal_arrays(f0, f1)
    residual = float(np.max(sphere.chordal_distance_arrays(g0, g1, h0, h1)))
    logger.info(
        "disk boundary residual %.3e, condition number %.3e", residual, np.linalg.cond(param.matrix)
    )
    return residual


def hermitian_form(matrix: ComplexArray) -> ComplexArray:
    """H = A diag(1, -1) A^*, invariant under A -> A B for B in SU(1,1)."""
    return matrix @ _J @ matrix.conj().T


def gauge_reduce(param: DiskParam) -> DeSitterModuliPoint:
    """Canonical representative U diag(e^t, e^{-t}) of the coset param.matrix SU(1,1).

    U is the unitary eigenvector matrix of the Hermitian form, positive eigenvalue
    first, with the first column phased so its leading nonzero entry is real
    positive and the second column phased so det U = 1.
    """
    form = hermitian_form(param.matrix)
    form = 0.5 * (form + form.conj().T)
    values, vectors = np.linalg.eigh(form)
    order = np.argsort(values)[::-1]
    values, vectors = values[order], vectors[:, order]
    pivot = 0 if abs(vectors[0, 0]) > 1e-12 else 1
    vectors[:, 0] *= np.conj(vectors[pivot, 0]) / abs(vectors[pivot, 0])
    det = vectors[0, 0] * vectors[1, 1] - vectors[0, 1] * vectors[1, 0]
    vectors[:, 1] *= np.conj(det) / abs(det)
    log_scale = 0.25 * float(np.log(values[0] / -values[1]))
    representative = vectors @ np.diag([np.exp(log_scale), np.exp(-log_scale)])
    return DeSitterModuliPoint(DiskParam(representative), form, log_scale)


def unit_disk_automorphism(alpha: complex, angle: float) -> ComplexArray:
    """SU(1,1) matrix of zeta -> e^{i angle} (zeta + alpha) / (1 + conj(alpha) zeta), |alpha| < 1."""
    scale = 1.0 / np.sqrt(1.0 - abs(alpha) ** 2)
    rotation = np.exp(0.5j * angle)
    return scale * np.array(
        [[rotation, rotation * alpha], [np.conj(rotation * alpha), np.conj(rotation)]],
        dtype=np.complex128,
    )


def _finite_affine(p: SpherePoint, label: str) -> complex:
    w = p.affine
    if not np.isfinite(w):
        msg = f"{label} must be finite in the standard chart"
        raise ValueError(msg)
    return w


def center_point_param(z: SpherePoint, w: SpherePoint, radius: float) -> DiskParam:
    """The disk with F1(0) = z, F2(0) = w and F1'(0) = radius in the standard chart.

    The matrix is R B with R the rotation taking 0 to z and B lower triangular;
    the lower-left entry of B places F2(0).

    Raises:
        ValueError: If radius <= 0, z or w is infinite, or (z, w) lies on the graph.
    """
    if radius <= 0.0:
        msg = f"radius must be positive, got {radius}"
        raise ValueError(msg)
    zc, wc = _finite_affine(z, "z"), _finite_affine(w, "w")
    den = np.conj(zc) * wc + 1.0
    if abs(den) < 1e-12:
        msg = "the centre pair lies on the graph of the antipodal map"
        raise ValueError(msg)
    scale = np.sqrt(1.0 + abs(zc) ** 2)
    rotation = np.array([[1.0, zc], [-np.conj(zc), 1.0]], dtype=np.complex128) / scale
    rotated = (wc - zc) / den
    a = np.sqrt(radius) / scale
    inner = np.array([[a, 0.0], [-np.conj(rotated) * a, 1.0 / a]], dtype=np.complex128)
    return DiskParam(rotation @ inner)


def contact_param(x: SpherePoint, direction: float) -> DiskParam:
    """The hemisphere disk with F1(1) = x and boundary tangent i F1'(1) at angle `direction`.

    Raises:
        ValueError: If x is infinite in the standard chart.
    """
    xc = _finite_affine(x, "x")
    u = np.sqrt(2.0 / (1.0 + abs(xc) ** 2)) * np.exp(0.5j * (0.5 * np.pi - direction))
    alpha = 0.5 * (xc * u + np.conj(u))
    beta = 0.5 * (xc * u - np.conj(u))
    return DiskParam(np.array([[alpha, beta], [-np.conj(beta), np.conj(alpha)]], dtype=np.complex128))


def two_point_param(x: SpherePoint, y: SpherePoint) -> DiskParam:
    """A disk with F1(1) = x and F1(-1) = y: the circle on the segment xy as diameter.

    Raises:
        ValueError: If x and y coincide.
    """
    matrix = 0.5 * np.array(
        [[x.z0 - y.z0, x.z0 + y.z0], [x.z1 - y.z1, x.z1 + y.z1]],
        dtype=np.complex128,
    )
    if abs(np.linalg.det(matrix)) < 1e-12:
        msg = "boundary points must be distinct"
        raise ValueError(msg)
    return DiskParam.of(*matrix.ravel())


def _round_density(x: RealArray) -> RealArray:
    return 4.0 / (1.0 + x[..., 1] ** 2 + x[..., 2] ** 2) ** 2


def _product_metric(x: RealArray, _chart: int) -> RealArray:
    x = np.asarray(x, dtype=np.float64)
    rho = _round_density(x)
    g = np.zeros((*x.shape[:-1], 3, 3))
    g[..., 0, 0] = -1.0
    g[..., 1, 1] = rho
    g[..., 2, 2] = rho
    return g


def _desitter_alpha(x: RealArray, _chart: int) -> RealArray:
    x = np.asarray(x, dtype=np.float64)
    alpha = np.zeros(x.shape)
    alpha[..., 0] = -2.0 * np.tan(x[..., 0])
    return alpha


def _desitter_u(x: RealArray, _chart: int) -> RealArray:
    return np.cos(np.asarray(x, dtype=np.float64)[..., 0])


def compactified_desitter(collar: float = DESITTER_COLLAR) -> WeylChartStructure:
    """g_hat = -dT^2 + round metric, alpha_hat = -2 tan T dT, u = cos T on S^2 x [-pi/2, pi/2].

    The physical metric sec^2(T) g_hat is de Sitter space; alpha_hat is the
    Weyl 1-form of its Levi-Civita connection in the gauge g_hat.
    """
    return WeylChartStructure(
        name="desitter",
        g_hat=_product_metric,
        alpha_hat=_desitter_alpha,
        u=_desitter_u,
        t_minus=-0.5 * np.pi,
        t_plus=0.5 * np.pi,
        collar=collar,
    )
