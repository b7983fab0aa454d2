"""Riemann-sphere arithmetic: charts, the antipodal map and the Möbius group.

Points are normalized homogeneous pairs (z0, z1). Array variants of every
operation take separate z0/z1 arrays so that grid evaluations stay vectorized.

Charts:
    Chart tag c is the unitary matrix CHART_MATRICES[c]; the chart coordinate of
    p is the affine coordinate of U_c p. Tag 0 is the standard coordinate z0/z1
    (pole at infinity), tag 1 is z1/z0 (pole at 0), and tags 2-5 have their
    poles at the affine points 1, -1, i, -i. Because every chart matrix is
    unitary, the round area density 4/(1+|w|^2)^2 has the same form in all of
    them. The working chart of a point is tag 0 when |z1| >= |z0|, else tag 1.
    A SpherePoint in place of a tag names the SU(2) chart with that pole.
"""

import numpy as np

from .models import Chart, ComplexArray, MobiusMap, RealArray, SpherePoint


def _pole_chart(pole: complex, scale: complex = 1.0) -> ComplexArray:
    e0, e1 = pole, scale
    norm = np.hypot(abs(e0), abs(e1))
    e0, e1 = e0 / norm, e1 / norm
    return np.array([[np.conj(e0), np.conj(e1)], [-e1, e0]], dtype=np.complex128)


CHART_MATRICES: tuple[ComplexArray, ...] = (
    np.eye(2, dtype=np.complex128),
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128),
    _pole_chart(1.0),
    _pole_chart(-1.0),
    _pole_chart(1j),
    _pole_chart(-1j),
)

# Chordal distance below which a point counts as sitting on a chart pole
POLE_DISTANCE = 1e-8


def chart_matrix(chart: Chart) -> ComplexArray:
    """Unitary matrix of a chart: a tag into CHART_MATRICES, or the chart with the given pole."""
    if isinstance(chart, SpherePoint):
        return _pole_chart(chart.z0, chart.z1)
    return CHART_MATRICES[chart]


def normalize(z0: ComplexArray, z1: ComplexArray) -> tuple[ComplexArray, ComplexArray]:
    """Rescale homogeneous pairs to unit vectors."""
    norm = np.hypot(np.abs(z0), np.abs(z1))
    return z0 / norm, z1 / norm


def to_chart(z0: ComplexArray, z1: ComplexArray, chart: Chart) -> ComplexArray:
    """Chart coordinate of homogeneous pairs in chart `chart` (inf at the pole)."""
    u = chart_matrix(chart)
    num = u[0, 0] * z0 + u[0, 1] * z1
    den = u[1, 0] * z0 + u[1, 1] * z1
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den == 0, complex(np.inf, 0.0), num / np.where(den == 0, 1.0, den))


def from_chart(w: ComplexArray, chart: Chart) -> tuple[ComplexArray, ComplexArray]:
    """Homogeneous unit pairs of the points with chart coordinate w."""
    w = np.asarray(w, dtype=np.complex128)
    u_inv = chart_matrix(chart).conj().T
    finite = np.isfinite(w)
    v0 = np.where(finite, w, 1.0)
    v1 = np.where(finite, 1.0, 0.0)
    z0 = u_inv[0, 0] * v0 + u_inv[0, 1] * v1
    z1 = u_inv[1, 0] * v0 + u_inv[1, 1] * v1
    return normalize(z0, z1)


type IntArray = np.ndarray[tuple[int, ...], np.dtype[np.int64]]


def working_chart(z0: ComplexArray, z1: ComplexArray) -> IntArray:
    """Working chart tags: 0 where |z1| >= |z0|, else 1."""
    return np.where(np.abs(z1) >= np.abs(z0), 0, 1)


def point_arrays(points: tuple[SpherePoint, ...] | list[SpherePoint]) -> tuple[ComplexArray, ComplexArray]:
    """Stack SpherePoints into z0/z1 arrays."""
    z0 = np.array([p.z0 for p in points], dtype=np.complex128)
    z1 = np.array([p.z1 for p in points], dtype=np.complex128)
    return z0, z1


def points_from_arrays(z0: ComplexArray, z1: ComplexArray) -> tuple[SpherePoint, ...]:
    """Unstack z0/z1 arrays into SpherePoints."""
    return tuple(SpherePoint(complex(a), complex(b)) for a, b in zip(z0.ravel(), z1.ravel(), strict=True))


def antipodal_arrays(z0: ComplexArray, z1: ComplexArray) -> tuple[ComplexArray, ComplexArray]:
    """Antipodal map [z0 : z1] -> [-conj(z1) : conj(z0)] on arrays."""
    return -np.conj(z1), np.conj(z0)


def antipodal(p: SpherePoint) -> SpherePoint:
    """The antipodal map; involutive and fixed-point free."""
    return SpherePoint(-p.z1.conjugate(), p.z0.conjugate())


def mobius_apply_arrays(
    matrix: ComplexArray, z0: ComplexArray, z1: ComplexArray
) -> tuple[ComplexArray, ComplexArray]:
    """Projective-linear action of a 2x2 matrix on homogeneous arrays."""
    return normalize(matrix[0, 0] * z0 + matrix[0, 1] * z1, matrix[1, 0] * z0 + matrix[1, 1] * z1)


def mobius_apply(m: MobiusMap, p: SpherePoint) -> SpherePoint:
    """Apply a Möbius transformation to a point."""
    return SpherePoint(m.a * p.z0 + m.b * p.z1, m.c * p.z0 + m.d * p.z1)


def mobius_inverse(m: MobiusMap) -> MobiusMap:
    """Inverse transformation (the adjugate, since det = 1)."""
    return MobiusMap(m.d, -m.b, -m.c, m.a)


def mobius_compose(outer: MobiusMap, inner: MobiusMap) -> MobiusMap:
    """outer o inner."""
    return MobiusMap.from_matrix(outer.matrix @ inner.matrix)


def mobius_determinant_defect(m: MobiusMap) -> float:
    """|ad - bc - 1|."""
    return abs(m.a * m.d - m.b * m.c - 1.0)


def chordal_distance_arrays(
    a0: ComplexArray, a1: ComplexArray, b0: ComplexArray, b1: ComplexArray
) -> RealArray:
    """Euclidean distance between the points on the unit sphere in R^3."""
    num = 2.0 * np.abs(a0 * b1 - a1 * b0)
    den = np.hypot(np.abs(a0), np.abs(a1)) * np.hypot(np.abs(b0), np.abs(b1))
    return num / den


def chordal_distance(p: SpherePoint, q: SpherePoint) -> float:
    """Chordal distance between two points (2 for antipodal points)."""
    return 2.0 * abs(p.z0 * q.z1 - p.z1 * q.z0)


def to_unit_vectors(z0: ComplexArray, z1: ComplexArray) -> RealArray:
    """Unit vectors in R^3 (stereographic, [1:0] at the north pole); shape (..., 3)."""
    z0, z1 = normalize(np.asarray(z0, dtype=np.complex128), np.asarray(z1, dtype=np.complex128))
    cross = z0 * np.conj(z1)
    return np.stack([2.0 * cross.real, 2.0 * cross.imag, np.abs(z0) ** 2 - np.abs(z1) ** 2], axis=-1)


def from_unit_vectors(x: RealArray) -> tuple[ComplexArray, ComplexArray]:
    """Inverse of to_unit_vectors for arrays of shape (..., 3)."""
    x = np.asarray(x, dtype=np.float64)
    x = x / np.linalg.norm(x, axis=-1, keepdims=True)
    north = x[..., 2] >= 0
    z0 = np.where(north, 1.0 + x[..., 2], x[..., 0] + 1j * x[..., 1])
    z1 = np.where(north, x[..., 0] - 1j * x[..., 1], 1.0 - x[..., 2])
    return normalize(z0.astype(np.complex128), z1.astype(np.complex128))


def round_density(w: ComplexArray) -> RealArray:
    """Density 4/(1+|w|^2)^2 of the round area form in any unitary chart."""
    return 4.0 / (1.0 + np.abs(w) ** 2) ** 2


def spherical_angles(p: SpherePoint) -> tuple[float, float]:
    """(theta, phi): polar angle from [1:0] and azimuth of the unit vector."""
    x = to_unit_vectors(np.array([p.z0]), np.array([p.z1]))[0]
    return float(np.arccos(np.clip(x[2], -1.0, 1.0))), float(np.arctan2(x[1], x[0]))


def from_spherical_angles(theta: RealArray, phi: RealArray) -> tuple[ComplexArray, ComplexArray]:
    """Homogeneous pairs of the points with polar angle theta and azimuth phi."""
    x = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1)
    return from_unit_vectors(x)


def random_points(rng: np.random.Generator, n: int) -> tuple[ComplexArray, ComplexArray]:
    """n points distributed uniformly on the sphere."""
    x = rng.standard_normal((n, 3))
    return from_unit_vectors(x)


def best_chart(z0: ComplexArray, z1: ComplexArray) -> int:
    """Chart tag whose pole is farthest from the given points."""
    distances = [
        float(np.min(chordal_distance_arrays(z0, z1, *chart_pole_arrays(tag)))) for tag in range(6)
    ]
    return int(np.argmax(distances))


def chart_pole_arrays(chart: Chart) -> tuple[ComplexArray, ComplexArray]:
    """Homogeneous coordinates of the pole of a chart, as length-1 arrays."""
    u_inv = chart_matrix(chart).conj().T
    return np.array([u_inv[0, 0]]), np.array([u_inv[1, 0]])


def chart_pole(chart: Chart) -> SpherePoint:
    """The point sent to infinity by a chart."""
    z0, z1 = chart_pole_arrays(chart)
    return SpherePoint(complex(z0[0]), complex(z1[0]))


def mobius_wirtinger(
    matrix: ComplexArray, w: ComplexArray, *, antiholomorphic: bool
) -> tuple[ComplexArray, ComplexArray, ComplexArray]:
    """Value and Wirtinger derivatives (d/dw, d/dw-bar) of w -> M(w) or w -> M(conj w)."""
    arg = np.conj(w) if antiholomorphic else w
    den = matrix[1, 0] * arg + matrix[1, 1]
    value = (matrix[0, 0] * arg + matrix[0, 1]) / den
    derivative = np.linalg.det(matrix) / den**2
    zero = np.zeros_like(derivative)
    if antiholomorphic:
        return value, zero, derivative
    return value, derivative, zero


def wirtinger_to_real(a: ComplexArray, b: ComplexArray) -> RealArray:
    """Real 2x2 matrices of dw -> a dw + b dw-bar, shape (..., 2, 2)."""
    s, t = a + b, a - b
    return np.stack(
        [np.stack([s.real, -t.imag], axis=-1), np.stack([s.imag, t.real], axis=-1)],
        axis=-2,
    )


def real_to_wirtinger(jac: RealArray) -> tuple[ComplexArray, ComplexArray]:
    """Inverse of wirtinger_to_real."""
    fx = jac[..., 0, 0] + 1j * jac[..., 1, 0]
    fy = jac[..., 0, 1] + 1j * jac[..., 1, 1]
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)
