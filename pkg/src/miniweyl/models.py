"""Core data models for the miniweyl laboratory.

Data Flow Through Models:
    1. SpherePoint / MobiusMap: Riemann-sphere arithmetic (sphere.py)
    2. Antipodal / MobiusConjugated / FlowPerturbed: SphereDiffeo descriptors (diffeo.py)
    3. KahlerData: the area form omega_1 = -psi^* omega_2 of a descriptor (kahler.py)
    4. WeylChartStructure / ConnectionCoeffs: compactified Weyl geometry (structures.py, weyl.py)
    5. NullPath / ScatteringSample / JacobiTransport: scattering data (scattering.py)
    6. HolomorphicDisk / WeldConstraints: welding solver state (welding.py)
    7. ModuliTangent / GeodesicFamily: moduli-space geometry (moduli.py, families.py)
    8. LiftedDisk / UtpResidual: Legendrian lifts to projective 3-space and their checks (lift.py)

All models are immutable. Arrays stored on frozen dataclasses are treated as
read-only by convention; operations always build new arrays.
"""

from collections.abc import Callable
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np
from numpy.typing import NDArray

type ComplexArray = NDArray[np.complex128]
type RealArray = NDArray[np.float64]

# Tolerance on |z0|^2 + |z1|^2 = 1 after normalization
NORMALIZATION_TOLERANCE = 1e-14


@dataclass(frozen=True)
class SpherePoint:
    """A point [z0 : z1] of the Riemann sphere in normalized homogeneous coordinates.

    The constructor rescales the pair to unit length; the overall phase is kept.
    """

    z0: complex
    z1: complex

    def __post_init__(self) -> None:
        """Normalize the homogeneous pair to a unit vector."""
        norm = float(np.hypot(abs(self.z0), abs(self.z1)))
        if norm == 0.0:
            msg = "(z0, z1) = (0, 0) is not a point of the sphere"
            raise ValueError(msg)
        object.__setattr__(self, "z0", complex(self.z0) / norm)
        object.__setattr__(self, "z1", complex(self.z1) / norm)

    @classmethod
    def from_affine(cls, w: complex) -> "SpherePoint":
        """Point with affine coordinate w = z0/z1 (w = inf gives [1:0])."""
        if np.isinf(abs(w)):
            return cls(1.0, 0.0)
        return cls(w, 1.0)

    @property
    def affine(self) -> complex:
        """Affine coordinate z0/z1, complex infinity at [1:0]."""
        if self.z1 == 0:
            return complex(np.inf, 0.0)
        return self.z0 / self.z1


# A chart is one of the six tagged charts of sphere.CHART_MATRICES or the
# unitary chart sending an arbitrary pole to infinity.
type Chart = int | SpherePoint


@dataclass(frozen=True)
class MobiusMap:
    """A Möbius transformation w -> (a w + b) / (c w + d) with ad - bc = 1."""

    a: complex
    b: complex
    c: complex
    d: complex

    @property
    def matrix(self) -> ComplexArray:
        """The SL(2,C) matrix [[a, b], [c, d]]."""
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=np.complex128)

    @classmethod
    def from_matrix(cls, matrix: ComplexArray) -> "MobiusMap":
        """Build from any invertible 2x2 matrix, rescaling to determinant 1."""
        det = complex(np.linalg.det(matrix))
        if abs(det) < 1e-300:
            msg = "Möbius matrix must be invertible"
            raise ValueError(msg)
        scaled = np.asarray(matrix, dtype=np.complex128) / np.sqrt(det)
        return cls(complex(scaled[0, 0]), complex(scaled[0, 1]), complex(scaled[1, 0]), complex(scaled[1, 1]))

    @classmethod
    def identity(cls) -> "MobiusMap":
        """The identity transformation."""
        return cls(1.0, 0.0, 0.0, 1.0)


class HarmonicKind(StrEnum):
    """How a spherical harmonic generates a vector field on the sphere."""

    GRADIENT = "gradient"  # round gradient of the harmonic
    ROTATIONAL = "rotational"  # gradient rotated by 90 degrees (Hamiltonian field)


@dataclass(frozen=True)
class Harmonic:
    """One term of a harmonic flow: coefficient times the field of the real harmonic Y_lm."""

    degree: int  # l, 1 <= l <= 4
    order: int  # m, |m| <= l; negative orders select the sine-type harmonic
    kind: HarmonicKind
    coefficient: float


@dataclass(frozen=True)
class Antipodal:
    """The antipodal map [z0 : z1] -> [-conj(z1) : conj(z0)]."""


@dataclass(frozen=True)
class MobiusConjugated:
    """The diffeomorphism post o base o pre."""

    pre: MobiusMap
    post: MobiusMap
    base: "SphereDiffeo"


@dataclass(frozen=True)
class FlowPerturbed:
    """The diffeomorphism Phi_T o base, Phi_T the time-T flow of a harmonic vector field."""

    base: "SphereDiffeo"
    harmonics: tuple[Harmonic, ...]
    flow_time: float


type SphereDiffeo = Antipodal | MobiusConjugated | FlowPerturbed


@dataclass(frozen=True)
class QuadratureGrid:
    """Product grid: Gauss-Legendre nodes in cos(theta) times uniform nodes in phi."""

    n_cos: int = 128
    n_phi: int = 256


@dataclass(frozen=True)
class KahlerData:
    """The area form omega_1 = -psi^* omega_2 as a density against the round form omega_2.

    conformal_factor evaluates the density at arrays of homogeneous coordinates.
    """

    conformal_factor: Callable[[ComplexArray, ComplexArray], RealArray]
    grid: QuadratureGrid
    total_mass: float  # integral of omega_1 over the sphere, 4 pi up to quadrature error
    min_density: float  # smallest sampled density, positive for orientation-reversing maps


@dataclass(frozen=True, eq=False)
class DiskParam:
    """An SL(2,C) matrix parameterizing one disk of the de Sitter family."""

    matrix: ComplexArray

    @classmethod
    def of(cls, a: complex, b: complex, c: complex, d: complex) -> "DiskParam":
        """Build from entries, rescaling to determinant 1."""
        return cls(MobiusMap.from_matrix(np.array([[a, b], [c, d]], dtype=np.complex128)).matrix)


@dataclass(frozen=True, eq=False)
class DeSitterModuliPoint:
    """A point of de Sitter space SL(2,C)/SU(1,1) with its canonical representative."""

    representative: DiskParam  # canonical coset representative
    hermitian_form: ComplexArray  # A diag(1,-1) A^*, a complete coset invariant
    log_scale: float  # t with eigenvalues e^{2t}, -e^{-2t} of the Hermitian form


type MetricField = Callable[[RealArray, int], RealArray]
type OneFormField = Callable[[RealArray, int], RealArray]
type ScalarField = Callable[[RealArray, int], RealArray]


@dataclass(frozen=True)
class WeylChartStructure:
    """Chart data (g_hat, alpha_hat, u) of a compactified Weyl structure on S^2 x [T-, T+].

    Coordinates are X = (T, x, y) with w = x + i y the coordinate of one of the
    unitary sphere charts; every field takes an array of points of shape (..., 3)
    plus the chart tag and returns components in that chart.
    """

    name: str
    g_hat: MetricField  # (..., 3) -> (..., 3, 3) symmetric, signature (-++)
    alpha_hat: OneFormField  # (..., 3) -> (..., 3)
    u: ScalarField  # (..., 3) -> (...), defining function vanishing at T = T-, T+
    t_minus: float
    t_plus: float
    collar: float = 1e-3  # integrators and checks stay this far from the boundary slices


@dataclass(frozen=True, eq=False)
class ConnectionCoeffs:
    """Christoffel symbols Gamma[k, i, j] of a Weyl connection at one point."""

    gamma: RealArray  # shape (3, 3, 3), symmetric in the last two indices
    error_estimate: float  # Richardson estimate of the finite-difference error


@dataclass(frozen=True)
class CompactnessReport:
    """Outcome of the conformal-compactness checklist for a structure."""

    nondegeneracy_margin: float  # (i) smallest |eigenvalue| of g_hat at the boundary
    alpha_defect: float  # (ii) sup |alpha_hat - 2 du/u| extrapolated to u = 0
    d_alpha_at_boundary: float  # (iii) sup |d alpha_hat| at boundary samples
    spacelike_margin: float  # (iv) smallest eigenvalue of the boundary-restricted metric
    failures: tuple[str, ...]  # names of the failing items

    @property
    def passed(self) -> bool:
        """True when every item is within tolerance."""
        return not self.failures


@dataclass(frozen=True, eq=False)
class NullPath:
    """A null geodesic of a compactified structure, sampled at accepted steps.

    Positions are stored as unit vectors of the sphere factor so that samples
    taken in different charts can be compared directly.
    """

    times: RealArray  # coordinate time T at accepted steps
    points: tuple[SpherePoint, ...]  # sphere-factor position at each accepted step
    start: SpherePoint  # endpoint on the initial infinity
    start_direction: float  # angle of dx/dT at the start, in the working chart of `start`
    end: SpherePoint  # extrapolated endpoint on the final infinity
    end_direction: float  # angle of dx/dT at the end, in the working chart of `end`
    extrapolation_error: float  # Richardson estimate of the endpoint error
    max_null_drift: float  # largest |g_hat(v, v)| seen at accepted steps
    future_directed: bool


@dataclass(frozen=True)
class RefocusReport:
    """Endpoints of a fan of null geodesics from one point of past infinity."""

    source: SpherePoint
    mean_endpoint: SpherePoint
    dispersion: float  # max pairwise chordal distance of the endpoints
    endpoints: tuple[SpherePoint, ...]


@dataclass(frozen=True)
class ScatteringSample:
    """One sample p -> q of the scattering map."""

    p: SpherePoint
    q: SpherePoint
    dispersion: float
    jacobian_det: float | None  # populated only when the Jacobian was requested
    failed: bool  # dispersion exceeded the refocusing tolerance


@dataclass(frozen=True)
class JacobiTransport:
    """Sign structure of the Jacobi 2-frame determinant along one null geodesic."""

    sign_change_parameter: float | None  # coordinate time of the unique sign change
    end_sign: int  # sign at the end relative to the start
    refocuses: bool  # the Jacobi field vanishing at the start also vanishes at the end
    end_ratio: float  # |J(end)| / max |J|, near zero when the geodesic refocuses


@dataclass(frozen=True, eq=False)
class HolomorphicDisk:
    """Truncated Taylor representation of a disk F = (F1, F2) with boundary on graph(psi).

    F1 is written in the unitary chart `chart1`, F2 in `chart2` (see sphere.chart_matrix).
    """

    f1: ComplexArray  # Taylor coefficients of F1, length N + 1
    f2: ComplexArray  # Taylor coefficients of F2, length N + 1
    chart1: Chart
    chart2: Chart
    residual_norm: float

    @property
    def degree(self) -> int:
        """Truncation degree N."""
        return len(self.f1) - 1


class TangentKind(StrEnum):
    """Causal type of a moduli tangent vector."""

    SPACELIKE = "spacelike"  # normal field with two simple boundary zeros
    NULL = "null"  # one double boundary zero
    TIMELIKE = "timelike"  # no boundary zero, one interior zero


@dataclass(frozen=True, eq=False)
class CenterPoint:
    """Fix F1(0) = z, F2(0) = w and F1'(0) = radius > 0 (all in the disk's charts)."""

    z: SpherePoint
    w: SpherePoint
    radius: float


@dataclass(frozen=True, eq=False)
class BoundaryContact:
    """Fix F1(1) = x and the direction of the boundary tangent i F1'(1) at x."""

    x: SpherePoint
    direction: float  # angle of the boundary tangent in the chart of F1


@dataclass(frozen=True, eq=False)
class TwoBoundaryPoints:
    """Fix F1(1) = x and F1(-1) = y for distinct x, y."""

    x: SpherePoint
    y: SpherePoint


type WeldConstraints = CenterPoint | BoundaryContact | TwoBoundaryPoints


@dataclass(frozen=True, eq=False)
class ModuliTangent:
    """An infinitesimal disk variation with its boundary-normal function."""

    delta_coeffs: ComplexArray  # perturbation of the F1 Taylor coefficients
    normal_boundary: RealArray  # rho(theta) on the boundary nodes
    classification: TangentKind | None
    form_value: float | None  # conformal form evaluated on this tangent
    interior_zeros: int | None  # argument-principle count, None if zeros lie on the boundary


@dataclass(frozen=True, eq=False)
class GeodesicFamily:
    """A continuation-traced one-parameter family of constrained disks."""

    kind: TangentKind
    disks: tuple[HolomorphicDisk, ...]
    parameter_values: tuple[float, ...]  # Omega along the family
    anchors: WeldConstraints
    closure_error: float | None = None  # loop closure for space-like families


@dataclass(frozen=True, eq=False)
class LiftedDisk:
    """Legendrian lift z = (F1, 1, mu F2, mu) of a disk to projective 3-space."""

    base: HolomorphicDisk
    mu: ComplexArray  # Taylor coefficients of mu, mu^2 = -F1'/F2'
    sign_choice: int  # +1 or -1, the branch of mu at zeta = 0
    fiber_angle: float = 0.0  # S^1 rotation applied to (z3, z4)


@dataclass(frozen=True)
class UtpResidual:
    """Boundary conditions of a lift: maxima over the boundary circle."""

    graph_distance: float  # chordal distance of (F1, F2) from graph(psi)
    tangent_reality: float  # relative deviation of [dF1 : dF2] from the graph's real tangent
    unit_norm: float  # | h(V, V) - 1 | for the normalized represented tangent V

    @property
    def worst(self) -> float:
        """Largest of the three residuals."""
        return max(self.graph_distance, self.tangent_reality, self.unit_norm)


@dataclass(frozen=True)
class WeldReport:
    """Convergence record of one welding solve."""

    iterations: int
    residual_history: tuple[float, ...] = field(default_factory=tuple)
    singular_values: tuple[float, ...] = field(default_factory=tuple)
