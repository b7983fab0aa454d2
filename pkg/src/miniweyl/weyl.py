"""Weyl connections of compactified structures, their curvature and the Einstein-Weyl residual.

Index conventions (pinned by the round-sphere test):
    Gamma[k, i, j] = Gamma^k_{ij}, symmetric in i, j.
    R^k_{lij} = d_i Gamma^k_{jl} - d_j Gamma^k_{il} + Gamma^k_{im} Gamma^m_{jl} - Gamma^k_{jm} Gamma^m_{il}
    Ric_{lj} = R^k_{lkj}, positive on round spheres.

The Weyl connection of (g_hat, alpha_hat) is the torsion-free connection with
nabla g_hat = alpha_hat (x) g_hat:

    Gamma = Gamma_LC(g_hat) - 1/2 (alpha_i delta^k_j + alpha_j delta^k_i - g_ij alpha^k).

Norms of symmetric tensors are taken against the positive-definite companion
of g_hat (the same eigenvectors, absolute eigenvalues).
"""

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .differences import CONNECTION_STEP, METRIC_STEP, partials
from .errors import DomainError, SingularMetric, StepTooLarge
from .models import CompactnessReport, ConnectionCoeffs, RealArray, WeylChartStructure

# Largest Richardson estimate accepted in curvature, relative to max(1, |Ric|)
CURVATURE_TOLERANCE = 1e-5
METRIC_CONDITION_LIMIT = 1e12

NONDEGENERACY_MIN = 1e-3
ALPHA_DEFECT_MAX = 1e-6
D_ALPHA_MAX = 1e-6

_DELTA = np.eye(3)


@dataclass(frozen=True, eq=False)
class CurvatureSample:
    """Symmetrized Ricci contraction at a point with its Richardson error estimate."""

    ricci: RealArray  # R^k_{ikj} + R^k_{jki}
    error_estimate: float


def _field(structure: WeylChartStructure, name: str, chart: int) -> Callable[[RealArray], RealArray]:
    function = getattr(structure, name)
    return lambda y: function(y, chart)


def _check_interior(structure: WeylChartStructure, x: RealArray, margin: float = 0.0) -> None:
    t = np.asarray(x)[..., 0]
    low = structure.t_minus + margin
    high = structure.t_plus - margin
    if np.any(t <= low) or np.any(t >= high):
        msg = f"T outside the interior ({low:.6g}, {high:.6g}) of structure {structure.name!r}"
        raise DomainError(msg)


def connection_arrays(
    structure: WeylChartStructure,
    x: RealArray,
    chart: int = 0,
    h: float = METRIC_STEP,
    *,
    richardson: bool = True,
) -> tuple[RealArray, float]:
    """Weyl Christoffel symbols at points x of shape (..., 3); result shape (..., 3, 3, 3).

    Raises:
        SingularMetric: If g_hat is not safely invertible at some point.
    """
    x = np.asarray(x, dtype=np.float64)
    g = structure.g_hat(x, chart)
    conditions = np.linalg.cond(g)
    if not np.all(np.isfinite(conditions)) or np.any(conditions > METRIC_CONDITION_LIMIT):
        msg = f"g_hat of {structure.name!r} is singular (condition {np.max(conditions):.3e})"
        raise SingularMetric(msg)
    g_inv = np.linalg.inv(g)
    derivative = partials(_field(structure, "g_hat", chart), x, h, richardson=richardson)
    dg = np.moveaxis(derivative.values, 0, -3)  # dg[..., a, b, c] = d_a g_bc
    lowered = 0.5 * (
        np.einsum("...ilj->...lij", dg) + np.einsum("...jli->...lij", dg) - dg
    )
    gamma = np.einsum("...kl,...lij->...kij", g_inv, lowered)
    alpha = structure.alpha_hat(x, chart)
    alpha_up = np.einsum("...kl,...l->...k", g_inv, alpha)
    gamma -= 0.5 * (
        np.einsum("...i,kj->...kij", alpha, _DELTA)
        + np.einsum("...j,ki->...kij", alpha, _DELTA)
        - np.einsum("...ij,...k->...kij", g, alpha_up)
    )
    return gamma, derivative.error_estimate


def weyl_connection_coeffs(structure: WeylChartStructure, x: RealArray, chart: int = 0) -> ConnectionCoeffs:
    """Christoffel symbols of the Weyl connection at one interior point.

    Raises:
        DomainError: If x is not strictly inside the time slab.
        SingularMetric: If g_hat is not invertible at x.
    """
    _check_interior(structure, x)
    gamma, error = connection_arrays(structure, np.asarray(x, dtype=np.float64), chart)
    return ConnectionCoeffs(gamma=gamma, error_estimate=error)


def nonmetricity_residual(structure: WeylChartStructure, x: RealArray, chart: int = 0) -> float:
    """max |nabla_i g_jk - alpha_i g_jk| at x, by finite differences of g_hat."""
    x = np.asarray(x, dtype=np.float64)
    gamma = weyl_connection_coeffs(structure, x, chart).gamma
    g = structure.g_hat(x, chart)
    alpha = structure.alpha_hat(x, chart)
    dg = partials(_field(structure, "g_hat", chart), x, METRIC_STEP).values
    covariant = (
        dg - np.einsum("lij,lk->ijk", gamma, g) - np.einsum("lik,jl->ijk", gamma, g)
    )
    return float(np.max(np.abs(covariant - np.einsum("i,jk->ijk", alpha, g))))


def curvature_ricci(structure: WeylChartStructure, x: RealArray, chart: int = 0) -> RealArray:
    """Symmetrized Ricci contraction R^k_{ikj} + R^k_{jki} of the Weyl connection at x.

    Raises:
        DomainError: If x is closer than the collar plus two steps to the boundary.
        StepTooLarge: If the Richardson estimate of the derivatives of Gamma is too large.
    """
    return curvature_sample(structure, x, chart).ricci


def curvature_sample(structure: WeylChartStructure, x: RealArray, chart: int = 0) -> CurvatureSample:
    """curvature_ricci together with its error estimate."""
    x = np.asarray(x, dtype=np.float64)
    _check_interior(structure, x, structure.collar + 2.0 * CONNECTION_STEP)
    gamma, _ = connection_arrays(structure, x, chart)

    def gamma_field(y: RealArray) -> RealArray:
        return connection_arrays(structure, y, chart)[0]

    derivative = partials(gamma_field, x, CONNECTION_STEP)
    d_gamma = derivative.values  # d_gamma[a, k, b, c] = d_a Gamma^k_bc
    riemann = (
        np.einsum("ikjl->klij", d_gamma)
        - np.einsum("jkil->klij", d_gamma)
        + np.einsum("kim,mjl->klij", gamma, gamma)
        - np.einsum("kjm,mil->klij", gamma, gamma)
    )
    ricci = np.einsum("klkj->lj", riemann)
    symmetrized = ricci + ricci.T
    scale = max(1.0, float(np.max(np.abs(symmetrized))))
    if derivative.error_estimate > CURVATURE_TOLERANCE * scale:
        msg = (
            f"Richardson estimate {derivative.error_estimate:.3e} exceeds tolerance "
            f"at T = {x[0]:.6g}; reduce the step or move away from the boundary"
        )
        raise StepTooLarge(msg)
    return CurvatureSample(symmetrized, derivative.error_estimate)


def euclidean_companion(g: RealArray) -> RealArray:
    """Positive-definite metric with the eigenvectors of g and absolute eigenvalues."""
    values, vectors = np.linalg.eigh(g)
    return np.einsum("...ik,...k,...jk->...ij", vectors, np.abs(values), vectors)


def trace_free_part(tensor: RealArray, g: RealArray) -> tuple[RealArray, float]:
    """(tensor - f g, f) with f = tr(g^{-1} tensor) / 3."""
    f = float(np.trace(np.linalg.solve(g, tensor))) / 3.0
    return tensor - f * g, f


def tensor_norm(tensor: RealArray, g: RealArray) -> float:
    """Norm of a symmetric 2-tensor against the positive companion of g."""
    companion_inv = np.linalg.inv(euclidean_companion(g))
    raised = companion_inv @ tensor @ companion_inv
    return float(np.sqrt(abs(np.einsum("ij,ij->", raised, tensor))))


def ew_residual(structure: WeylChartStructure, x: RealArray, chart: int = 0) -> float:
    """Norm of the trace-free part of curvature_ricci; zero where the Einstein-Weyl equation holds.

    Raises:
        DomainError: If x is too close to the boundary.
        StepTooLarge: If the curvature estimate is unreliable.
    """
    x = np.asarray(x, dtype=np.float64)
    g = structure.g_hat(x, chart)
    trace_free, _ = trace_free_part(curvature_ricci(structure, x, chart), g)
    return tensor_norm(trace_free, g)


def einstein_scalar(structure: WeylChartStructure, x: RealArray, chart: int = 0) -> float:
    """The function f with curvature_ricci = f g_hat up to the trace-free part."""
    x = np.asarray(x, dtype=np.float64)
    _, f = trace_free_part(curvature_ricci(structure, x, chart), structure.g_hat(x, chart))
    return f


def _boundary_samples(structure: WeylChartStructure) -> list[tuple[RealArray, int]]:
    radii = np.array([0.0, 0.5, 1.0])
    angles = 2.0 * np.pi * np.arange(6) / 6
    w = np.unique(np.round(np.outer(radii, np.exp(1j * angles)).ravel(), 12))
    sphere_xy = np.stack([w.real, w.imag], axis=-1)
    samples: list[tuple[RealArray, int]] = []
    for chart in (0, 1):
        for t in (structure.t_minus, structure.t_plus):
            points = np.concatenate([np.full((len(sphere_xy), 1), t), sphere_xy], axis=-1)
            samples.append((points, chart))
    return samples


def _toward_interior(points: RealArray, structure: WeylChartStructure, distance: float) -> RealArray:
    moved = points.copy()
    boundary = moved[:, 0]
    moved[:, 0] = np.where(boundary <= structure.t_minus, boundary + distance, boundary - distance)
    return moved


def _extrapolated(values_near: float, values_far: float) -> float:
    # linear extrapolation in the distance to the boundary
    return 2.0 * values_near - values_far


def conformal_compactness_check(structure: WeylChartStructure) -> CompactnessReport:
    """Evaluate the four conformal-compactness conditions near both boundary slices.

    Each quantity is sampled at distances collar and 2 collar from the boundary
    and extrapolated linearly to it. The report lists failing items by name.
    """
    delta = structure.collar
    nondegeneracy = np.inf
    spacelike = np.inf
    alpha_defect = 0.0
    d_alpha = 0.0
    for points, chart in _boundary_samples(structure):
        near = _toward_interior(points, structure, delta)
        far = _toward_interior(points, structure, 2.0 * delta)
        g_near, g_far = structure.g_hat(near, chart), structure.g_hat(far, chart)
        nondegeneracy = min(
            nondegeneracy,
            _extrapolated(
                float(np.min(np.abs(np.linalg.eigvalsh(g_near)))),
                float(np.min(np.abs(np.linalg.eigvalsh(g_far)))),
            ),
        )
        spacelike = min(
            spacelike,
            _extrapolated(
                float(np.min(np.linalg.eigvalsh(g_near[:, 1:, 1:]))),
                float(np.min(np.linalg.eigvalsh(g_far[:, 1:, 1:]))),
            ),
        )
        defects = [_alpha_defect(structure, p, chart) for p in (near, far)]
        alpha_defect = max(alpha_defect, *defects, _extrapolated(*defects))
        d_alpha = max(d_alpha, _exterior_derivative_norm(structure, near, chart))

    failures: list[str] = []
    if nondegeneracy < NONDEGENERACY_MIN:
        failures.append("nondegeneracy")
    if not alpha_defect <= ALPHA_DEFECT_MAX:
        failures.append("alpha_defect")
    if not d_alpha <= D_ALPHA_MAX:
        failures.append("d_alpha")
    if spacelike < NONDEGENERACY_MIN:
        failures.append("spacelike_boundary")
    return CompactnessReport(
        nondegeneracy_margin=float(nondegeneracy),
        alpha_defect=float(alpha_defect),
        d_alpha_at_boundary=float(d_alpha),
        spacelike_margin=float(spacelike),
        failures=tuple(failures),
    )


def _alpha_defect(structure: WeylChartStructure, points: RealArray, chart: int) -> float:
    u = structure.u(points, chart)
    du = np.moveaxis(partials(_field(structure, "u", chart), points, METRIC_STEP).values, 0, -1)
    defect = structure.alpha_hat(points, chart) - 2.0 * du / u[..., None]
    return float(np.max(np.abs(defect)))


def _exterior_derivative_norm(structure: WeylChartStructure, points: RealArray, chart: int) -> float:
    d = np.moveaxis(partials(_field(structure, "alpha_hat", chart), points, METRIC_STEP).values, 0, -2)
    # d[..., i, j] = d_i alpha_j
    return float(np.max(np.abs(d - np.swapaxes(d, -1, -2))))
