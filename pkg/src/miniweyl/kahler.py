"""The area form omega_1 = -psi^* omega_2 and the Lagrangian property of graph(psi).

omega_2 is the round area form of CP^1 with its complex orientation; in any
unitary chart it reads rho(w) dx ^ dy with rho = 4/(1+|w|^2)^2. For an
orientation-reversing psi the pullback -psi^* omega_2 is again positive, with
density

    c(p) = -det J(p) rho(psi p) / rho(p)

against omega_2. Summing omega_1 and omega_2 over CP^1 x CP^1, the graph of psi
is Lagrangian; the residual check evaluates both forms on pushed-forward
tangent pairs, with dpsi from differences of psi rather than from c.
"""

import logging
import math

import numpy as np

from . import diffeo, sphere
from .diffeo import DiffeoChain
from .errors import ChartPole, MassDefect, NonPositiveDensity
from .models import ComplexArray, KahlerData, QuadratureGrid, RealArray, SphereDiffeo, SpherePoint

logger = logging.getLogger(__name__)

MASS_TOLERANCE = 1e-6
PUSHFORWARD_STEP = 1e-5  # relative step of the central differences for dpsi


def quadrature_nodes(grid: QuadratureGrid) -> tuple[ComplexArray, ComplexArray, RealArray]:
    """Nodes (z0, z1) and weights of the product rule for integrals against the round form."""
    cos_nodes, cos_weights = np.polynomial.legendre.leggauss(grid.n_cos)
    phi = 2.0 * np.pi * np.arange(grid.n_phi) / grid.n_phi
    theta = np.arccos(cos_nodes)
    theta_grid, phi_grid = np.meshgrid(theta, phi, indexing="ij")
    z0, z1 = sphere.from_spherical_angles(theta_grid.ravel(), phi_grid.ravel())
    weights = np.repeat(cos_weights * (2.0 * np.pi / grid.n_phi), grid.n_phi)
    return z0, z1, weights


def conformal_factor_arrays(
    psi: SphereDiffeo | DiffeoChain, z0: ComplexArray, z1: ComplexArray
) -> RealArray:
    """Density c(p) of omega_1 against omega_2 at arrays of points."""
    w_in, w_out, a, b = diffeo.wirtinger_arrays(psi, z0, z1)
    det = np.abs(a) ** 2 - np.abs(b) ** 2
    return -det * sphere.round_density(w_out) / sphere.round_density(w_in)


def pullback_area_data(psi: SphereDiffeo | DiffeoChain, grid: QuadratureGrid | None = None) -> KahlerData:
    """Build omega_1 = -psi^* omega_2 and integrate it over the sphere.

    Raises:
        NonPositiveDensity: If the density is not positive at some quadrature node.
        MassDefect: If the total mass is off 4 pi by more than MASS_TOLERANCE.
    """
    grid = grid or QuadratureGrid()
    z0, z1, weights = quadrature_nodes(grid)
    density = conformal_factor_arrays(psi, z0, z1)
    min_density = float(np.min(density))
    if min_density <= 0.0:
        msg = f"pulled-back density reaches {min_density:.3e}; psi is not orientation-reversing"
        raise NonPositiveDensity(msg)
    total = float(np.sum(density * weights))
    if abs(total - 4.0 * math.pi) > MASS_TOLERANCE:
        msg = f"omega_1 has mass {total:.9f}, off 4 pi by {total - 4.0 * math.pi:.2e}"
        raise MassDefect(msg)
    logger.debug("omega_1 mass %.12f, min density %.3e", total, min_density)

    def conformal_factor(q0: ComplexArray, q1: ComplexArray) -> RealArray:
        return conformal_factor_arrays(psi, q0, q1)

    return KahlerData(conformal_factor=conformal_factor, grid=grid, total_mass=total, min_density=min_density)


def _pushforward(
    chain: DiffeoChain, w: complex, chart_in: int, chart_out: int, direction: complex
) -> complex:
    """dpsi applied to `direction` at w, by central differences between the two charts."""

    def image(v: complex) -> complex:
        z0, z1 = sphere.from_chart(np.array([v], dtype=np.complex128), chart_in)
        return complex(sphere.to_chart(*diffeo.apply_arrays(chain, z0, z1), chart_out)[0])

    step = PUSHFORWARD_STEP * max(1.0, abs(w))
    return (image(w + step * direction) - image(w - step * direction)) / (2.0 * step)


def lagrangian_residual(
    psi: SphereDiffeo | DiffeoChain, p: SpherePoint, kahler_data: KahlerData | None = None
) -> float:
    """(omega_1 + omega_2) on the graph tangents (u, dpsi u), (v, dpsi v) at (p, psi(p)).

    u and v are the coordinate vectors of the working chart at p, and the value
    is relative to omega_2(u, v). omega_1 is read from the conformal factor of
    `kahler_data` (built from psi when omega_1 is not given), taken as a
    positive form, while dpsi comes from differencing psi itself, so a map
    that does not match its form leaves a residual. Orientation-preserving
    maps leave 2 |det dpsi| rho(psi p) / rho(p) instead of cancelling.

    Raises:
        ChartPole: If p or psi(p) cannot be expressed in a working chart.
    """
    chain = diffeo.compile_diffeo(psi)
    z0, z1 = np.array([p.z0]), np.array([p.z1])
    q0, q1 = diffeo.apply_arrays(chain, z0, z1)
    chart_in = int(sphere.working_chart(z0, z1)[0])
    chart_out = int(sphere.working_chart(q0, q1)[0])
    w_in = sphere.to_chart(z0, z1, chart_in)
    w_out = sphere.to_chart(q0, q1, chart_out)
    du = _pushforward(chain, complex(w_in[0]), chart_in, chart_out, 1.0)
    dv = _pushforward(chain, complex(w_in[0]), chart_in, chart_out, 1j)
    if kahler_data is not None:
        factor = kahler_data.conformal_factor(z0, z1)
    else:
        factor = conformal_factor_arrays(chain, z0, z1)
    rho_in = sphere.round_density(w_in)
    omega_1 = np.abs(factor) * rho_in
    omega_2 = sphere.round_density(w_out) * (du.real * dv.imag - du.imag * dv.real)
    value = np.abs(omega_1 + omega_2) / rho_in
    if not np.all(np.isfinite(value)):
        msg = f"graph tangent plane at {p.affine} hit a chart pole"
        raise ChartPole(msg)
    return float(value[0])
