"""Catalogue of analytic Weyl chart structures and operations producing new ones from old.

Every structure uses coordinates X = (T, x, y) with w = x + i y a unitary sphere
chart coordinate. Structures are looked up by name through STRUCTURES so that
run configurations can refer to them without executing user code.
"""

from collections.abc import Callable
from dataclasses import replace
from typing import Any

import numpy as np

from . import sphere
from .desitter import compactified_desitter
from .differences import METRIC_STEP, partials
from .errors import DescriptorError
from .models import RealArray, ScalarField, WeylChartStructure

ALPHA_SCALE_DEFAULT = 1.1


def _round_density(x: RealArray) -> RealArray:
    return 4.0 / (1.0 + x[..., 1] ** 2 + x[..., 2] ** 2) ** 2


def unit_vectors(x: RealArray, chart: int) -> RealArray:
    """Unit vectors in R^3 of the sphere-factor positions of chart points (..., 3)."""
    w = x[..., 1] + 1j * x[..., 2]
    return sphere.to_unit_vectors(*sphere.from_chart(w, chart))


def static_cylinder() -> WeylChartStructure:
    """-dT^2 + round metric with alpha_hat = 0 on T in [-1, 1] (not Einstein-Weyl)."""

    def g_hat(x: RealArray, _chart: int) -> RealArray:
        rho = _round_density(x)
        g = np.zeros((*x.shape[:-1], 3, 3))
        g[..., 0, 0] = -1.0
        g[..., 1, 1] = rho
        g[..., 2, 2] = rho
        return g

    return WeylChartStructure(
        name="static_cylinder",
        g_hat=g_hat,
        alpha_hat=lambda x, _chart: np.zeros(np.shape(x)),
        u=lambda x, _chart: 1.0 - np.asarray(x)[..., 0] ** 2,
        t_minus=-1.0,
        t_plus=1.0,
    )


def flat_patch(alpha_t: float = 0.0) -> WeylChartStructure:
    """Minkowski chart -dT^2 + dx^2 + dy^2 with constant alpha_hat = alpha_t dT."""

    def g_hat(x: RealArray, _chart: int) -> RealArray:
        return np.broadcast_to(np.diag([-1.0, 1.0, 1.0]), (*np.shape(x)[:-1], 3, 3)).copy()

    def alpha_hat(x: RealArray, _chart: int) -> RealArray:
        alpha = np.zeros(np.shape(x))
        alpha[..., 0] = alpha_t
        return alpha

    return WeylChartStructure(
        name="flat_patch",
        g_hat=g_hat,
        alpha_hat=alpha_hat,
        u=lambda x, _chart: 1.0 - np.asarray(x)[..., 0] ** 2,
        t_minus=-1.0,
        t_plus=1.0,
    )


def degenerate_desitter() -> WeylChartStructure:
    """de Sitter data with the sphere factor scaled by u^2, so g_hat degenerates at the boundary."""
    base = compactified_desitter()

    def g_hat(x: RealArray, chart: int) -> RealArray:
        g = base.g_hat(x, chart)
        g[..., 1:, 1:] *= (np.cos(np.asarray(x)[..., 0]) ** 2)[..., None, None]
        return g

    return replace(base, name="degenerate_desitter", g_hat=g_hat)


def scale_alpha(structure: WeylChartStructure, factor: float = ALPHA_SCALE_DEFAULT) -> WeylChartStructure:
    """The same metric with alpha_hat multiplied by `factor`."""

    def alpha_hat(x: RealArray, chart: int) -> RealArray:
        return factor * structure.alpha_hat(x, chart)

    return replace(structure, name=f"{structure.name}_alpha_x{factor:g}", alpha_hat=alpha_hat)


def conformal_rescale(
    structure: WeylChartStructure, phi: ScalarField, name: str | None = None
) -> WeylChartStructure:
    """Change of gauge g_hat -> e^{2 phi} g_hat, alpha_hat -> alpha_hat + 2 d phi, u -> e^phi u.

    The Weyl connection is unchanged; d phi is taken by Richardson-extrapolated
    central differences.
    """

    def g_hat(x: RealArray, chart: int) -> RealArray:
        return np.exp(2.0 * phi(x, chart))[..., None, None] * structure.g_hat(x, chart)

    def alpha_hat(x: RealArray, chart: int) -> RealArray:
        d_phi = partials(lambda y: phi(y, chart), np.asarray(x, dtype=np.float64), METRIC_STEP).values
        return structure.alpha_hat(x, chart) + 2.0 * np.moveaxis(d_phi, 0, -1)

    def u(x: RealArray, chart: int) -> RealArray:
        return np.exp(phi(x, chart)) * structure.u(x, chart)

    return replace(
        structure,
        name=name or f"{structure.name}_rescaled",
        g_hat=g_hat,
        alpha_hat=alpha_hat,
        u=u,
    )


def rescaled_desitter(strength: float = 0.2) -> WeylChartStructure:
    """de Sitter in the gauge e^{2 phi} g_hat with phi = strength cos(T) X_3."""

    def phi(x: RealArray, chart: int) -> RealArray:
        x = np.asarray(x, dtype=np.float64)
        return strength * np.cos(x[..., 0]) * unit_vectors(x, chart)[..., 2]

    return conformal_rescale(compactified_desitter(), phi, name="desitter_rescaled")


STRUCTURES: dict[str, Callable[..., WeylChartStructure]] = {
    "desitter": compactified_desitter,
    "desitter_rescaled": rescaled_desitter,
    "static_cylinder": static_cylinder,
    "flat_patch": flat_patch,
    "degenerate_desitter": degenerate_desitter,
    "desitter_alpha_scaled": lambda factor=ALPHA_SCALE_DEFAULT: scale_alpha(compactified_desitter(), factor),
}


def build_structure(name: str, params: dict[str, Any] | None = None) -> WeylChartStructure:
    """Instantiate a catalogued structure.

    Raises:
        DescriptorError: If the name is unknown or the parameters do not fit.
    """
    factory = STRUCTURES.get(name)
    if factory is None:
        msg = f"unknown structure {name!r}; choose from {', '.join(sorted(STRUCTURES))}"
        raise DescriptorError(msg)
    try:
        return factory(**(params or {}))
    except TypeError as e:
        msg = f"bad parameters for structure {name!r}: {e}"
        raise DescriptorError(msg) from e
