"""Central finite differences with one level of Richardson extrapolation."""

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .models import RealArray

# Steps used across the Weyl-geometry code
METRIC_STEP = 1e-4  # first derivatives of g_hat and alpha_hat
CONNECTION_STEP = 1e-3  # derivatives of Gamma inside curvature
SPRAY_STEP = 1e-5  # Gamma inside the geodesic integrator (no extrapolation)


@dataclass(frozen=True, eq=False)
class Partials:
    """Partial derivatives along the three coordinate axes, axis 0 indexing the coordinate."""

    values: RealArray
    error_estimate: float


def _central(field: Callable[[RealArray], RealArray], x: RealArray, h: float) -> RealArray:
    dim = x.shape[-1]
    offsets = h * np.eye(dim).reshape((dim,) + (1,) * (x.ndim - 1) + (dim,))
    plus = field(x[None, ...] + offsets)
    minus = field(x[None, ...] - offsets)
    return (plus - minus) / (2.0 * h)


def partials(
    field: Callable[[RealArray], RealArray], x: RealArray, h: float, *, richardson: bool = True
) -> Partials:
    """Derivatives d_i field at points x of shape (..., 3).

    The field must accept a leading stacking axis. The result has shape
    (3, ..., *field_shape). With Richardson extrapolation the step-h and
    step-h/2 differences are combined into a fourth-order estimate, and their
    discrepancy is reported as the error estimate.
    """
    x = np.asarray(x, dtype=np.float64)
    coarse = _central(field, x, h)
    if not richardson:
        return Partials(coarse, float("nan"))
    fine = _central(field, x, 0.5 * h)
    extrapolated = (4.0 * fine - coarse) / 3.0
    error = float(np.max(np.abs(extrapolated - fine), initial=0.0))
    return Partials(extrapolated, error)
