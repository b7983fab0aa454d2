"""Adaptive Dormand-Prince 5(4) integration of batches of trajectories.

All trajectories in a batch share one step size, chosen from the worst local
error estimate, so that samples stay aligned in the independent variable. An
optional projection hook runs after every accepted step; it may renormalize
constraints or change coordinates, which is why stages are recomputed rather
than reused across steps.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .errors import StepBudgetExceeded
from .models import RealArray

logger = logging.getLogger(__name__)

type RightHandSide = Callable[[float, RealArray], RealArray]
type Projection = Callable[[float, RealArray], RealArray]

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


@dataclass(frozen=True)
class ButcherTable:
    """Coefficients of an embedded explicit Runge-Kutta pair."""

    nodes: tuple[float, ...]
    matrix: tuple[tuple[float, ...], ...]
    weights: tuple[float, ...]  # propagating (higher-order) weights
    error_weights: tuple[float, ...]  # higher minus embedded weights
    order: int


DORMAND_PRINCE = ButcherTable(
    nodes=(0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0),
    matrix=(
        (),
        (1 / 5,),
        (3 / 40, 9 / 40),
        (44 / 45, -56 / 15, 32 / 9),
        (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
        (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
        (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
    ),
    weights=(35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0),
    error_weights=(
        71 / 57600,
        0.0,
        -71 / 16695,
        71 / 1920,
        -17253 / 339200,
        22 / 525,
        -1 / 40,
    ),
    order=5,
)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Accepted steps of a batch integration; states have shape (steps + 1, batch, n)."""

    times: RealArray
    states: RealArray
    rejected_steps: int = 0
    step_sizes: tuple[float, ...] = field(default_factory=tuple)


def _stage_step(
    table: ButcherTable, rhs: RightHandSide, t: float, y: RealArray, h: float
) -> tuple[RealArray, RealArray]:
    stages: list[RealArray] = []
    for node, row in zip(table.nodes, table.matrix, strict=True):
        increment = sum((a * k for a, k in zip(row, stages, strict=False) if a != 0.0), np.zeros_like(y))
        stages.append(rhs(t + node * h, y + h * increment))
    zero = np.zeros_like(y)
    y_new = y + h * sum((b * k for b, k in zip(table.weights, stages, strict=True) if b != 0.0), zero)
    error = h * sum((e * k for e, k in zip(table.error_weights, stages, strict=True) if e != 0.0), zero)
    return y_new, error


def _error_norm(y: RealArray, y_new: RealArray, error: RealArray, rtol: float, atol: float) -> float:
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    per_trajectory = np.sqrt(np.mean((error / scale) ** 2, axis=-1))
    return float(np.max(per_trajectory))


def integrate(
    rhs: RightHandSide,
    t_start: float,
    y_start: RealArray,
    t_end: float,
    *,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    first_step: float | None = None,
    max_steps: int = 20_000,
    project: Projection | None = None,
    table: ButcherTable = DORMAND_PRINCE,
) -> Trajectory:
    """Integrate y' = rhs(t, y) for a batch y of shape (batch, n) from t_start to t_end.

    Raises:
        StepBudgetExceeded: If more than max_steps steps (accepted or rejected) are needed.
    """
    direction = 1.0 if t_end >= t_start else -1.0
    span = abs(t_end - t_start)
    h = min(first_step or 1e-3 * span, span)
    t = t_start
    y = np.array(y_start, dtype=np.float64, copy=True)
    if project is not None:
        y = project(t, y)
    times = [t]
    states = [y]
    sizes: list[float] = []
    rejected = 0
    exponent = -1.0 / table.order

    for _ in range(max_steps):
        remaining = abs(t_end - t)
        if remaining <= 1e-14 * max(1.0, span):
            return Trajectory(np.array(times), np.stack(states), rejected, tuple(sizes))
        h = min(h, remaining)
        y_new, error = _stage_step(table, rhs, t, y, direction * h)
        norm = _error_norm(y, y_new, error, rtol, atol)
        if norm <= 1.0 and np.all(np.isfinite(y_new)):
            t = t_end if h == remaining else t + direction * h
            y = project(t, y_new) if project is not None else y_new
            times.append(t)
            states.append(y)
            sizes.append(h)
            factor = MAX_FACTOR if norm == 0.0 else min(MAX_FACTOR, SAFETY * norm**exponent)
            h *= max(1.0, factor)
        else:
            rejected += 1
            factor = MIN_FACTOR if not np.isfinite(norm) else max(MIN_FACTOR, SAFETY * norm**exponent)
            h *= min(1.0, factor)

    if abs(t_end - t) <= 1e-14 * max(1.0, span):
        return Trajectory(np.array(times), np.stack(states), rejected, tuple(sizes))
    msg = f"integration from {t_start:.6g} stopped at {t:.6g} after {max_steps} steps (target {t_end:.6g})"
    raise StepBudgetExceeded(msg)
