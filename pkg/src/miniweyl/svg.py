"""SVG plots of geodesic families and scattering samples.

Family plots draw the boundary curves of F1 and F2 for every member, in the
standard stereographic coordinate of each sphere, and annotate how far each
curve is from a round circle. Scattering plots draw an arrow p -> q per
sample in longitude/latitude. Output bytes depend only on the input and the
matplotlib version: the SVG hash salt is pinned and the date metadata dropped.
"""

import io
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import matplotlib as mpl
import numpy as np
import shapely.geometry as shg
from matplotlib.figure import Figure

from . import sphere, welding
from .errors import ConfigInvalid
from .models import Chart, ComplexArray, GeodesicFamily, HolomorphicDisk, RealArray, ScatteringSample
from .output import write_text

logger = logging.getLogger(__name__)

HASH_SALT = "miniweyl"
CURVE_SAMPLES = 256
VIEW_LIMIT = 1e3  # curves reaching farther than this in the standard chart are clipped from the plot


@dataclass(frozen=True)
class CurvePlotReport:
    """What a family plot found out about the curves it drew."""

    path: Path
    max_circle_residual: float  # over all drawn curves, relative to the fitted radius
    crossings: tuple[tuple[int, int], ...]  # pairs of members whose F1 curves meet
    nested: bool  # every F1 curve encloses or is enclosed by every other one


def circle_fit_residual(points: ComplexArray) -> float:
    """Largest deviation of points from their least-squares circle, relative to its radius."""
    x, y = points.real, points.imag
    design = np.column_stack([x, y, np.ones_like(x)])
    (a, b, c), *_ = np.linalg.lstsq(design, x**2 + y**2, rcond=None)
    center = complex(a / 2.0, b / 2.0)
    radius = math.sqrt(c + abs(center) ** 2)
    return float(np.max(np.abs(np.abs(points - center) - radius))) / radius


def _standard_curve(coeffs: ComplexArray, chart: Chart, samples: int) -> ComplexArray:
    w = welding.boundary_values(coeffs, max(samples, len(coeffs)))
    z0, z1 = sphere.from_chart(w, chart)
    with np.errstate(divide="ignore", invalid="ignore"):
        return z0 / z1


def boundary_curves(disk: HolomorphicDisk, samples: int = CURVE_SAMPLES) -> tuple[ComplexArray, ComplexArray]:
    """Boundary curves of F1 and F2 in the standard coordinate z0 / z1."""
    return _standard_curve(disk.f1, disk.chart1, samples), _standard_curve(disk.f2, disk.chart2, samples)


def _ring(curve: ComplexArray) -> shg.LinearRing:
    return shg.LinearRing(np.column_stack([curve.real, curve.imag]))


def crossing_pairs(curves: Sequence[ComplexArray]) -> list[tuple[int, int]]:
    """Index pairs of closed curves that meet."""
    rings = [_ring(curve) for curve in curves]
    return [
        (i, j) for i in range(len(rings)) for j in range(i + 1, len(rings)) if rings[i].intersects(rings[j])
    ]


def is_nested(curves: Sequence[ComplexArray]) -> bool:
    """True when the regions bounded by the curves form a chain under inclusion."""
    regions = [shg.Polygon(_ring(curve)) for curve in curves]
    return all(a.contains(b) or b.contains(a) for i, a in enumerate(regions) for b in regions[i + 1 :])


def _visible(curve: ComplexArray) -> bool:
    return bool(np.all(np.isfinite(curve)) and np.max(np.abs(curve)) < VIEW_LIMIT)


def _save(fig: Figure, path: Path) -> Path:
    buffer = io.StringIO()
    with mpl.rc_context({"svg.hashsalt": HASH_SALT}):
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    return write_text(path, buffer.getvalue())


def emit_family_svg(family: GeodesicFamily, path: Path) -> CurvePlotReport:
    """Plot the F1 and F2 boundary curves of every member side by side.

    Raises:
        ConfigInvalid: If the family has no disks.
        IoFailure: If the file cannot be written.
    """
    if not family.disks:
        msg = "cannot plot an empty family"
        raise ConfigInvalid(msg)
    curves = [boundary_curves(disk) for disk in family.disks]
    fig = Figure(figsize=(10, 5))
    axes = fig.subplots(1, 2)
    residuals: list[float] = []
    for side, ax in enumerate(axes):
        colors = mpl.colormaps["viridis"](np.linspace(0.0, 1.0, len(curves)))
        for pair, color in zip(curves, colors, strict=True):
            curve = pair[side]
            if not _visible(curve):
                continue
            residuals.append(circle_fit_residual(curve))
            closed = np.append(curve, curve[0])
            ax.plot(closed.real, closed.imag, color=color, linewidth=0.8)
        ax.set_aspect("equal")
        ax.set_title("F1 boundaries" if side == 0 else "F2 boundaries")
    worst = max(residuals, default=math.nan)
    first = [pair[0] for pair in curves if _visible(pair[0])]
    crossings = tuple(crossing_pairs(first))
    nested = is_nested(first)
    fig.suptitle(
        f"{family.kind} family, {len(family.disks)} disks: circle-fit residual {worst:.1e}, "
        f"{len(crossings)} crossings"
    )
    if crossings:
        logger.warning("family boundary curves cross: %s", crossings[:5])
    return CurvePlotReport(_save(fig, path), worst, crossings, nested)


def _lon_lat(vectors: RealArray) -> tuple[RealArray, RealArray]:
    lon = np.degrees(np.arctan2(vectors[:, 1], vectors[:, 0]))
    lat = np.degrees(np.arcsin(np.clip(vectors[:, 2], -1.0, 1.0)))
    return lon, lat


def emit_scatter_svg(samples: Sequence[ScatteringSample], path: Path) -> Path:
    """Arrow p -> q for each sample; failed samples are drawn in red.

    Raises:
        ConfigInvalid: If there are no samples.
        IoFailure: If the file cannot be written.
    """
    if not samples:
        msg = "cannot plot an empty scattering sample set"
        raise ConfigInvalid(msg)
    p = sphere.to_unit_vectors(*sphere.point_arrays([s.p for s in samples]))
    q = sphere.to_unit_vectors(*sphere.point_arrays([s.q for s in samples]))
    p_lon, p_lat = _lon_lat(p)
    q_lon, q_lat = _lon_lat(q)
    colors = ["tab:red" if s.failed else "tab:blue" for s in samples]
    fig = Figure(figsize=(10, 5))
    ax = fig.subplots()
    ax.quiver(
        p_lon,
        p_lat,
        q_lon - p_lon,
        q_lat - p_lat,
        angles="xy",
        scale_units="xy",
        scale=1.0,
        color=colors,
        width=0.002,
    )
    ax.set_xlim(-180.0, 180.0)
    ax.set_ylim(-90.0, 90.0)
    ax.set_xlabel("longitude")
    ax.set_ylabel("latitude")
    failed = sum(s.failed for s in samples)
    ax.set_title(f"Scattering map, {len(samples)} samples, {failed} failed")
    return _save(fig, path)
