"""Rich tables for the console and atomic artifact writers for the harness.

Artifacts are JSON for structured results, JSONL for families, CSV for
scattering grids and SVG for plots (svg.py). Every writer goes through a
temporary file in the destination directory followed by os.replace, so a
reader never sees a half-written artifact.
"""

import csv
import io
import json
import math
import os
import tempfile
from collections.abc import Iterable, Mapping, Sequence
from datetime import UTC, datetime
from pathlib import Path
from typing import cast

import numpy as np
from rich.console import Console
from rich.table import Table
from rich.text import Text

from . import sphere
from .config import SINGULAR_TOLERANCE
from .errors import ConfigInvalid, IoFailure, MiniWeylError
from .models import (
    Chart,
    ComplexArray,
    DiskParam,
    GeodesicFamily,
    HolomorphicDisk,
    LiftedDisk,
    ModuliTangent,
    ScatteringSample,
    SpherePoint,
    UtpResidual,
    WeldReport,
)

SCATTER_COLUMNS = ("p_theta", "p_phi", "q_theta", "q_phi", "dispersion", "jac_det")

# Values at or below these are shown green in tables, above them red
RESIDUAL_GOOD = 1e-8
DISPERSION_GOOD = 1e-6


def write_text(path: Path, text: str) -> Path:
    """Atomically replace `path` with `text`.

    Raises:
        IoFailure: If the directory cannot be created or the file cannot be written.
    """
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(
            "w", encoding="utf-8", dir=path.parent, prefix=f".{path.name}.", delete=False, newline=""
        ) as handle:
            handle.write(text)
            temp = Path(handle.name)
        os.replace(temp, path)
    except OSError as e:
        msg = f"cannot write {path}: {e}"
        raise IoFailure(msg) from e
    return path


def write_json(path: Path, data: object) -> Path:
    """Atomically write `data` as indented JSON with sorted keys."""
    return write_text(path, json.dumps(data, indent=2, sort_keys=True) + "\n")


def write_jsonl(path: Path, rows: Iterable[Mapping[str, object]]) -> Path:
    """Atomically write one JSON object per line."""
    return write_text(path, "".join(json.dumps(row, sort_keys=True) + "\n" for row in rows))


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    """Atomically write a CSV file with a header row."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return write_text(path, buffer.getvalue())


def _pairs(values: ComplexArray) -> list[list[float]]:
    return [[float(v.real), float(v.imag)] for v in np.asarray(values, dtype=np.complex128)]


def _complex_array(pairs: object, label: str) -> ComplexArray:
    try:
        data = np.asarray(pairs, dtype=np.float64)
    except (TypeError, ValueError) as e:
        msg = f"{label} must be a list of [re, im] pairs"
        raise ConfigInvalid(msg) from e
    if data.ndim != 2 or data.shape[1] != 2:  # noqa: PLR2004
        msg = f"{label} must be a list of [re, im] pairs"
        raise ConfigInvalid(msg)
    return data[:, 0] + 1j * data[:, 1]


def chart_to_json(chart: Chart) -> int | dict[str, list[list[float]]]:
    """Octahedral charts are written as their tag, pole charts as {"pole": [z0, z1]}."""
    if isinstance(chart, SpherePoint):
        return {"pole": _pairs(np.array([chart.z0, chart.z1]))}
    return int(chart)


def chart_from_json(data: object) -> Chart:
    """Inverse of chart_to_json.

    Raises:
        ConfigInvalid: If the value is neither a chart tag in 0..5 nor a pole object.
    """
    if isinstance(data, int) and not isinstance(data, bool) and 0 <= data < len(sphere.CHART_MATRICES):
        return data
    if isinstance(data, dict) and "pole" in data:
        z0, z1 = _complex_array(data["pole"], "chart pole")  # pyright: ignore[reportUnknownArgumentType]
        return SpherePoint(complex(z0), complex(z1))
    msg = f"invalid chart {data!r}"
    raise ConfigInvalid(msg)


def disk_to_json(disk: HolomorphicDisk) -> dict[str, object]:
    """{"N", "F1", "F2", "charts", "residual"} with coefficients as [re, im] pairs."""
    return {
        "N": disk.degree,
        "F1": _pairs(disk.f1),
        "F2": _pairs(disk.f2),
        "charts": [chart_to_json(disk.chart1), chart_to_json(disk.chart2)],
        "residual": disk.residual_norm,
    }


def disk_from_json(data: object) -> HolomorphicDisk:
    """Read a disk written by disk_to_json.

    Raises:
        ConfigInvalid: If fields are missing or the coefficient lengths disagree with N.
    """
    if not isinstance(data, dict):
        msg = "disk JSON must be an object"
        raise ConfigInvalid(msg)
    fields: dict[str, object] = data  # pyright: ignore[reportUnknownVariableType]
    missing = {"N", "F1", "F2", "charts"} - fields.keys()
    if missing:
        msg = f"disk JSON is missing {sorted(missing)}"
        raise ConfigInvalid(msg)
    f1 = _complex_array(fields["F1"], "F1")
    f2 = _complex_array(fields["F2"], "F2")
    degree = fields["N"]
    if not isinstance(degree, int) or len(f1) != degree + 1 or len(f2) != degree + 1:
        msg = f"F1 and F2 must have N + 1 coefficients (N = {degree!r})"
        raise ConfigInvalid(msg)
    charts = fields["charts"]
    if not isinstance(charts, list) or len(cast("list[object]", charts)) != 2:  # noqa: PLR2004
        msg = "charts must be a list of two charts"
        raise ConfigInvalid(msg)
    residual = fields.get("residual", math.nan)
    return HolomorphicDisk(
        f1=f1,
        f2=f2,
        chart1=chart_from_json(cast("list[object]", charts)[0]),
        chart2=chart_from_json(cast("list[object]", charts)[1]),
        residual_norm=float(residual) if isinstance(residual, int | float) else math.nan,
    )


def disk_param_to_json(param: DiskParam) -> dict[str, list[list[float]]]:
    """{"A": [a, b, c, d]} with entries row-major as [re, im] pairs."""
    return {"A": _pairs(param.matrix.reshape(4))}


def disk_param_from_json(data: object) -> DiskParam:
    """Read {"A": ...}, rescaling the matrix to determinant 1.

    Raises:
        ConfigInvalid: If A is missing, does not have four entries, or is singular.
    """
    if not isinstance(data, dict) or "A" not in data:
        msg = 'disk parameter JSON must be an object with an "A" matrix'
        raise ConfigInvalid(msg)
    entries = _complex_array(data["A"], "A")  # pyright: ignore[reportUnknownArgumentType]
    if len(entries) != 4:  # noqa: PLR2004
        msg = f"A must list four entries, got {len(entries)}"
        raise ConfigInvalid(msg)
    a, b, c, d = (complex(e) for e in entries)
    if abs(a * d - b * c) < SINGULAR_TOLERANCE:
        msg = "A is singular"
        raise ConfigInvalid(msg)
    return DiskParam.of(a, b, c, d)


def lift_to_json(lifted: LiftedDisk, residual: UtpResidual, legendrian: float) -> dict[str, object]:
    """The base disk plus mu, the branch, the fibre angle and the lift checks."""
    return {
        **disk_to_json(lifted.base),
        "mu": _pairs(lifted.mu),
        "sign": lifted.sign_choice,
        "fiber_angle": lifted.fiber_angle,
        "legendrian_residual": legendrian,
        "utp_residual": {
            "graph_distance": residual.graph_distance,
            "tangent_reality": residual.tangent_reality,
            "unit_norm": residual.unit_norm,
        },
    }


def family_rows(family: GeodesicFamily) -> list[dict[str, object]]:
    """One JSONL row per family member: its index, kind, Omega and the disk."""
    return [
        {"index": k, "kind": str(family.kind), "omega": omega, "disk": disk_to_json(disk)}
        for k, (disk, omega) in enumerate(zip(family.disks, family.parameter_values, strict=True))
    ]


def _unit_vector(p: SpherePoint) -> list[float]:
    return [float(c) for c in sphere.to_unit_vectors(np.array([p.z0]), np.array([p.z1]))[0]]


def scatter_rows(samples: Sequence[ScatteringSample]) -> list[list[object]]:
    """CSV rows matching SCATTER_COLUMNS; a missing determinant is left blank."""
    return [
        [
            *sphere.spherical_angles(s.p),
            *sphere.spherical_angles(s.q),
            s.dispersion,
            "" if s.jacobian_det is None else s.jacobian_det,
        ]
        for s in samples
    ]


def scatter_report(samples: Sequence[ScatteringSample]) -> dict[str, object]:
    """Refocusing summary of a scattering grid, including the samples that failed to refocus."""
    failed = [k for k, s in enumerate(samples) if s.failed]
    return {
        "samples": len(samples),
        "max_dispersion": max((s.dispersion for s in samples), default=0.0),
        "failed_rows": failed,
        "failed_count": len(failed),
    }


def manifest(
    config: Mapping[str, object],
    artifacts: Sequence[Path],
    error: MiniWeylError | None = None,
    summary: Mapping[str, object] | None = None,
) -> dict[str, object]:
    """Run manifest: the resolved config, the outcome and the artifacts written.

    A failed run records the error class and message; a run with headline
    numbers records them under "summary". The timestamp is the only field that
    differs between identical runs.
    """
    record: dict[str, object] = {
        "config": dict(config),
        "status": "ok" if error is None else "failed",
        "artifacts": sorted(p.name for p in artifacts),
        "timestamp": datetime.now(UTC).isoformat(timespec="seconds"),
    }
    if error is not None:
        record["error"] = {"type": type(error).__name__, "message": str(error)}
    if summary:
        record["summary"] = dict(summary)
    return record


def _residual_text(value: float, good: float = RESIDUAL_GOOD) -> Text:
    text = Text(f"{value:.2e}")
    text.style = "green" if value <= good else "red"
    return text


def format_disk_table(disk: HolomorphicDisk, report: WeldReport | None = None) -> Table:
    """Leading coefficients and the convergence record of a solved disk."""
    table = Table(title=f"Welded Disk (N = {disk.degree})")
    table.add_column("k", justify="right", style="cyan")
    table.add_column("F1 coefficient", justify="right", style="magenta")
    table.add_column("F2 coefficient", justify="right", style="magenta")
    for k in range(min(4, disk.degree + 1)):
        table.add_row(str(k), f"{complex(disk.f1[k]):.6g}", f"{complex(disk.f2[k]):.6g}")
    table.caption = f"boundary residual {disk.residual_norm:.2e}"
    if report is not None:
        table.caption += f", {report.iterations} Gauss-Newton iterations"
    return table


def format_scatter_table(samples: Sequence[ScatteringSample]) -> Table:
    """Per-sample dispersion and Jacobian determinant."""
    table = Table(title="Scattering Map Samples")
    table.add_column("p", style="cyan", no_wrap=True)
    table.add_column("q", style="cyan", no_wrap=True)
    table.add_column("Dispersion", justify="right")
    table.add_column("det", justify="right", style="magenta")
    for s in samples:
        p = ", ".join(f"{c:+.3f}" for c in _unit_vector(s.p))
        q = ", ".join(f"{c:+.3f}" for c in _unit_vector(s.q))
        det = "-" if s.jacobian_det is None else f"{s.jacobian_det:+.4f}"
        table.add_row(p, q, _residual_text(s.dispersion, DISPERSION_GOOD), det)
    return table


def format_family_table(family: GeodesicFamily) -> Table:
    """Omega and boundary residual along a family."""
    table = Table(title=f"{str(family.kind).capitalize()} Geodesic Family ({len(family.disks)} disks)")
    table.add_column("#", justify="right", style="cyan")
    table.add_column("Omega", justify="right", style="magenta")
    table.add_column("Residual", justify="right")
    for k, (disk, omega) in enumerate(zip(family.disks, family.parameter_values, strict=True)):
        table.add_row(str(k), f"{omega:.6f}", _residual_text(disk.residual_norm))
    if family.closure_error is not None:
        table.caption = f"loop closure error {family.closure_error:.2e}"
    return table


def format_tangent_table(tangents: Sequence[tuple[str, ModuliTangent]]) -> Table:
    """Causal type, interior zeros and form value of named moduli tangents."""
    table = Table(title="Moduli Tangents")
    table.add_column("Tangent", style="cyan")
    table.add_column("Type", style="magenta")
    table.add_column("Interior zeros", justify="right")
    table.add_column("Form value", justify="right")
    for name, tangent in tangents:
        zeros = "-" if tangent.interior_zeros is None else str(tangent.interior_zeros)
        value = "-" if tangent.form_value is None else f"{tangent.form_value:+.3e}"
        table.add_row(name, str(tangent.classification), zeros, value)
    return table


def format_checks_table(title: str, checks: Mapping[str, tuple[float, float]]) -> Table:
    """Named residuals against their thresholds."""
    table = Table(title=title)
    table.add_column("Check", style="cyan")
    table.add_column("Value", justify="right")
    table.add_column("Threshold", justify="right", style="magenta")
    for name, (value, threshold) in checks.items():
        table.add_row(name, _residual_text(value, threshold), f"{threshold:.0e}")
    return table


def print_artifacts(console: Console, artifacts: Sequence[Path]) -> None:
    """List the files a run wrote."""
    if not artifacts:
        console.print("[yellow]No artifacts written.[/yellow]")
        return
    console.print("\n[bold]Artifacts:[/bold]")
    for path in artifacts:
        console.print(f"  {path}")
