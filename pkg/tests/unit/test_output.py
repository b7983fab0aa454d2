"""Tests for output module."""

import csv
import json
import math
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pytest

from miniweyl import lift
from miniweyl.errors import ConfigInvalid, IoFailure, NewtonStall
from miniweyl.models import DiskParam, GeodesicFamily, ScatteringSample, SpherePoint, TangentKind, UtpResidual
from miniweyl.output import (
    SCATTER_COLUMNS,
    chart_from_json,
    chart_to_json,
    disk_from_json,
    disk_param_from_json,
    disk_param_to_json,
    disk_to_json,
    family_rows,
    format_checks_table,
    format_disk_table,
    format_family_table,
    format_scatter_table,
    lift_to_json,
    manifest,
    print_artifacts,
    scatter_report,
    scatter_rows,
    write_csv,
    write_json,
    write_jsonl,
    write_text,
)
from tests.helpers.console import assert_console_contains, capture_console_output
from tests.helpers.factories import identity_disk, make_center, make_point


def _sample(*, det: float | None = -1.0, failed: bool = False) -> ScatteringSample:
    p = make_point(0.5)
    return ScatteringSample(p=p, q=make_point(-2.0), dispersion=1e-9, jacobian_det=det, failed=failed)


def _family() -> GeodesicFamily:
    disk = identity_disk(8)
    return GeodesicFamily(TangentKind.TIMELIKE, (disk, disk), (2.0 * math.pi, 2.0 * math.pi), make_center())


def test_write_json_sorts_keys(tmp_path: Path) -> None:
    """JSON artifacts are indented with sorted keys and a trailing newline."""
    path = write_json(tmp_path / "out.json", {"b": 1, "a": [1.5, 2]})
    text = path.read_text(encoding="utf-8")
    assert text.index('"a"') < text.index('"b"')
    assert text.endswith("}\n")


def test_write_creates_directories(tmp_path: Path) -> None:
    """Missing parent directories are created."""
    path = write_text(tmp_path / "deep" / "er" / "note.txt", "hello")
    assert path.read_text(encoding="utf-8") == "hello"


def test_write_leaves_no_temporary_files(tmp_path: Path) -> None:
    """The temporary file is renamed over the target."""
    write_text(tmp_path / "a.txt", "one")
    write_text(tmp_path / "a.txt", "two")
    assert [p.name for p in tmp_path.iterdir()] == ["a.txt"]
    assert (tmp_path / "a.txt").read_text(encoding="utf-8") == "two"


def test_write_failure_is_io_failure(tmp_path: Path) -> None:
    """OS errors while writing become IoFailure."""
    with (
        patch("miniweyl.output.os.replace", side_effect=PermissionError("denied")),
        pytest.raises(IoFailure, match="denied"),
    ):
        write_text(tmp_path / "a.txt", "text")


def test_write_jsonl(tmp_path: Path) -> None:
    """One JSON object per line."""
    path = write_jsonl(tmp_path / "rows.jsonl", [{"k": 1}, {"k": 2}])
    lines = path.read_text(encoding="utf-8").splitlines()
    assert [json.loads(line) for line in lines] == [{"k": 1}, {"k": 2}]


def test_write_csv(tmp_path: Path) -> None:
    """The header comes first and rows follow."""
    path = write_csv(tmp_path / "t.csv", ["x", "y"], [[1, 2.5], [3, ""]])
    with path.open(encoding="utf-8", newline="") as handle:
        assert list(csv.reader(handle)) == [["x", "y"], ["1", "2.5"], ["3", ""]]


@pytest.mark.parametrize("chart", [0, 5])
def test_chart_tags_are_integers(chart: int) -> None:
    """Octahedral charts are written as their tag."""
    assert chart_to_json(chart) == chart
    assert chart_from_json(chart) == chart


def test_pole_chart_codec() -> None:
    """Pole charts are written as the homogeneous pole."""
    pole = make_point(1.0 + 2.0j)
    data = json.loads(json.dumps(chart_to_json(pole)))
    back = chart_from_json(data)
    assert isinstance(back, SpherePoint)
    assert back.affine == pytest.approx(pole.affine)


@pytest.mark.parametrize("data", [6, -1, True, "0", {"pole": [1, 2]}, {"other": 1}])
def test_invalid_charts(data: object) -> None:
    """Anything else is rejected."""
    with pytest.raises(ConfigInvalid):
        chart_from_json(data)


def test_disk_json_fields() -> None:
    """The disk record carries N, both factors, the charts and the residual."""
    data = disk_to_json(identity_disk(8))
    assert data["N"] == 8
    assert data["charts"] == [0, 0]
    f1 = data["F1"]
    assert isinstance(f1, list)
    assert f1[1] == pytest.approx([1.0, 0.0])


def test_disk_json_is_read_back() -> None:
    """disk_from_json reads what disk_to_json writes."""
    disk = identity_disk(8)
    back = disk_from_json(json.loads(json.dumps(disk_to_json(disk))))
    np.testing.assert_allclose(back.f1, disk.f1)
    np.testing.assert_allclose(back.f2, disk.f2)
    assert back.chart1 == disk.chart1
    assert back.residual_norm == disk.residual_norm


@pytest.mark.parametrize(
    ("data", "message"),
    [
        ([], "object"),
        ({"N": 1, "F1": [[0, 0], [1, 0]]}, "missing"),
        ({"N": 2, "F1": [[0, 0], [1, 0]], "F2": [[0, 0], [1, 0]], "charts": [0, 0]}, "N \\+ 1"),
        ({"N": 1, "F1": [[0, 0], [1, 0]], "F2": [[0, 0], [1, 0]], "charts": [0]}, "two charts"),
        ({"N": 1, "F1": [0, 1], "F2": [[0, 0], [1, 0]], "charts": [0, 0]}, "pairs"),
        ({"N": 1, "F1": [[0], [1, 0]], "F2": [[0, 0], [1, 0]], "charts": [0, 0]}, "pairs"),
        ({"N": 1, "F1": [[0, 0], [1, 0]], "F2": [[0, 0], [1, 0]], "charts": [7, 0]}, "invalid chart"),
    ],
)
def test_invalid_disk_json(data: object, message: str) -> None:
    """Malformed disk records are configuration errors."""
    with pytest.raises(ConfigInvalid, match=message):
        disk_from_json(data)


def test_lift_json() -> None:
    """Lift records extend the disk record with mu and the checks."""
    lifted = lift.lift_disk(identity_disk(8))
    data = lift_to_json(lifted, UtpResidual(0.0, 1e-15, 2e-15), 3e-16)
    assert data["sign"] == 1
    assert data["utp_residual"] == {"graph_distance": 0.0, "tangent_reality": 1e-15, "unit_norm": 2e-15}
    assert "F1" in data


def test_family_rows() -> None:
    """One row per disk with its kind and Omega."""
    rows = family_rows(_family())
    assert [row["index"] for row in rows] == [0, 1]
    assert rows[0]["kind"] == "timelike"
    assert rows[0]["omega"] == pytest.approx(2.0 * math.pi)


def test_scatter_rows() -> None:
    """Rows give p and q as (theta, phi), then the dispersion and a blank missing determinant."""
    rows = scatter_rows([_sample(), _sample(det=None, failed=True)])
    assert SCATTER_COLUMNS == ("p_theta", "p_phi", "q_theta", "q_phi", "dispersion", "jac_det")
    assert all(len(row) == len(SCATTER_COLUMNS) for row in rows)
    p_theta, p_phi, q_theta, q_phi, dispersion, det = rows[0]
    assert isinstance(p_theta, float)
    assert isinstance(q_theta, float)
    assert isinstance(p_phi, float)
    assert isinstance(q_phi, float)
    assert p_theta + q_theta == pytest.approx(math.pi)
    assert abs(p_phi - q_phi) == pytest.approx(math.pi)
    assert dispersion == pytest.approx(1e-9)
    assert det == -1.0
    assert rows[1][5] == ""


def test_scatter_report_lists_failed_rows() -> None:
    """The refocusing report counts the samples that did not refocus."""
    report = scatter_report([_sample(), _sample(failed=True), _sample()])
    assert report == {"samples": 3, "max_dispersion": 1e-9, "failed_rows": [1], "failed_count": 1}


def test_disk_param_json_is_read_back() -> None:
    """Disk parameters are written as {"A": [a, b, c, d]} and read back."""
    param = DiskParam.of(1.0, 0.5j, -0.25, 1.0 + 0.125j)
    data = disk_param_to_json(param)
    assert len(data["A"]) == 4
    np.testing.assert_allclose(disk_param_from_json(data).matrix, param.matrix, atol=1e-12)


@pytest.mark.parametrize(
    ("data", "message"),
    [
        ([1, 2], "must be an object"),
        ({"B": []}, "must be an object"),
        ({"A": [[1, 0], [0, 0], [0, 0]]}, "four entries"),
        ({"A": [[1, 0], [2, 0], [2, 0], [4, 0]]}, "singular"),
    ],
)
def test_invalid_disk_param_json(data: object, message: str) -> None:
    """Malformed disk parameters are configuration errors."""
    with pytest.raises(ConfigInvalid, match=message):
        disk_param_from_json(data)


def test_manifest_success() -> None:
    """A successful run lists its artifacts by name."""
    record = manifest({"command": "weld"}, [Path("out/disk.json"), Path("out/a.svg")])
    assert record["status"] == "ok"
    assert record["artifacts"] == ["a.svg", "disk.json"]
    assert "error" not in record
    assert "summary" not in record


def test_manifest_records_summary() -> None:
    """Headline numbers of a run are kept in the manifest."""
    record = manifest({"command": "roundtrip"}, [Path("roundtrip.json")], summary={"gauge_distance": 1e-4})
    assert record["summary"] == {"gauge_distance": 1e-4}


def test_manifest_failure() -> None:
    """A failed run records the error class and message."""
    record = manifest({"command": "weld"}, [], NewtonStall("no convergence"))
    assert record["status"] == "failed"
    assert record["error"] == {"type": "NewtonStall", "message": "no convergence"}


def test_format_disk_table() -> None:
    """The disk table shows the first coefficients and the residual."""
    table = format_disk_table(identity_disk(8))
    assert table.title == "Welded Disk (N = 8)"
    assert len(table.columns) == 3
    assert len(table.rows) == 4


def test_format_scatter_table() -> None:
    """One row per scattering sample."""
    table = format_scatter_table([_sample(), _sample(det=None)])
    assert len(table.rows) == 2
    with capture_console_output(width=120) as (console, output):
        console.print(table)
    assert_console_contains(output, "Scattering Map Samples", "-1.0000")


def test_format_family_table() -> None:
    """Family tables are titled by the causal type."""
    table = format_family_table(_family())
    assert table.title == "Timelike Geodesic Family (2 disks)"
    assert len(table.rows) == 2


def test_format_checks_table() -> None:
    """Checks are shown against their thresholds."""
    with capture_console_output() as (console, output):
        console.print(format_checks_table("Checks", {"residual": (1e-12, 1e-8)}))
    assert_console_contains(output, "Checks", "residual", "1.00e-12", "1e-08")


def test_print_artifacts() -> None:
    """Written artifacts are listed one per line."""
    with capture_console_output() as (console, output):
        print_artifacts(console, [Path("out/disk.json")])
    assert_console_contains(output, "Artifacts:", "disk.json")


def test_print_no_artifacts() -> None:
    """An empty run says so."""
    with capture_console_output() as (console, output):
        print_artifacts(console, [])
    assert_console_contains(output, "No artifacts written.")
