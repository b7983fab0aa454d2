"""CLI entry point for the miniweyl laboratory."""

import argparse
import logging
import math
import sys
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from rich.console import Console

from . import desitter, diffeo, families, gauge, lift, moduli, scattering, sphere, svg, weyl, welding
from .config import Command, RunConfig, build_config, read_json, thread_count
from .errors import ConfigInvalid, IoFailure, MiniWeylError, NumericFailure
from .models import (
    BoundaryContact,
    DiskParam,
    HolomorphicDisk,
    RealArray,
    SphereDiffeo,
    SpherePoint,
    WeldConstraints,
)
from .output import (
    SCATTER_COLUMNS,
    disk_param_to_json,
    disk_to_json,
    family_rows,
    format_checks_table,
    format_disk_table,
    format_family_table,
    format_scatter_table,
    format_tangent_table,
    lift_to_json,
    manifest,
    print_artifacts,
    scatter_report,
    scatter_rows,
    write_csv,
    write_json,
    write_jsonl,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

# Thresholds shown next to the measured values in the check tables
BOUNDARY_THRESHOLD = 1e-12
AREA_THRESHOLD = 1e-7
EW_THRESHOLD = 1e-6
ANTIPODAL_THRESHOLD = 1e-6
ROUNDTRIP_THRESHOLD = 5e-3
GAUGE_THRESHOLD = 1e-2
LEGENDRIAN_THRESHOLD = 1e-10
UTP_THRESHOLD = 1e-8
CIRCLE_THRESHOLD = 1e-10
SAMPLE_TABLE_ROWS = 32  # scatter runs with more samples print only the summary table


@dataclass(frozen=True)
class Outcome:
    """Artifacts a handler wrote and the headline numbers recorded in the manifest."""

    artifacts: list[Path]
    summary: dict[str, object] = field(default_factory=dict)


type Handler = Callable[[RunConfig, Console], Outcome]


def _common_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--psi", type=Path, help="JSON descriptor of the boundary diffeomorphism")
    parent.add_argument("--constraints", type=Path, help="JSON descriptor of the disk selector")
    parent.add_argument(
        "--structure",
        help="Catalogued structure name, or a JSON structure descriptor (default: desitter)",
    )
    parent.add_argument("--degree", "-N", type=int, help="Truncation degree of disks (default: 32)")
    parent.add_argument("--grid", type=int, help="Scattering grid size per angle (default: 8)")
    parent.add_argument(
        "--dirs", dest="directions", type=int, help="Null directions per base point (default: 16)"
    )
    parent.add_argument("--samples", type=int, help="Samples for area and round-trip checks (default: 8)")
    parent.add_argument("--points", type=int, help="Random points for residual checks (default: 100)")
    parent.add_argument("--seed", type=int, help="Random seed (default: 0)")
    parent.add_argument(
        "--span", type=float, nargs=2, metavar=("LOW", "HIGH"), help="Family parameter span"
    )
    parent.add_argument(
        "--sign", type=int, choices=(1, -1), help="Branch of the Legendrian lift (default: 1)"
    )
    parent.add_argument("--svg", action="store_true", default=None, help="Also write SVG plots")
    parent.add_argument("--output", "-o", type=Path, help="Artifact directory (default: miniweyl-out)")
    parent.add_argument("--debug", action="store_true", help="Enable debug logging output")
    return parent


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        description="Numerical experiments on Einstein-Weyl structures and their holomorphic disks"
    )
    commands = parser.add_subparsers(dest="command", required=True)
    parent = _common_flags()
    helps = {
        Command.DESITTER: "Check the closed-form de Sitter disks",
        Command.CHECK_EW: "Check the Einstein-Weyl equations and conformal compactness of a structure",
        Command.SCATTER: "Sample the null scattering map of a structure",
        Command.WELD: "Solve for one constrained disk",
        Command.MODULI: "Linearize the moduli space at a solved disk",
        Command.GEODESIC: "Trace a geodesic family of disks",
        Command.ROUNDTRIP: "Recover the boundary map from null family endpoints",
        Command.LIFT: "Lift a solved disk to a Legendrian disk",
    }
    for command, text in helps.items():
        commands.add_parser(str(command), parents=[parent], help=text, description=text)
    return parser.parse_args(argv)


def _structure_value(raw: str) -> object:
    if raw.endswith(".json"):
        return read_json(Path(raw))
    return {"type": raw}


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Merge flags, descriptor files and MINIWEYL_THREADS into a validated RunConfig.

    Raises:
        ConfigInvalid: If a descriptor or flag value is invalid.
        IoFailure: If a descriptor file cannot be read.
    """
    values: dict[str, object] = {"command": args.command, "threads": thread_count()}
    if args.psi is not None:
        values["psi"] = read_json(args.psi)
    if args.constraints is not None:
        values["constraints"] = read_json(args.constraints)
    if args.structure is not None:
        values["structure"] = _structure_value(args.structure)
    knobs = ("degree", "grid", "directions", "samples", "points", "seed", "span", "sign", "svg", "output")
    values.update({name: getattr(args, name) for name in knobs if getattr(args, name) is not None})
    return build_config(values)


def _psi(config: RunConfig) -> SphereDiffeo:
    assert config.psi is not None
    return config.psi.build()


def _constraints(config: RunConfig) -> WeldConstraints:
    assert config.constraints is not None
    return config.constraints.build()


def _solved_disk(config: RunConfig) -> HolomorphicDisk:
    try:
        return families.seed_disk(_psi(config), _constraints(config), config.degree)
    except ValueError as e:
        msg = f"constraints admit no seed disk: {e}"
        raise ConfigInvalid(msg) from e


def _desitter(config: RunConfig, console: Console) -> Outcome:
    rng = np.random.default_rng(config.seed)
    params = [
        DiskParam.of(*(rng.standard_normal(4) + 1j * rng.standard_normal(4))) for _ in range(config.points)
    ]
    boundary = max(desitter.boundary_on_graph_residual(p) for p in params)
    areas = [moduli.omega_area(welding.desitter_seed(p, config.degree)) for p in params[: config.samples]]
    area_error = max(abs(a - 4.0 * math.pi) for a in areas)
    console.print(
        format_checks_table(
            "de Sitter Disks",
            {
                "boundary on graph": (boundary, BOUNDARY_THRESHOLD),
                "omega area - 4 pi": (area_error, AREA_THRESHOLD),
            },
        )
    )
    result = {
        "boundary_residual": boundary,
        "area_error": area_error,
        "disks": [
            {**disk_param_to_json(p), "omega": area}
            for p, area in zip(params[: len(areas)], areas, strict=True)
        ],
    }
    summary: dict[str, object] = {"boundary_residual": boundary, "area_error": area_error}
    return Outcome([write_json(config.output / "desitter.json", result)], summary)


def _interior_point(interval: tuple[float, float], rng: np.random.Generator) -> tuple[RealArray, int]:
    low, high = interval
    z0, z1 = sphere.random_points(rng, 1)
    chart = int(sphere.working_chart(z0, z1)[0])
    w = complex(sphere.to_chart(z0, z1, chart)[0])
    return np.array([rng.uniform(low, high), w.real, w.imag]), chart


def _check_ew(config: RunConfig, console: Console) -> Outcome:
    structure = config.structure.build()
    rng = np.random.default_rng(config.seed)
    margin = 0.1 * (structure.t_plus - structure.t_minus)
    interval = (structure.t_minus + margin, structure.t_plus - margin)
    residuals = [weyl.ew_residual(structure, *_interior_point(interval, rng)) for _ in range(config.points)]
    report = weyl.conformal_compactness_check(structure)
    worst = max(residuals)
    console.print(
        format_checks_table(
            f"Structure {structure.name!r}",
            {
                "Einstein-Weyl residual": (worst, EW_THRESHOLD),
                "alpha defect": (report.alpha_defect, weyl.ALPHA_DEFECT_MAX),
                "d alpha at boundary": (report.d_alpha_at_boundary, weyl.D_ALPHA_MAX),
            },
        )
    )
    if report.failures:
        console.print(f"[yellow]Conformal compactness fails: {', '.join(report.failures)}[/yellow]")
    result = {
        "structure": structure.name,
        "ew_residual": worst,
        "compactness": {
            "nondegeneracy_margin": report.nondegeneracy_margin,
            "alpha_defect": report.alpha_defect,
            "d_alpha_at_boundary": report.d_alpha_at_boundary,
            "spacelike_margin": report.spacelike_margin,
            "failures": list(report.failures),
        },
    }
    summary: dict[str, object] = {"ew_residual": worst, "compactness_failures": list(report.failures)}
    return Outcome([write_json(config.output / "check-ew.json", result)], summary)


def _scatter(config: RunConfig, console: Console) -> Outcome:
    structure = config.structure.build()
    samples = scattering.scattering_map(
        structure, (config.grid, config.grid), config.directions, with_jacobian=True, workers=config.threads
    )
    antipodal_error = max(sphere.chordal_distance(s.q, sphere.antipodal(s.p)) for s in samples)
    dispersion = max(s.dispersion for s in samples)
    if len(samples) <= SAMPLE_TABLE_ROWS:
        console.print(format_scatter_table(samples))
    console.print(
        format_checks_table(
            f"Scattering Map of {structure.name!r}",
            {
                "refocus dispersion": (dispersion, scattering.REFOCUS_TOLERANCE),
                "distance from antipodal": (antipodal_error, ANTIPODAL_THRESHOLD),
            },
        )
    )
    failed = sum(s.failed for s in samples)
    if failed:
        console.print(f"[yellow]{failed} of {len(samples)} samples did not refocus[/yellow]")
    report = {**scatter_report(samples), "antipodal_error": antipodal_error}
    artifacts = [
        write_csv(config.output / "scatter.csv", SCATTER_COLUMNS, scatter_rows(samples)),
        write_json(config.output / "scatter.json", report),
    ]
    if config.svg:
        artifacts.append(svg.emit_scatter_svg(samples, config.output / "scatter.svg"))
    summary: dict[str, object] = {
        "failed_count": failed,
        "max_dispersion": dispersion,
        "antipodal_error": antipodal_error,
    }
    return Outcome(artifacts, summary)


def _weld(config: RunConfig, console: Console) -> Outcome:
    disk, report = welding.weld(_psi(config), _constraints(config), _solved_disk(config))
    console.print(format_disk_table(disk, report))
    summary: dict[str, object] = {"residual": disk.residual_norm, "iterations": report.iterations}
    return Outcome([write_json(config.output / "disk.json", disk_to_json(disk))], summary)


def _moduli(config: RunConfig, console: Console) -> Outcome:
    psi = _psi(config)
    disk = _solved_disk(config)
    space = moduli.tangent_space(psi, disk)
    form = moduli.moduli_conformal_form(space, config.seed)
    tangents = [moduli.classify_tangent(space, t, form) for t in space.basis]
    console.print(format_tangent_table([(f"basis {k}", t) for k, t in enumerate(tangents)]))
    omega = moduli.omega_area(disk)
    singular = ", ".join(f"{s:.2e}" for s in space.singular_values)
    console.print(f"Omega = {omega:.10f}, singular values {singular}")
    result = {
        "disk": disk_to_json(disk),
        "omega": omega,
        "double_degree": moduli.double_degree(psi, disk),
        "singular_values": list(space.singular_values),
        "conformal_form": form.tolist(),
        "tangents": [
            {
                "kind": str(t.classification),
                "interior_zeros": t.interior_zeros,
                "form_value": t.form_value,
            }
            for t in tangents
        ],
    }
    summary: dict[str, object] = {"omega": omega, "singular_values": list(space.singular_values)}
    return Outcome([write_json(config.output / "moduli.json", result)], summary)


def _geodesic(config: RunConfig, console: Console) -> Outcome:
    family = families.geodesic_family(_psi(config), _constraints(config), config.span, degree=config.degree)
    console.print(format_family_table(family))
    artifacts = [write_jsonl(config.output / "family.jsonl", family_rows(family))]
    summary: dict[str, object] = {
        "kind": str(family.kind),
        "omega": list(family.parameter_values),
        "closure_error": family.closure_error,
    }
    if config.svg:
        plot = svg.emit_family_svg(family, config.output / "family.svg")
        artifacts.append(plot.path)
        summary["circle_fit_residual"] = plot.max_circle_residual
        summary["crossings"] = [list(pair) for pair in plot.crossings]
        summary["nested"] = plot.nested
        checks = {"circle fit": (plot.max_circle_residual, CIRCLE_THRESHOLD)}
        console.print(format_checks_table("Family Boundary Curves", checks))
    artifacts.append(write_json(config.output / "geodesic.json", summary))
    return Outcome(artifacts, {"kind": str(family.kind), "members": len(family.disks)})


def _roundtrip(config: RunConfig, console: Console) -> Outcome:
    psi = _psi(config)
    degree = max(config.degree, families.ENDPOINT_DEGREE)
    points = sphere.points_from_arrays(*gauge.fibonacci_points(config.samples))
    # boundary directions rotate through the samples so several null families per map are traced
    contacts = [BoundaryContact(x, math.tau * k / len(points)) for k, x in enumerate(points)]

    def endpoints(contact: BoundaryContact) -> tuple[SpherePoint, SpherePoint]:
        return families.null_family_endpoints(psi, contact, degree=degree)

    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        ends = list(pool.map(endpoints, contacts))
    pasts = tuple(past for past, _ in ends)
    futures = tuple(future for _, future in ends)
    past_errors = [
        sphere.chordal_distance(past, diffeo.diffeo_eval(psi, x))
        for x, past in zip(points, pasts, strict=True)
    ]
    future_errors = [sphere.chordal_distance(future, x) for x, future in zip(points, futures, strict=True)]
    # the recovered map sends each future endpoint to its past endpoint
    distance = gauge.sampled_gauge_distance(psi, futures, pasts)
    checks = {
        "past endpoint": (max(past_errors), ROUNDTRIP_THRESHOLD),
        "future endpoint": (max(future_errors), ROUNDTRIP_THRESHOLD),
        "gauge distance": (distance, GAUGE_THRESHOLD),
    }
    console.print(format_checks_table("Null Family Round Trip", checks))
    rows = [
        {
            "contact": [x.affine.real, x.affine.imag],
            "direction": c.direction,
            "past_error": p,
            "future_error": f,
        }
        for x, c, p, f in zip(points, contacts, past_errors, future_errors, strict=True)
    ]
    summary: dict[str, object] = {
        "max_past_error": max(past_errors),
        "max_future_error": max(future_errors),
        "gauge_distance": distance,
    }
    result = {"samples": rows, **summary}
    return Outcome([write_json(config.output / "roundtrip.json", result)], summary)


def _lift(config: RunConfig, console: Console) -> Outcome:
    psi = _psi(config)
    lifted = lift.lift_disk(_solved_disk(config), config.sign)
    legendrian = lift.legendrian_residual(lifted)
    utp = lift.boundary_utp_residual(psi, lifted)
    checks = {
        "contact form": (legendrian, LEGENDRIAN_THRESHOLD),
        "unit tangent bundle": (utp.worst, UTP_THRESHOLD),
    }
    console.print(format_checks_table("Legendrian Lift", checks))
    summary: dict[str, object] = {"legendrian_residual": legendrian, "utp_residual": utp.worst}
    return Outcome([write_json(config.output / "lift.json", lift_to_json(lifted, utp, legendrian))], summary)


HANDLERS: dict[Command, Handler] = {
    Command.DESITTER: _desitter,
    Command.CHECK_EW: _check_ew,
    Command.SCATTER: _scatter,
    Command.WELD: _weld,
    Command.MODULI: _moduli,
    Command.GEODESIC: _geodesic,
    Command.ROUNDTRIP: _roundtrip,
    Command.LIFT: _lift,
}


def exit_code(error: MiniWeylError) -> int:
    """Exit status for an error family."""
    if isinstance(error, ConfigInvalid):
        return EXIT_CONFIG
    if isinstance(error, NumericFailure):
        return EXIT_NUMERIC
    return EXIT_IO


def run(config: RunConfig, console: Console) -> int:
    """Run one experiment, write its artifacts and manifest, and return the exit status."""
    artifacts: list[Path] = []
    summary: dict[str, object] = {}
    error: MiniWeylError | None = None
    try:
        outcome = HANDLERS[config.command](config, console)
        artifacts, summary = list(outcome.artifacts), outcome.summary
    except MiniWeylError as e:
        error = e
        console.print(f"[red]Error ({type(e).__name__}): {e}[/red]")
    code = EXIT_OK if error is None else exit_code(error)
    record = manifest(config.model_dump(mode="json", by_alias=True), artifacts, error, summary)
    try:
        artifacts.append(write_json(config.output / "manifest.json", record))
    except IoFailure as e:
        console.print(f"[red]Error: {e}[/red]")
        return code or EXIT_IO
    print_artifacts(console, artifacts)
    return code


def main(argv: Sequence[str] | None = None) -> None:
    """Run the CLI application."""
    console = Console()
    args = parse_args(argv)

    if args.debug:
        logging.basicConfig(
            level=logging.DEBUG,
            format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        )
        logger.debug("Debug logging enabled")

    try:
        config = config_from_args(args)
    except (ConfigInvalid, IoFailure) as e:
        console.print(f"[red]Error: {e}[/red]")
        sys.exit(exit_code(e))

    sys.exit(run(config, console))


if __name__ == "__main__":
    main()
