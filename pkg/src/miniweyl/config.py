"""Run configuration and JSON descriptors for the command-line harness.

Descriptors are pydantic models discriminated by a `type` field; each knows
how to build the object it describes. RunConfig collects the command, its
descriptors and numeric knobs, and checks that the command has what it needs
before anything runs. Validation failures surface as ConfigInvalid.
"""

import json
import os
from enum import StrEnum
from pathlib import Path
from typing import Annotated, Literal, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import diffeo, structures
from .errors import ConfigInvalid, IoFailure
from .models import (
    Antipodal,
    BoundaryContact,
    CenterPoint,
    FlowPerturbed,
    Harmonic,
    HarmonicKind,
    MobiusConjugated,
    MobiusMap,
    SphereDiffeo,
    SpherePoint,
    TwoBoundaryPoints,
    WeldConstraints,
    WeylChartStructure,
)

THREADS_VARIABLE = "MINIWEYL_THREADS"
SINGULAR_TOLERANCE = 1e-12
CHART_STRUCTURE = "chart"

Pair = tuple[float, float]  # (re, im) of a complex number
Matrix = tuple[Pair, Pair, Pair, Pair]  # row-major a, b, c, d
IDENTITY: Matrix = ((1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0))


class Command(StrEnum):
    """Experiments the harness can run."""

    DESITTER = "desitter"
    CHECK_EW = "check-ew"
    SCATTER = "scatter"
    WELD = "weld"
    MODULI = "moduli"
    GEODESIC = "geodesic"
    ROUNDTRIP = "roundtrip"
    LIFT = "lift"


class _Descriptor(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)


def _complex(pair: Pair) -> complex:
    return complex(pair[0], pair[1])


def _point(pair: Pair) -> SpherePoint:
    return SpherePoint.from_affine(_complex(pair))


def _mobius(entries: Matrix) -> MobiusMap:
    """The Mobius map of a row-major matrix, rescaled to determinant 1."""
    values = [_complex(e) for e in entries]
    return MobiusMap.from_matrix(np.array(values, dtype=np.complex128).reshape(2, 2))


def _check_invertible(entries: Matrix, label: str) -> None:
    a, b, c, d = (_complex(e) for e in entries)
    if abs(a * d - b * c) < SINGULAR_TOLERANCE:
        msg = f"{label} Mobius matrix is singular"
        raise ValueError(msg)


class HarmonicSpec(_Descriptor):
    """One harmonic term of a flow: {"l", "m", "kind", "coef"}."""

    degree: int = Field(alias="l", ge=1, le=4)
    order: int = Field(alias="m")
    kind: HarmonicKind = HarmonicKind.GRADIENT
    coefficient: float = Field(alias="coef")

    def build(self) -> Harmonic:
        """The Harmonic term."""
        return Harmonic(self.degree, self.order, self.kind, self.coefficient)


class AntipodalSpec(_Descriptor):
    """The antipodal map."""

    type: Literal["antipodal"] = "antipodal"

    def build(self) -> SphereDiffeo:
        """The descriptor object."""
        return Antipodal()


class MobiusConjugateSpec(_Descriptor):
    """post o base o pre, with pre and post as row-major [re, im] matrices."""

    type: Literal["mobius_conjugate"] = "mobius_conjugate"
    pre: Matrix = IDENTITY
    post: Matrix = IDENTITY
    base: "PsiSpec" = AntipodalSpec()

    @model_validator(mode="after")
    def _check_matrices(self) -> Self:
        _check_invertible(self.pre, "pre")
        _check_invertible(self.post, "post")
        return self

    def build(self) -> SphereDiffeo:
        """The descriptor object."""
        return MobiusConjugated(_mobius(self.pre), _mobius(self.post), self.base.build())


class FlowSpec(_Descriptor):
    """A harmonic flow run for `time` after base."""

    type: Literal["flow"] = "flow"
    base: "PsiSpec" = AntipodalSpec()
    flow_time: float = Field(default=1.0, alias="time")
    harmonics: tuple[HarmonicSpec, ...]

    def build(self) -> SphereDiffeo:
        """The descriptor object."""
        return FlowPerturbed(self.base.build(), tuple(h.build() for h in self.harmonics), self.flow_time)


class CanonicalFlowSpec(_Descriptor):
    """The canonical perturbation of the antipodal map with strength eps."""

    type: Literal["flow_antipodal"] = "flow_antipodal"
    eps: float = Field(ge=0.0)
    flow_time: float = Field(default=1.0, alias="time")

    def build(self) -> SphereDiffeo:
        """The descriptor object."""
        return diffeo.flow_perturbed_antipodal(self.eps, self.flow_time)


PsiSpec = Annotated[
    AntipodalSpec | MobiusConjugateSpec | FlowSpec | CanonicalFlowSpec,
    Field(discriminator="type"),
]

MobiusConjugateSpec.model_rebuild()
FlowSpec.model_rebuild()


class CenterSpec(_Descriptor):
    """Disks through the point (z, w) of Z - P with F1'(0) = radius."""

    type: Literal["center"] = "center"
    z: Pair = (0.0, 0.0)
    w: Pair = (0.0, 0.0)
    radius: float = Field(default=1.0, gt=0.0)

    def build(self) -> WeldConstraints:
        """The selector."""
        return CenterPoint(_point(self.z), _point(self.w), self.radius)


class ContactSpec(_Descriptor):
    """Disks through x on the graph with boundary tangent at angle `direction`."""

    type: Literal["contact"] = "contact"
    x: Pair = (1.0, 0.0)
    direction: float = 0.0

    def build(self) -> WeldConstraints:
        """The selector."""
        return BoundaryContact(_point(self.x), self.direction)


class TwoPointSpec(_Descriptor):
    """Disks whose boundary passes through x and y."""

    type: Literal["two_points"] = "two_points"
    x: Pair = (1.0, 0.0)
    y: Pair = (-1.0, 0.0)

    @model_validator(mode="after")
    def _check_distinct(self) -> Self:
        if self.x == self.y:
            msg = "boundary points must be distinct"
            raise ValueError(msg)
        return self

    def build(self) -> WeldConstraints:
        """The selector."""
        return TwoBoundaryPoints(_point(self.x), _point(self.y))


ConstraintSpec = Annotated[CenterSpec | ContactSpec | TwoPointSpec, Field(discriminator="type")]


class ChartGridSpec(_Descriptor):
    """A built-in analytic family of chart data and its keyword parameters."""

    family: str
    params: dict[str, float] = Field(default_factory=dict)


class StructureSpec(_Descriptor):
    """A Weyl structure: {"type": name, "params": {...}} or {"type": "chart", "grid": {...}}.

    Names refer to the structure catalogue; a chart descriptor names the
    catalogued family inside its grid. No user code is ever evaluated.
    """

    type: str = "desitter"
    params: dict[str, float] = Field(default_factory=dict)
    grid: ChartGridSpec | None = None

    @model_validator(mode="after")
    def _check_grid(self) -> Self:
        if self.type == CHART_STRUCTURE and self.grid is None:
            msg = "a chart structure needs a grid"
            raise ValueError(msg)
        if self.type != CHART_STRUCTURE and self.grid is not None:
            msg = f"only chart structures take a grid, not {self.type!r}"
            raise ValueError(msg)
        return self

    def build(self) -> WeylChartStructure:
        """Instantiate the structure (DescriptorError for unknown names)."""
        if self.grid is not None:
            return structures.build_structure(self.grid.family, self.grid.params)
        return structures.build_structure(self.type, self.params)


_NEEDS_PSI = {Command.WELD, Command.MODULI, Command.GEODESIC, Command.ROUNDTRIP, Command.LIFT}
_NEEDS_CONSTRAINTS = {Command.WELD, Command.MODULI, Command.GEODESIC, Command.LIFT}


class RunConfig(BaseModel):
    """Fully resolved configuration of one harness run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    command: Command
    psi: PsiSpec | None = None
    structure: StructureSpec = StructureSpec()
    constraints: ConstraintSpec | None = None
    degree: int = Field(default=32, ge=4, le=128)
    grid: int = Field(default=8, ge=1)
    directions: int = Field(default=16, ge=3)
    samples: int = Field(default=8, ge=1)
    points: int = Field(default=100, ge=1)
    seed: int = 0
    span: tuple[float, float] | None = None
    sign: Literal[1, -1] = 1
    svg: bool = False
    output: Path = Path("miniweyl-out")
    threads: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_inputs(self) -> Self:
        if self.command in _NEEDS_PSI and self.psi is None:
            msg = f"command {self.command} needs a psi descriptor"
            raise ValueError(msg)
        if self.command in _NEEDS_CONSTRAINTS and self.constraints is None:
            msg = f"command {self.command} needs a constraints descriptor"
            raise ValueError(msg)
        if self.span is not None and not self.span[0] < self.span[1]:
            msg = f"span must be increasing, got {self.span}"
            raise ValueError(msg)
        return self


def thread_count() -> int:
    """Worker threads allowed by MINIWEYL_THREADS (default: available cores).

    Raises:
        ConfigInvalid: If the variable is set to something other than a positive integer.
    """
    raw = os.environ.get(THREADS_VARIABLE)
    if raw is None:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError as e:
        msg = f"{THREADS_VARIABLE} must be a positive integer, got {raw!r}"
        raise ConfigInvalid(msg) from e
    if value < 1:
        msg = f"{THREADS_VARIABLE} must be a positive integer, got {raw!r}"
        raise ConfigInvalid(msg)
    return value


def read_json(path: Path) -> object:
    """Parse a JSON input file.

    Raises:
        IoFailure: If the file cannot be read.
        ConfigInvalid: If it is not valid JSON.
    """
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        msg = f"cannot read {path}: {e}"
        raise IoFailure(msg) from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        msg = f"{path} is not valid JSON: {e}"
        raise ConfigInvalid(msg) from e


def build_config(values: dict[str, object]) -> RunConfig:
    """Validate raw settings into a RunConfig.

    Raises:
        ConfigInvalid: With pydantic's error summary if validation fails.
    """
    try:
        return RunConfig.model_validate(values)
    except ValidationError as e:
        msg = f"invalid run configuration: {e}"
        raise ConfigInvalid(msg) from e
