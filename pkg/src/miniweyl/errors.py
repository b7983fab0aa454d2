"""Exception hierarchy for the miniweyl laboratory.

Every failure a module can report is a subclass of MiniWeylError. The three
intermediate families map one-to-one onto CLI exit codes:

    - ConfigInvalid: malformed descriptors or run configurations (exit 2)
    - NumericFailure: a numerical method did not deliver its guarantee (exit 3)
    - IoFailure: artifacts could not be written (exit 4)

Numeric errors carry enough context to be reported verbatim by the CLI.
"""

from typing import Any


class MiniWeylError(Exception):
    """Base class for all errors raised by miniweyl."""

    exit_code = 1


class ConfigInvalid(MiniWeylError):
    """A run configuration or JSON descriptor failed validation."""

    exit_code = 2


class DescriptorError(ConfigInvalid):
    """A SphereDiffeo or structure descriptor is malformed or out of range."""


class IoFailure(MiniWeylError):
    """An artifact could not be written or an input could not be read."""

    exit_code = 4


class NumericFailure(MiniWeylError):
    """A numerical method failed to meet its postcondition."""

    exit_code = 3


class FlowDivergence(NumericFailure):
    """A harmonic flow needed more steps than its budget allows."""


class ChartPole(NumericFailure):
    """A point came too close to the pole of the chart it must be expressed in."""


class NewtonStall(NumericFailure):
    """A Newton or Gauss-Newton iteration hit its iteration cap without converging."""

    def __init__(self, message: str, history: tuple[float, ...] = ()) -> None:
        """Record the residual history alongside the message."""
        super().__init__(message)
        self.history = history


class NonPositiveDensity(NumericFailure):
    """The pulled-back area density was not positive (map not orientation-reversing)."""


class DegenerateAnchors(NumericFailure):
    """An anchor triple for gauge fixing had (nearly) coincident points."""


class SingularMetric(NumericFailure):
    """The chart metric was not invertible at the requested point."""


class DomainError(NumericFailure):
    """A point lies outside the region where an operation is defined."""


class StepTooLarge(NumericFailure):
    """A Richardson error estimate exceeded its tolerance."""


class StepBudgetExceeded(NumericFailure):
    """An adaptive integrator exhausted its step budget."""


class TrappedGeodesic(NumericFailure):
    """A null geodesic failed to reach the future collar."""


class MultipleSignChanges(NumericFailure):
    """A Jacobi frame determinant changed sign more than once."""


class RankDeficient(NumericFailure):
    """A linearization had an unexpected nullspace dimension."""

    def __init__(self, message: str, singular_values: tuple[float, ...] = ()) -> None:
        """Record the singular values that triggered the failure."""
        super().__init__(message)
        self.singular_values = singular_values


class StepCollapse(NumericFailure):
    """Continuation reached its minimum step; carries the last good point."""

    def __init__(
        self,
        message: str,
        last_good: Any = None,  # noqa: ANN401
        achieved: float | None = None,
    ) -> None:
        """Record the last accepted continuation point and the achieved parameter value."""
        super().__init__(message)
        self.last_good = last_good
        self.achieved = achieved


class AmbiguousZeros(NumericFailure):
    """Boundary zeros of a normal field were too close to degenerate to classify."""


class ConeFitFailure(NumericFailure):
    """The null-cone fit did not produce a Lorentzian quadratic form."""


class NonIntegral(NumericFailure):
    """A degree integral was not close enough to an integer."""


class DerivativeZero(NumericFailure):
    """A derivative required to be nonvanishing vanished on the closed disk."""


class MassDefect(NumericFailure):
    """The pulled-back area form does not have the total area of the sphere."""


class NonMonotoneFamily(NumericFailure):
    """Omega failed to move strictly one way along a family that must be monotone."""
