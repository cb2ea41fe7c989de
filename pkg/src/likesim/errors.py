"""Exception types shared across the package."""

from __future__ import annotations


class LikesimError(Exception):
    """Base class for all likesim errors."""


class InvalidParameterError(LikesimError, ValueError):
    """A parameter is outside its documented domain."""


class DisconnectedGraphError(LikesimError, ValueError):
    """Operation requires a connected graph."""


class PowerIterationError(LikesimError, RuntimeError):
    """Power iteration failed to converge within the iteration budget."""

    def __init__(self, iterations: int, last_gap: float):
        self.iterations = iterations
        self.last_gap = last_gap
        super().__init__(
            f"power iteration did not converge after {iterations} iterations "
            f"(last sup-norm gap {last_gap:.3e})"
        )


class DegenerateNodeError(LikesimError, ValueError):
    """A node's like-centrality equation is degenerate (denominator underflow)."""

    def __init__(self, node: int):
        self.node = node
        super().__init__(f"degenerate node {node}: denominator underflow below 1e-12")


class ConvergenceHealthError(LikesimError, RuntimeError):
    """Too many ensemble samples failed to converge; solver settings look wrong."""


class MalformedRecordError(LikesimError, ValueError):
    """A persisted sample line is not valid JSON or misses required fields."""

    def __init__(self, line_number: int, detail: str):
        self.line_number = line_number
        super().__init__(f"malformed record at line {line_number}: {detail}")


class InvariantViolationError(LikesimError, ValueError):
    """A loaded or computed value violates a structural invariant."""

    def __init__(self, field: str, detail: str, line_number: int | None = None):
        self.field = field
        self.line_number = line_number
        where = f" at line {line_number}" if line_number is not None else ""
        super().__init__(f"invariant violation in {field}{where}: {detail}")


class InsufficientDataError(LikesimError, ValueError):
    """Not enough data points for the requested statistic."""


class MismatchedEdgesError(LikesimError, ValueError):
    """Two histograms do not share identical bin edges."""


class MissingSelectionError(LikesimError, ValueError):
    """The ensemble summary carries no strategic selection."""
