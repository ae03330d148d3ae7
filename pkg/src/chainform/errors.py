"""Exception hierarchy shared by the solver, IO, and CLI layers.

CLI exit codes: input-side failures (parameters, discretization, scenario
files, schedules) map to exit 1; solver non-convergence maps to exit 2.
"""

from __future__ import annotations


class ChainformError(Exception):
    """Base class for all chainform errors."""


class ParameterError(ChainformError):
    """A material or solver parameter violates its admissible range."""


class ConfigurationError(ChainformError):
    """Parameters are individually valid but jointly unusable (stability)."""


class DiscretizationError(ChainformError):
    """Initial geometry cannot be discretized at the requested rest length."""


class DegenerateGeometryError(ChainformError):
    """Two chain points coincide; pull directions are undefined."""


class ScheduleError(ChainformError):
    """An actuation schedule references invalid points or paths."""


class ScenarioError(ChainformError):
    """A scenario file failed parsing or schema validation.

    ``field`` carries a dotted path into the document when known.
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(message if field is None else f"{field}: {message}")


class NonConvergenceError(ChainformError):
    """The relaxation sweep budget ran out with residual stretch left."""

    def __init__(self, message: str, max_residual: float, sweeps: int):
        self.max_residual = max_residual
        self.sweeps = sweeps
        super().__init__(message)
