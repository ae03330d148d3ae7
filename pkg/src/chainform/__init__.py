"""chainform: displacement-driven geometry prediction for tensile chains."""

from .chain import (
    ChainState,
    ComplianceRate,
    MaterialParams,
    SolverParams,
    Stretch,
    advance_frame,
    compliance_rate,
    discretize_polyline,
    effective_spring_k,
    run_until_quiescent,
    segment_stretch,
    substep_pull,
    sweep_substep,
)
from .errors import (
    ChainformError,
    ConfigurationError,
    DegenerateGeometryError,
    DiscretizationError,
    NonConvergenceError,
    ParameterError,
    ScenarioError,
    ScheduleError,
)
from .geometry import Point2

__version__ = "0.1.0"

__all__ = [
    "ChainState",
    "ComplianceRate",
    "MaterialParams",
    "Point2",
    "SolverParams",
    "Stretch",
    "advance_frame",
    "compliance_rate",
    "discretize_polyline",
    "effective_spring_k",
    "run_until_quiescent",
    "segment_stretch",
    "substep_pull",
    "sweep_substep",
    "ChainformError",
    "ConfigurationError",
    "DegenerateGeometryError",
    "DiscretizationError",
    "NonConvergenceError",
    "ParameterError",
    "ScenarioError",
    "ScheduleError",
    "__version__",
]
