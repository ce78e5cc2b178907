"""Internal utilities for mgcf operations.

Curvature-function kernels, graph geometry, the linearized operator,
error types and the stationary-solution cache. Users should not import
from this module directly - use module-level functions instead.
"""

from .errors import (
    MGCFError,
    ParameterError,
    DomainError,
    AdmissibilityError,
    StepUnderflowError,
    ConfigurationError,
    ScenarioError,
    StationaryNotReachedError,
    _classify_error,
    _format_error,
)
from .cache import SolutionCache, solution_cache, config_fingerprint

__all__ = [
    # Errors
    "MGCFError",
    "ParameterError",
    "DomainError",
    "AdmissibilityError",
    "StepUnderflowError",
    "ConfigurationError",
    "ScenarioError",
    "StationaryNotReachedError",
    "_classify_error",
    "_format_error",
    # Cache
    "SolutionCache",
    "solution_cache",
    "config_fingerprint",
]
