"""Exception types and error classification for mgcf."""

from __future__ import annotations

from typing import Any, Optional, Sequence


class MGCFError(Exception):
    """Base class for all mgcf errors."""


class ParameterError(MGCFError, ValueError):
    """An argument lies outside its documented range."""


class DomainError(MGCFError, ValueError):
    """Principal curvatures (or a spectrum) outside the positive cone."""

    def __init__(self, message: str, *, component: Optional[int] = None, spectrum: Optional[Sequence[float]] = None):
        super().__init__(message)
        self.component = component
        self.spectrum = None if spectrum is None else list(spectrum)


class AdmissibilityError(MGCFError, ArithmeticError):
    """The convexity matrix delta_ij + u_i u_j + u u_ij lost positivity."""

    def __init__(self, message: str, *, node: int, min_eig: float):
        super().__init__(message)
        self.node = node
        self.min_eig = min_eig


class StepUnderflowError(AdmissibilityError):
    """Admissibility could not be kept after the allowed number of dt halvings."""


class ConfigurationError(ParameterError):
    """A FlowConfig invariant (or its discrete initial data) is violated."""


class ScenarioError(ConfigurationError):
    """A scenario document could not be parsed or validated."""

    def __init__(self, message: str, *, key: Optional[str] = None, line: Optional[int] = None):
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.key = key
        self.line = line


class StationaryNotReachedError(MGCFError, RuntimeError):
    """The flow terminated without reaching the steady tolerance."""

    def __init__(self, message: str, *, trajectory: Any):
        super().__init__(message)
        self.trajectory = trajectory


def _classify_error(err: BaseException) -> str:
    """Classify an exception for reporting: "scenario", "numerical", "io" or "unknown"."""
    if isinstance(err, ScenarioError):
        return "scenario"
    if isinstance(err, MGCFError):
        return "numerical"
    if isinstance(err, OSError):
        return "io"
    return "unknown"


def _format_error(err: Optional[BaseException]) -> str:
    """One-line description of an error, including attached context when present."""
    if err is None:
        return "unknown error"
    parts = [f"{type(err).__name__}: {err}"]
    if isinstance(err, AdmissibilityError):
        parts.append(f"node={err.node} min_eig={err.min_eig:.6g}")
    if isinstance(err, DomainError):
        if err.component is not None:
            parts.append(f"component={err.component}")
        if err.spectrum is not None:
            parts.append(f"spectrum={err.spectrum}")
    if isinstance(err, StationaryNotReachedError):
        reason = getattr(err.trajectory, "reason", None)
        if reason is not None:
            parts.append(f"termination={getattr(reason, 'value', reason)}")
    return " | ".join(parts)
