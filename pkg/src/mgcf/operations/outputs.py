"""Run artifacts: diagnostics CSV, final profile CSV and summary JSON."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from ..config import DIAG_COLUMNS, FINAL_U_COLUMNS, FLOAT_FORMAT, VERDICT_TAGS
from ..utils.graphgeom import grid_geometry
from ..utils.symfunc import eval_f
from .flow import Trajectory
from .monitors import DiagnosticsRecord, VerdictRow, fitted_constants, verdict_table
from .scenario import OutputSpec, Scenario, scenario_dict

logger = logging.getLogger(__name__)


@dataclass
class RunSummary:
    command: str
    termination: Optional[str]
    final_residual: Optional[float]
    wall_time: float
    verdicts: List[VerdictRow]
    fitted: Dict[str, Optional[float]]
    scenario: Dict[str, Any]
    extra: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        tags = tuple(row.tag for row in self.verdicts)
        if tags != VERDICT_TAGS:
            raise ValueError(f"verdict table must list {VERDICT_TAGS}, got {tags}")

    def as_dict(self) -> Dict[str, Any]:
        return _jsonable(
            {
                "command": self.command,
                "termination": self.termination,
                "final_residual": self.final_residual,
                "wall_time_s": self.wall_time,
                "verdicts": [row.as_dict() for row in self.verdicts],
                "fitted": self.fitted,
                "scenario": self.scenario,
                **self.extra,
            }
        )


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def build_summary(
    command: str,
    trajectory: Trajectory,
    scenario: Optional[Scenario] = None,
    verdicts: Optional[List[VerdictRow]] = None,
    extra: Optional[Dict[str, Any]] = None,
    wall_time: Optional[float] = None,
) -> RunSummary:
    """Summary of a single trajectory (verdict table, fitted constants, echoed scenario)."""
    return RunSummary(
        command=command,
        termination=trajectory.reason.value,
        final_residual=trajectory.residual,
        wall_time=trajectory.wall_time if wall_time is None else wall_time,
        verdicts=verdicts if verdicts is not None else verdict_table(trajectory),
        fitted=fitted_constants(trajectory),
        scenario=scenario_dict(scenario if scenario is not None else trajectory.config),
        extra=dict(extra or {}),
    )


def diagnostics_frame(records: List[DiagnosticsRecord]) -> pd.DataFrame:
    return pd.DataFrame([rec.as_row() for rec in records], columns=list(DIAG_COLUMNS))


def final_profile_frame(trajectory: Trajectory) -> pd.DataFrame:
    """Node-wise geometry of the final state; F is blank where kappa leaves the positive cone."""
    config = trajectory.config
    domain = config.domain
    state = trajectory.final
    geometry = grid_geometry(state, domain)
    kappa = geometry.kappa
    F = np.full(domain.node_count, np.nan)
    good = np.all(kappa > 0, axis=1)
    if np.any(good):
        F[good] = eval_f(config.fspec, kappa[good])
    frame = pd.DataFrame(
        {
            "node": np.arange(domain.node_count),
            "r_or_x": domain.nodes,
            "u": np.asarray(state.u),
            "w": geometry.w,
            "nu": geometry.nu,
            "kappa_max": kappa[:, 0],
            "kappa_min": kappa[:, -1],
            "F": F,
        }
    )
    return frame[list(FINAL_U_COLUMNS)]


def _write_csv(frame: pd.DataFrame, path: Path) -> None:
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as err:
        raise OSError(f"could not write {path}: {err}") from err


def write_summary(summary: RunSummary, path: Path) -> Path:
    text = json.dumps(summary.as_dict(), indent=2, ensure_ascii=False, allow_nan=False)
    try:
        Path(path).write_text(text + "\n", encoding="utf-8", newline="\n")
    except OSError as err:
        raise OSError(f"could not write {path}: {err}") from err
    return Path(path)


def write_outputs(
    trajectory: Trajectory,
    records: Optional[List[DiagnosticsRecord]],
    summary: Optional[RunSummary],
    output: OutputSpec,
    level: Optional[int] = None,
) -> List[Path]:
    """
    Write ``<prefix>_diag.csv``, ``<prefix>_final_u.csv`` and ``<prefix>_summary.json``.

    With ``level`` the two CSV names carry a ``_k<level>`` suffix; the
    summary is skipped when ``summary`` is None (continuation levels share
    one summary).

    Returns
    -------
    list of pathlib.Path
        Files written.

    Raises
    ------
    OSError
        If the directory cannot be created or a file cannot be written; the
        path is part of the message.
    """
    directory = output.path
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise OSError(f"could not create output directory {directory}: {err}") from err
    suffix = "" if level is None else f"_k{level}"
    records = trajectory.records if records is None else records

    written = []
    diag_path = directory / f"{output.prefix}_diag{suffix}.csv"
    _write_csv(diagnostics_frame(records), diag_path)
    written.append(diag_path)

    final_path = directory / f"{output.prefix}_final_u{suffix}.csv"
    _write_csv(final_profile_frame(trajectory), final_path)
    written.append(final_path)

    if summary is not None:
        written.append(write_summary(summary, directory / f"{output.prefix}_summary.json"))
    logger.info(f"wrote {', '.join(str(p) for p in written)}")
    return written
