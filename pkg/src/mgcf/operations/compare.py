"""Comparison of two flows sharing domain, sigma and epsilon.

Where sup F of one solution stays below inf F of the other, the first
must lie above the second; two runs that both reach steady state must
agree in the limit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..config import TOL_LIMIT, TOL_ORDER
from ..utils.errors import ParameterError
from .flow import Snapshot, TerminationReason, Trajectory
from .monitors import Verdict

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ComparisonVerdict:
    """Ordering and limit verdicts of a pair of trajectories."""

    ordering: Verdict
    limit: Verdict
    min_gap: Optional[float]
    limit_gap: Optional[float]
    matched_times: int
    hypothesis_times: int
    swapped: bool
    tol_order: float
    tol_limit: float
    note: str = ""

    @property
    def overall(self) -> Verdict:
        statuses = {self.ordering, self.limit}
        if Verdict.FAIL in statuses:
            return Verdict.FAIL
        if Verdict.PASS in statuses:
            return Verdict.PASS
        return Verdict.INCONCLUSIVE

    def as_dict(self) -> dict:
        return {
            "ordering": self.ordering.value,
            "limit": self.limit.value,
            "overall": self.overall.value,
            "min_gap": self.min_gap,
            "limit_gap": self.limit_gap,
            "matched_times": self.matched_times,
            "hypothesis_times": self.hypothesis_times,
            "swapped": self.swapped,
            "tol_order": self.tol_order,
            "tol_limit": self.tol_limit,
            "note": self.note,
        }


def _check_compatible(traj1: Trajectory, traj2: Trajectory) -> None:
    c1, c2 = traj1.config, traj2.config
    if c1.domain != c2.domain:
        raise ParameterError(f"trajectories use different grids: {c1.domain} vs {c2.domain}")
    if c1.sigma != c2.sigma or c1.epsilon != c2.epsilon:
        raise ParameterError(
            f"trajectories differ in sigma/epsilon: ({c1.sigma}, {c1.epsilon}) vs ({c2.sigma}, {c2.epsilon})"
        )
    if c1.fspec != c2.fspec:
        raise ParameterError(f"trajectories use different curvature functions: {c1.fspec.label} vs {c2.fspec.label}")


def _interpolate(snapshots: List[Snapshot], t: float) -> Tuple[np.ndarray, float, float]:
    """Linear interpolation in time of (u, F_min, F_max)."""
    times = np.array([s.t for s in snapshots])
    k = int(np.searchsorted(times, t, side="right")) - 1
    k = min(max(k, 0), len(snapshots) - 1)
    if k == len(snapshots) - 1 or times[k] == t:
        s = snapshots[k]
        return np.asarray(s.u), s.F_min, s.F_max
    s0, s1 = snapshots[k], snapshots[k + 1]
    theta = (t - s0.t) / (s1.t - s0.t)
    u = (1.0 - theta) * np.asarray(s0.u) + theta * np.asarray(s1.u)
    return u, (1.0 - theta) * s0.F_min + theta * s1.F_min, (1.0 - theta) * s0.F_max + theta * s1.F_max


def comparison_check(
    traj1: Trajectory,
    traj2: Trajectory,
    tol_order: float = TOL_ORDER,
    tol_limit: float = TOL_LIMIT,
) -> ComparisonVerdict:
    """
    Check the comparison principle and uniqueness of limits.

    The second trajectory is interpolated linearly in time onto the
    recorded times of the first. The upper solution is chosen from the
    initial states: if sup F of ``traj2`` lies below inf F of ``traj1``
    the roles are swapped.

    Returns
    -------
    ComparisonVerdict
        ``ordering`` is PASS when u_upper > u_lower - tol_order wherever
        the hypothesis holds, INCONCLUSIVE when it never holds. ``limit``
        is PASS when both runs reached Steady and agree within
        ``tol_limit``, INCONCLUSIVE when either did not.

    Raises
    ------
    ParameterError
        If the trajectories do not share grid, sigma, epsilon and f, or if
        either is empty.
    """
    _check_compatible(traj1, traj2)
    if not traj1.snapshots or not traj2.snapshots:
        raise ParameterError("both trajectories need at least one recorded snapshot")

    upper, lower = traj1, traj2
    swapped = False
    first1, first2 = traj1.snapshots[0], traj2.snapshots[0]
    if not first1.F_max < first2.F_min and first2.F_max < first1.F_min:
        upper, lower, swapped = traj2, traj1, True
        logger.info("comparison: swapping roles so the first trajectory has the smaller F")

    interior = upper.config.domain.interior_mask
    t_end = min(upper.snapshots[-1].t, lower.snapshots[-1].t)
    matched = hypothesis = 0
    min_gap: Optional[float] = None
    for snap in upper.snapshots:
        if snap.t > t_end:
            break
        matched += 1
        u_low, F_min_low, _ = _interpolate(lower.snapshots, snap.t)
        if not snap.F_max < F_min_low:
            continue
        hypothesis += 1
        gap = float(np.min(np.asarray(snap.u)[interior] - u_low[interior]))
        min_gap = gap if min_gap is None else min(min_gap, gap)

    if hypothesis == 0:
        ordering = Verdict.INCONCLUSIVE
        note = "hypothesis sup F1 < inf F2 never satisfied"
    else:
        ordering = Verdict.PASS if min_gap > -tol_order else Verdict.FAIL
        note = f"hypothesis held at {hypothesis} of {matched} matched times"

    limit_gap: Optional[float] = None
    if upper.reason is TerminationReason.STEADY and lower.reason is TerminationReason.STEADY:
        limit_gap = float(np.max(np.abs(np.asarray(upper.final.u) - np.asarray(lower.final.u))))
        limit = Verdict.PASS if limit_gap <= tol_limit else Verdict.FAIL
    else:
        limit = Verdict.INCONCLUSIVE

    logger.info(
        f"comparison: ordering={ordering.value} (min gap {min_gap}), limit={limit.value} (gap {limit_gap})"
    )
    return ComparisonVerdict(
        ordering=ordering,
        limit=limit,
        min_gap=min_gap,
        limit_gap=limit_gap,
        matched_times=matched,
        hypothesis_times=hypothesis,
        swapped=swapped,
        tol_order=tol_order,
        tol_limit=tol_limit,
        note=note,
    )
