"""Stationary solutions for a halving sequence of boundary lifts epsilon_k = epsilon 2^-k."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from ..config import CAUCHY_RATIO_SPREAD
from ..utils.cache import config_fingerprint, solution_cache
from ..utils.errors import ParameterError
from ..utils.graphgeom import GraphState
from .flow import FlowConfig, Trajectory, run_stationary
from .monitors import Verdict

logger = logging.getLogger(__name__)


@dataclass
class ContinuationResult:
    epsilons: List[float]
    trajectories: List[Trajectory]
    cauchy: List[float]
    boundary_w: List[float]

    @property
    def states(self) -> List[GraphState]:
        return [traj.final for traj in self.trajectories]

    @property
    def ratios(self) -> List[float]:
        """d_k / epsilon_k."""
        return [d / eps for d, eps in zip(self.cauchy, self.epsilons)]

    @property
    def C_fit(self) -> float:
        """Least-squares C in d_k ~ C epsilon_k."""
        if not self.cauchy:
            return float("nan")
        d = np.array(self.cauchy)
        eps = np.array(self.epsilons[: d.size])
        return float(d @ eps / (eps @ eps))

    @property
    def boundary_C(self) -> List[float]:
        """(w next to the boundary - 1/sigma) / epsilon_k per level."""
        sigma = self.trajectories[0].config.sigma
        return [(w - 1.0 / sigma) / eps for w, eps in zip(self.boundary_w, self.epsilons)]

    @property
    def verdict(self) -> Verdict:
        if len(self.cauchy) < 2:
            return Verdict.INCONCLUSIVE
        decreasing = all(b < a for a, b in zip(self.cauchy, self.cauchy[1:]))
        ratios = self.ratios
        bounded = max(ratios) <= CAUCHY_RATIO_SPREAD * min(ratios)
        return Verdict.PASS if decreasing and bounded else Verdict.FAIL

    def as_dict(self) -> Dict[str, object]:
        return {
            "epsilons": self.epsilons,
            "cauchy": self.cauchy,
            "ratios": self.ratios,
            "C_fit": self.C_fit,
            "boundary_w": self.boundary_w,
            "boundary_C": self.boundary_C,
            "residuals": [traj.residual for traj in self.trajectories],
            "verdict": self.verdict.value,
        }


def _solve_level(config: FlowConfig) -> Trajectory:
    return run_stationary(config)


def epsilon_continuation(
    config: FlowConfig,
    levels: int,
    max_workers: Optional[int] = None,
    use_cache: bool = True,
) -> ContinuationResult:
    """
    Solve the stationary problem for epsilon_k = epsilon 2^-k, k = 0..levels-1.

    Parameters
    ----------
    config : FlowConfig
        Level-0 configuration.
    levels : int
        Number of epsilon levels (>= 1).
    max_workers : int, optional
        Solve levels in a thread pool of this size; sequential when None or 1.
    use_cache : bool, default True
        Reuse stationary trajectories already in the solution cache.

    Returns
    -------
    ContinuationResult
        Trajectories per level, Cauchy differences d_k = sup|u_k - u_{k+1}|
        and w at the boundary-adjacent node per level.

    Raises
    ------
    StationaryNotReachedError
        If any level fails to reach steady state.
    """
    if int(levels) != levels or levels < 1:
        raise ParameterError(f"levels must be a positive integer, got {levels}")
    configs = [config.replace(epsilon=config.epsilon / 2 ** k) for k in range(levels)]
    keys = [config_fingerprint(c) for c in configs]

    trajectories: List[Optional[Trajectory]] = [solution_cache.get(k) if use_cache else None for k in keys]
    missing = [i for i, traj in enumerate(trajectories) if traj is None]
    if missing:
        todo = [configs[i] for i in missing]
        if max_workers is not None and max_workers > 1 and len(todo) > 1:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                solved = list(pool.map(_solve_level, todo))
        else:
            solved = []
            for i, c in zip(missing, todo):
                logger.info(f"continuation level {i}: epsilon = {c.epsilon:.6g}")
                solved.append(_solve_level(c))
        for i, traj in zip(missing, solved):
            trajectories[i] = traj
            if use_cache:
                solution_cache.set(keys[i], traj)

    domain = config.domain
    cauchy = [
        float(np.max(np.abs(np.asarray(a.final.u) - np.asarray(b.final.u))))
        for a, b in zip(trajectories, trajectories[1:])
    ]
    boundary_w = [traj.records[-1].w_at_boundary_adjacent for traj in trajectories]
    result = ContinuationResult(
        epsilons=[c.epsilon for c in configs],
        trajectories=list(trajectories),
        cauchy=cauchy,
        boundary_w=boundary_w,
    )
    logger.info(f"continuation over {levels} levels on {domain.node_count} nodes: d_k = {cauchy}")
    return result
