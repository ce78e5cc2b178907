"""
mgcf API - all functions at module level.

Usage:
    import mgcf

    # Curvature functions
    mgcf.check_f("gauss", n=2)            # structure certificate
    mgcf.check_f("mean", n=2).failed      # ['Int7', 'Int20']

    # Flows
    config = mgcf.flow_config(sigma=0.6, nodes=200)
    traj = mgcf.simulate(config)
    mgcf.diagnostics(traj)                # DataFrame, one row per record
    mgcf.summarize(traj).verdicts         # nine verdict rows

    # Stationary solutions and epsilon-continuation
    state = mgcf.stationary(config).final
    mgcf.continuation(config, levels=3).cauchy

    # Scenario files
    scenario = mgcf.load_scenario("ball.yaml")
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, Optional, Tuple

import pandas as pd

from .config import DEFAULT_SAMPLES, DEFAULT_SEED, IDENTITY_BASE_DT
from .operations.check_f import ConeSampler, StructureReport, check_structure
from .operations.compare import ComparisonVerdict, comparison_check
from .operations.continuation import ContinuationResult, epsilon_continuation
from .operations.flow import FlowConfig, Trajectory, run_flow, run_stationary
from .operations.identities import IdentityStudy, identity_order_study
from .operations.monitors import verdict_table
from .operations.outputs import RunSummary, build_summary, diagnostics_frame, final_profile_frame
from .operations.scenario import Scenario, dump_scenario, load_scenario, parse_scenario, scenario_from_dict
from .utils.cache import config_fingerprint, solution_cache
from .utils.graphgeom import GraphState
from .utils.symfunc import CurvatureFunctionSpec


def curvature_function(family: str, n: int, l: int = 0) -> CurvatureFunctionSpec:
    """
    Select a curvature function.

    Parameters
    ----------
    family : str
        "mean" (H_1), "gauss" (H_n^(1/n)) or "quotient" ((H_n/H_l)^(1/(n-l))).
    n : int
        Number of principal curvatures.
    l : int, default 0
        Lower index of the quotient family.
    """
    return CurvatureFunctionSpec(family=family, n=n, l=l)


def check_f(
    family: str,
    n: int,
    l: int = 0,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
) -> StructureReport:
    """
    Certify the structure conditions of a curvature function on seeded samples.

    Returns
    -------
    StructureReport
        Per-condition PASS/FAIL with witness points; ``failed`` lists the
        failing condition tags.
    """
    spec = curvature_function(family, n, l)
    return check_structure(spec, ConeSampler(n=n, samples=samples, seed=seed))


def flow_config(sigma: float, **options: Any) -> FlowConfig:
    """
    Build a FlowConfig from scenario keys, with scenario defaults.

    Keys are taken from every scenario section (kind, n, extent, nodes,
    family, l, sigma_init, epsilon, cfl_safety, t_max, steady_tol,
    diag_stride).

    Examples
    --------
    >>> mgcf.flow_config(0.6, nodes=100, family="mean").domain.node_count
    100
    """
    sections = {
        "domain": ("kind", "n", "extent", "nodes"),
        "curvature": ("family", "l"),
        "flow": ("sigma_init", "epsilon", "cfl_safety", "t_max", "steady_tol", "diag_stride"),
    }
    data: Dict[str, Dict[str, Any]] = {"flow": {"sigma": sigma}}
    unknown = set(options)
    for section, keys in sections.items():
        for key in keys:
            if key in options:
                data.setdefault(section, {})[key] = options[key]
                unknown.discard(key)
    if unknown:
        raise TypeError(f"unknown flow_config options: {sorted(unknown)}")
    return scenario_from_dict(data).config


def simulate(config: FlowConfig, initial: Optional[GraphState] = None) -> Trajectory:
    """
    Run the flow from the lifted cap (or ``initial``) until steady state or t_max.

    Returns
    -------
    Trajectory
        Snapshots, diagnostics records, final state and termination reason.
    """
    return run_flow(config, initial=initial)


def stationary(config: FlowConfig, use_cache: bool = True) -> Trajectory:
    """
    Flow to the stationary solution F = sigma.

    Repeated calls with an equal configuration reuse the cached trajectory.

    Raises
    ------
    StationaryNotReachedError
        If the run does not end ``Steady``.
    """
    key = config_fingerprint(config)
    if use_cache:
        cached = solution_cache.get(key)
        if cached is not None:
            return cached
    traj = run_stationary(config)
    if use_cache:
        solution_cache.set(key, traj)
    return traj


def continuation(
    config: FlowConfig,
    levels: int = 3,
    max_workers: Optional[int] = None,
) -> ContinuationResult:
    """Stationary solutions for epsilon, epsilon/2, ..., epsilon/2^(levels-1)."""
    return epsilon_continuation(config, levels, max_workers=max_workers)


def compare(
    config_a: FlowConfig,
    config_b: FlowConfig,
    max_workers: Optional[int] = None,
) -> Tuple[Trajectory, Trajectory, ComparisonVerdict]:
    """
    Run two flows and check ordering and agreement of their limits.

    Returns
    -------
    (Trajectory, Trajectory, ComparisonVerdict)
    """
    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=min(max_workers, 2)) as pool:
            traj_a, traj_b = pool.map(run_flow, (config_a, config_b))
    else:
        traj_a, traj_b = run_flow(config_a), run_flow(config_b)
    return traj_a, traj_b, comparison_check(traj_a, traj_b)


def identities(config: FlowConfig, base_dt: float = IDENTITY_BASE_DT, levels: int = 3) -> IdentityStudy:
    """Time-refinement study of the metric and normal-angle evolution identities from the initial cap."""
    return identity_order_study(config, base_dt=base_dt, levels=levels)


def summarize(
    trajectory: Trajectory,
    scenario: Optional[Scenario] = None,
    command: str = "flow",
    comparison: Optional[ComparisonVerdict] = None,
) -> RunSummary:
    """Verdict table, fitted constants and echoed scenario of a trajectory."""
    rows = verdict_table(trajectory, comparison=comparison)
    extra = {"comparison": comparison.as_dict()} if comparison is not None else None
    return build_summary(command, trajectory, scenario=scenario, verdicts=rows, extra=extra)


def diagnostics(trajectory: Trajectory) -> pd.DataFrame:
    """Diagnostics records as a DataFrame (fixed column order)."""
    return diagnostics_frame(trajectory.records)


def final_profile(trajectory: Trajectory) -> pd.DataFrame:
    """Node-wise u, w, nu, principal curvature range and F of the final state."""
    return final_profile_frame(trajectory)


def clear_cache() -> None:
    """Drop all cached stationary trajectories."""
    solution_cache.clear()


__all__ = [
    "curvature_function",
    "check_f",
    "flow_config",
    "simulate",
    "stationary",
    "continuation",
    "compare",
    "identities",
    "summarize",
    "diagnostics",
    "final_profile",
    "clear_cache",
    "load_scenario",
    "parse_scenario",
    "dump_scenario",
]
