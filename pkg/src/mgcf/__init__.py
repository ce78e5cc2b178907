"""
mgcf: modified general curvature flow of convex graphs in hyperbolic space

Simulates u_t = u w (f(kappa) - sigma) for vertical graphs over a ball
(radial reduction) or an interval in the half-space model with boundary
height epsilon, and checks the a-priori estimates of the flow numerically
while it runs.

Usage:
    import mgcf

    # Curvature functions
    report = mgcf.check_f("gauss", n=2)
    report.status                          # Verdict.PASS

    # Flows
    config = mgcf.flow_config(sigma=0.6, nodes=200)
    traj = mgcf.simulate(config)
    traj.reason                            # TerminationReason.STEADY
    mgcf.summarize(traj).verdicts

    # Stationary solutions, continuation, comparison
    mgcf.stationary(config)
    mgcf.continuation(config, levels=3)
    mgcf.compare(config, config.replace(sigma_init=0.9))
"""

from .api import (
    curvature_function,
    check_f,
    flow_config,
    simulate,
    stationary,
    continuation,
    compare,
    identities,
    summarize,
    diagnostics,
    final_profile,
    clear_cache,
    load_scenario,
    parse_scenario,
    dump_scenario,
)
from .operations.flow import FlowConfig, TerminationReason, Trajectory
from .operations.monitors import Verdict
from .utils.graphgeom import DomainDescriptor, DomainKind, GraphState
from .utils.symfunc import CurvatureFamily, CurvatureFunctionSpec, PrincipalCurvatures

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
    "FlowConfig",
    "TerminationReason",
    "Trajectory",
    "Verdict",
    "DomainDescriptor",
    "DomainKind",
    "GraphState",
    "CurvatureFamily",
    "CurvatureFunctionSpec",
    "PrincipalCurvatures",
]

__version__ = "0.0.1"
