"""Time integration of the lifted Dirichlet problem u_t = u w (F - sigma).

Boundary nodes are pinned at epsilon. Forward Euler with a diffusion-scaled
step dt = cfl * h^2 / max(u^2 Sum F^{ii} / w); a step that would break
admissibility is retried with dt halved, and after ``max_halvings``
halvings the trajectory stops with ``StepUnderflow``.

Steps between two recorded states run in the compiled kernels of
``utils.kernels``; records, snapshots and termination are handled here.
"""

from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np

from ..config import MAX_HALVINGS, MONOTONE_TOL
from ..utils import kernels
from ..utils.errors import (
    AdmissibilityError,
    ConfigurationError,
    DomainError,
    ParameterError,
    StationaryNotReachedError,
    StepUnderflowError,
)
from ..utils.graphgeom import (
    DomainDescriptor,
    GraphState,
    GridGeometry,
    cap_profile,
    cap_radius,
    frame_derivatives,
    grid_geometry,
    validate_state,
)
from ..utils.linearization import LinearizedCoefficients, linearized_coefficients_at
from ..utils.symfunc import CurvatureFunctionSpec, eval_f
from .monitors import DiagnosticsRecord, MonitorHistory, estimate_monitors

logger = logging.getLogger(__name__)


class TerminationReason(str, Enum):
    STEADY = "Steady"
    T_MAX_REACHED = "TMaxReached"
    ADMISSIBILITY_LOST = "AdmissibilityLost"
    STEP_UNDERFLOW = "StepUnderflow"


@dataclass(frozen=True)
class FlowConfig:
    """Parameters of one flow run."""

    domain: DomainDescriptor
    fspec: CurvatureFunctionSpec
    sigma: float
    epsilon: float
    sigma_init: float
    cfl_safety: float = 0.2
    t_max: float = 200.0
    steady_tol: float = 1e-8
    diag_stride: int = 200
    max_halvings: int = MAX_HALVINGS

    def __post_init__(self):
        if not 0.0 < self.sigma < 1.0:
            raise ConfigurationError("sigma must lie in (0,1)")
        if not self.sigma < self.sigma_init < 1.0:
            raise ConfigurationError(
                f"sigma_init must lie in (sigma, 1) so that the initial surface has f(kappa) > sigma; "
                f"got sigma_init={self.sigma_init}, sigma={self.sigma}"
            )
        if not 0.0 < self.epsilon < self.domain.extent / 10.0:
            raise ConfigurationError(f"epsilon must lie in (0, extent/10), got {self.epsilon}")
        if self.fspec.n != self.domain.n:
            raise ConfigurationError(f"curvature function has n={self.fspec.n}, domain has n={self.domain.n}")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ConfigurationError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if self.t_max < 0:
            raise ConfigurationError(f"t_max must be >= 0, got {self.t_max}")
        if not self.steady_tol > 0:
            raise ConfigurationError(f"steady_tol must be positive, got {self.steady_tol}")
        if int(self.diag_stride) != self.diag_stride or self.diag_stride < 1:
            raise ConfigurationError(f"diag_stride must be a positive integer, got {self.diag_stride}")
        if self.max_halvings < 0:
            raise ConfigurationError(f"max_halvings must be >= 0, got {self.max_halvings}")

    def replace(self, **changes) -> "FlowConfig":
        return dataclasses.replace(self, **changes)


@dataclass
class FlowEvaluation:
    """Speed of one state; the full ``GridGeometry`` is built on first access."""

    u: np.ndarray
    domain: DomainDescriptor
    w: np.ndarray
    conv: np.ndarray
    F: np.ndarray
    sum_f: np.ndarray
    rate: np.ndarray
    residual: float
    _geometry: Optional[GridGeometry] = field(default=None, repr=False)

    @property
    def geometry(self) -> GridGeometry:
        if self._geometry is None:
            self._geometry = grid_geometry(self.u, self.domain)
        return self._geometry


@dataclass(frozen=True)
class _Stencil:
    """Per-grid constants handed to the compiled kernels."""

    r: np.ndarray
    h: float
    radial: bool
    n: int
    lo: int
    hi: int
    boundary: np.ndarray
    top: int
    bottom: int
    coeffs: np.ndarray


@lru_cache(maxsize=32)
def _stencil(domain: DomainDescriptor, fspec: CurvatureFunctionSpec) -> _Stencil:
    top, bottom = fspec.exponents
    return _Stencil(
        r=np.ascontiguousarray(domain.nodes, dtype=float),
        h=float(domain.h),
        radial=domain.radial,
        n=int(domain.n),
        lo=0 if domain.radial else 1,
        hi=domain.node_count - 1,
        boundary=np.ascontiguousarray(domain.boundary_index, dtype=np.int64),
        top=int(top),
        bottom=int(bottom),
        coeffs=kernels.two_valued_coefficients(fspec),
    )


@dataclass(frozen=True)
class Snapshot:
    step: int
    t: float
    u: np.ndarray
    rate: np.ndarray
    F_min: float
    F_max: float


@dataclass
class Trajectory:
    """A flow run: recorded snapshots and diagnostics plus the final state."""

    config: FlowConfig
    initial: GraphState
    final: GraphState
    reason: TerminationReason
    steps: int = 0
    snapshots: List[Snapshot] = field(default_factory=list)
    records: List[DiagnosticsRecord] = field(default_factory=list)
    residual: float = float("nan")
    monotone_ok: bool = True
    min_conv_eig: float = float("inf")
    min_F_minus_sigma: float = float("inf")
    dissipation: float = 0.0
    history: Optional[MonitorHistory] = None
    wall_time: float = 0.0

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])


def initial_cap(config: FlowConfig) -> GraphState:
    """
    Lifted umbilic cap u_0 = cap(R, sigma_init) + epsilon.

    A vertical lift of an umbilic cap is again umbilic, with
    kappa = sigma_init - epsilon / R_e'. The discrete F must exceed
    sigma + (sigma_init - sigma)/2 at every interior node.
    """
    domain = config.domain
    u = cap_profile(domain.extent, config.sigma_init, domain.nodes) + config.epsilon
    u[domain.boundary_index] = config.epsilon
    state = GraphState(u=u, t=0.0, epsilon=config.epsilon)

    geometry = grid_geometry(state, domain)
    interior = domain.interior_mask
    try:
        F = eval_f(config.fspec, geometry.kappa[interior])
    except DomainError as err:
        raise ConfigurationError(f"initial cap is not admissible on this grid ({err}); use a finer grid") from err
    threshold = config.sigma + 0.5 * (config.sigma_init - config.sigma)
    if np.min(F) <= threshold:
        node = int(np.flatnonzero(interior)[np.argmin(F)])
        raise ConfigurationError(
            f"discrete F = {np.min(F):.6g} at node {node} does not exceed {threshold:.6g}; use a finer grid"
        )
    logger.debug(
        f"initial cap: sigma_init={config.sigma_init}, R_e'={cap_radius(domain.extent, config.sigma_init):.6g}, "
        f"min F={np.min(F):.6g}"
    )
    return state


def _evaluate(state: GraphState, config: FlowConfig) -> FlowEvaluation:
    st = _stencil(config.domain, config.fspec)
    u = np.array(state.u, dtype=float)
    N = u.size
    if N != config.domain.node_count:
        raise ParameterError(f"state has {N} nodes, domain has {config.domain.node_count}")
    du, d2u, w, k_rad, k_ang, conv = (np.empty(N) for _ in range(6))
    kernels.grid_profile(u, st.r, st.h, st.radial, st.n, du, d2u, w, k_rad, k_ang, conv)
    F, sum_f, rate = np.empty(N), np.empty(N), np.empty(N)
    status, node, eig, residual = kernels.evaluate_nodes(
        u, w, k_rad, k_ang, conv, st.lo, st.hi, config.sigma, st.top, st.bottom, st.coeffs, F, sum_f, rate
    )
    if status == kernels.EVAL_NOT_CONVEX:
        raise AdmissibilityError(
            f"state is not admissible at node {node} (min eigenvalue {eig:.6g})", node=int(node), min_eig=float(eig)
        )
    if status == kernels.EVAL_OUT_OF_CONE:
        raise AdmissibilityError(
            f"principal curvatures left the positive cone at node {node}", node=int(node), min_eig=float(eig)
        )
    return FlowEvaluation(
        u=u, domain=config.domain, w=w, conv=conv, F=F, sum_f=sum_f, rate=rate, residual=float(residual)
    )


def flow_rhs(state: GraphState, config: FlowConfig) -> np.ndarray:
    """
    u_t = u w (F(A[u]) - sigma) at every node (zero on Dirichlet nodes).

    Raises
    ------
    AdmissibilityError
        If the convexity matrix is not positive definite at some interior
        node; the worst node and its smallest eigenvalue are attached.
    """
    return _evaluate(state, config).rate


def stable_dt(state: GraphState, evaluation: FlowEvaluation, config: FlowConfig) -> float:
    """dt = cfl * h^2 / max over interior nodes of u^2 Sum F^{ii} / w."""
    interior = config.domain.interior_mask
    diffusion = state.u[interior] ** 2 * evaluation.sum_f[interior] / evaluation.w[interior]
    return config.cfl_safety * config.domain.h ** 2 / float(np.max(diffusion))


def linearized_coefficients(state: GraphState, config: FlowConfig, node: int) -> LinearizedCoefficients:
    """
    (G_kl, G_s, G_u, G_t) of G = u_t/(u w) - F at an interior node, in the
    Cartesian frame through the node (radial direction first).
    """
    domain = config.domain
    if not domain.interior_mask[node]:
        raise ParameterError(f"node {node} is not an interior node")
    evaluation = _evaluate(state, config)
    geometry = evaluation.geometry
    Du, D2u = frame_derivatives(geometry.du[node], geometry.d2u[node], float(domain.nodes[node]), domain)
    return linearized_coefficients_at(config.fspec, float(state.u[node]), Du, D2u, float(evaluation.rate[node]))


class _Accumulators:
    """Buffers shared with ``kernels.advance_steps``: running extrema and trajectory totals."""

    def __init__(self, history: Optional[MonitorHistory] = None, traj: Optional["Trajectory"] = None):
        self.history = np.empty(kernels.HISTORY_SLOTS)
        self.acc = np.empty(kernels.ACCUMULATOR_SLOTS)
        if history is not None:
            self.history[:] = [
                history.max_u,
                history.min_nu,
                history.max_boundary_w,
                history.max_boundary_psi,
                history.max_boundary_ratio,
                history.observed,
            ]
        else:
            self.history[:] = [-np.inf, np.inf, -np.inf, -np.inf, -np.inf, 0.0]
        self.acc[:] = np.nan
        self.acc[kernels.A_MIN_CONV] = traj.min_conv_eig if traj is not None else np.inf
        self.acc[kernels.A_MIN_FMS] = traj.min_F_minus_sigma if traj is not None else np.inf
        self.acc[kernels.A_RESIDUAL] = traj.residual if traj is not None else np.nan
        self.acc[kernels.A_MONOTONE] = 1.0 if traj is None or traj.monotone_ok else 0.0
        self.acc[kernels.A_DISSIPATION] = traj.dissipation if traj is not None else 0.0
        self.acc[kernels.A_WORST_NODE] = -1.0
        self.acc[kernels.A_HALVINGS] = 0.0

    @property
    def halvings(self) -> int:
        return int(self.acc[kernels.A_HALVINGS])

    @property
    def worst(self) -> Tuple[int, float]:
        return int(self.acc[kernels.A_WORST_NODE]), float(self.acc[kernels.A_WORST_EIG])

    @property
    def last_dt(self) -> float:
        return float(self.acc[kernels.A_LAST_DT])

    def monitor_history(self) -> MonitorHistory:
        h = self.history
        return MonitorHistory(
            max_u=float(h[kernels.H_MAX_U]),
            min_nu=float(h[kernels.H_MIN_NU]),
            max_boundary_w=float(h[kernels.H_MAX_BW]),
            max_boundary_psi=float(h[kernels.H_MAX_BPSI]),
            max_boundary_ratio=float(h[kernels.H_MAX_BRATIO]),
            observed=int(h[kernels.H_OBSERVED]),
        )

    def write_back(self, traj: "Trajectory") -> None:
        traj.min_conv_eig = float(self.acc[kernels.A_MIN_CONV])
        traj.min_F_minus_sigma = float(self.acc[kernels.A_MIN_FMS])
        traj.residual = float(self.acc[kernels.A_RESIDUAL])
        traj.monotone_ok = bool(self.acc[kernels.A_MONOTONE] > 0)
        traj.dissipation = float(self.acc[kernels.A_DISSIPATION])


def _advance(
    state: GraphState,
    config: FlowConfig,
    steps: int,
    stride: int,
    t_end: float,
    buffers: _Accumulators,
) -> Tuple[GraphState, int, int]:
    """Run the compiled stepper from ``state``; returns (new state, steps taken, status)."""
    st = _stencil(config.domain, config.fspec)
    u = np.array(state.u, dtype=float)
    taken, t, status = kernels.advance_steps(
        u, float(state.t), int(steps), int(stride), float(t_end), float(config.epsilon),
        st.r, st.h, st.radial, st.n, st.lo, st.hi, st.boundary,
        float(config.sigma), st.top, st.bottom, st.coeffs, float(config.cfl_safety), int(config.max_halvings),
        float(config.steady_tol), float(MONOTONE_TOL), buffers.history, buffers.acc,
    )
    if buffers.halvings:
        node, eig = buffers.worst
        logger.warning(
            f"{buffers.halvings} dt halvings before t={t:.6g}; last admissibility loss at node {node} "
            f"(min eigenvalue {eig:.3g})"
        )
        buffers.acc[kernels.A_HALVINGS] = 0.0
    new_state = state.with_u(u, t) if taken else state
    return new_state, int(taken), int(status)


def step_explicit(state: GraphState, config: FlowConfig) -> Tuple[GraphState, float]:
    """
    One forward Euler step with boundary values pinned at epsilon.

    Returns
    -------
    (GraphState, float)
        The new state and the dt actually used.

    Raises
    ------
    StepUnderflowError
        If admissibility fails after ``max_halvings`` halvings of dt.
    """
    _evaluate(state, config)
    buffers = _Accumulators()
    new_state, _, status = _advance(state, config, 0, 1, np.inf, buffers)
    if status == kernels.ADVANCE_UNDERFLOW:
        node, eig = buffers.worst
        raise StepUnderflowError(
            f"admissibility lost after {config.max_halvings} halvings at t={state.t:.6g}", node=node, min_eig=eig
        )
    return new_state, buffers.last_dt


def _snapshot(state: GraphState, evaluation: FlowEvaluation, step: int, config: FlowConfig) -> Snapshot:
    F_int = evaluation.F[config.domain.interior_mask]
    return Snapshot(
        step=step,
        t=state.t,
        u=np.array(state.u),
        rate=evaluation.rate,
        F_min=float(np.min(F_int)),
        F_max=float(np.max(F_int)),
    )


def run_flow(config: FlowConfig, initial: Optional[GraphState] = None) -> Trajectory:
    """
    Integrate until max interior |F - sigma| <= steady_tol or t >= t_max.

    A DiagnosticsRecord and a Snapshot are taken every ``diag_stride``
    steps (starting with step 0) and at the final state. Step failures end
    the run with the matching termination reason instead of raising.
    """
    started = time.perf_counter()
    domain = config.domain
    if initial is not None and initial.epsilon != config.epsilon:
        raise ConfigurationError(
            f"initial state has epsilon={initial.epsilon}, configuration has epsilon={config.epsilon}"
        )
    state = initial if initial is not None else initial_cap(config)
    validate_state(state, domain)
    initial_state = state
    logger.info(
        f"flow: {config.fspec.label}, n={domain.n}, {domain.kind.value} R={domain.extent}, "
        f"nodes={domain.node_count}, sigma={config.sigma}, epsilon={config.epsilon}"
    )

    traj = Trajectory(config=config, initial=initial_state, final=state, reason=TerminationReason.T_MAX_REACHED)
    history: Optional[MonitorHistory] = None
    evaluation: Optional[FlowEvaluation] = None
    last_recorded = -1
    steps = 0

    def record(ev: FlowEvaluation) -> None:
        nonlocal last_recorded
        traj.records.append(
            estimate_monitors(
                state,
                config,
                history=history,
                geometry=ev.geometry,
                monotone_ok=traj.monotone_ok,
                dissipation=traj.dissipation,
            )
        )
        traj.snapshots.append(_snapshot(state, ev, steps, config))
        last_recorded = steps

    def observe(ev: FlowEvaluation) -> None:
        nonlocal history
        history = MonitorHistory.observe(history, state, ev.geometry, config)
        interior = domain.interior_mask
        traj.min_conv_eig = min(traj.min_conv_eig, float(np.min(ev.conv[interior])))
        traj.min_F_minus_sigma = min(traj.min_F_minus_sigma, float(np.min(ev.F[interior])) - config.sigma)
        traj.residual = ev.residual

    while True:
        if state.t >= config.t_max:
            traj.reason = TerminationReason.T_MAX_REACHED
            evaluation = None
            break
        try:
            evaluation = _evaluate(state, config)
        except AdmissibilityError as err:
            logger.error(f"flow stopped: {err}")
            traj.reason = TerminationReason.ADMISSIBILITY_LOST
            evaluation = None
            break
        observe(evaluation)
        if steps % config.diag_stride == 0:
            record(evaluation)
        if evaluation.residual <= config.steady_tol:
            traj.reason = TerminationReason.STEADY
            break

        buffers = _Accumulators(history, traj)
        state, taken, status = _advance(state, config, steps, config.diag_stride, config.t_max, buffers)
        steps += taken
        buffers.write_back(traj)
        history = buffers.monitor_history()
        if status == kernels.ADVANCE_UNDERFLOW:
            node, eig = buffers.worst
            logger.error(
                f"flow stopped: admissibility lost after {config.max_halvings} halvings at t={state.t:.6g} "
                f"(node {node}, min eigenvalue {eig:.3g})"
            )
            traj.reason = TerminationReason.STEP_UNDERFLOW
            if taken:
                evaluation = _evaluate(state, config)
            break
        logger.debug(f"step {steps}: t={state.t:.6g}, residual={traj.residual:.3g}")

    if steps > 0 and last_recorded != steps:
        if evaluation is None and traj.reason is TerminationReason.T_MAX_REACHED:
            evaluation = _evaluate(state, config)
            observe(evaluation)
        if evaluation is not None:
            record(evaluation)

    traj.final = state
    traj.steps = steps
    traj.history = history
    traj.wall_time = time.perf_counter() - started
    logger.info(
        f"flow terminated: {traj.reason.value} after {steps} steps, t={state.t:.6g}, residual={traj.residual:.3g}"
    )
    return traj


def run_stationary(config: FlowConfig, initial: Optional[GraphState] = None) -> Trajectory:
    """``run_flow`` that must end ``Steady``."""
    traj = run_flow(config, initial=initial)
    if traj.reason is not TerminationReason.STEADY:
        raise StationaryNotReachedError(
            f"flow ended with {traj.reason.value} at t={traj.final.t:.6g} (residual {traj.residual:.3g})",
            trajectory=traj,
        )
    logger.info(f"stationary residual max|F - sigma| = {traj.residual:.3g}")
    return traj


def solve_stationary(config: FlowConfig, initial: Optional[GraphState] = None) -> GraphState:
    """
    Stationary solution F = sigma by flowing to steady state.

    Raises
    ------
    StationaryNotReachedError
        If the run does not terminate ``Steady``; the trajectory is attached.
    """
    return run_stationary(config, initial=initial).final
