"""Evolution-identity residuals for the metric and the normal angle.

Along the flow the graph parametrization moves tangentially relative to
the normal motion, so at a fixed grid point

    d/dt nu^{n+1} = -(1/w^2) Phi_r u_r + Phi (u_r / w) d_r nu^{n+1}
    d/dt g_rr    = -2 Phi u_rr / w + V d_r g_rr + 2 g_rr d_r V

with Phi = (F - sigma) u and V = Phi u_r / w. Residuals are evaluated at
the midpoint state on nodes whose stencils stay off the Dirichlet nodes.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from ..config import IDENTITY_BASE_DT, IDENTITY_FLOOR_FACTOR, IDENTITY_MIN_ORDER, TOL
from ..utils.errors import AdmissibilityError, DomainError, ParameterError
from ..utils.graphgeom import GraphState, frame_derivatives, grid_geometry
from ..utils.linearization import linearized_identity_residuals
from ..utils.symfunc import eval_f
from .flow import FlowConfig, _evaluate, initial_cap
from .monitors import Verdict

logger = logging.getLogger(__name__)


class SignedResiduals(NamedTuple):
    metric: np.ndarray
    angle: np.ndarray


def _residual_nodes(config: FlowConfig) -> np.ndarray:
    domain = config.domain
    mask = domain.deep_interior_mask
    if domain.radial:
        mask[0] = False
    return np.flatnonzero(mask)


def _central(values: np.ndarray, nodes: np.ndarray, h: float) -> np.ndarray:
    return (values[nodes + 1] - values[nodes - 1]) / (2.0 * h)


def _signed_residuals(before: GraphState, after: GraphState, dt: float, config: FlowConfig) -> SignedResiduals:
    domain = config.domain
    if before.u.size != domain.node_count or after.u.size != domain.node_count:
        raise ParameterError(
            f"states have {before.u.size} and {after.u.size} nodes, domain has {domain.node_count}"
        )
    if not dt > 0:
        raise ParameterError(f"dt must be positive, got {dt}")

    geo_before = grid_geometry(before, domain)
    geo_after = grid_geometry(after, domain)
    u_mid = 0.5 * (before.u + after.u)
    mid = grid_geometry(u_mid, domain)

    interior = domain.interior_mask
    F = np.full(u_mid.size, config.sigma)
    try:
        F[interior] = eval_f(config.fspec, mid.kappa[interior])
    except DomainError as err:
        raise AdmissibilityError("midpoint state is not admissible", node=-1, min_eig=float(np.min(mid.conv_min_eig))) from err
    phi = (F - config.sigma) * u_mid
    phi[~interior] = 0.0

    nodes = _residual_nodes(config)
    h = domain.h
    p, upp, w = mid.du, mid.d2u, mid.w
    g = 1.0 + p ** 2
    V = phi * p / w

    d_phi = _central(phi, nodes, h)
    d_nu = _central(mid.nu, nodes, h)
    d_g = _central(g, nodes, h)
    d_V = _central(V, nodes, h)
    pn, wn, gn, phin, Vn = p[nodes], w[nodes], g[nodes], phi[nodes], V[nodes]

    rhs_nu = -d_phi * pn / wn ** 2 + phin * (pn / wn) * d_nu
    rhs_g = -2.0 * phin * upp[nodes] / wn + Vn * d_g + 2.0 * gn * d_V

    lhs_nu = (geo_after.nu[nodes] - geo_before.nu[nodes]) / dt
    lhs_g = ((1.0 + geo_after.du[nodes] ** 2) - (1.0 + geo_before.du[nodes] ** 2)) / dt
    return SignedResiduals(metric=lhs_g - rhs_g, angle=lhs_nu - rhs_nu)


def evolution_identity_residuals(
    state_before: GraphState,
    state_after: GraphState,
    dt: float,
    config: FlowConfig,
) -> Tuple[float, float]:
    """
    Residuals of the metric and normal-angle evolution identities.

    Returns
    -------
    (float, float)
        Max over residual nodes of |d g_rr/dt - rhs| and |d nu^{n+1}/dt - rhs|.

    Raises
    ------
    ParameterError
        If the states do not match the grid or dt <= 0.
    """
    res = _signed_residuals(state_before, state_after, dt, config)
    return float(np.max(np.abs(res.metric))), float(np.max(np.abs(res.angle)))


def _single_step(state: GraphState, config: FlowConfig, dt: float) -> GraphState:
    rate = _evaluate(state, config).rate
    u_new = state.u + dt * rate
    u_new[config.domain.boundary_index] = config.epsilon
    return state.with_u(u_new, state.t + dt)


def _order(dts: np.ndarray, errors: np.ndarray) -> float:
    if np.any(errors <= 0):
        warnings.warn("time error vanished; convergence order cannot be estimated", RuntimeWarning)
        return float("nan")
    return float(np.polyfit(np.log(dts), np.log(errors), 1)[0])


@dataclass
class IdentityStudy:
    """Time-refinement study of the evolution identities at a fixed grid."""

    dts: List[float]
    metric_residuals: List[float]
    angle_residuals: List[float]
    metric_time_errors: List[float]
    angle_time_errors: List[float]
    metric_order: float
    angle_order: float
    metric_floor: float
    angle_floor: float
    h: float
    notes: Dict[str, str] = field(default_factory=dict)

    @property
    def verdict(self) -> Verdict:
        if not np.isfinite(self.angle_order):
            return Verdict.INCONCLUSIVE
        ok = self.angle_order >= IDENTITY_MIN_ORDER and self.metric_order >= IDENTITY_MIN_ORDER
        return Verdict.PASS if ok else Verdict.FAIL

    def as_dict(self) -> dict:
        return {
            "dts": self.dts,
            "Evo7": {
                "residuals": self.metric_residuals,
                "time_errors": self.metric_time_errors,
                "order": self.metric_order,
                "floor": self.metric_floor,
            },
            "Evo10": {
                "residuals": self.angle_residuals,
                "time_errors": self.angle_time_errors,
                "order": self.angle_order,
                "floor": self.angle_floor,
            },
            "h": self.h,
            "h2": self.h ** 2,
            "floor_over_h2": self.angle_floor / self.h ** 2,
            "verdict": self.verdict.value,
        }


def identity_order_study(
    config: FlowConfig,
    state: Optional[GraphState] = None,
    base_dt: float = IDENTITY_BASE_DT,
    levels: int = 3,
    floor_factor: float = IDENTITY_FLOOR_FACTOR,
) -> IdentityStudy:
    """
    Refine dt -> dt/2 -> dt/4 at fixed h from one state.

    The spatial floor is the residual of a step ``floor_factor`` times
    smaller than ``base_dt``; the time error at each dt is the max-norm
    distance of the signed residual field from that floor field, and the
    reported orders are least-squares slopes of log time error against
    log dt.
    """
    if levels < 2:
        raise ParameterError(f"levels must be >= 2, got {levels}")
    if state is None:
        state = initial_cap(config)

    floor_dt = base_dt * floor_factor
    floor = _signed_residuals(state, _single_step(state, config, floor_dt), floor_dt, config)

    dts, metric, angle, metric_err, angle_err = [], [], [], [], []
    for k in range(levels):
        dt = base_dt / 2 ** k
        res = _signed_residuals(state, _single_step(state, config, dt), dt, config)
        dts.append(dt)
        metric.append(float(np.max(np.abs(res.metric))))
        angle.append(float(np.max(np.abs(res.angle))))
        metric_err.append(float(np.max(np.abs(res.metric - floor.metric))))
        angle_err.append(float(np.max(np.abs(res.angle - floor.angle))))

    study = IdentityStudy(
        dts=dts,
        metric_residuals=metric,
        angle_residuals=angle,
        metric_time_errors=metric_err,
        angle_time_errors=angle_err,
        metric_order=_order(np.array(dts), np.array(metric_err)),
        angle_order=_order(np.array(dts), np.array(angle_err)),
        metric_floor=float(np.max(np.abs(floor.metric))),
        angle_floor=float(np.max(np.abs(floor.angle))),
        h=config.domain.h,
    )
    logger.info(
        f"identity study: Evo10 order {study.angle_order:.3f}, Evo7 order {study.metric_order:.3f}, "
        f"floor {study.angle_floor:.3g} (h^2 = {study.h ** 2:.3g})"
    )
    return study


def linearized_identity_check(state: GraphState, config: FlowConfig) -> Dict[str, float]:
    """Max over interior nodes of the trace and drift identity residuals of the linearized operator."""
    domain = config.domain
    geometry = grid_geometry(state, domain)
    trace_max = drift_max = 0.0
    for node in np.flatnonzero(domain.interior_mask):
        Du, D2u = frame_derivatives(geometry.du[node], geometry.d2u[node], float(domain.nodes[node]), domain)
        trace, drift = linearized_identity_residuals(config.fspec, config.sigma, float(state.u[node]), Du, D2u)
        trace_max = max(trace_max, trace)
        drift_max = max(drift_max, drift)
    return {"C2b3": trace_max, "C2b7": drift_max, "tol": TOL}
