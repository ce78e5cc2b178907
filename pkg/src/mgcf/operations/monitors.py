"""A-priori estimate monitors, dissipation and the run verdict table.

Every monitor is a pure function of a state plus a ``MonitorHistory``
(running extrema over the parabolic boundary seen so far), so evaluating
the same snapshot twice gives identical records.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Any, Dict, List, NamedTuple, Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from ..config import CON2_REL_TOL, DIAG_COLUMNS, INT18_SLACK, TOL, TOL_RATIO, UD2U_BOUND, VERDICT_TAGS
from ..utils.errors import ParameterError
from ..utils.graphgeom import GraphState, GridGeometry, grid_geometry
from ..utils.symfunc import eval_f, grad_f

if TYPE_CHECKING:
    from .compare import ComparisonVerdict
    from .flow import FlowConfig, Trajectory

logger = logging.getLogger(__name__)


class Verdict(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class MonitorHistory:
    """Running extrema needed by the maximum-principle monitors."""

    max_u: float
    min_nu: float
    max_boundary_w: float
    max_boundary_psi: float
    max_boundary_ratio: float
    observed: int = 0

    @classmethod
    def observe(
        cls,
        history: Optional["MonitorHistory"],
        state: GraphState,
        geometry: GridGeometry,
        config: "FlowConfig",
    ) -> "MonitorHistory":
        """Fold one state into the running extrema (returns a new history)."""
        b = config.domain.boundary_index
        u_b = state.u[b]
        nu = geometry.nu
        min_nu = float(np.min(nu))
        max_u = float(np.max(state.u))
        w_b = float(np.max(geometry.w[b]))
        psi_b = float(np.max((config.sigma - nu[b]) / u_b))
        if history is not None:
            min_nu = min(min_nu, history.min_nu)
            max_u = max(max_u, history.max_u)
            w_b = max(w_b, history.max_boundary_w)
            psi_b = max(psi_b, history.max_boundary_psi)
        ratio_b = _boundary_ratio(geometry, config, 0.5 * min_nu)
        if history is not None:
            ratio_b = max(ratio_b, history.max_boundary_ratio)
        return cls(
            max_u=max_u,
            min_nu=min_nu,
            max_boundary_w=w_b,
            max_boundary_psi=psi_b,
            max_boundary_ratio=ratio_b,
            observed=(history.observed if history is not None else 0) + 1,
        )


def _boundary_ratio(geometry: GridGeometry, config: "FlowConfig", a: float) -> float:
    b = config.domain.boundary_index
    return float(np.max(geometry.kappa[b, 0] / (geometry.nu[b] - a)))


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Monitor values at one recorded step (columns of the diagnostics table)."""

    t: float
    min_conv_eig: float
    min_F_minus_sigma: float
    max_F_minus_sigma: float
    max_w_interior: float
    w_at_boundary_adjacent: float
    w_at_boundary: float
    min_nu_interior: float
    max_kappa: float
    max_ratio_interior: float
    boundary_ratio: float
    a_used: float
    max_uD2u_boundary: float
    boundary_psi: float
    max_reaction: float
    monotone_ok: bool
    c2g13_ok: bool
    gre0_ok: bool
    gre1_ok: bool
    dissipation_partial: float
    # compared quantities behind the boolean checks
    c2g13_bound: float = float("nan")
    gre0_lhs: float = float("nan")
    gre0_rhs: float = float("nan")
    gre1_nu: float = float("nan")
    gre1_bound: float = float("nan")
    boundary_gap: float = float("nan")

    def as_row(self) -> Dict[str, Any]:
        return {name: getattr(self, name) for name in DIAG_COLUMNS}


def _uD2u_norm(state: GraphState, geometry: GridGeometry, config: "FlowConfig", nodes: np.ndarray) -> np.ndarray:
    """u |D2u| (Frobenius) at the given nodes."""
    domain = config.domain
    d2u = geometry.d2u[nodes]
    if domain.radial and domain.n > 1:
        r = domain.nodes[nodes]
        angular = np.where(r > 0, geometry.du[nodes] / np.where(r > 0, r, 1.0), d2u)
        norm = np.sqrt(d2u ** 2 + (domain.n - 1) * angular ** 2)
    else:
        norm = np.abs(d2u)
    return state.u[nodes] * norm


def estimate_monitors(
    state: GraphState,
    config: "FlowConfig",
    a: Optional[float] = None,
    history: Optional[MonitorHistory] = None,
    geometry: Optional[GridGeometry] = None,
    monotone_ok: bool = True,
    dissipation: float = 0.0,
) -> DiagnosticsRecord:
    """
    Evaluate the a-priori estimate monitors on one state.

    Parameters
    ----------
    state : GraphState
        Admissible state.
    config : FlowConfig
        Run parameters (domain, f, sigma).
    a : float, optional
        Lower offset for the curvature ratio kappa_max / (nu - a). Defaults
        to half the running minimum of nu. Must satisfy 0 < a <= min(nu)/2.
    history : MonitorHistory, optional
        Running extrema over earlier states. When omitted the state is its
        own history.
    geometry : GridGeometry, optional
        Precomputed geometry of ``state``.
    monotone_ok, dissipation : optional
        Running values maintained by the caller, copied into the record.

    Returns
    -------
    DiagnosticsRecord

    Raises
    ------
    ParameterError
        If ``a`` is outside (0, min(nu)/2].
    DomainError
        If an interior node has non-positive principal curvatures.
    """
    domain = config.domain
    sigma = config.sigma
    if geometry is None:
        geometry = grid_geometry(state, domain)
    if history is None:
        history = MonitorHistory.observe(None, state, geometry, config)
    if a is None:
        a = 0.5 * history.min_nu
    elif not 0.0 < a <= 0.5 * float(np.min(geometry.nu)) * (1.0 + 1e-12):
        raise ParameterError(f"a must lie in (0, min(nu)/2], got a={a}")

    interior = domain.interior_mask
    u = state.u
    u_int = u[interior]
    w_int = geometry.w[interior]
    nu_int = geometry.nu[interior]
    kappa_int = geometry.kappa[interior]
    F_int = np.asarray(eval_f(config.fspec, kappa_int))
    g_int = grad_f(config.fspec, kappa_int)
    sum_f = g_int.sum(axis=1)

    ratio_int = kappa_int[:, 0] / (nu_int - a)
    max_ratio = float(np.max(ratio_int))
    boundary_ratio = max(history.max_boundary_ratio, _boundary_ratio(geometry, config, a))
    c2g13_bound = max(4.0 / a ** 3, boundary_ratio) * (1.0 + TOL_RATIO)

    b = domain.boundary_index
    nu_b = geometry.nu[b]
    boundary_psi = float(np.max((sigma - nu_b) / u[b]))
    psi_b_max = max(history.max_boundary_psi, boundary_psi)
    psi_int = (sigma - nu_int) / u_int
    k = int(np.argmax(psi_int))
    triggered = psi_int[k] > psi_b_max
    gre1_bound = sigma / 3.0 - TOL if triggered else 0.0
    gre1_ok = bool(nu_int[k] >= gre1_bound)

    gre0_rhs_nodes = np.maximum(history.max_u / u_int, history.max_boundary_w) + TOL
    margin = gre0_rhs_nodes - w_int
    j = int(np.argmin(margin))

    reaction = (
        np.sum(g_int * kappa_int ** 2, axis=1)
        - nu_int * F_int
        + nu_int ** 2 * sum_f
        + w_int * F_int
        - 2.0 * sum_f
    )

    return DiagnosticsRecord(
        t=state.t,
        min_conv_eig=float(np.min(geometry.conv_min_eig[interior])),
        min_F_minus_sigma=float(np.min(F_int)) - sigma,
        max_F_minus_sigma=float(np.max(F_int)) - sigma,
        max_w_interior=float(np.max(w_int)),
        w_at_boundary_adjacent=float(np.max(geometry.w[domain.adjacent_index])),
        w_at_boundary=float(np.max(geometry.w[b])),
        min_nu_interior=float(np.min(nu_int)),
        max_kappa=float(np.max(kappa_int[:, 0])),
        max_ratio_interior=max_ratio,
        boundary_ratio=boundary_ratio,
        a_used=float(a),
        max_uD2u_boundary=float(np.max(_uD2u_norm(state, geometry, config, domain.adjacent_index))),
        boundary_psi=boundary_psi,
        max_reaction=float(np.max(reaction)),
        monotone_ok=bool(monotone_ok),
        c2g13_ok=bool(max_ratio <= c2g13_bound),
        gre0_ok=bool(margin[j] >= 0),
        gre1_ok=gre1_ok,
        dissipation_partial=float(dissipation),
        c2g13_bound=c2g13_bound,
        gre0_lhs=float(w_int[j]),
        gre0_rhs=float(gre0_rhs_nodes[j]),
        gre1_nu=float(nu_int[k]),
        gre1_bound=gre1_bound,
        boundary_gap=float(np.max(sigma - nu_b)),
    )


class ConservationReport(NamedTuple):
    dissipation: float
    dissipation_half: float
    discrepancy: float
    max_increment: float
    ok: Optional[bool]


def _snapshot_series(trajectory: "Trajectory"):
    times = np.array([s.t for s in trajectory.snapshots])
    rates = np.array([s.rate for s in trajectory.snapshots])
    return times, rates


def dissipation_integral(trajectory: "Trajectory", upto: Optional[float] = None) -> float:
    """
    Max over nodes of the trapezoid integral over [0, T] of (F - sigma) u w,
    sampled at the recorded snapshots. ``upto`` truncates at an earlier time.
    """
    times, rates = _snapshot_series(trajectory)
    if times.size < 2:
        return 0.0
    cumulative = cumulative_trapezoid(rates, times, axis=0, initial=0.0)
    if upto is None:
        return float(np.max(cumulative[-1]))
    per_node = [np.interp(upto, times, cumulative[:, j]) for j in range(cumulative.shape[1])]
    return float(np.max(per_node))


def conservation_check(trajectory: "Trajectory", rel_tol: float = CON2_REL_TOL) -> ConservationReport:
    """
    Compare the node-wise time integral of u_t with u(T) - u(0).

    The check passes when the largest discrepancy is at most
    ``rel_tol`` times the largest increment; ``ok`` is None when fewer than
    two snapshots exist.
    """
    times, rates = _snapshot_series(trajectory)
    if times.size < 2:
        return ConservationReport(0.0, 0.0, float("nan"), float("nan"), None)
    integral = cumulative_trapezoid(rates, times, axis=0)[-1]
    increment = trajectory.snapshots[-1].u - trajectory.snapshots[0].u
    discrepancy = float(np.max(np.abs(integral - increment)))
    max_increment = float(np.max(np.abs(increment)))
    total = dissipation_integral(trajectory)
    half = dissipation_integral(trajectory, upto=0.5 * times[-1])
    ok = discrepancy <= rel_tol * max_increment if max_increment > 0 else discrepancy <= TOL
    return ConservationReport(total, half, discrepancy, max_increment, bool(ok))


def fit_decay_rate(trajectory: "Trajectory") -> Dict[str, float]:
    """
    Exponential fit of max(F - sigma) over recorded steps.

    ``lambda_hat`` is the least-squares slope of log max(F - sigma) against
    t; ``lambda_envelope`` is the smallest rate with
    max(F - sigma)(t) <= max(F - sigma)(0) exp(lambda t) at every record.
    """
    recs = [r for r in trajectory.records if r.max_F_minus_sigma > 0]
    if len(recs) < 2:
        return {"lambda_hat": float("nan"), "lambda_envelope": float("nan")}
    t = np.array([r.t for r in recs])
    logm = np.log([r.max_F_minus_sigma for r in recs])
    slope = float(np.polyfit(t, logm, 1)[0]) if len(recs) >= 3 else float((logm[-1] - logm[0]) / (t[-1] - t[0]))
    later = t > t[0]
    envelope = float(np.max((logm[later] - logm[0]) / (t[later] - t[0]))) if np.any(later) else float("nan")
    return {"lambda_hat": slope, "lambda_envelope": envelope}


@dataclass(frozen=True)
class VerdictRow:
    tag: str
    status: Verdict
    observed: Optional[float]
    bound: Optional[float]
    note: str = ""

    def as_dict(self) -> Dict[str, Any]:
        return {
            "tag": self.tag,
            "status": self.status.value,
            "observed": _finite_or_none(self.observed),
            "bound": _finite_or_none(self.bound),
            "note": self.note,
        }


def _finite_or_none(value: Optional[float]) -> Optional[float]:
    if value is None:
        return None
    value = float(value)
    return value if np.isfinite(value) else None


def _status(ok: Optional[bool]) -> Verdict:
    if ok is None:
        return Verdict.INCONCLUSIVE
    return Verdict.PASS if ok else Verdict.FAIL


def verdict_table(
    trajectory: "Trajectory",
    comparison: Optional["ComparisonVerdict"] = None,
    conservation: Optional[ConservationReport] = None,
) -> List[VerdictRow]:
    """
    One row per monitored estimate, in ``VERDICT_TAGS`` order.

    Each row carries PASS/FAIL/INCONCLUSIVE plus the two numbers compared
    (worst case over the recorded steps).
    """
    config = trajectory.config
    recs = trajectory.records
    rows: Dict[str, VerdictRow] = {}

    if not recs:
        for tag in VERDICT_TAGS:
            rows[tag] = VerdictRow(tag, Verdict.INCONCLUSIVE, None, None, "no recorded steps")
    else:
        min_eig = min(min(r.min_conv_eig for r in recs), trajectory.min_conv_eig)
        rows["Int14"] = VerdictRow("Int14", _status(min_eig > 0), min_eig, 0.0, "min eigenvalue of convexity matrix")

        w_adj = max(r.w_at_boundary_adjacent for r in recs)
        int18_bound = 1.0 / config.sigma + INT18_SLACK
        rows["Int18"] = VerdictRow("Int18", _status(w_adj <= int18_bound), w_adj, int18_bound, "w next to the boundary")

        worst = min(recs, key=lambda r: r.gre0_rhs - r.gre0_lhs)
        rows["Gre0"] = VerdictRow(
            "Gre0", _status(all(r.gre0_ok for r in recs)), worst.gre0_lhs, worst.gre0_rhs, "interior w vs max(sup u/u, sup w on boundary)"
        )

        worst = min(recs, key=lambda r: r.gre1_nu - r.gre1_bound)
        rows["Gre1"] = VerdictRow(
            "Gre1", _status(all(r.gre1_ok for r in recs)), worst.gre1_nu, worst.gre1_bound, "nu at interior max of (sigma - nu)/u"
        )

        gap = max(r.boundary_gap for r in recs)
        if config.domain.radial:
            rows["Gre11"] = VerdictRow("Gre11", _status(gap <= TOL), gap, TOL, "sigma - nu on the boundary")
        else:
            rows["Gre11"] = VerdictRow("Gre11", Verdict.INCONCLUSIVE, gap, TOL, "no ball condition on an interval")

        ud2u = max(r.max_uD2u_boundary for r in recs)
        rows["C2b22"] = VerdictRow("C2b22", _status(ud2u <= UD2U_BOUND), ud2u, UD2U_BOUND, "u|D2u| next to the boundary")

        worst = max(recs, key=lambda r: r.max_ratio_interior / r.c2g13_bound)
        rows["c2g13"] = VerdictRow(
            "c2g13", _status(all(r.c2g13_ok for r in recs)), worst.max_ratio_interior, worst.c2g13_bound, "kappa_max/(nu - a)"
        )

        report = conservation if conservation is not None else conservation_check(trajectory)
        rows["Con2"] = VerdictRow(
            "Con2", _status(report.ok), report.discrepancy, CON2_REL_TOL * report.max_increment, "integral of u_t vs u(T) - u(0)"
        )

    if comparison is None:
        rows["Unf2"] = VerdictRow("Unf2", Verdict.INCONCLUSIVE, None, None, "no comparison run")
    else:
        rows["Unf2"] = VerdictRow("Unf2", comparison.ordering, comparison.min_gap, -comparison.tol_order, comparison.note)

    table = [rows[tag] for tag in VERDICT_TAGS]
    failed = [row.tag for row in table if row.status is Verdict.FAIL]
    if failed:
        logger.warning(f"verdicts failed: {', '.join(failed)}")
    return table


def fitted_constants(trajectory: "Trajectory") -> Dict[str, Optional[float]]:
    """Constants fitted from the records: C_fit for the boundary gradient, decay rates, reaction bound."""
    config = trajectory.config
    out: Dict[str, Optional[float]] = {}
    recs = trajectory.records
    if recs:
        w_adj = max(r.w_at_boundary_adjacent for r in recs)
        out["C_fit"] = (w_adj - 1.0 / config.sigma) / config.epsilon
        out["max_reaction"] = max(r.max_reaction for r in recs)
        out["a_used"] = recs[-1].a_used
    else:
        out["C_fit"] = out["max_reaction"] = out["a_used"] = None
    out.update(fit_decay_rate(trajectory))
    report = conservation_check(trajectory)
    out["dissipation"] = report.dissipation
    out["dissipation_half"] = report.dissipation_half
    return {key: _finite_or_none(value) for key, value in out.items()}


def summarize_statuses(rows: List[VerdictRow]) -> Verdict:
    """FAIL if any row fails, PASS if at least one passes, else INCONCLUSIVE."""
    statuses = {row.status for row in rows}
    if Verdict.FAIL in statuses:
        return Verdict.FAIL
    if Verdict.PASS in statuses:
        return Verdict.PASS
    return Verdict.INCONCLUSIVE


__all__ = [
    "Verdict",
    "MonitorHistory",
    "DiagnosticsRecord",
    "estimate_monitors",
    "ConservationReport",
    "dissipation_integral",
    "conservation_check",
    "fit_decay_rate",
    "VerdictRow",
    "verdict_table",
    "fitted_constants",
    "summarize_statuses",
]
