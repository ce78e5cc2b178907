import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import exact_stationary_state
from mgcf.operations.flow import (
    FlowConfig,
    TerminationReason,
    flow_rhs,
    initial_cap,
    linearized_coefficients,
    run_flow,
    run_stationary,
    solve_stationary,
    stable_dt,
    step_explicit,
    _evaluate,
)
from mgcf.utils.errors import (
    AdmissibilityError,
    ConfigurationError,
    ParameterError,
    StationaryNotReachedError,
)
from mgcf.utils.graphgeom import DomainDescriptor, GraphState, grid_geometry
from mgcf.utils.symfunc import CurvatureFunctionSpec, eval_f, grad_f


@pytest.mark.parametrize(
    "changes,match",
    [
        ({"sigma": 1.2}, "sigma must lie in"),
        ({"sigma_init": 0.5}, "sigma_init"),
        ({"epsilon": 0.2}, "epsilon"),
        ({"cfl_safety": 0.0}, "cfl_safety"),
        ({"t_max": -1.0}, "t_max"),
        ({"steady_tol": 0.0}, "steady_tol"),
        ({"diag_stride": 0}, "diag_stride"),
        ({"fspec": CurvatureFunctionSpec("gauss", 3)}, "n=3"),
    ],
)
def test_config_validation(ball_config, changes, match):
    with pytest.raises(ConfigurationError, match=match):
        ball_config.replace(**changes)


def test_initial_cap(ball_config):
    state = initial_cap(ball_config)
    assert state.u[0] == pytest.approx((1 - 0.8) / 0.6 + 1e-3, rel=1e-12)
    assert state.u[-1] == ball_config.epsilon
    assert state.t == 0.0


def test_initial_cap_curvature(ball_config):
    # a vertical lift of the sigma_init cap stays umbilic with kappa = sigma_init - epsilon/R_e'
    domain = DomainDescriptor("ball", n=2, extent=1.0, node_count=64)
    config = ball_config.replace(domain=domain)
    state = initial_cap(config)
    F = eval_f(config.fspec, grid_geometry(state, domain).kappa[domain.interior_mask])
    expected = 0.8 - 1e-3 * 0.6
    assert np.max(np.abs(F - expected)) <= 1e-3


def test_horosphere_rate():
    config = FlowConfig(
        domain=DomainDescriptor("interval", n=1, extent=10.0, node_count=32),
        fspec=CurvatureFunctionSpec("mean", 1),
        sigma=0.6,
        epsilon=0.5,
        sigma_init=0.8,
    )
    rate = flow_rhs(GraphState(u=np.full(32, 0.5), epsilon=0.5), config)
    assert_allclose(rate[1:-1], 0.2, rtol=1e-12)
    assert rate[0] == rate[-1] == 0.0


def test_flow_rhs_rejects_nonconvex_state(ball_config):
    r = ball_config.domain.nodes
    u = ball_config.epsilon + 3.0 * (1.0 - r ** 2)
    with pytest.raises(AdmissibilityError) as excinfo:
        flow_rhs(GraphState(u=u, epsilon=ball_config.epsilon), ball_config)
    assert excinfo.value.min_eig < 0
    assert ball_config.domain.interior_mask[excinfo.value.node]


def test_step_is_monotone_and_admissible(ball_config):
    state = initial_cap(ball_config)
    evaluation = _evaluate(state, ball_config)
    new_state, dt = step_explicit(state, ball_config)
    assert dt == pytest.approx(stable_dt(state, evaluation, ball_config))
    assert new_state.t == pytest.approx(dt)
    assert np.all(new_state.u >= state.u)
    assert new_state.u[-1] == ball_config.epsilon
    assert np.all(grid_geometry(new_state, ball_config.domain).conv_min_eig[:-1] > 0)


def test_linearized_coefficients_at_node(ball_config):
    state = initial_cap(ball_config)
    coeffs = linearized_coefficients(state, ball_config, 10)
    w = grid_geometry(state, ball_config.domain).w[10]
    assert coeffs.G_t == pytest.approx(1.0 / (state.u[10] * w))
    assert np.all(np.linalg.eigvalsh(coeffs.G_kl) < 0)
    with pytest.raises(ParameterError):
        linearized_coefficients(state, ball_config, ball_config.domain.node_count - 1)


def test_run_reaches_t_max(short_run, ball_config):
    traj = short_run
    assert traj.reason is TerminationReason.T_MAX_REACHED
    assert traj.final.t == ball_config.t_max
    assert traj.steps > 0
    assert traj.monotone_ok
    assert traj.min_conv_eig > 0
    assert traj.min_F_minus_sigma > 0
    assert traj.dissipation > 0
    assert len(traj.records) == len(traj.snapshots)
    assert traj.snapshots[0].step == 0 and traj.snapshots[0].t == 0.0
    assert traj.snapshots[-1].step == traj.steps
    assert np.all(np.diff(traj.times) > 0)
    assert all(rec.min_conv_eig > 0 and rec.min_F_minus_sigma > 0 for rec in traj.records)


def test_zero_t_max_gives_empty_trajectory(ball_config):
    traj = run_flow(ball_config.replace(t_max=0.0))
    assert traj.reason is TerminationReason.T_MAX_REACHED
    assert traj.steps == 0
    assert traj.records == [] and traj.snapshots == []


def test_nonconvex_start_stops_with_admissibility_lost(ball_config):
    r = ball_config.domain.nodes
    u = ball_config.epsilon + 3.0 * (1.0 - r ** 2)
    traj = run_flow(ball_config, initial=GraphState(u=u, epsilon=ball_config.epsilon))
    assert traj.reason is TerminationReason.ADMISSIBILITY_LOST
    assert traj.steps == 0


def test_stationary_start_is_steady(ball_config):
    config = ball_config.replace(steady_tol=1e-2)
    start = exact_stationary_state(config)
    traj = run_stationary(config, initial=start)
    assert traj.reason is TerminationReason.STEADY
    assert traj.steps == 0
    assert len(traj.records) == 1
    assert traj.residual <= 1e-2
    assert_allclose(solve_stationary(config, initial=start).u, start.u)


def test_run_stationary_attaches_trajectory(ball_config):
    with pytest.raises(StationaryNotReachedError) as excinfo:
        run_stationary(ball_config.replace(t_max=0.01))
    assert excinfo.value.trajectory.reason is TerminationReason.T_MAX_REACHED


def test_interval_run(interval_config):
    traj = run_flow(interval_config)
    assert traj.reason is TerminationReason.T_MAX_REACHED
    assert traj.monotone_ok
    u = traj.final.u
    assert_allclose(u, u[::-1], atol=1e-12)
    assert u[0] == u[-1] == interval_config.epsilon


@pytest.mark.parametrize(
    "kind,n,family,l",
    [("ball", 2, "gauss", 0), ("ball", 2, "mean", 0), ("ball", 3, "quotient", 1), ("ball", 3, "quotient", 2), ("interval", 1, "mean", 0)],
)
def test_evaluation_matches_matrix_path(kind, n, family, l):
    domain = DomainDescriptor(kind, n=n, extent=1.0, node_count=48)
    config = FlowConfig(domain, CurvatureFunctionSpec(family, n, l), sigma=0.6, epsilon=1e-3, sigma_init=0.8)
    state = initial_cap(config)
    evaluation = _evaluate(state, config)
    interior = domain.interior_mask
    geometry = grid_geometry(state, domain)
    F = eval_f(config.fspec, geometry.kappa[interior])
    sum_f = grad_f(config.fspec, geometry.kappa[interior]).sum(axis=1)
    assert_allclose(evaluation.F[interior], F, rtol=1e-12)
    assert_allclose(evaluation.sum_f[interior], sum_f, rtol=1e-12)
    assert_allclose(evaluation.rate[interior], (F - 0.6) * state.u[interior] * geometry.w[interior], rtol=1e-11)
    assert evaluation.residual == pytest.approx(np.max(np.abs(F - 0.6)), rel=1e-12)
    assert_allclose(evaluation.geometry.kappa, geometry.kappa)


def test_stable_dt_uses_sum_of_derivatives(ball_config):
    state = initial_cap(ball_config)
    interior = ball_config.domain.interior_mask
    geometry = grid_geometry(state, ball_config.domain)
    sum_f = grad_f(ball_config.fspec, geometry.kappa[interior]).sum(axis=1)
    expected = 0.2 * ball_config.domain.h ** 2 / np.max(state.u[interior] ** 2 * sum_f / geometry.w[interior])
    assert stable_dt(state, _evaluate(state, ball_config), ball_config) == pytest.approx(expected, rel=1e-12)


def test_step_is_forward_euler(ball_config):
    state = initial_cap(ball_config)
    rate = flow_rhs(state, ball_config)
    new_state, dt = step_explicit(state, ball_config)
    expected = state.u + dt * rate
    expected[-1] = ball_config.epsilon
    assert_allclose(new_state.u, expected, rtol=1e-14, atol=1e-16)


def test_initial_epsilon_must_match_config(ball_config):
    start = exact_stationary_state(ball_config.replace(epsilon=2e-3))
    with pytest.raises(ConfigurationError, match="epsilon"):
        run_flow(ball_config, initial=start)


def test_rate_on_exact_cap_is_second_order(ball_config):
    hs, errors = [], []
    for nodes in (100, 200, 400):
        config = ball_config.replace(domain=DomainDescriptor("ball", n=2, extent=1.0, node_count=nodes))
        rate = flow_rhs(exact_stationary_state(config), config)
        hs.append(config.domain.h)
        errors.append(np.max(np.abs(rate)))
    order = np.polyfit(np.log(hs), np.log(errors), 1)[0]
    assert order >= 1.9
