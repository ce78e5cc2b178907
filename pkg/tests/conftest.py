import numpy as np
import pytest

from mgcf.operations.flow import FlowConfig, run_flow
from mgcf.utils.cache import solution_cache
from mgcf.utils.graphgeom import DomainDescriptor, GraphState, lifted_cap_profile
from mgcf.utils.symfunc import CurvatureFunctionSpec

SIGMA = 0.6
SIGMA_INIT = 0.8
EPSILON = 1e-3


@pytest.fixture(autouse=True)
def _empty_solution_cache():
    solution_cache.clear()
    yield
    solution_cache.clear()


@pytest.fixture
def ball_domain():
    return DomainDescriptor(kind="ball", n=2, extent=1.0, node_count=48)


@pytest.fixture
def ball_config(ball_domain):
    return FlowConfig(
        domain=ball_domain,
        fspec=CurvatureFunctionSpec("gauss", 2),
        sigma=SIGMA,
        epsilon=EPSILON,
        sigma_init=SIGMA_INIT,
        t_max=0.05,
        diag_stride=5,
    )


@pytest.fixture
def interval_config():
    return FlowConfig(
        domain=DomainDescriptor(kind="interval", n=1, extent=1.0, node_count=48),
        fspec=CurvatureFunctionSpec("mean", 1),
        sigma=SIGMA,
        epsilon=EPSILON,
        sigma_init=SIGMA_INIT,
        t_max=0.05,
        diag_stride=5,
    )


@pytest.fixture
def short_run(ball_config):
    return run_flow(ball_config)


def exact_stationary_state(config):
    domain = config.domain
    u = lifted_cap_profile(domain.extent, config.sigma, config.epsilon, domain.nodes)
    u[domain.boundary_index] = config.epsilon
    return GraphState(u=u, t=0.0, epsilon=config.epsilon)


def write_scenario(path, sigma=0.6, nodes=48, t_max=0.02, diag_stride=1, extra=""):
    path.write_text(
        "domain:\n"
        "  kind: ball\n"
        "  n: 2\n"
        f"  nodes: {nodes}\n"
        "flow:\n"
        f"  sigma: {sigma}\n"
        f"  t_max: {t_max}\n"
        f"  diag_stride: {diag_stride}\n" + extra,
        encoding="utf-8",
    )
    return path


def random_admissible(rng, n, size):
    return np.exp(rng.uniform(np.log(0.05), np.log(20.0), size=(size, n)))
