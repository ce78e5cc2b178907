import numpy as np
import pytest

from conftest import exact_stationary_state
from mgcf import api
from mgcf.operations.continuation import ContinuationResult, epsilon_continuation
from mgcf.operations.flow import run_stationary
from mgcf.operations.monitors import Verdict
from mgcf.utils.cache import SolutionCache, config_fingerprint, solution_cache
from mgcf.utils.errors import ParameterError


@pytest.fixture
def steady_config(ball_config):
    return ball_config.replace(steady_tol=1e-2, epsilon=4e-3)


def _seed_cache(config, levels):
    for k in range(levels):
        level = config.replace(epsilon=config.epsilon / 2 ** k)
        traj = run_stationary(level, initial=exact_stationary_state(level))
        solution_cache.set(config_fingerprint(level), traj)


def test_continuation_from_cached_levels(steady_config):
    _seed_cache(steady_config, 3)
    result = epsilon_continuation(steady_config, 3)
    assert result.epsilons == [4e-3, 2e-3, 1e-3]
    assert len(result.cauchy) == 2
    assert result.cauchy[1] < result.cauchy[0]
    assert max(result.ratios) <= 10 * min(result.ratios)
    assert result.verdict is Verdict.PASS
    assert np.isfinite(result.C_fit)
    assert len(result.boundary_C) == 3
    assert result.as_dict()["verdict"] == "PASS"


def test_continuation_rejects_levels(steady_config):
    with pytest.raises(ParameterError):
        epsilon_continuation(steady_config, 0)


def test_continuation_verdict_rules(short_run):
    trajectories = [short_run] * 3
    eps = [4e-3, 2e-3, 1e-3]
    growing = ContinuationResult(eps, trajectories, cauchy=[1e-3, 2e-3], boundary_w=[1.7] * 3)
    assert growing.verdict is Verdict.FAIL
    single = ContinuationResult(eps[:1], trajectories[:1], cauchy=[], boundary_w=[1.7])
    assert single.verdict is Verdict.INCONCLUSIVE
    assert np.isnan(single.C_fit)


def test_stationary_uses_cache(steady_config):
    traj = run_stationary(steady_config, initial=exact_stationary_state(steady_config))
    solution_cache.set(config_fingerprint(steady_config), traj)
    assert api.stationary(steady_config) is traj
    api.clear_cache()
    assert len(solution_cache) == 0


def test_fingerprint_and_cache_versioning(ball_config):
    key = config_fingerprint(ball_config)
    assert key == config_fingerprint(ball_config.replace())
    assert key != config_fingerprint(ball_config.replace(epsilon=2e-3))
    cache = SolutionCache()
    cache.set(key, "trajectory", version="0.0.0")
    assert key in cache
    assert cache.get(key) is None
    assert cache.get(key, version="0.0.0") == "trajectory"
    cache.clear()
    assert len(cache) == 0
