import pytest

from mgcf import api
from mgcf.operations.scenario import dump_scenario, load_scenario, load_scenario_text, parse_scenario
from mgcf.utils.errors import ScenarioError
from mgcf.utils.graphgeom import DomainKind
from mgcf.utils.symfunc import CurvatureFamily


def test_minimal_scenario_fills_defaults():
    scenario = load_scenario_text("flow:\n  sigma: 0.6\n")
    config = scenario.config
    assert config.domain.kind is DomainKind.RADIAL_BALL
    assert config.domain.extent == 1.0
    assert config.domain.n == 2
    assert config.domain.node_count == 400
    assert config.fspec.family is CurvatureFamily.GAUSS_ROOT
    assert config.epsilon == pytest.approx(1e-3)
    assert config.sigma_init == pytest.approx(0.8)
    assert config.t_max == 200.0
    assert scenario.levels == 3
    assert scenario.output.prefix == "run"


def test_sigma_out_of_range():
    with pytest.raises(ScenarioError, match=r"sigma must lie in \(0,1\)") as excinfo:
        load_scenario_text("flow:\n  sigma: 1.2\n")
    assert excinfo.value.key == "flow.sigma"
    assert excinfo.value.line == 2


def test_sigma_init_must_exceed_sigma():
    with pytest.raises(ScenarioError, match="f\\(kappa\\) > sigma") as excinfo:
        load_scenario_text("flow:\n  sigma: 0.6\n  sigma_init: 0.5\n")
    assert excinfo.value.line == 3


def test_missing_sigma():
    with pytest.raises(ScenarioError, match="flow.sigma is required"):
        load_scenario_text("domain:\n  nodes: 100\n")


def test_unknown_key_reports_line():
    text = "domain:\n  nodes: 100\nflow:\n  sigma: 0.6\n  dt: 0.1\n"
    with pytest.raises(ScenarioError) as excinfo:
        load_scenario_text(text)
    assert excinfo.value.key == "flow.dt"
    assert excinfo.value.line == 5
    assert "line 5" in str(excinfo.value)


def test_unknown_section():
    with pytest.raises(ScenarioError) as excinfo:
        load_scenario_text("flow:\n  sigma: 0.6\nsolver:\n  kind: implicit\n")
    assert excinfo.value.key == "solver"
    assert excinfo.value.line == 3


@pytest.mark.parametrize(
    "text",
    [
        "flow: [sigma\n",
        "flow:\n  sigma: high\n",
        "domain:\n  nodes: 10.5\nflow:\n  sigma: 0.6\n",
        "domain:\n  kind: torus\nflow:\n  sigma: 0.6\n",
        "flow:\n  sigma: 0.6\ncontinuation:\n  levels: 0\n",
    ],
)
def test_invalid_documents(text):
    with pytest.raises(ScenarioError):
        load_scenario_text(text)


def test_interval_scenario():
    text = "domain:\n  kind: interval\n  n: 1\n  extent: 2.0\ncurvature:\n  family: mean\nflow:\n  sigma: 0.5\n"
    config = load_scenario_text(text).config
    assert config.domain.kind is DomainKind.INTERVAL_1D
    assert config.fspec.n == 1
    assert config.epsilon == pytest.approx(2e-3)


def test_dump_and_parse_round_trip(tmp_path):
    config = api.flow_config(0.6, nodes=64, family="quotient", n=3, l=1, steady_tol=1e-9, t_max=12.5)
    path = tmp_path / "scenario.yaml"
    text = dump_scenario(config, path)
    assert "sigma: 0.6" in text
    assert parse_scenario(path) == config


def test_load_scenario_records_source(tmp_path):
    path = tmp_path / "ball.yaml"
    path.write_text("flow:\n  sigma: 0.6\noutput:\n  prefix: ball\n", encoding="utf-8")
    scenario = load_scenario(path)
    assert scenario.source == str(path)
    assert scenario.output.prefix == "ball"


def test_flow_config_rejects_unknown_options():
    with pytest.raises(TypeError):
        api.flow_config(0.6, nodes=64, solver="implicit")
