"""YAML scenario files: parsing with defaults, validation and echo.

A scenario has the sections ``domain``, ``curvature``, ``flow``,
``continuation`` and ``output``; every key is optional except
``flow.sigma``. Unknown sections or keys are rejected with their line
number.
"""

from __future__ import annotations

import copy
import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

from ruamel.yaml import YAML
from ruamel.yaml.comments import CommentedMap
from ruamel.yaml.error import MarkedYAMLError, YAMLError

from ..config import DEFAULT_SCENARIO
from ..utils.errors import ParameterError, ScenarioError
from ..utils.graphgeom import DomainDescriptor
from ..utils.symfunc import CurvatureFunctionSpec
from .flow import FlowConfig

logger = logging.getLogger(__name__)

_INT_KEYS = {("domain", "n"), ("domain", "nodes"), ("curvature", "l"), ("flow", "diag_stride"), ("continuation", "levels")}
_STR_KEYS = {("domain", "kind"), ("curvature", "family"), ("output", "directory"), ("output", "prefix")}


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "."
    prefix: str = "run"

    @property
    def path(self) -> Path:
        return Path(self.directory)


@dataclass(frozen=True)
class Scenario:
    """A validated scenario: flow configuration plus run plumbing."""

    config: FlowConfig
    levels: int = 3
    output: OutputSpec = OutputSpec()
    source: Optional[str] = None


def _line_of(mapping: Any, key: str) -> Optional[int]:
    if isinstance(mapping, CommentedMap):
        try:
            return mapping.lc.key(key)[0] + 1
        except (KeyError, AttributeError, TypeError):
            return None
    return None


def _coerce(section: str, key: str, value: Any, line: Optional[int]) -> Any:
    path = f"{section}.{key}"
    if (section, key) in _STR_KEYS:
        if not isinstance(value, str):
            raise ScenarioError(f"expected a string, got {value!r}", key=path, line=line)
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"expected a number, got {value!r}", key=path, line=line)
    if (section, key) in _INT_KEYS:
        if int(value) != value:
            raise ScenarioError(f"expected an integer, got {value!r}", key=path, line=line)
        return int(value)
    return float(value)


def _merge(data: Any) -> Dict[str, Dict[str, Any]]:
    merged = copy.deepcopy(DEFAULT_SCENARIO)
    if data is None:
        return merged
    if not isinstance(data, dict):
        raise ScenarioError("scenario root must be a mapping of sections")
    for section, body in data.items():
        line = _line_of(data, section)
        if section not in merged:
            raise ScenarioError(f"unknown section; expected one of {sorted(merged)}", key=str(section), line=line)
        if body is None:
            continue
        if not isinstance(body, dict):
            raise ScenarioError("section must be a mapping", key=str(section), line=line)
        for key, value in body.items():
            key_line = _line_of(body, key)
            if key not in merged[section]:
                raise ScenarioError(
                    f"unknown key; expected one of {sorted(merged[section])}", key=f"{section}.{key}", line=key_line
                )
            if value is None:
                continue
            merged[section][key] = _coerce(section, key, value, key_line)
    return merged


def scenario_from_dict(data: Any, source: Optional[str] = None) -> Scenario:
    """Validate a (possibly partial) scenario mapping and fill defaults."""
    merged = _merge(data)
    flow = merged["flow"]
    dom = merged["domain"]
    if flow["sigma"] is None:
        raise ScenarioError("flow.sigma is required", key="flow.sigma", line=_line_of(data, "flow"))
    sigma = flow["sigma"]
    if not 0.0 < sigma < 1.0:
        raise ScenarioError("sigma must lie in (0,1)", key="flow.sigma", line=_key_line(data, "flow", "sigma"))
    sigma_init = flow["sigma_init"] if flow["sigma_init"] is not None else 0.5 * (1.0 + sigma)
    if sigma_init <= sigma:
        raise ScenarioError(
            "sigma_init must exceed sigma: the initial surface needs f(kappa) > sigma",
            key="flow.sigma_init",
            line=_key_line(data, "flow", "sigma_init"),
        )
    epsilon = flow["epsilon"] if flow["epsilon"] is not None else 1e-3 * dom["extent"]

    try:
        domain = DomainDescriptor(kind=dom["kind"], n=dom["n"], extent=dom["extent"], node_count=dom["nodes"])
        curv = merged["curvature"]
        fspec = CurvatureFunctionSpec(family=curv["family"], n=domain.n, l=curv["l"])
        config = FlowConfig(
            domain=domain,
            fspec=fspec,
            sigma=sigma,
            epsilon=epsilon,
            sigma_init=sigma_init,
            cfl_safety=flow["cfl_safety"],
            t_max=flow["t_max"],
            steady_tol=flow["steady_tol"],
            diag_stride=flow["diag_stride"],
        )
    except ScenarioError:
        raise
    except ParameterError as err:
        raise ScenarioError(str(err)) from err

    levels = merged["continuation"]["levels"]
    if levels < 1:
        raise ScenarioError(
            f"levels must be >= 1, got {levels}", key="continuation.levels", line=_key_line(data, "continuation", "levels")
        )
    out = merged["output"]
    return Scenario(config=config, levels=levels, output=OutputSpec(out["directory"], out["prefix"]), source=source)


def _key_line(data: Any, section: str, key: str) -> Optional[int]:
    if isinstance(data, dict) and isinstance(data.get(section), dict):
        return _line_of(data[section], key)
    return None


def load_scenario_text(text: str, source: Optional[str] = None) -> Scenario:
    yaml = YAML(typ="rt")
    try:
        data = yaml.load(text)
    except MarkedYAMLError as err:
        line = err.problem_mark.line + 1 if err.problem_mark is not None else None
        raise ScenarioError(f"malformed scenario: {err.problem}", line=line) from err
    except YAMLError as err:
        raise ScenarioError(f"malformed scenario: {err}") from err
    return scenario_from_dict(data, source=source)


def load_scenario(path: Union[str, Path]) -> Scenario:
    """
    Read and validate a scenario file.

    Raises
    ------
    ScenarioError
        On malformed YAML, unknown keys or out-of-range values; the key
        path and line number are included when known.
    OSError
        If the file cannot be read.
    """
    path = Path(path)
    scenario = load_scenario_text(path.read_text(encoding="utf-8"), source=str(path))
    logger.info(f"loaded scenario {path}")
    return scenario


def parse_scenario(path: Union[str, Path]) -> FlowConfig:
    """Validated FlowConfig of a scenario file (defaults filled)."""
    return load_scenario(path).config


def scenario_dict(scenario: Union[Scenario, FlowConfig]) -> Dict[str, Dict[str, Any]]:
    """Fully defaulted scenario mapping, as echoed into run summaries."""
    if isinstance(scenario, FlowConfig):
        scenario = Scenario(config=scenario)
    c = scenario.config
    return {
        "domain": {"kind": c.domain.kind.value, "n": c.domain.n, "extent": c.domain.extent, "nodes": c.domain.node_count},
        "curvature": {"family": c.fspec.family.value, "l": c.fspec.l},
        "flow": {
            "sigma": c.sigma,
            "sigma_init": c.sigma_init,
            "epsilon": c.epsilon,
            "cfl_safety": c.cfl_safety,
            "t_max": c.t_max,
            "steady_tol": c.steady_tol,
            "diag_stride": c.diag_stride,
        },
        "continuation": {"levels": scenario.levels},
        "output": {"directory": scenario.output.directory, "prefix": scenario.output.prefix},
    }


def dump_scenario(scenario: Union[Scenario, FlowConfig], path: Optional[Union[str, Path]] = None) -> str:
    """YAML text of the echoed scenario; written to ``path`` when given."""
    doc = CommentedMap()
    for section, body in scenario_dict(scenario).items():
        doc[section] = CommentedMap(body)
    yaml = YAML(typ="rt")
    yaml.default_flow_style = False
    buf = io.StringIO()
    yaml.dump(doc, buf)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
