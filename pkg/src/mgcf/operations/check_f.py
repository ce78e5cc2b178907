"""Numerical certifier for the structure conditions on the curvature function.

Conditions are checked on seeded log-uniform samples of the positive
cone, preceded by a few fixed anchor points. A failing condition reports
the first offending point in that order together with both sides of the
violated inequality; a passing one reports the point of smallest margin.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from ..config import (
    ANCHOR_POINTS,
    BOUNDARY_PROBE,
    BOUNDARY_TOL,
    DEFAULT_PAIRS,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DELTA_0,
    EPSILON_0,
    HOMOGENEITY_SCALES,
    R_BIG,
    SAMPLE_RANGE,
    SUBLEVEL_MAX_ROUNDS,
)
from ..utils.errors import ParameterError
from ..utils.symfunc import CurvatureFamily, CurvatureFunctionSpec, eval_f, grad_f, parallel_slope
from .monitors import Verdict

logger = logging.getLogger(__name__)

CONDITION_TAGS = ("Int5", "Int6", "Int7", "Int9", "Int10", "Int11", "Int12", "Int13", "Int20")


@dataclass(frozen=True)
class ConeSampler:
    """Log-uniform sampler of the positive cone, one independent draw per component."""

    n: int
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    low: float = SAMPLE_RANGE[0]
    high: float = SAMPLE_RANGE[1]
    pairs: int = DEFAULT_PAIRS

    def __post_init__(self):
        if self.samples < 1:
            raise ParameterError(f"sample set is empty (samples={self.samples})")
        if not 0 < self.low < self.high:
            raise ParameterError(f"sampling range must satisfy 0 < low < high, got ({self.low}, {self.high})")

    def draw(self, rng: np.random.Generator, count: Optional[int] = None) -> np.ndarray:
        count = self.samples if count is None else count
        logs = rng.uniform(np.log(self.low), np.log(self.high), size=(count, self.n))
        return np.exp(logs)

    def anchors(self) -> np.ndarray:
        rows = []
        for point in ANCHOR_POINTS:
            row = list(point[: self.n]) + [1.0] * max(0, self.n - len(point))
            rows.append(row)
        return np.array(rows, dtype=float)


@dataclass
class ConditionResult:
    tag: str
    status: Verdict
    witness: Optional[List[float]] = None
    lhs: Optional[float] = None
    rhs: Optional[float] = None
    checked: int = 0
    note: str = ""
    tight: bool = False

    def as_dict(self) -> dict:
        out = {
            "status": self.status.value,
            "witness": self.witness,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "checked": self.checked,
            "note": self.note,
        }
        if self.tight:
            out["tight"] = True
        return out


@dataclass
class StructureReport:
    spec: CurvatureFunctionSpec
    samples: int
    seed: int
    conditions: Dict[str, ConditionResult] = field(default_factory=dict)
    extras: Dict[str, object] = field(default_factory=dict)

    @property
    def failed(self) -> List[str]:
        return [tag for tag, res in self.conditions.items() if res.status is Verdict.FAIL]

    @property
    def status(self) -> Verdict:
        if self.failed:
            return Verdict.FAIL
        if any(res.status is Verdict.PASS for res in self.conditions.values()):
            return Verdict.PASS
        return Verdict.INCONCLUSIVE

    def as_dict(self) -> dict:
        return {
            "family": self.spec.family.value,
            "label": self.spec.label,
            "n": self.spec.n,
            "l": self.spec.l,
            "samples": self.samples,
            "seed": self.seed,
            "status": self.status.value,
            "conditions": {tag: self.conditions[tag].as_dict() for tag in CONDITION_TAGS},
            **self.extras,
        }


def _judge(tag: str, points: np.ndarray, lhs: np.ndarray, rhs: np.ndarray, ok: np.ndarray, note: str = "") -> ConditionResult:
    """Build a result from per-point sides; ``ok`` marks points where the inequality holds."""
    if points.shape[0] == 0:
        return ConditionResult(tag, Verdict.INCONCLUSIVE, checked=0, note=note or "no points in range")
    if np.all(ok):
        k = int(np.argmin(np.abs(lhs - rhs)))
        status = Verdict.PASS
    else:
        k = int(np.flatnonzero(~ok)[0])
        status = Verdict.FAIL
    return ConditionResult(
        tag,
        status,
        witness=[float(x) for x in points[k]],
        lhs=float(lhs[k]),
        rhs=float(rhs[k]),
        checked=int(points.shape[0]),
        note=note,
    )


def _ball_samples(rng: np.random.Generator, n: int, count: int, radius: float) -> np.ndarray:
    direction = rng.normal(size=(count, n))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    r = radius * rng.uniform(size=(count, 1)) ** (1.0 / n)
    return 1.0 + r * direction


def boundary_probe_value(n: int) -> float:
    """Value given to the vanishing component in the f = 0 on the cone boundary probe."""
    return BOUNDARY_PROBE ** max(1.0, n / 2.0)


def _sublevel_points(
    spec: CurvatureFunctionSpec, sampler: ConeSampler, rng: np.random.Generator, seeded: np.ndarray
) -> np.ndarray:
    """``sampler.samples`` points with 0 < f < 1: ``seeded`` first, then fresh draws."""
    chunks = [seeded]
    found = len(seeded)
    rounds = 0
    while found < sampler.samples and rounds < SUBLEVEL_MAX_ROUNDS:
        batch = sampler.draw(rng)
        fb = np.asarray(eval_f(spec, batch))
        keep = batch[(fb > 0) & (fb < 1)]
        chunks.append(keep)
        found += len(keep)
        rounds += 1
    if found < sampler.samples:
        logger.warning(
            f"{spec.label}: only {found} of {sampler.samples} samples fall in 0 < f < 1 after {rounds} extra draws"
        )
    return np.vstack(chunks)[: sampler.samples]


def check_structure(
    spec: CurvatureFunctionSpec,
    sampler: Optional[ConeSampler] = None,
    r_big: float = R_BIG,
    delta_0: float = DELTA_0,
    epsilon_0: float = EPSILON_0,
) -> StructureReport:
    """
    Certify the structure conditions of f numerically.

    Parameters
    ----------
    spec : CurvatureFunctionSpec
        Curvature function under test.
    sampler : ConeSampler, optional
        Seeded cone sampler; defaults to 10^4 samples with seed 0.
    r_big : float, default 1e6
        Finite stand-in for lambda_n -> infinity in the unboundedness check.
    delta_0, epsilon_0 : float
        Radius of the ball around (1, ..., 1) and the required excess over 1
        (the check demands f >= 1 + epsilon_0/2).

    Returns
    -------
    StructureReport

    Raises
    ------
    ParameterError
        If the sample set is empty or its dimension differs from ``spec.n``.
    """
    sampler = sampler or ConeSampler(n=spec.n)
    if sampler.n != spec.n:
        raise ParameterError(f"sampler dimension {sampler.n} differs from n={spec.n}")
    n = spec.n
    rng = np.random.default_rng(sampler.seed)
    points = np.vstack([sampler.anchors(), sampler.draw(rng)])
    f = np.asarray(eval_f(spec, points))
    g = grad_f(spec, points)
    sum_f = g.sum(axis=1)
    report = StructureReport(spec=spec, samples=sampler.samples, seed=sampler.seed)
    res = report.conditions

    res["Int5"] = _judge("Int5", points, g.min(axis=1), np.zeros(len(points)), g.min(axis=1) > 0, "min_i f_i > 0")

    lam = sampler.draw(rng, sampler.pairs)
    mu = sampler.draw(rng, sampler.pairs)
    mid = np.asarray(eval_f(spec, 0.5 * (lam + mu)))
    avg = 0.5 * (np.asarray(eval_f(spec, lam)) + np.asarray(eval_f(spec, mu)))
    res["Int6"] = _judge("Int6", np.hstack([lam, mu]), mid, avg, mid >= avg - 1e-10, "f((l+m)/2) >= (f(l)+f(m))/2")

    probe = points / points.max(axis=1, keepdims=True)
    probe[np.arange(len(probe)), probe.argmin(axis=1)] = boundary_probe_value(n)
    f_probe = np.asarray(eval_f(spec, probe))
    int7 = _judge("Int7", probe, f_probe, np.full(len(probe), BOUNDARY_TOL), f_probe <= BOUNDARY_TOL, "f -> 0 on the cone boundary")
    if spec.family is CurvatureFamily.MEAN_H1 and n > 1:
        int7.note = "not satisfied: H_1 stays positive on the cone boundary"
    res["Int7"] = int7

    ones = np.ones((1, n))
    f_one = np.atleast_1d(eval_f(spec, ones))
    res["Int9"] = _judge("Int9", ones, f_one, np.ones(1), np.abs(f_one - 1.0) <= 1e-14, "f(1, ..., 1) = 1")

    worst_scale: Optional[ConditionResult] = None
    for s in HOMOGENEITY_SCALES:
        fs = np.asarray(eval_f(spec, s * points))
        cond = _judge("Int10", points, fs, s * f, np.abs(fs - s * f) <= 1e-12 * s * f, f"f(s l) = s f(l), s = {s}")
        if worst_scale is None or (cond.status is Verdict.FAIL and worst_scale.status is not Verdict.FAIL):
            worst_scale = cond
    worst_scale.checked = len(points) * len(HOMOGENEITY_SCALES)
    worst_scale.note = "f(s l) = s f(l)"
    res["Int10"] = worst_scale

    near_one = _ball_samples(rng, n, min(sampler.samples, DEFAULT_PAIRS), delta_0)
    stretched = near_one.copy()
    stretched[:, -1] += r_big
    f_far = np.asarray(eval_f(spec, stretched))
    threshold = np.full(len(near_one), 1.0 + 0.5 * epsilon_0)
    res["Int11"] = _judge(
        "Int11", near_one, f_far, threshold, f_far >= threshold, f"f(l_1, ..., l_n + {r_big:g}) >= 1 + epsilon_0/2 near 1"
    )

    mean = points.mean(axis=1)
    int12 = _judge("Int12", points, f, mean, f <= mean + 1e-12, "f <= (1/n) Sum l_i")
    int12.tight = bool(np.all(np.abs(f - mean) <= 1e-12 * np.maximum(1.0, mean)))
    res["Int12"] = int12

    res["Int13"] = _judge("Int13", points, sum_f, np.ones(len(points)), sum_f >= 1.0 - 1e-10, "Sum f_i >= 1")

    sub = _sublevel_points(spec, sampler, rng, points[(f > 0) & (f < 1)])
    g_sub = grad_f(spec, sub) if len(sub) else np.empty((0, n))
    lhs = g_sub.sum(axis=1)
    rhs = np.sum(sub ** 2 * g_sub, axis=1)
    res["Int20"] = _judge("Int20", sub, lhs, rhs, lhs > rhs, "Sum f_i > Sum l_i^2 f_i where 0 < f < 1")
    if len(sub):
        slope = parallel_slope(spec, sub)
        report.extras["parallel_slope_max"] = float(np.max(slope))
        report.extras["parallel_slope_negative"] = bool(np.all(slope < 0))

    if report.failed:
        logger.info(f"{spec.label}: conditions failed: {', '.join(report.failed)}")
    return report
