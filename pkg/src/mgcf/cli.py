"""Command-line entry point: ``mgcf <command> ...``.

Exit codes: 0 when every verdict passes (or is inconclusive), 2 when a
verdict fails, 1 on an execution error, 64 on a usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from typing import List, Optional, Sequence

from . import api
from .config import DEFAULT_SAMPLES, DEFAULT_SEED, IDENTITY_BASE_DT, VERSION
from .operations.continuation import ContinuationResult
from .operations.flow import Trajectory, initial_cap
from .operations.identities import linearized_identity_check
from .operations.monitors import Verdict
from .operations.outputs import _jsonable, build_summary, write_outputs
from .operations.scenario import OutputSpec, Scenario, load_scenario
from .utils.errors import MGCFError, StationaryNotReachedError, _classify_error, _format_error

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAIL = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="mgcf", description="Modified general curvature flow of convex graphs in hyperbolic space")
    parser.add_argument("--version", action="version", version=f"mgcf {VERSION}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="log progress (-vv for debug)")
    parser.add_argument("-q", "--quiet", action="store_true", help="only log errors")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def with_output(p):
        p.add_argument("scenario", help="scenario YAML file")
        p.add_argument("--output-dir", help="override output.directory")
        p.add_argument("--prefix", help="override output.prefix")
        return p

    p = with_output(sub.add_parser("flow", help="run the flow and write diagnostics"))
    p.set_defaults(handler=_cmd_flow)

    p = with_output(sub.add_parser("stationary", help="flow to steady state"))
    p.set_defaults(handler=_cmd_stationary)

    p = with_output(sub.add_parser("continuation", help="stationary solutions for epsilon, epsilon/2, ..."))
    p.add_argument("--levels", type=int, help="override continuation.levels")
    p.add_argument("--max-workers", type=int, help="solve levels in parallel threads")
    p.set_defaults(handler=_cmd_continuation)

    p = sub.add_parser("check-f", help="certify structure conditions of a curvature function")
    p.add_argument("--family", required=True, help="mean, gauss or quotient")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--l", type=int, default=0)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(handler=_cmd_check_f)

    p = sub.add_parser("identities", help="time-refinement study of the evolution identities")
    p.add_argument("scenario", help="scenario YAML file")
    p.add_argument("--base-dt", type=float, default=IDENTITY_BASE_DT)
    p.add_argument("--levels", type=int, default=3)
    p.set_defaults(handler=_cmd_identities)

    p = sub.add_parser("compare", help="comparison principle and uniqueness of limits")
    p.add_argument("scenario_a")
    p.add_argument("scenario_b")
    p.add_argument("--max-workers", type=int)
    p.set_defaults(handler=_cmd_compare)
    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    if args.quiet:
        level = logging.ERROR
    elif args.verbose >= 2:
        level = logging.DEBUG
    elif args.verbose == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _scenario(args: argparse.Namespace) -> Scenario:
    scenario = load_scenario(args.scenario)
    output = OutputSpec(
        directory=args.output_dir if args.output_dir is not None else scenario.output.directory,
        prefix=args.prefix if args.prefix is not None else scenario.output.prefix,
    )
    return dataclasses.replace(scenario, output=output)


def _exit_for(statuses: Sequence[Verdict]) -> int:
    return EXIT_FAIL if Verdict.FAIL in statuses else EXIT_OK


def _print_json(payload: dict) -> None:
    print(json.dumps(_jsonable(payload), indent=2, ensure_ascii=False, allow_nan=False))


def _finish_run(command: str, traj: Trajectory, scenario: Scenario) -> int:
    summary = api.summarize(traj, scenario=scenario, command=command)
    write_outputs(traj, traj.records, summary, scenario.output)
    failed = [row.tag for row in summary.verdicts if row.status is Verdict.FAIL]
    if failed:
        print(f"FAIL: {', '.join(failed)}", file=sys.stderr)
    return _exit_for([row.status for row in summary.verdicts])


def _cmd_flow(args: argparse.Namespace) -> int:
    scenario = _scenario(args)
    return _finish_run("flow", api.simulate(scenario.config), scenario)


def _cmd_stationary(args: argparse.Namespace) -> int:
    scenario = _scenario(args)
    try:
        traj = api.stationary(scenario.config)
    except StationaryNotReachedError as err:
        summary = build_summary("stationary", err.trajectory, scenario=scenario)
        write_outputs(err.trajectory, err.trajectory.records, summary, scenario.output)
        raise
    return _finish_run("stationary", traj, scenario)


def _continuation_block(result: ContinuationResult) -> dict:
    block = result.as_dict()
    block["levels"] = [
        {
            "level": k,
            "epsilon": eps,
            "termination": traj.reason.value,
            "residual": traj.residual,
            "failed": [row.tag for row in api.summarize(traj).verdicts if row.status is Verdict.FAIL],
        }
        for k, (eps, traj) in enumerate(zip(result.epsilons, result.trajectories))
    ]
    return block


def _cmd_continuation(args: argparse.Namespace) -> int:
    scenario = _scenario(args)
    levels = args.levels if args.levels is not None else scenario.levels
    result = api.continuation(scenario.config, levels=levels, max_workers=args.max_workers)
    for k, traj in enumerate(result.trajectories):
        write_outputs(traj, traj.records, None, scenario.output, level=k)
    block = _continuation_block(result)
    finest = result.trajectories[-1]
    summary = build_summary("continuation", finest, scenario=scenario, extra={"continuation": block})
    write_outputs(finest, finest.records, summary, scenario.output)
    statuses: List[Verdict] = [result.verdict]
    if any(level["failed"] for level in block["levels"]):
        statuses.append(Verdict.FAIL)
    return _exit_for(statuses)


def _cmd_check_f(args: argparse.Namespace) -> int:
    report = api.check_f(args.family, n=args.n, l=args.l, samples=args.samples, seed=args.seed)
    _print_json(report.as_dict())
    return _exit_for([report.status])


def _cmd_identities(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    study = api.identities(scenario.config, base_dt=args.base_dt, levels=args.levels)
    payload = study.as_dict()
    payload["linearized"] = linearized_identity_check(initial_cap(scenario.config), scenario.config)
    _print_json(payload)
    return _exit_for([study.verdict])


def _cmd_compare(args: argparse.Namespace) -> int:
    scenario_a = load_scenario(args.scenario_a)
    scenario_b = load_scenario(args.scenario_b)
    traj_a, traj_b, verdict = api.compare(scenario_a.config, scenario_b.config, max_workers=args.max_workers)
    summary = api.summarize(traj_a, scenario=scenario_a, command="compare", comparison=verdict)
    payload = summary.as_dict()
    payload["termination_b"] = traj_b.reason.value
    _print_json(payload)
    return _exit_for([verdict.overall])


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        parser.print_usage(sys.stderr)
        print(err, file=sys.stderr)
        return EXIT_USAGE
    _configure_logging(args)
    try:
        return args.handler(args)
    except (MGCFError, OSError) as err:
        logger.debug(f"{_classify_error(err)} error", exc_info=True)
        print(_format_error(err), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
