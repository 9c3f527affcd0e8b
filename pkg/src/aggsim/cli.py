"""Command-line entry point: scenario runs, policy comparison, seed sweeps.

Exit codes: 0 success, 1 configuration problem, 2 runtime invariant failure.
"""

from __future__ import annotations

import argparse
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import engine, report, traffic
from .config import ParseError, Scenario, ValidationError, load_scenario
from .engine import MetricsReport, SimInvariantError
from .scheduler import Policy

_POLICY_FLAGS = {p.value: p for p in Policy}
COMPARE_ORDER = (Policy.DUAL_STAGE, Policy.FIFO_NO_AGG, Policy.GREEDY_AMPDU)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aggsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run one scenario and emit a report")
    run_p.add_argument("--config", required=True, help="scenario file path")
    run_p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run_p.add_argument(
        "--scheduler",
        choices=sorted(_POLICY_FLAGS),
        default=None,
        help="override the scheduler policy",
    )
    run_p.add_argument("--duration-ms", type=int, default=None, help="override run duration")
    run_p.add_argument("--format", choices=("csv", "json"), default="csv")
    run_p.add_argument("--out", default=None, help="output path (default: stdout)")
    mode = run_p.add_mutually_exclusive_group()
    mode.add_argument(
        "--compare",
        action="store_true",
        help="run all three policies over one shared arrival trace",
    )
    mode.add_argument(
        "--sweep",
        default=None,
        metavar="seed=A..B",
        help="run an inclusive seed range and aggregate mean/stddev",
    )
    return parser


def _parse_sweep(spec: str) -> range:
    match = re.fullmatch(r"seed=(\d+)\.\.(\d+)", spec)
    if match is None:
        raise ValidationError("sweep", f"expected seed=A..B, got {spec!r}")
    lo, hi = int(match.group(1)), int(match.group(2))
    if hi < lo:
        raise ValidationError("sweep", "range end precedes start")
    return range(lo, hi + 1)


def _apply_overrides(scenario: Scenario, args) -> Scenario:
    if args.seed is not None:
        scenario.seed = args.seed
    if args.duration_ms is not None:
        scenario.duration_us = args.duration_ms * 1000
    if args.scheduler is not None:
        scenario.scheduler.policy = _POLICY_FLAGS[args.scheduler]
    scenario.validate()
    return scenario


def run_compare(scenario: Scenario) -> list[MetricsReport]:
    """One run per policy, replaying a single pregenerated arrival trace."""
    trace = traffic.build_trace(scenario.flows, scenario.duration_us, scenario.seed)
    return [engine.run(scenario, policy=policy, trace=trace) for policy in COMPARE_ORDER]


def _sweep_worker(job) -> MetricsReport:
    scenario, seed = job
    return engine.run(scenario, seed=seed)


def run_sweep(scenario: Scenario, seeds: range) -> list[MetricsReport]:
    """Independent runs, one per seed; engines share no state so they may fan out."""
    jobs = [(scenario, seed) for seed in seeds]
    if len(jobs) > 1:
        try:
            with ProcessPoolExecutor() as pool:
                results = list(pool.map(_sweep_worker, jobs))
        except (OSError, RuntimeError):
            results = [_sweep_worker(job) for job in jobs]
    else:
        results = [_sweep_worker(job) for job in jobs]
    return sorted(results, key=lambda r: r.seed)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_run(args) -> int:
    try:
        scenario = _apply_overrides(load_scenario(args.config), args)
    except (ParseError, ValidationError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.compare:
            reports = run_compare(scenario)
            text = (
                report.render_csv(reports)
                if args.format == "csv"
                else report.render_json(reports, scenario)
            )
        elif args.sweep is not None:
            seeds = _parse_sweep(args.sweep)
            reports = run_sweep(scenario, seeds)
            text = (
                report.render_sweep_csv(reports)
                if args.format == "csv"
                else report.render_json(reports, scenario)
            )
        else:
            result = engine.run(scenario)
            text = (
                report.render_csv([result])
                if args.format == "csv"
                else report.render_json([result], scenario)
            )
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (SimInvariantError, AssertionError) as exc:
        print(f"runtime invariant failure: {exc}", file=sys.stderr)
        return 2

    _emit(text, args.out)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    return 1


if __name__ == "__main__":
    sys.exit(main())
