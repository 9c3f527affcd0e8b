#!/usr/bin/env python3
"""Run every shipped scenario under all three policies and print the CSVs.

Usage: python scripts/compare_policies.py [--scenario-dir DIR] [--seed N]
"""

import argparse
import sys
from pathlib import Path

from aggsim import report
from aggsim.cli import run_compare
from aggsim.config import load_scenario


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--scenario-dir",
        type=Path,
        default=Path(__file__).parent.parent / "scenarios",
    )
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args()

    paths = sorted(args.scenario_dir.glob("*.cfg"))
    if not paths:
        print(f"no scenarios under {args.scenario_dir}", file=sys.stderr)
        return 1
    for path in paths:
        scenario = load_scenario(path)
        if args.seed is not None:
            scenario.seed = args.seed
        print(f"# {scenario.name} ({path.name}), seed {scenario.seed}")
        print(report.render_csv(run_compare(scenario)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
