"""Command-line entry point.

Subcommands: ``validate`` checks a scenario file and reports every
violation; ``run`` executes one pipeline mode into an output directory;
``report`` runs the baseline/sanctions comparison and prints the damage
report.  Exit codes: 0 success, 2 validation failure, 3 runtime failure.
On failure a machine-readable JSON error record goes to stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .core import SimulationError, ValidationError
from .pipeline import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION, MODES, run_pipeline
from .scenario import ScenarioError, parse_scenario


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sezsim",
        description="Simulate zone enterprises under policy controls and "
                    "sanctions; analyze the correlation structure.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--scenario", required=True, help="scenario file path")
        p.add_argument("--out", default=None, help="output directory "
                       "(overrides the scenario's out_dir)")
        p.add_argument("--seed", type=int, default=None,
                       help="seed override for stochastic channels")

    validate = sub.add_parser("validate", help="check a scenario file")
    validate.add_argument("--scenario", required=True, help="scenario file path")

    run = sub.add_parser("run", help="run one pipeline mode")
    add_common(run)
    run.add_argument("--mode", choices=MODES, default="compare")

    report = sub.add_parser("report", help="run the comparison and print the report")
    add_common(report)
    return parser


def _error_record(exc: Exception, exit_code: int) -> str:
    record = {"error": type(exc).__name__, "exit_code": exit_code,
              "message": str(exc)}
    violations = getattr(exc, "violations", None)
    if violations:
        record["violations"] = list(violations)
    return json.dumps(record)


def _load(args) -> "Scenario":
    scenario = parse_scenario(args.scenario)
    if getattr(args, "seed", None) is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
    return scenario


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            parse_scenario(args.scenario)
            print(f"{args.scenario}: valid")
            return EXIT_OK
        if args.command == "run":
            result = run_pipeline(_load(args), args.mode, out_dir=args.out)
            print(f"{result.mode}: wrote {len(result.manifest)} files to {result.out_dir}")
            return EXIT_OK
        # report
        result = run_pipeline(_load(args), "compare", out_dir=args.out)
        report_path = result.out_dir / "damage_report.txt"
        sys.stdout.write(report_path.read_text(encoding="utf-8"))
        return EXIT_OK
    except (ScenarioError, ValidationError) as exc:
        print(_error_record(exc, EXIT_VALIDATION), file=sys.stderr)
        return EXIT_VALIDATION
    except (SimulationError, OSError) as exc:
        print(_error_record(exc, EXIT_RUNTIME), file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
