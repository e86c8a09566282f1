"""Command-line front end: validate scenarios, run them, summarize traces.

Exit codes: 0 on success, 1 on scenario validation errors, 2 on runtime
failures (plant divergence, solver failure, I/O problems).
"""

import argparse
import sys
from pathlib import Path

from .controller import ControllerError
from .mpc import QpSolveError
from .plants import PlantError
from .scenario import (
    ScenarioError,
    compute_metrics,
    format_metrics,
    load_scenario,
    metrics_from_table,
    read_trace_csv,
    write_trace_csv,
)
from .simulate import SimulationError, run_closed_loop


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="pcac",
        description="Adaptive receding-horizon autopilot scenarios",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario and write its trace")
    run_p.add_argument("--scenario", required=True, help="scenario YAML file")
    run_p.add_argument("--out", required=True, help="output directory for the trace")
    run_p.add_argument("--steps", type=int, default=None, help="override step count")
    run_p.add_argument("--seed", type=int, default=None, help="override the base seed")

    val_p = sub.add_parser("validate", help="check a scenario file")
    val_p.add_argument("--scenario", required=True, help="scenario YAML file")

    met_p = sub.add_parser("metrics", help="summarize a trace CSV")
    met_p.add_argument("--trace", required=True, help="trace CSV file")
    return parser


def _load(path):
    try:
        return load_scenario(path), None
    except FileNotFoundError:
        return None, [f"scenario file not found: {path}"]
    except ScenarioError as exc:
        return None, exc.errors


def _cmd_validate(args):
    scenario, errors = _load(args.scenario)
    if errors:
        for line in errors:
            print(f"error: {line}", file=sys.stderr)
        return 1
    print(f"scenario '{scenario.name}' is valid "
          f"({scenario.steps} steps, {len(scenario.loops)} loop(s))")
    return 0


def _cmd_run(args):
    scenario, errors = _load(args.scenario)
    if errors:
        for line in errors:
            print(f"error: {line}", file=sys.stderr)
        return 1
    if args.steps is not None:
        if args.steps < 1:
            print("error: --steps must be >= 1", file=sys.stderr)
            return 1
        scenario.steps = args.steps
    if args.seed is not None:
        scenario.seed = args.seed
    try:
        plant = scenario.build_plant()
        controllers = scenario.build_controllers()
        command_fns = scenario.build_command_fns()
        trace = run_closed_loop(
            plant,
            controllers,
            command_fns,
            sample_time=scenario.sample_time,
            steps=scenario.steps,
            substeps=scenario.integrator_substeps,
            held_inputs=scenario.plant.held_inputs,
            scenario_name=scenario.name,
        )
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        trace_path = out_dir / f"{scenario.name}.csv"
        trace_path.write_text(write_trace_csv(trace), encoding="utf-8")
        metrics = compute_metrics(trace)
        metrics_text = format_metrics(metrics)
        (out_dir / f"{scenario.name}_metrics.txt").write_text(
            metrics_text, encoding="utf-8"
        )
    except (SimulationError, ControllerError, PlantError, QpSolveError, OSError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    print(f"trace written to {trace_path}")
    print(metrics_text, end="")
    return 0


def _cmd_metrics(args):
    try:
        text = Path(args.trace).read_text(encoding="utf-8")
        table = read_trace_csv(text)
        metrics = metrics_from_table(table)
    except FileNotFoundError:
        print(f"error: trace file not found: {args.trace}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(format_metrics(metrics), end="")
    return 0


def main(argv=None):
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "validate":
        return _cmd_validate(args)
    return _cmd_metrics(args)


def run_main():
    raise SystemExit(main())


if __name__ == "__main__":
    run_main()
