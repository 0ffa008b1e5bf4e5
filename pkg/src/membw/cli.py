"""Command-line front end.

Subcommands: analyze-static, analyze-dynamic, dump-curve, oracle, experiment.
Scenario-driven subcommands read a JSON scenario file and print JSON (plus
optional CSV detail rows); experiment prints CSV. Validation problems exit
with code 2 and a diagnostic naming the violated invariant.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .dynamic_analysis import analyze_dynamic, distribute_memory, stall_breakdown
from .errors import MembwError
from .ima import preset_sweep, rows_to_csv, run_sweep
from .oracles import oracle_distribute
from .schedule import Scenario, load_scenario, split_span
from .static_analysis import analyze_static
from .stall_curve import build_raw_points, curve_for_core


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="membw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_command(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scenario", required=True, help="path to a JSON scenario file")
        p.add_argument("--core", type=int, default=None, help="analyzed core (default: the only workload's core)")
        return p

    p = scenario_command("analyze-static", "span analysis under the scenario's single budget vector")
    p.add_argument("--trace", action="store_true", help="also print the iteration trace as CSV rows k,W,S")

    p = scenario_command("analyze-dynamic", "span analysis across the scenario's memory schedule")
    p.add_argument("--trace", action="store_true", help="also print the iteration trace as CSV rows k,W,S")
    p.add_argument("--breakdown", action="store_true", help="also print per-interval CSV rows interval,W,mu,S")

    p = scenario_command("dump-curve", "raw stall points and concave envelope for one core")
    p.add_argument("--interval", type=int, default=1, help="1-based schedule interval to use (default 1)")

    scenario_command("oracle", "cross-check the analysis against brute-force enumeration")

    p = sub.add_parser("experiment", help="run a schedulability sweep and emit CSV")
    p.add_argument("--preset", required=True, choices=["vary-m", "vary-mir", "smoke"])
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", default=None, help="write CSV here instead of stdout")
    p.add_argument("--plot", action="store_true", help="also write a gnuplot script next to --out")
    return parser


def _pick_core(scenario: Scenario, core: int | None) -> int:
    if core is not None:
        return core
    cores = sorted({w.core for w in scenario.workloads})
    if len(cores) != 1:
        raise MembwError(f"scenario has workloads for cores {cores}; pass --core")
    return cores[0]


def _print_trace(result) -> None:
    print("k,W,S")
    for entry in result.trace:
        print(f"{entry.k},{entry.span},{entry.stall}")


def _cmd_analyze_static(args) -> int:
    scenario = load_scenario(args.scenario)
    core = _pick_core(scenario, args.core)
    if len(scenario.schedule.intervals) != 1:
        raise MembwError(
            "analyze-static requires a single-interval schedule "
            f"(got {len(scenario.schedule.intervals)} intervals); use analyze-dynamic"
        )
    workload = scenario.workload_for_core(core)
    budgets = scenario.schedule.intervals[0].budgets
    result = analyze_static(workload, budgets, core, scenario.config)
    doc = {"command": "analyze-static", "core": core, **result.to_json_dict()}
    print(json.dumps(doc, indent=2))
    if args.trace:
        _print_trace(result)
    return 0


def _cmd_analyze_dynamic(args) -> int:
    scenario = load_scenario(args.scenario)
    core = _pick_core(scenario, args.core)
    workload = scenario.workload_for_core(core)
    result = analyze_dynamic(workload, scenario.schedule, core, scenario.config)
    doc = {"command": "analyze-dynamic", "core": core, **result.to_json_dict()}
    print(json.dumps(doc, indent=2))
    if args.trace:
        _print_trace(result)
    if args.breakdown and result.breakdown is not None:
        print("interval,W,mu,S")
        for row in result.breakdown:
            print(f"{row.interval},{row.span},{row.memory},{row.stall}")
    return 0


def _cmd_dump_curve(args) -> int:
    scenario = load_scenario(args.scenario)
    core = _pick_core(scenario, args.core)
    intervals = scenario.schedule.intervals
    if not 1 <= args.interval <= len(intervals):
        raise MembwError(f"--interval {args.interval} outside [1..{len(intervals)}]")
    budgets = intervals[args.interval - 1].budgets
    raw = build_raw_points(budgets, core)
    curve = curve_for_core(budgets, core)
    doc = {
        "command": "dump-curve",
        "interval": args.interval,
        "budgets": list(budgets.budgets),
        "points": list(raw.values),
        **curve.to_json_dict(),
    }
    print(json.dumps(doc, indent=2))
    return 0


def _cmd_oracle(args) -> int:
    scenario = load_scenario(args.scenario)
    core = _pick_core(scenario, args.core)
    workload = scenario.workload_for_core(core)
    result = analyze_dynamic(workload, scenario.schedule, core, scenario.config)
    doc = {"command": "oracle", "core": core, "analysis": result.to_json_dict()}
    if result.converged:
        splits = split_span(scenario.schedule, result.span)
        curves = tuple(curve_for_core(iv.budgets, core) for iv in scenario.schedule.intervals)
        raws = tuple(build_raw_points(iv.budgets, core) for iv in scenario.schedule.intervals)
        greedy = distribute_memory(splits, workload.memory, curves)
        greedy_value = stall_breakdown(splits, greedy, curves).total
        oracle_value, oracle_assign = oracle_distribute(splits, workload.memory, raws)
        doc["greedy_objective"] = str(greedy_value)
        doc["oracle_objective"] = str(oracle_value)
        doc["oracle_assignment"] = list(oracle_assign)
        doc["greedy_assignment"] = list(greedy.per_interval)
        doc["objectives_match"] = greedy_value == oracle_value
    print(json.dumps(doc, indent=2))
    return 0


def _plot_script(rows, csv_path: str) -> str:
    series = []
    seen = set()
    for r in rows:
        key = (r.policy, r.m, float(r.mir))
        if key not in seen:
            seen.add(key)
            series.append(key)
    lines = [
        "set datafile separator ','",
        "set xlabel 'U'",
        "set ylabel 'schedulable ratio'",
        "set yrange [0:1.05]",
        "set key outside",
    ]
    plots = [
        f"    \"< grep '^{policy},{m},{mir},' {csv_path}\" using 4:7 with linespoints title '{policy} m={m} MIr={mir}'"
        for policy, m, mir in series
    ]
    lines.append("plot \\")
    lines.append(", \\\n".join(plots))
    return "\n".join(lines) + "\n"


def _cmd_experiment(args) -> int:
    sweep = preset_sweep(args.preset, args.seed)
    rows = run_sweep(sweep)
    csv_text = rows_to_csv(rows, args.seed)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
        print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(csv_text)
    if args.plot:
        if not args.out:
            raise MembwError("--plot requires --out (the script references the CSV file)")
        plot_path = os.path.splitext(args.out)[0] + ".plt"
        with open(plot_path, "w", encoding="utf-8") as fh:
            fh.write(_plot_script(rows, args.out))
        print(f"wrote plot script to {plot_path}", file=sys.stderr)
    return 0


_COMMANDS = {
    "analyze-static": _cmd_analyze_static,
    "analyze-dynamic": _cmd_analyze_dynamic,
    "dump-curve": _cmd_dump_curve,
    "oracle": _cmd_oracle,
    "experiment": _cmd_experiment,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except MembwError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
