"""``sarplan`` command line.

Exit codes: 0 success, 1 input error, 2 infeasible within the fleet limit,
3 inconclusive (solver budget exhausted), 4 plan violates constraints.
Every flag can also come from an environment variable named ``SARPLAN_`` plus
the flag name in upper case with dashes as underscores (``SARPLAN_WORKERS``).
Command-line flags win over the environment, which wins over the scenario.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from . import energy
from .grid import Cell
from .planner import PLANNED, PlanningInconclusive, plan_mission, sweep_fleet
from .scenario import ScenarioError, load
from .validator import replay, write_cost_csv, write_trace_csv

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_INCONCLUSIVE, EXIT_VIOLATIONS = 0, 1, 2, 3, 4


def _env(name: str, cast=str):
    raw = os.environ.get(f"SARPLAN_{name}")
    if raw is None or raw == "":
        return None
    return cast(raw)


def _solver_overrides(args) -> dict:
    return {
        "mode": args.mode,
        "max_nodes": args.budget_nodes,
        "wall_seconds": args.budget_seconds,
        "workers": args.workers,
        "seed": args.seed,
    }


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=["exact", "heuristic", "auto"], default=_env("MODE"))
    p.add_argument("--budget-nodes", type=int, default=_env("BUDGET_NODES", int))
    p.add_argument("--budget-seconds", type=float, default=_env("BUDGET_SECONDS", float))
    p.add_argument("--workers", type=int, default=_env("WORKERS", int),
                   help="search processes (default: all cores; 1 for reproducibility checks)")
    p.add_argument("--seed", type=int, default=_env("SEED", int))


def _dump(data, path: Path | None) -> None:
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def _sidecar(out: Path, suffix: str) -> Path:
    return out.with_name(out.stem + suffix)


def _load(args):
    overrides = _solver_overrides(args)
    if overrides["workers"] is None:
        overrides["workers"] = os.cpu_count() or 1
    return load(args.scenario, overrides=overrides)


def cmd_plan(args) -> int:
    scen = _load(args)
    try:
        res = plan_mission(scen.request, scen.budget)
    except PlanningInconclusive as exc:
        _dump({"status": "PlanningInconclusive", "reason": str(exc),
               "ladder": [{"robots": r, "status": s} for r, s in exc.ladder]}, args.out)
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    out = res.to_json()
    out["scenario"] = scen.name
    _dump(out, args.out)
    if args.out is not None and res.paths:
        inst = scen.request.instance(res.fleet_size)
        trace = replay(inst, res.paths)
        write_trace_csv(trace, _sidecar(args.out, ".trace.csv"))
        write_cost_csv(trace, _sidecar(args.out, ".costs.csv"))
    summary = f"{scen.name}: {res.status}, fleet size {res.fleet_size}, " \
              f"{res.expected_explored_cells}/{res.n_cells} cells, completion epochs {res.completion_epochs}"
    if res.reason:
        summary += f" ({res.reason})"
    print(summary, file=sys.stderr)
    return EXIT_OK if res.status == PLANNED else EXIT_INFEASIBLE


def cmd_sweep(args) -> int:
    if args.r_min > args.r_max:
        print("error: --r-min must not exceed --r-max", file=sys.stderr)
        return EXIT_INPUT
    scen = _load(args)
    rows = sweep_fleet(scen.request, args.r_min, args.r_max, scen.budget)
    out_dir = args.out or Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "sweep_long.csv", "w", newline="") as long_fh:
        long_w = csv.writer(long_fh, lineterminator="\n")
        long_w.writerow(["robots", "epoch", "explored_cells", "explored_pct", "status", "met"])
        for row in rows:
            with open(out_dir / f"sweep_R{row.robots}.csv", "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["epoch", "explored_cells", "explored_pct"])
                for t, (c, pct) in enumerate(zip(row.explored_cells, row.curve)):
                    w.writerow([t, c, f"{pct:.4f}"])
                    long_w.writerow([row.robots, t, c, f"{pct:.4f}", row.status, int(row.met)])
            final = f"{row.curve[-1]:.1f}%" if row.curve else "n/a"
            print(f"R={row.robots}: {row.status}, final {final}", file=sys.stderr)
    return EXIT_OK if any(r.met for r in rows) else EXIT_INFEASIBLE


def cmd_validate(args) -> int:
    scen = load(args.scenario)
    plan = json.loads(Path(args.plan).read_text())
    paths_raw = plan.get("paths") or []
    if not paths_raw:
        print("error: plan has no paths", file=sys.stderr)
        return EXIT_INPUT
    paths = []
    for robot in paths_raw:
        ordered = sorted(robot, key=lambda step: step[0])
        paths.append([Cell(a, b) for _, a, b in ordered])
    inst = scen.request.instance(len(paths))
    try:
        trace = replay(inst, paths)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    violations = [str(v) for v in trace.violations]
    claimed = plan.get("battery_J")
    if claimed:
        for r, row in enumerate(claimed):
            for t, value in enumerate(row):
                actual = trace.steps[r][t].battery
                if round(value * 1000) != actual:
                    violations.append(f"claimed_battery[{r}, {t}]: plan says {value} J, replay gives {actual / 1000} J")
    report = {
        "violations": violations,
        "explored_cells": trace.explored_cells[-1],
        "target_cells": trace.target,
        "completion_epochs": None if trace.completion_epoch is None else trace.completion_epoch + 1,
    }
    print(json.dumps(report, indent=2))
    return EXIT_OK if not violations else EXIT_VIOLATIONS


def cmd_profiles(args) -> int:
    for kind in energy.builtin_names():
        prof = energy.builtin_profile(kind)
        print(f"[{kind}] battery {prof.battery_capacity / 1000:g} kJ")
        for label, watts in energy.comparison_rows(kind):
            print(f"  {label}, {watts:.2f}")
        print(f"  Total, {energy.comparison_total(kind):.2f}")
    print("[quadruped components]")
    for name, watts in energy.QUADRUPED_COMPONENTS:
        print(f"  {name}, {watts}")
    print(f"posture break-even (transitions on top of idle window): "
          f"{energy.posture_breakeven():.3f} s")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sarplan", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="emit solver log lines on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="find the minimum fleet and its path plan")
    p.add_argument("--scenario", default=_env("SCENARIO"), required=_env("SCENARIO") is None)
    p.add_argument("--out", type=Path, default=_env("OUT", Path))
    _add_solver_flags(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("sweep", help="explored-area curves over a range of fleet sizes")
    p.add_argument("--scenario", default=_env("SCENARIO"), required=_env("SCENARIO") is None)
    p.add_argument("--r-min", type=int, default=_env("R_MIN", int) or 1)
    p.add_argument("--r-max", type=int, default=_env("R_MAX", int) or 5)
    p.add_argument("--out", type=Path, default=_env("OUT", Path), help="output directory")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="replay a plan against its scenario")
    p.add_argument("--plan", required=True)
    p.add_argument("--scenario", default=_env("SCENARIO"), required=_env("SCENARIO") is None)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("profiles", help="print built-in energy profiles")
    p.set_defaults(func=cmd_profiles)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ScenarioError as exc:
        for ptr, msg in exc.errors:
            print(f"input error at {ptr or '/'}: {msg}", file=sys.stderr)
        return EXIT_INPUT
    except (FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
