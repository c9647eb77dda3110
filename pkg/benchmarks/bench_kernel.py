"""Time the compiled search kernel against the pure-Python one.

    python benchmarks/bench_kernel.py [--repeat 3] [--only compiled|python] [--json out.json]

Every case is solved to optimality (or refuted) by both backends; the script
checks that they return the same status, objective, plan and node count.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time

from sarplan.energy import builtin_profile
from sarplan.grid import GridMap, build_grid
from sarplan.rp_model import RobotSpec, RpInstance
from sarplan.solver import SolveBudget, solve
from sarplan.solver import kernel as kernels


def _robots(kind, starts, batteries=None):
    prof = builtin_profile(kind)
    batteries = batteries or [None] * len(starts)
    return tuple(RobotSpec(i, prof, s, b) for i, (s, b) in enumerate(zip(starts, batteries)))


# battery-tight fleets; node counts range from a handful to ~10^5
CASES = {
    "50x50 wheeled R=3 (bundled)": RpInstance(build_grid(50, 50, 1, 10), 9, 10.0,
                                              _robots("wheeled", [(0, 0)] * 3), 0.7),
    "5x4 wheeled R=4 T=7 refuted": RpInstance(GridMap(5, 4, 10.0), 7, 10.0,
                                              _robots("wheeled", [(0, 0)] * 4, [2011, 989, 1240, 826]), 0.8),
    "6x6 wheeled R=4 T=12": RpInstance(GridMap(6, 6, 10.0), 12, 10.0,
                                       _robots("wheeled", [(0, 0)] * 4, [1970, 3274, 2981, 2305]), 0.9),
    "7x7 quadruped R=4 T=11": RpInstance(GridMap(7, 7, 10.0), 11, 10.0,
                                         _robots("quadruped", [(2, 5), (2, 1), (6, 5), (5, 4)],
                                                 [35089, 27647, 25472, 27758]), 0.8),
    "5x5 wheeled R=3 T=10": RpInstance(GridMap(5, 5, 10.0), 10, 10.0,
                                       _robots("wheeled", [(3, 3), (3, 3), (2, 2)], [1270, 3469, 3038]), 0.9),
    "5x5 wheeled R=4 T=13": RpInstance(GridMap(5, 5, 10.0), 13, 10.0,
                                       _robots("wheeled", [(1, 0), (2, 4), (0, 1), (3, 0)],
                                               [1082, 3085, 1214, 1097]), 0.6),
}


def run_case(inst, backend, repeat):
    budget = SolveBudget(mode="exact", workers=1, max_nodes=10**8, wall_limit=3600)
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = solve(inst, budget, backend=backend)
        times.append(time.perf_counter() - t0)
    return out, min(times), statistics.median(times)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=1)
    ap.add_argument("--only", choices=["compiled", "python"])
    ap.add_argument("--json", dest="json_out")
    args = ap.parse_args(argv)

    backends = ["python", "compiled"]
    if not kernels.compiled_available():
        print("compiled kernel not available; timing the Python kernel only", file=sys.stderr)
        backends = ["python"]
    if args.only:
        backends = [args.only]

    rows = []
    print(f"{'case':32} {'status':20} {'obj':>4} {'nodes':>9} " + " ".join(f"{b + ' s':>12}" for b in backends)
          + ("    speedup" if len(backends) == 2 else ""))
    for name, inst in CASES.items():
        res = {b: run_case(inst, b, args.repeat) for b in backends}
        outs = [r[0] for r in res.values()]
        first = outs[0]
        for other in outs[1:]:
            same = (other.status, other.objective, other.stats.get("nodes")) == \
                (first.status, first.objective, first.stats.get("nodes"))
            if same and first.solution is not None:
                same = other.solution.paths == first.solution.paths
            if not same:
                print(f"backends disagree on {name}", file=sys.stderr)
                return 1
        nodes = first.stats.get("nodes", 0)
        best = {b: res[b][1] for b in backends}
        line = f"{name:32} {first.status.value:20} {str(first.objective):>4} {nodes:>9} " + \
            " ".join(f"{best[b]:12.4f}" for b in backends)
        row = {"case": name, "status": first.status.value, "objective": first.objective, "nodes": nodes,
               **{f"{b}_s": best[b] for b in backends}}
        if len(backends) == 2 and best["compiled"] > 0:
            row["speedup"] = best["python"] / best["compiled"]
            line += f" {row['speedup']:10.1f}x"
        print(line, flush=True)
        rows.append(row)
    if args.json_out:
        with open(args.json_out, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
