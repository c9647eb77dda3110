import dataclasses
import os
import random
import subprocess
import sys

import pytest

from sarplan.energy import EnergyProfile, builtin_profile
from sarplan.grid import GridMap, build_grid
from sarplan.rp_model import RobotSpec, RpInstance, evaluate
from sarplan.solver import (
    AUTO_EXACT_LIMIT,
    SolveBudget,
    Status,
    brute_force_oracle,
    counting_report,
    fleet_lower_bound,
    resolve_mode,
    solve,
    solve_exact,
    solve_heuristic,
)
from sarplan.solver.oracle import ORACLE_LIMIT

from conftest import fleet, random_instances, small_mission

EXACT = SolveBudget(mode="exact", workers=1)
HEUR = SolveBudget(mode="heuristic", restarts=4)


def test_exact_matches_oracle_on_random_instances():
    agree = 0
    for inst in random_instances(2024, 120):
        a = solve(inst, EXACT)
        b = brute_force_oracle(inst)
        assert (a.status, a.objective) == (b.status, b.objective), inst
        assert b.status in (Status.OPTIMAL, Status.PROVABLY_INFEASIBLE)
        if a.solution is not None:
            assert evaluate(inst, a.solution).feasible
        agree += 1
    assert agree == 120


def test_three_by_three_single_robot():
    inst = RpInstance(build_grid(30, 30, 1, 10), 9, 10.0, fleet("wheeled", 1), 1.0)
    out = solve(inst, EXACT)
    assert out.status is Status.OPTIMAL
    assert out.objective == 8
    assert brute_force_oracle(inst).objective == 8
    assert sorted(out.solution.paths[0]) == list(range(9))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_single_cell_grid(n):
    inst = RpInstance(GridMap(1, 1, 10.0), 3, 10.0, fleet("wheeled", n), 1.0)
    assert solve(inst, EXACT).objective == 0


def test_two_robots_cannot_cover_seventy_percent():
    out = solve(small_mission(n=2), EXACT)
    assert out.status is Status.PROVABLY_INFEASIBLE
    assert "counting" in out.reason
    # exhaustive confirmation at a horizon the oracle can enumerate
    short = small_mission(n=2, horizon=5)
    assert brute_force_oracle(short).status is Status.PROVABLY_INFEASIBLE
    assert solve(short, EXACT).status is Status.PROVABLY_INFEASIBLE


def test_three_robots_small_mission():
    out = solve(small_mission(n=3), EXACT)
    assert out.status is Status.OPTIMAL
    assert out.objective == 6
    assert int(out.solution.coverage()[-1]) >= 18


def test_fleet_lower_bound_examples(wheeled):
    g = build_grid(50, 50, 1, 10)
    lb = fleet_lower_bound(g, 0.7, 9, wheeled)
    assert lb.robots == 3 and lb.coverage == 3
    assert fleet_lower_bound(g, 0.01, 9, wheeled).robots == 1
    # battery below a single exploring epoch: no fleet can gain cells
    weak = fleet_lower_bound(g, 0.7, 9, wheeled, initial_battery=200.0)
    assert weak.robots is None or weak.robots > 18
    assert counting_report(18, 2, 9) == "1 + 2x8 = 17 < 18 cells"
    assert counting_report(18, 3, 9) == "1 + 3x8 = 25 >= 18 cells"


def test_fleet_lower_bound_is_admissible():
    # the bound never exceeds the optimal fleet found by search
    rng = random.Random(3)
    for _ in range(20):
        w, h = rng.choice([(2, 2), (3, 2), (3, 3)])
        g = GridMap(w, h, 10.0)
        kappa = rng.choice([0.5, 0.7, 1.0])
        T = rng.randint(2, 5)
        prof = builtin_profile(rng.choice(["wheeled", "quadruped"]))
        battery = rng.choice([None, 2_000.0, 6_000.0])
        lb = fleet_lower_bound(g, kappa, T, prof, initial_battery=battery)
        best = None
        for n in range(1, 5):
            robots = tuple(RobotSpec(i, prof, (0, 0), battery) for i in range(n))
            if solve(RpInstance(g, T, 10.0, robots, kappa), EXACT).solved:
                best = n
                break
        if best is not None:
            assert lb.robots is not None and lb.robots <= best


def test_objective_nonincreasing_in_fleet_size():
    for inst in random_instances(77, 40, max_robots=1):
        r0 = inst.robots[0]
        base = dataclasses.replace(r0, initial_battery=None)
        prev = None
        for n in range(1, 4):
            robots = tuple(dataclasses.replace(base, robot_id=i) for i in range(n))
            cur = inst.with_robots(robots)
            if cur.size > ORACLE_LIMIT:
                break
            out = solve(cur, EXACT)
            if prev is not None and prev.status is Status.OPTIMAL:
                assert out.status is Status.OPTIMAL
                assert out.objective <= prev.objective
            prev = out


def test_more_battery_never_hurts():
    for inst in random_instances(31, 40):
        full = inst.with_robots([dataclasses.replace(r, initial_battery=None) for r in inst.robots])
        a, b = solve(inst, EXACT), solve(full, EXACT)
        if a.status is Status.OPTIMAL:
            assert b.status is Status.OPTIMAL and b.objective <= a.objective


def test_oracle_symmetric_under_relabeling():
    prof = EnergyProfile("s", 100.0, 1, 1, 1, 1, ((1.0, 2.0),))
    g = GridMap(3, 3, 1.0, (1, 1))
    a = RpInstance(g, 4, 1.0, (RobotSpec(0, prof, (0, 0), 40.0), RobotSpec(1, prof, (2, 2), 60.0)), 0.7)
    b = a.with_robots((RobotSpec(0, prof, (2, 2), 60.0), RobotSpec(1, prof, (0, 0), 40.0)))
    oa, ob = brute_force_oracle(a), brute_force_oracle(b)
    assert (oa.status, oa.objective) == (ob.status, ob.objective)


def test_oracle_rejects_large_instances():
    with pytest.raises(ValueError):
        brute_force_oracle(small_mission(n=10))


def test_heuristic_never_beats_exact():
    for inst in random_instances(99, 80):
        h = solve_heuristic(inst, HEUR)
        e = solve(inst, EXACT)
        if h.status is Status.FEASIBLE:
            assert e.status is Status.OPTIMAL
            assert h.objective >= e.objective
            assert evaluate(inst, h.solution).feasible
        if e.status is Status.PROVABLY_INFEASIBLE:
            assert h.status is not Status.FEASIBLE


def test_heuristic_small_mission():
    out = solve_heuristic(small_mission(n=3), HEUR)
    assert out.status is Status.FEASIBLE
    assert evaluate(small_mission(n=3), out.solution).feasible


def test_heuristic_missing_target_keeps_best_effort():
    out = solve_heuristic(small_mission(n=3, horizon=5), SolveBudget(mode="heuristic"))
    assert out.status in (Status.UNKNOWN, Status.PROVABLY_INFEASIBLE)
    if out.status is Status.UNKNOWN:
        assert out.best_effort is not None


def test_exact_is_deterministic():
    inst = small_mission(kind="quadruped", n=4)
    a, b = solve(inst, EXACT), solve(inst, EXACT)
    assert a.solution.paths == b.solution.paths
    assert a.stats == b.stats


def test_parallel_workers_agree_with_sequential():
    for inst in [small_mission(n=3), small_mission(n=4), small_mission(kind="quadruped", n=5)]:
        seq = solve_exact(inst, EXACT)
        par = solve_exact(inst, dataclasses.replace(EXACT, workers=2))
        assert par.status is seq.status
        assert par.solution.paths == seq.solution.paths
    for inst in random_instances(8, 15):
        seq = solve_exact(inst, EXACT)
        par = solve_exact(inst, dataclasses.replace(EXACT, workers=3))
        assert (par.status, par.objective) == (seq.status, seq.objective)
        if seq.solution is not None:
            assert par.solution.paths == seq.solution.paths


def test_node_budget_reports_unknown():
    inst = RpInstance(build_grid(40, 40, 1, 10), 16, 10.0, fleet("wheeled", 1), 1.0)
    out = solve(inst, SolveBudget(mode="exact", max_nodes=5, workers=1))
    assert out.status is Status.UNKNOWN
    assert out.budget_exhausted


def test_energy_refutation():
    prof = EnergyProfile("weak", 100.0, 1, 1, 1, 5, ((1.0, 5.0),))
    inst = RpInstance(GridMap(3, 3, 1.0), 5, 1.0, (RobotSpec(0, prof, (0, 0), 10.0),), 0.3)
    out = solve(inst, EXACT)
    assert out.status is Status.PROVABLY_INFEASIBLE
    assert "energy" in out.reason
    assert brute_force_oracle(inst).status is Status.PROVABLY_INFEASIBLE


def test_resolve_mode():
    assert resolve_mode(small_mission(n=3), "auto") == "exact"
    big = RpInstance(build_grid(500, 500, 1, 31.25), 180, 31.25, fleet("wheeled", 1), 0.7)
    assert big.size > AUTO_EXACT_LIMIT
    assert resolve_mode(big, "auto") == "heuristic"
    assert resolve_mode(big, "exact") == "exact"


def test_budget_validation():
    with pytest.raises(ValueError):
        SolveBudget(mode="fast")
    with pytest.raises(ValueError):
        SolveBudget(workers=0)


def test_pure_python_fallback_selected_at_import():
    code = ("from sarplan.solver import kernel, solve, SolveBudget\n"
            "from sarplan.planner import MissionRequest\n"
            "from sarplan.energy import builtin_profile\n"
            "req = MissionRequest(50, 50, 0.7, 90, 10, builtin_profile('wheeled'))\n"
            "out = solve(req.instance(3), SolveBudget(mode='exact'))\n"
            "print(kernel.compiled_available(), out.stats['backend'], out.objective)\n")
    env = dict(os.environ, SARPLAN_PURE_PYTHON="1")
    proc = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.split() == ["False", "python", "6"]
