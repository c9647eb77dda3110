import csv
import json
import subprocess
import sys

import pytest

from sarplan import cli
from sarplan.scenario import ScenarioError, bundled_dir, load, parse

SMALL = "50x50_wheeled.json"


def scenario_doc(**changes):
    doc = json.loads((bundled_dir() / SMALL).read_text())
    doc.update(changes)
    return doc


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def run(*argv):
    return cli.main(list(argv))


def test_bundled_scenarios_load():
    names = sorted(p.name for p in bundled_dir().iterdir() if p.name.endswith(".json"))
    assert names == ["500x500_quadruped.json", "500x500_wheeled.json", "50x50_quadruped.json", "50x50_wheeled.json"]
    for name in names:
        scen = load(name)
        assert scen.request.err == 0.7 and scen.request.tfs == 10
    big = load("500x500_wheeled.json")
    assert big.request.horizon == 180
    g = big.request.grid()
    assert (g.width_cells, g.height_cells) == (16, 16)


def test_schema_errors_carry_pointers():
    with pytest.raises(ScenarioError) as exc:
        parse(scenario_doc(err=0))
    assert exc.value.errors[0][0] == "/err"
    with pytest.raises(ScenarioError) as exc:
        parse(scenario_doc(colour="red"))
    assert exc.value.errors[0][0] == ""
    with pytest.raises(ScenarioError) as exc:
        parse(scenario_doc(area={"width_m": -5, "height_m": 50}))
    assert exc.value.errors[0][0] == "/area/width_m"
    with pytest.raises(ScenarioError) as exc:
        parse(scenario_doc(start_cells=[[0, 0], [9, 9]]))
    assert exc.value.errors[0][0] == "/start_cells/1"


def test_profile_overrides_and_custom_profiles():
    scen = parse(scenario_doc(profile_overrides={"battery_capacity": 1000.0}))
    assert scen.request.profile.battery_capacity == 1000.0
    custom = {"battery_capacity": 5000, "rx_power": 1, "tx_power_base": 1, "sensing_power": 2,
              "idle_power": 0.5, "motion_power": {"1.0": 3}}
    scen = parse(scenario_doc(profile=custom))
    assert scen.request.profile.motion_at(1.0) == 3


def test_solver_overrides():
    scen = parse(scenario_doc(), overrides={"mode": "heuristic", "workers": 3, "seed": None})
    assert scen.budget.mode == "heuristic" and scen.budget.workers == 3 and scen.budget.seed == 0


def test_plan_writes_json_and_csvs(tmp_path, capsys):
    out = tmp_path / "plan.json"
    assert run("plan", "--scenario", SMALL, "--out", str(out), "--workers", "1") == 0
    data = json.loads(out.read_text())
    assert data["status"] == "Planned" and data["fleet_size"] == 3
    trace = list(csv.reader((tmp_path / "plan.trace.csv").open()))
    assert trace[0][:3] == ["epoch", "explored_cells", "explored_pct"]
    assert len(trace) == 10
    assert (tmp_path / "plan.costs.csv").exists()
    assert "fleet size 3" in capsys.readouterr().err


def test_plan_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert run("plan", "--scenario", SMALL, "--out", str(out), "--workers", "1", "--seed", "7") == 0
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.trace.csv").read_bytes() == (tmp_path / "b.trace.csv").read_bytes()


def test_plan_input_error(tmp_path, capsys):
    path = write(tmp_path, "bad.json", scenario_doc(err=0))
    assert run("plan", "--scenario", path) == 1
    assert "/err" in capsys.readouterr().err
    assert run("plan", "--scenario", str(tmp_path / "missing.json")) == 1
    (tmp_path / "broken.json").write_text("{")
    assert run("plan", "--scenario", str(tmp_path / "broken.json")) == 1


def test_plan_infeasible_exit_two(tmp_path):
    path = write(tmp_path, "one.json", scenario_doc(tfs=1))
    out = tmp_path / "one_out.json"
    assert run("plan", "--scenario", path, "--out", str(out), "--workers", "1") == 2
    data = json.loads(out.read_text())
    assert data["status"] == "InfeasibleWithinTFS"
    assert data["paths"] and data["expected_explored_cells"] == 9
    assert "counting bound" in data["reason"]


def test_plan_inconclusive_exit_three(tmp_path):
    doc = scenario_doc(area={"width_m": 40, "height_m": 40}, err=1.0, trt_s=160, tfs=1)
    path = write(tmp_path, "hard.json", doc)
    out = tmp_path / "hard_out.json"
    assert run("plan", "--scenario", path, "--out", str(out), "--mode", "exact", "--budget-nodes", "3",
               "--workers", "1") == 3
    assert json.loads(out.read_text())["status"] == "PlanningInconclusive"


def test_env_defaults(tmp_path, monkeypatch):
    monkeypatch.setenv("SARPLAN_WORKERS", "1")
    monkeypatch.setenv("SARPLAN_MODE", "heuristic")
    out = tmp_path / "env.json"
    assert run("plan", "--scenario", SMALL, "--out", str(out)) == 0
    assert json.loads(out.read_text())["mode"] == "heuristic"


def _plan(tmp_path):
    out = tmp_path / "plan.json"
    assert run("plan", "--scenario", SMALL, "--out", str(out), "--workers", "1") == 0
    return out, json.loads(out.read_text())


def test_validate_roundtrip(tmp_path, capsys):
    out, _ = _plan(tmp_path)
    capsys.readouterr()
    assert run("validate", "--plan", str(out), "--scenario", SMALL) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["violations"] == [] and report["explored_cells"] >= 18


def test_validate_teleport(tmp_path, capsys):
    out, data = _plan(tmp_path)
    data["paths"][0][3] = [3, 4, 4]
    out.write_text(json.dumps(data))
    capsys.readouterr()
    assert run("validate", "--plan", str(out), "--scenario", SMALL) == 4
    report = json.loads(capsys.readouterr().out)
    assert any(v.startswith("mobility") for v in report["violations"])


def test_validate_overdraft(tmp_path, capsys):
    out, data = _plan(tmp_path)
    data.pop("battery_J")
    out.write_text(json.dumps(data))
    weak = write(tmp_path, "weak.json", scenario_doc(initial_battery_j=900))
    capsys.readouterr()
    assert run("validate", "--plan", str(out), "--scenario", weak) == 4
    report = json.loads(capsys.readouterr().out)
    assert any(v.startswith("battery") for v in report["violations"])


def test_validate_claimed_battery_mismatch(tmp_path, capsys):
    out, data = _plan(tmp_path)
    data["battery_J"][1][4] += 1.0
    out.write_text(json.dumps(data))
    capsys.readouterr()
    assert run("validate", "--plan", str(out), "--scenario", SMALL) == 4
    assert "claimed_battery" in capsys.readouterr().out


def test_validate_malformed_plan(tmp_path):
    out, data = _plan(tmp_path)
    data["paths"] = data["paths"][:1] + [data["paths"][1][:4]] + data["paths"][2:]
    out.write_text(json.dumps(data))
    assert run("validate", "--plan", str(out), "--scenario", SMALL) == 1


def test_sweep_outputs(tmp_path):
    assert run("sweep", "--scenario", SMALL, "--r-min", "1", "--r-max", "5", "--out", str(tmp_path),
               "--workers", "1") == 0
    for n in range(1, 6):
        rows = list(csv.DictReader((tmp_path / f"sweep_R{n}.csv").open()))
        assert len(rows) == 9
        if n >= 3:
            assert float(rows[-1]["explored_pct"]) >= 70.0
    assert float(list(csv.DictReader((tmp_path / "sweep_R1.csv").open()))[-1]["explored_pct"]) == 36.0
    long_rows = list(csv.DictReader((tmp_path / "sweep_long.csv").open()))
    assert len(long_rows) == 45


def test_sweep_bad_range():
    assert run("sweep", "--scenario", SMALL, "--r-min", "4", "--r-max", "2") == 1


def test_profiles_output(capsys):
    assert run("profiles") == 0
    text = capsys.readouterr().out
    assert "3D LiDAR and SLAM, 56.84" in text
    assert "Motion 1 m/s, 7.40" in text
    assert "Total, 297.77" in text and "Total, 28.64" in text


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sarplan.cli", "profiles"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "Walking 2 m/s, 211.22" in proc.stdout
