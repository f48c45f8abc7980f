import csv
import json
import subprocess
import sys

import pytest

from sweepbv import cli


def translate(base, breakpoints):
    return {"mode": "translate", "base": base,
            "path": {"domain": [0, 1], "breakpoints": breakpoints, "right_continuous": True}}


def drag_scenario(**extra):
    scen = {"schema_version": 1,
            "moving_set": translate({"type": "halfspace", "normal": [1.0], "offset": 0.0},
                                    [{"t": 0, "left": [0], "right": [0]}, {"t": 1, "left": [1], "right": [1]}]),
            "y0": [0.0],
            "config": {"base_steps": 16, "max_refine": 1}}
    scen.update(extra)
    return scen


def jump_scenario():
    return {"schema_version": 1,
            "moving_set": translate({"type": "box", "lo": [-0.5], "hi": [0.5]},
                                    [{"t": 0, "left": [0.5], "right": [0.5]},
                                     {"t": 0.5, "left": [0.5], "right": [2.5]},
                                     {"t": 1, "left": [2.5], "right": [2.5]}]),
            "y0": [0.0],
            "prescriptions": [{"t": 0.5, "kind": "fixed_target", "target": [3.0]}],
            "config": {"base_steps": 16, "max_refine": 1}}


def play_scenario(mode):
    return {"schema_version": 1,
            "play": {"u": {"domain": [0, 1], "right_continuous": True,
                           "breakpoints": [{"t": 0, "left": [0, 0], "right": [0, 0]},
                                           {"t": 0.5, "left": [0.5, 0.5], "right": [0.5, -1.5]},
                                           {"t": 1, "left": [0.5, -1.5], "right": [0.5, -1.5]}]},
                     "Z": {"type": "ball", "center": [0, 0], "radius": 1.0}, "z0": [0, 0]},
            "mode": mode,
            "config": {"base_steps": 16, "max_refine": 1}}


def write(path, obj):
    path.write_text(json.dumps(obj))
    return path


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_run_drag(tmp_path, capsys):
    scen = write(tmp_path / "drag.json", drag_scenario())
    assert cli.main(["run", str(scen), "--out", str(tmp_path / "out")]) == 0
    rows = read_csv(tmp_path / "out" / "trajectory.csv")
    assert rows[0] == ["t", "y_0", "step_displacement_norm", "side"]
    assert all(float(r[0]) == pytest.approx(float(r[1]), abs=1e-14) for r in rows[1:])
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert {c["name"] for c in summary["checks"]} == set(cli.SWEEP_CHECKS)
    assert summary["variation_y"] == pytest.approx(1.0)
    reports = (tmp_path / "out" / "reports.jsonl").read_text().splitlines()
    assert all(json.loads(line)["passed"] for line in reports)
    assert "PASS feasibility" in capsys.readouterr().out


def test_csv_jump_rows(tmp_path):
    scen = write(tmp_path / "jump.json", jump_scenario())
    assert cli.main(["run", str(scen), "--out", str(tmp_path / "out")]) == 0
    rows = read_csv(tmp_path / "out" / "trajectory.csv")
    assert all(len(r) == 2 + 1 + 1 for r in rows)
    at_jump = [r for r in rows[1:] if float(r[0]) == 0.5]
    assert [r[3] for r in at_jump] == ["left", "value"]
    assert float(at_jump[1][1]) == 3.0


def test_negative_radius(tmp_path, capsys):
    scen = play_scenario("P")
    scen["play"]["Z"]["radius"] = -1.0
    code = cli.main(["run", str(write(tmp_path / "bad.json", scen)), "--out", str(tmp_path / "out")])
    assert code == 2
    assert "radius" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_malformed_inputs(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.run_scenario(bad, tmp_path / "o")[0] == 2
    code, _, msg = cli.run_scenario(write(tmp_path / "c.json", drag_scenario(checks=["bogus"])), tmp_path / "o")
    assert code == 2 and msg.startswith("checks")
    code, _, msg = cli.run_scenario(write(tmp_path / "v.json", drag_scenario(schema_version=2)), tmp_path / "o")
    assert code == 2 and "schema_version" in msg
    code, _, msg = cli.run_scenario(write(tmp_path / "y.json", drag_scenario(y0=[0.0, 1.0])), tmp_path / "o")
    assert code == 2 and msg.startswith("y0")


def test_solver_error_exit(tmp_path):
    code, _, msg = cli.run_scenario(write(tmp_path / "s.json", drag_scenario(y0=[-1.0])), tmp_path / "o")
    assert code == 3 and "InfeasibleStart" in msg


def test_corrupt_flag_subprocess(tmp_path):
    scen = write(tmp_path / "drag.json", drag_scenario())
    proc = subprocess.run([sys.executable, "-m", "sweepbv.cli", "run", str(scen),
                           "--out", str(tmp_path / "out"), "--corrupt"], capture_output=True, text=True)
    assert proc.returncode == 1
    assert "FAIL" in proc.stdout


def test_corrupt_flag_hidden():
    assert "--corrupt" not in cli.build_parser()._subparsers._group_actions[0].choices["run"].format_help()


@pytest.mark.parametrize("mode", cli.PLAY_MODES)
def test_play_modes(tmp_path, mode):
    scen = play_scenario(mode)
    scen["checks"] = ["feasibility", "play_properties"]
    code, summary, msg = cli.run_scenario(write(tmp_path / "p.json", scen), tmp_path / "out")
    assert code == 0, msg
    assert summary["d"] == 2
    names = [c["name"] for c in summary["checks"]]
    assert "segment_play_equivalence" in names


def test_sweep_empty(tmp_path):
    (tmp_path / "batch").mkdir()
    assert cli.main(["sweep", str(tmp_path / "batch"), "--out", str(tmp_path / "out")]) == 0
    assert json.loads((tmp_path / "out" / "index.json").read_text()) == {"scenarios": []}


def test_sweep_two_passing(tmp_path):
    batch = tmp_path / "batch"
    batch.mkdir()
    write(batch / "a.json", drag_scenario())
    write(batch / "b.json", jump_scenario())
    assert cli.main(["sweep", str(batch), "--out", str(tmp_path / "out"), "--parallel", "2"]) == 0
    rows = json.loads((tmp_path / "out" / "index.json").read_text())["scenarios"]
    assert [r["scenario"] for r in rows] == ["a", "b"]
    assert (tmp_path / "out" / "b" / "trajectory.csv").exists()


def test_sweep_one_failing(tmp_path, monkeypatch):
    batch = tmp_path / "batch"
    batch.mkdir()
    for name in "abc":
        write(batch / f"{name}.json", drag_scenario())
    real = cli.run_scenario
    monkeypatch.setattr(cli, "run_scenario",
                        lambda path, out, seed=0: real(path, out, seed, corrupt_output=path.endswith("b.json")))
    assert cli.sweep(batch, tmp_path / "out") == 1
    rows = json.loads((tmp_path / "out" / "index.json").read_text())["scenarios"]
    assert [r["exit"] for r in rows] == [0, 1, 0]


def test_sweep_mixed_exit_codes(tmp_path):
    batch = tmp_path / "batch"
    batch.mkdir()
    write(batch / "a.json", drag_scenario())
    write(batch / "b.json", drag_scenario(y0=[-1.0]))
    (batch / "c.json").write_text("[]")
    assert cli.sweep(batch, tmp_path / "out") == 3
    rows = json.loads((tmp_path / "out" / "index.json").read_text())["scenarios"]
    assert [r["exit"] for r in rows] == [0, 3, 2]
    assert rows[2]["error"].startswith("scenario")


def test_outputs_byte_identical(tmp_path):
    batch = tmp_path / "batch"
    batch.mkdir()
    write(batch / "a.json", jump_scenario())
    write(batch / "p.json", play_scenario("Pbar"))
    names = ["index.json", "a/trajectory.csv", "a/reports.jsonl", "a/summary.json",
             "p/trajectory.csv", "p/reports.jsonl", "p/summary.json"]
    outs = []
    for k in range(2):
        cli.sweep(batch, tmp_path / f"out{k}", parallel=1)
        outs.append([(tmp_path / f"out{k}" / n).read_bytes() for n in names])
    assert outs[0] == outs[1]
