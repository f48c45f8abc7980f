"""Command-line batch runner.

``sweepbv run SCENARIO --out DIR`` solves one scenario file and writes
``trajectory.csv``, ``reports.jsonl``, ``summary.json`` and ``timing.json``.
``sweepbv sweep BATCH_DIR --out DIR`` runs every ``*.json`` in a directory
and writes ``index.json``.

Exit codes: 0 success, 1 a requested check failed, 2 malformed scenario,
3 solver error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import geometry as geo
from .bvpath import variation
from .errors import ScenarioError, SweepError
from .movingset import moving_set_from_json, moving_variation
from .play import play_bar, play_input_from_json, segment_prescriptions
from .solver import (
    Project,
    SolverConfig,
    Trajectory,
    prescription_from_json,
    solve_general_bv,
    solve_prescribed,
)
from . import verify

EXIT_OK, EXIT_CHECK, EXIT_SCENARIO, EXIT_SOLVER = 0, 1, 2, 3

SWEEP_CHECKS = ("feasibility", "vi_residual", "variation_bound", "contraction")
PLAY_CHECKS = SWEEP_CHECKS + ("play_properties",)
PLAY_MODES = ("P", "Pbar", "segment_jump_equiv")

_CONFIG_KEYS = {
    "base_steps": int, "max_refine": int, "tol_traj": float, "jump_truncation_eps": float,
    "tol_proj": float, "max_iter": int, "tol_feas": float,
}


def config_from_json(obj, field="config"):
    obj = {} if obj is None else obj
    if not isinstance(obj, dict):
        raise ScenarioError(field, "expected an object")
    vals = {}
    for key, value in obj.items():
        if key not in _CONFIG_KEYS:
            raise ScenarioError(f"{field}.{key}", "unknown key")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScenarioError(f"{field}.{key}", "expected a number")
        if _CONFIG_KEYS[key] is int and value != int(value):
            raise ScenarioError(f"{field}.{key}", "expected an integer")
        vals[key] = _CONFIG_KEYS[key](value)
    proj = geo.ProjectionConfig(**{k: vals.pop(k) for k in ("tol_proj", "max_iter", "tol_feas")
                                   if k in vals})
    try:
        return SolverConfig(projection=proj, **vals)
    except ScenarioError as exc:
        raise ScenarioError(f"{field}.{exc.field.split('.')[-1]}", str(exc).split(": ", 1)[-1]) from None


def _vector(obj, field, d):
    if not isinstance(obj, list) or len(obj) != d:
        raise ScenarioError(field, f"expected a list of {d} numbers")
    try:
        v = np.array(obj, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(field, "expected numbers") from None
    if not np.all(np.isfinite(v)):
        raise ScenarioError(field, "values must be finite")
    return v


def _prescriptions(obj, field):
    if obj is None:
        return []
    if not isinstance(obj, list):
        raise ScenarioError(field, "expected a list")
    return [prescription_from_json(p, f"{field}[{i}]") for i, p in enumerate(obj)]


def _checks(obj, allowed):
    if obj is None:
        return list(allowed)
    if not isinstance(obj, list):
        raise ScenarioError("checks", "expected a list")
    for name in obj:
        if name not in allowed:
            raise ScenarioError("checks", f"unknown check {name!r}")
    return list(obj)


class Scenario:
    """Parsed scenario file."""

    def __init__(self, obj):
        if not isinstance(obj, dict):
            raise ScenarioError("scenario", "expected an object")
        if obj.get("schema_version") != 1:
            raise ScenarioError("schema_version", "must be 1")
        self.cfg = config_from_json(obj.get("config"))
        pcfg = self.cfg.projection
        if "play" in obj:
            self.kind = "play"
            self.play = play_input_from_json(obj["play"], "play", pcfg)
            self.mode = obj.get("mode", "P")
            if self.mode not in PLAY_MODES:
                raise ScenarioError("mode", f"expected one of {', '.join(PLAY_MODES)}")
            self.ms = self.play.moving_set
            self.y0 = self.play.y0
            self.prescriptions = segment_prescriptions(self.play.u) if self.mode != "P" else []
            self.right_prescriptions = []
            self.checks = _checks(obj.get("checks"), PLAY_CHECKS)
        else:
            self.kind = "sweep"
            if "moving_set" not in obj:
                raise ScenarioError("moving_set", "missing")
            self.ms = moving_set_from_json(obj["moving_set"])
            if "y0" not in obj:
                raise ScenarioError("y0", "missing")
            self.y0 = _vector(obj["y0"], "y0", self.ms.dim)
            self.prescriptions = _prescriptions(obj.get("prescriptions"), "prescriptions")
            self.right_prescriptions = _prescriptions(obj.get("right_prescriptions"),
                                                      "right_prescriptions")
            self.checks = _checks(obj.get("checks"), SWEEP_CHECKS)

    def solve(self, y0=None, times=None):
        y0 = self.y0 if y0 is None else y0
        if self.kind == "play" and self.mode == "Pbar":
            return play_bar(self.play._replace(z0=self.play.u.value[0] - y0), self.cfg, times)
        if self.ms.right_continuous and not self.right_prescriptions:
            return solve_prescribed(self.ms, self.prescriptions, y0, self.cfg, times)
        return solve_general_bv(self.ms, y0, self.cfg, self.prescriptions,
                                self.right_prescriptions, times)

    @property
    def excluded_times(self):
        return [p.t for p in self.prescriptions + self.right_prescriptions
                if not isinstance(p, Project)]

    def second_start(self, seed):
        """A second feasible start for the contraction check."""
        rng = np.random.default_rng(seed)
        c0 = self.ms.set_at(self.ms.domain[0], "value")
        y = self.y0 + rng.normal(size=self.ms.dim)
        return geo.project(c0, y, self.cfg.projection).point


def corrupt(traj):
    """Shift one interior value by 0.1 in every coordinate."""
    k = len(traj.times) // 2
    value = traj.value.copy()
    left = traj.left.copy()
    right = traj.right.copy()
    for arr in (left, value, right):
        arr[k] = arr[k] + 0.1
    return Trajectory(traj.times, left, value, right, traj.jumps, traj.refinement,
                      traj.truncation_bound, traj.aux)


def run_checks(sc, traj, seed=0):
    reports = []
    for name in sc.checks:
        if name == "feasibility":
            reports.append(verify.check_feasibility(traj, sc.ms, sc.cfg.projection))
        elif name == "vi_residual":
            reports.append(verify.vi_residual(traj, sc.ms, sc.excluded_times,
                                              cfg=sc.cfg.projection))
        elif name == "variation_bound":
            reports.append(verify.check_variation_bound(
                traj, sc.ms, sc.prescriptions + sc.right_prescriptions, seed))
        elif name == "contraction":
            other = sc.solve(sc.second_start(seed), traj.times)
            reports.append(verify.check_contraction(traj, other))
        elif name == "play_properties":
            reports.extend(verify.check_play_properties(sc.play, sc.cfg))
    return reports


def _fmt(x):
    return repr(float(x))


def trajectory_csv(traj):
    d = traj.dim
    lines = [",".join(["t", *(f"y_{i}" for i in range(d)), "step_displacement_norm", "side"])]
    for t, side, y, step in traj.rows():
        lines.append(",".join([_fmt(t), *(_fmt(v) for v in y), _fmt(step), side]))
    return "\n".join(lines) + "\n"


def _write_atomic(path, text):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def run_scenario(path, out_dir, seed=0, corrupt_output=False):
    """Solve and check one scenario file.

    Returns
    -------
    code : int
    summary : dict or None
    message : str
        Error text for exit codes 2 and 3.
    """
    path, out_dir = Path(path), Path(out_dir)
    started = time.perf_counter()
    try:
        with open(path) as fh:
            raw = json.load(fh)
        sc = Scenario(raw)
    except json.JSONDecodeError as exc:
        return EXIT_SCENARIO, None, f"scenario: invalid JSON ({exc})"
    except ScenarioError as exc:
        return EXIT_SCENARIO, None, str(exc)
    except OSError as exc:
        return EXIT_SCENARIO, None, f"scenario: {exc}"
    try:
        traj = sc.solve()
        if corrupt_output:
            traj = corrupt(traj)
        reports = run_checks(sc, traj, seed)
        a, b = sc.ms.domain
        var_c = (variation(sc.play.u, a, b) if sc.kind == "play"
                 else moving_variation(sc.ms, a, b, seed).value)
    except ScenarioError as exc:
        return EXIT_SCENARIO, None, str(exc)
    except SweepError as exc:
        return EXIT_SOLVER, None, f"{type(exc).__name__}: {exc}"
    ref = traj.refinement
    summary = {
        "scenario": path.stem,
        "d": int(sc.ms.dim),
        "steps_final": int(len(traj.times) - 1),
        "refine_levels": None if ref is None else int(ref.levels),
        "refine_gap": None if ref is None or ref.gap != ref.gap else float(ref.gap),
        "refine_converged": None if ref is None else bool(ref.converged),
        "variation_y": traj.variation_total,
        "variation_C": float(var_c),
        "checks": [{"name": r.name, "passed": bool(r.passed),
                    "worst_violation": float(r.worst_violation)} for r in reports],
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_atomic(out_dir / "trajectory.csv", trajectory_csv(traj))
    _write_atomic(out_dir / "reports.jsonl", "".join(r.to_json() + "\n" for r in reports))
    _write_atomic(out_dir / "summary.json", _dump(summary))
    _write_atomic(out_dir / "timing.json",
                  _dump({"wall_time_s": round(time.perf_counter() - started, 6)}))
    code = EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK
    return code, summary, ""


def _run_one(args):
    path, out, seed = args
    code, summary, msg = run_scenario(path, out, seed)
    return {"scenario": Path(path).stem, "exit": code, "summary": summary, "error": msg or None}


def sweep(batch_dir, out_dir, parallel=1, seed=0):
    """Run every ``*.json`` in ``batch_dir``; returns the maximum exit code."""
    batch_dir, out_dir = Path(batch_dir), Path(out_dir)
    if not batch_dir.is_dir():
        raise NotADirectoryError(str(batch_dir))
    files = sorted(batch_dir.glob("*.json"))
    jobs = [(str(f), str(out_dir / f.stem), seed) for f in files]
    if parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            rows = list(pool.map(_run_one, jobs))
    else:
        rows = [_run_one(j) for j in jobs]
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_atomic(out_dir / "index.json", _dump({"scenarios": rows}))
    return max((r["exit"] for r in rows), default=EXIT_OK)


def _positive(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def build_parser():
    parser = argparse.ArgumentParser(prog="sweepbv", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="solve one scenario file")
    run.add_argument("scenario")
    run.add_argument("--out", required=True)
    run.add_argument("--seed", type=int, default=0, help="seed for direction sampling and the second start")
    run.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    sw = sub.add_parser("sweep", help="solve every scenario in a directory")
    sw.add_argument("batch_dir")
    sw.add_argument("--out", required=True)
    sw.add_argument("--parallel", type=_positive, default=1)
    sw.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "run":
        code, summary, msg = run_scenario(args.scenario, args.out, args.seed, args.corrupt)
        if msg:
            print(f"error: {msg}", file=sys.stderr)
        elif summary is not None:
            for c in summary["checks"]:
                print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']} {c['worst_violation']:.3e}")
        return code
    code = sweep(args.batch_dir, args.out, args.parallel, args.seed)
    print(f"wrote {Path(args.out) / 'index.json'}")
    return code


if __name__ == "__main__":
    sys.exit(main())
