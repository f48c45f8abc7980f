"""Invariant checkers for computed trajectories.

Each checker returns a :class:`CheckReport` with ``passed`` equivalent to
``worst_violation <= tolerance_used``.  All checks are deterministic.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from . import geometry as geo
from .bvpath import variation
from .errors import MismatchedScenario, Unbounded
from .movingset import moving_variation
from .solver import Project, SolverConfig, _check_partition, jump_score, solve_prescribed

__all__ = [
    "CheckReport",
    "TOL_VI",
    "vi_residual",
    "check_feasibility",
    "check_contraction",
    "check_variation_bound",
    "check_play_properties",
]

TOL_VI = 1e-10


@dataclass(frozen=True)
class CheckReport:
    name: str
    passed: bool
    worst_violation: float
    location: float | None
    tolerance_used: float
    notes: str = ""

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)


def _sided_points(traj):
    """``(t, side, y)`` for every node, always listing the left limit at jumps."""
    out = []
    for k, t in enumerate(traj.times):
        if traj.jumps[k]:
            out.append((float(t), "left", traj.left[k]))
        out.append((float(t), "value", traj.value[k]))
        if not np.array_equal(traj.right[k], traj.value[k]):
            out.append((float(t), "right", traj.right[k]))
    return out


def vi_residual(traj, ms, exclude=(), tol_vi=TOL_VI, cfg=geo.DEFAULT_PROJECTION):
    """Discrete residual of the integral variational inequality.

    For each step ``y_k -> y_{k+1}`` into the set ``C`` the term
    ``max(0, <y_{k+1} - z, y_{k+1} - y_k>)`` is accumulated with the
    adversarial selection ``z = proj(C, y_k)``.  Steps into the value at an
    ``exclude`` time (prescribed jumps) are skipped.  The check passes when
    the sum is at most ``N * tol_vi`` for ``N`` checked steps.

    This is a sound but incomplete relaxation: a single selection is tested,
    not every measurable one.
    """
    _check_partition(ms, traj.times)
    tol_t = ms.time_tol
    excl = np.asarray(list(exclude), dtype=float)
    pts = _sided_points(traj)
    total, worst, where, n = 0.0, -1.0, None, 0
    for (_, _, y0), (t, side, y1) in zip(pts, pts[1:]):
        if side != "left" and excl.size and np.min(np.abs(excl - t)) <= tol_t:
            continue
        cset = ms.set_at(t, side)
        z = cset._project(y0, cfg)[0]
        term = max(0.0, float(np.dot(y1 - z, y1 - y0)))
        total += term
        n += 1
        if term > worst:
            worst, where = term, t
    tol = max(n, 1) * tol_vi
    return CheckReport("vi_residual", total <= tol, total, where, tol, f"{n} steps checked")


def check_feasibility(traj, ms, cfg=geo.DEFAULT_PROJECTION):
    """Every stored point lies in its set, ``C(t-)``, ``C(t)`` or ``C(t+)``."""
    worst, where = 0.0, None
    for t, side, y in _sided_points(traj):
        dist = geo.distance(ms.set_at(t, side), y, cfg)
        if dist > worst:
            worst, where = dist, t
    return CheckReport("feasibility", worst <= cfg.tol_feas, worst, where, cfg.tol_feas)


def check_contraction(traj_a, traj_b):
    """``k -> ||y_k - y'_k||`` is nonincreasing, with zero tolerance.

    Distances are taken in path order: left limit, value, right limit at
    every node.
    """
    if not np.array_equal(traj_a.times, traj_b.times) or traj_a.dim != traj_b.dim:
        raise MismatchedScenario("trajectories are on different partitions")
    dist = np.linalg.norm(
        np.stack([traj_a.left - traj_b.left, traj_a.value - traj_b.value,
                  traj_a.right - traj_b.right], axis=1), axis=2).reshape(-1)
    rise = np.diff(dist)
    if rise.size == 0:
        return CheckReport("contraction", True, 0.0, None, 0.0)
    k = int(np.argmax(rise))
    worst = max(0.0, float(rise[k]))
    where = float(traj_a.times[(k + 1) // 3]) if worst > 0 else None
    return CheckReport("contraction", worst <= 0.0, worst, where, 0.0,
                       f"final distance {dist[-1]:.3e}")


def check_variation_bound(traj, ms, prescriptions=(), seed=0):
    """``pV(y) <= pV(C) + sum(score(g_t) - d_H(C(t-), C(t)))`` up to ``tol_var``.

    ``tol_var = 1e-8 + 2 * max_step * pV(C) / (b - a)``.  When a score needs
    a supremum over an unbounded set the check is skipped and reported as
    passed with a note.
    """
    a, b = ms.domain
    var_c = moving_variation(ms, a, b, seed)
    correction = 0.0
    try:
        for p in prescriptions:
            if isinstance(p, Project):
                continue
            score, dh = jump_score(p, ms, seed)
            correction += score - dh
    except Unbounded as exc:
        return CheckReport("variation_bound", True, 0.0, None, 0.0, f"skipped: {exc}")
    steps = np.diff(traj.times)
    max_step = float(steps.max()) if steps.size else 0.0
    tol = 1e-8 + 2.0 * max_step * var_c.value / (b - a)
    bound = var_c.value + correction
    excess = traj.variation_total - bound
    notes = f"pV(y)={traj.variation_total:.12g} bound={bound:.12g}"
    if var_c.approximate:
        notes += " (approximate Hausdorff)"
    return CheckReport("variation_bound", excess <= tol, max(0.0, excess), float(b), tol, notes)


def _sup_gap(ta, tb):
    if not np.array_equal(ta.times, tb.times):
        raise MismatchedScenario("trajectories are on different partitions")
    gap = np.maximum(np.linalg.norm(ta.value - tb.value, axis=1),
                     np.linalg.norm(ta.left - tb.left, axis=1))
    k = int(np.argmax(gap))
    return float(gap[k]), float(ta.times[k])


def check_play_properties(inp, cfg=SolverConfig(), segment_tol=1e-8):
    """Rate independence, the two-pipeline identity and the extended-play variation bound.

    Returns
    -------
    list of CheckReport
        Three rate-independence reports (identity, square, flat), the
        agreement between :class:`SegmentPlay`-prescribed sweeping and
        :func:`play_bar`, and ``pV(play_bar(u)) <= pV(u)``.
    """
    from .play import canned_reparametrizations, check_rate_independence, play_bar, segment_prescriptions

    u = inp.u
    reports = []
    for name, psi in canned_reparametrizations(u.a, u.b).items():
        r = check_rate_independence(inp, psi, cfg)
        reports.append(CheckReport(f"rate_independence[{name}]", r.passed, r.worst_violation,
                                   r.location, r.tolerance_used, r.notes))
    bar = play_bar(inp, cfg, tol=segment_tol)
    seg = solve_prescribed(inp.moving_set, segment_prescriptions(u), inp.y0, cfg)
    gap, where = _sup_gap(bar, seg)
    tol = 2.0 * (cfg.tol_traj + segment_tol)
    reports.append(CheckReport("segment_play_equivalence", gap <= tol, gap, where, tol))
    var_u = variation(u, u.a, u.b)
    excess = bar.variation_total - var_u
    reports.append(CheckReport("play_bar_variation", excess <= 1e-9, max(0.0, excess),
                               float(u.b), 1e-9, f"pV(y)={bar.variation_total:.12g} pV(u)={var_u:.12g}"))
    return reports
