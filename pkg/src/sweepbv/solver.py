"""Sweeping-process solvers.

All solvers discretize time on a partition that contains every breakpoint of
the moving set and every prescription time, and run Moreau's catching-up
recursion ``y_{k+1} = proj(C(t_{k+1}), y_k)`` between them.  At a node where
the set jumps, the point is first projected on the left limit ``C(t-)`` and
then mapped into ``C(t)``, either by projection (the default) or by a
prescribed jump map.

Jump maps are chosen from a closed list (:class:`Project`,
:class:`DoubleProject`, :class:`SegmentPlay`, :class:`FixedTarget`), all of
which are 1-Lipschitz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np

from . import geometry as geo
from .bvpath import BVPath, eval_path
from .errors import InfeasibleStart, MismatchedScenario, PrescriptionInfeasible, ScenarioError
from .movingset import TranslateMode

__all__ = [
    "Project",
    "DoubleProject",
    "SegmentPlay",
    "FixedTarget",
    "JumpPrescription",
    "SolverConfig",
    "RefinementReport",
    "Trajectory",
    "uniform_partition",
    "catching_up",
    "solve_prescribed",
    "truncate_jump_set",
    "jump_score",
    "solve_general_bv",
    "prescription_from_json",
    "prescription_to_json",
]


@dataclass(frozen=True)
class Project:
    """``y(t) = proj(C(t), y(t-))``; the default at every jump."""

    t: float


@dataclass(frozen=True)
class DoubleProject:
    """Project on ``C(t)`` then on ``C(t+)``; only meaningful for :func:`solve_general_bv`."""

    t: float


@dataclass(frozen=True)
class SegmentPlay:
    """Traverse the jump of a translate-mode input along a straight segment.

    The play operator is run along ``u(t-) -> u(t)`` with ``substeps`` uniform
    steps.  With ``adaptive`` the step count is doubled until the end point
    moves less than ``tol`` or ``max_substeps`` is reached; a fixed count
    keeps the map exactly 1-Lipschitz.
    """

    t: float
    substeps: int = 256
    adaptive: bool = True
    tol: float = 1e-8
    max_substeps: int = 2 ** 16

    def __post_init__(self):
        if int(self.substeps) < 1:
            raise ScenarioError("substeps", "must be a positive integer")


@dataclass(frozen=True)
class FixedTarget:
    """Send every incoming point to ``point``, which must lie in ``C(t)``."""

    t: float
    point: tuple

    def __post_init__(self):
        object.__setattr__(self, "point", tuple(float(v) for v in np.atleast_1d(self.point)))


JumpPrescription = Union[Project, DoubleProject, SegmentPlay, FixedTarget]


@dataclass(frozen=True)
class SolverConfig:
    base_steps: int = 64
    max_refine: int = 6
    tol_traj: float = 1e-6
    projection: geo.ProjectionConfig = geo.DEFAULT_PROJECTION
    jump_truncation_eps: float = 0.0

    def __post_init__(self):
        if self.base_steps < 1:
            raise ScenarioError("config.base_steps", "must be >= 1")
        if self.max_refine < 0:
            raise ScenarioError("config.max_refine", "must be >= 0")
        if not self.tol_traj > 0:
            raise ScenarioError("config.tol_traj", "must be > 0")
        if self.jump_truncation_eps < 0:
            raise ScenarioError("config.jump_truncation_eps", "must be >= 0")

    @property
    def tol_feas(self):
        return self.projection.tol_feas


class RefinementReport(NamedTuple):
    """Refinement outcome; ``history`` holds the gap at each level after the first."""

    levels: int
    gap: float
    converged: bool
    steps: int
    history: tuple = ()


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Discrete solution on a partition.

    ``left``, ``value`` and ``right`` hold ``y(t-)``, ``y(t)`` and ``y(t+)`` at
    each node; they differ only at nodes flagged in ``jumps``.  Between
    consecutive nodes the solution moves from ``right[k]`` to ``left[k+1]``.
    """

    times: np.ndarray
    left: np.ndarray
    value: np.ndarray
    right: np.ndarray
    jumps: np.ndarray
    refinement: RefinementReport | None = None
    truncation_bound: float = 0.0
    aux: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        for name in ("times", "left", "value", "right", "jumps"):
            arr = np.array(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def dim(self):
        return self.value.shape[1]

    def points(self):
        """``(t, side, y)`` in path order: left limit, value, right limit at jumps."""
        out = []
        for k, t in enumerate(self.times):
            if self.jumps[k] and not np.array_equal(self.left[k], self.value[k]):
                out.append((float(t), "left", self.left[k]))
            out.append((float(t), "value", self.value[k]))
            if not np.array_equal(self.right[k], self.value[k]):
                out.append((float(t), "right", self.right[k]))
        return out

    def rows(self):
        """``(t, side, y, step_norm)`` with the length of the move into each point."""
        rows = []
        prev = None
        for t, side, y in self.points():
            step = 0.0 if prev is None else float(np.linalg.norm(y - prev))
            rows.append((t, side, y, step))
            prev = y
        return rows

    @property
    def displacements(self):
        pts = [p[2] for p in self.points()]
        return np.diff(np.array(pts), axis=0)

    @property
    def variation_total(self):
        return float(sum(r[3] for r in self.rows()))

    def as_path(self):
        """The induced BV path (nodes must be strictly increasing)."""
        return BVPath(self.times, self.left, self.right, self.value)


def _merge_times(times, tol):
    times = np.sort(np.asarray(times, dtype=float))
    out = [times[0]]
    for t in times[1:]:
        if t - out[-1] > tol:
            out.append(t)
    return np.array(out)


def uniform_partition(anchors, base_steps, level=0):
    """Partition containing ``anchors`` with uniform subdivision in between.

    Each gap between anchors gets ``max(1, round(base_steps * share))``
    steps, doubled ``level`` times, so coarser partitions are exact subsets of
    finer ones.
    """
    anchors = np.asarray(anchors, dtype=float)
    a, b = anchors[0], anchors[-1]
    nodes = []
    for t0, t1 in zip(anchors[:-1], anchors[1:]):
        n = max(1, int(round(base_steps * (t1 - t0) / (b - a)))) * 2 ** level
        nodes.extend(t0 + (t1 - t0) * (i / n) for i in range(n))
    nodes.append(b)
    return np.array(nodes)


def _check_partition(ms, times):
    a, b = ms.domain
    tol = ms.time_tol
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise ValueError("partition must be a nonempty 1-D sequence")
    if np.any(np.diff(times) < 0):
        raise ValueError("partition must be nondecreasing")
    if abs(times[0] - a) > tol or abs(times[-1] - b) > tol:
        raise MismatchedScenario("partition must start at a and end at b")
    for t in ms.anchors():
        if np.min(np.abs(times - t)) > tol:
            raise MismatchedScenario(f"partition misses breakpoint {t}")
    return times


def _sweep(ms, times, y_start, maps, pcfg):
    """Catching-up over ``times`` with jump maps keyed by node index."""
    n = len(times)
    d = ms.dim
    left = np.empty((n, d))
    value = np.empty((n, d))
    jumps = np.zeros(n, dtype=bool)
    y = np.array(y_start, dtype=float)
    left[0] = value[0] = y
    for k in range(1, n):
        t = float(times[k])
        cv = ms.set_at(t, "value")
        if times[k] == times[k - 1]:
            y, _, _ = cv._project(y, pcfg)
            left[k] = value[k] = y
            continue
        cl = ms.set_at(t, "left")
        g = maps.get(k)
        if g is None and cl == cv:
            y, _, _ = cv._project(y, pcfg)
            left[k] = value[k] = y
            continue
        yl, _, _ = cl._project(y, pcfg)
        y = g(yl) if g is not None else cv._project(yl, pcfg)[0]
        left[k], value[k] = yl, y
        jumps[k] = True
    return left, value, jumps


def _trajectory(times, left, value, jumps, **kw):
    return Trajectory(np.asarray(times, dtype=float), left, value, value.copy(), jumps, **kw)


def catching_up(ms, y0, times, cfg=geo.DEFAULT_PROJECTION):
    """Moreau's catching-up scheme on an explicit partition.

    ``y_0 = proj(C(a), y0)`` and ``y_{k+1} = proj(C(t_{k+1}), y_k)``; at jump
    nodes the point passes through ``proj(C(t-), .)`` first.  Repeated nodes
    are allowed and project again on the same set.

    Raises
    ------
    InfeasibleStart
        If ``y0`` is farther than ``cfg.tol_feas`` from ``C(a)``.
    """
    times = _check_partition(ms, times)
    y_start = _snap_start(ms, y0, cfg)
    left, value, jumps = _sweep(ms, times, y_start, {}, cfg)
    return _trajectory(times, left, value, jumps)


def _snap_start(ms, y0, pcfg):
    a = ms.domain[0]
    c0 = ms.set_at(a, "value")
    y0 = np.asarray(y0, dtype=float).reshape(-1)
    if y0.shape[0] != ms.dim:
        raise ScenarioError("y0", f"expected {ms.dim} coordinates")
    p, _, _ = c0._project(y0, pcfg)
    gap = float(np.linalg.norm(p - y0))
    if gap > pcfg.tol_feas:
        raise InfeasibleStart(f"y0 is {gap:.3e} away from C(a)")
    return p


def _refine(run, anchors, cfg, times=None):
    """Run ``run(times)`` on doubling partitions until the sup-norm gap settles.

    With an explicit ``times`` the run happens once, without a report.
    """
    if times is not None:
        times = np.asarray(times, dtype=float)
        missing = [t for t in anchors if np.min(np.abs(times - t)) > 1e-12 * (anchors[-1] - anchors[0])]
        if missing or np.any(np.diff(times) <= 0):
            raise MismatchedScenario("partition must be increasing and contain every anchor")
        return (times, *run(times), None)
    prev_times = prev = None
    gap = math.nan
    history = []
    for level in range(cfg.max_refine + 1):
        times = uniform_partition(anchors, cfg.base_steps, level)
        left, value, jumps, extra = run(times)
        if prev is not None:
            index = {t: k for k, t in enumerate(times)}
            idx = np.array([index[t] for t in prev_times])
            gap = float(max(np.max(np.linalg.norm(value[idx] - prev[1], axis=1)),
                            np.max(np.linalg.norm(left[idx] - prev[0], axis=1))))
            history.append(gap)
            if gap <= cfg.tol_traj:
                report = RefinementReport(level, gap, True, len(times) - 1, tuple(history))
                return times, left, value, jumps, extra, report
        prev_times, prev = times, (left, value)
    report = RefinementReport(cfg.max_refine, gap, False, len(times) - 1, tuple(history))
    return times, left, value, jumps, extra, report


def _segment_map(ms, p, side, pcfg):
    from .play import segment_play_jump

    if not isinstance(ms, TranslateMode):
        raise ScenarioError("prescriptions", "segment_play requires a translate-mode moving set")
    t = p.t
    start, end = ("left", "value") if side == "left" else ("value", "right")
    u0 = eval_path(ms.path, t, start)
    u1 = eval_path(ms.path, t, end)

    def g(x):
        return segment_play_jump(ms.base, u0, u1, x, p.substeps, adaptive=p.adaptive,
                                 tol=p.tol, max_substeps=p.max_substeps, cfg=pcfg)

    return g


def _jump_map(ms, p, pcfg, side="left"):
    """Callable for prescription ``p``: ``C(t-) -> C(t)`` or ``C(t) -> C(t+)``."""
    target_side = "value" if side == "left" else "right"
    target = ms.set_at(p.t, target_side)
    if isinstance(p, (Project, DoubleProject)):
        source = ms.set_at(p.t, "left" if side == "left" else "value")
        if source == target:
            # identity on the set; reprojecting would only add rounding
            return lambda x: x.copy()
        return lambda x: target._project(x, pcfg)[0]
    if isinstance(p, FixedTarget):
        point = np.array(p.point)
        if point.shape[0] != ms.dim:
            raise ScenarioError("prescriptions.target", f"expected {ms.dim} coordinates")
        if geo.distance(target, point, pcfg) > pcfg.tol_feas:
            raise PrescriptionInfeasible(f"target {p.point} is outside C({p.t})")
        return lambda x: point.copy()
    if isinstance(p, SegmentPlay):
        return _segment_map(ms, p, side, pcfg)
    raise TypeError(f"unsupported prescription {p!r}")


def _validate_times(ms, prescriptions, allow_a=False):
    a, b = ms.domain
    tol = ms.time_tol
    seen = set()
    for p in prescriptions:
        if not (a - tol <= p.t <= b + tol) or (not allow_a and p.t <= a + tol):
            raise ScenarioError("prescriptions.t", f"time {p.t} outside (a, b]")
        if p.t in seen:
            raise ScenarioError("prescriptions.t", f"two prescriptions at t={p.t}")
        seen.add(p.t)


def _node_maps(times, by_time, tol):
    maps = {}
    for t, g in by_time.items():
        k = int(np.argmin(np.abs(times - t)))
        if abs(times[k] - t) > tol:
            raise MismatchedScenario(f"prescription time {t} missing from partition")
        while k > 0 and times[k - 1] == times[k]:
            k -= 1
        maps[k] = g
    return maps


def jump_score(p, ms, seed=0):
    """Upper bound for ``sup_{x in C(t-)} ||g_t(x) - x||`` and ``d_H(C(t-), C(t))``.

    The score is exact for :class:`FixedTarget` (farthest point of ``C(t-)``);
    for projections and segment traversals it is the Hausdorff distance of
    the jump, which dominates their displacement.
    """
    cl = ms.set_at(p.t, "left")
    cv = ms.set_at(p.t, "value")
    dh = 0.0 if cl == cv else geo.hausdorff(cl, cv, seed).value
    if isinstance(p, FixedTarget):
        return geo.farthest_distance(cl, p.point), dh
    return dh, dh


def truncate_jump_set(prescriptions, ms, eps, seed=0):
    """Replace low-impact prescriptions by plain projection.

    Prescriptions whose score falls below ``eps`` become :class:`Project`.
    The returned bound, the sum over dropped jumps of
    ``score + d_H(C(t-), C(t))``, dominates the sup-norm change of the
    solution.

    Returns
    -------
    kept : list
    error_bound : float
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    kept, bound = [], 0.0
    for p in prescriptions:
        if eps > 0 and not isinstance(p, Project):
            score, dh = jump_score(p, ms, seed)
            if score < eps:
                kept.append(Project(p.t))
                bound += score + dh
                continue
        kept.append(p)
    return kept, bound


def solve_prescribed(ms, prescriptions, y0, cfg=SolverConfig(), times=None):
    """Sweeping process with prescribed behaviour at finitely many times.

    The partition is split at each prescription time; catching-up runs in
    between and ``y(t) = g_t(y(t-))`` at the split points.  Jumps of ``ms``
    without a prescription are handled by projection.  Partitions are doubled
    until successive solutions differ by at most ``cfg.tol_traj`` at shared
    nodes or ``cfg.max_refine`` is reached.

    Parameters
    ----------
    ms : TranslateMode or FamilyMode
        Right-continuous moving set.
    prescriptions : list of JumpPrescription
        At most one per time, all in ``(a, b]``.
    y0 : array_like
        Initial point, within ``tol_feas`` of ``C(a)``.
    cfg : SolverConfig
    times : array_like, optional
        Fixed increasing partition containing every breakpoint and
        prescription time; disables refinement.

    Returns
    -------
    Trajectory
        ``refinement.converged`` is false when ``max_refine`` was hit.
    """
    if not ms.right_continuous:
        raise ScenarioError("moving_set", "not right-continuous; use solve_general_bv")
    prescriptions = list(prescriptions)
    for p in prescriptions:
        if isinstance(p, DoubleProject):
            raise ScenarioError("prescriptions.kind", "double_project needs solve_general_bv")
    _validate_times(ms, prescriptions)
    bound = 0.0
    if cfg.jump_truncation_eps > 0:
        prescriptions, bound = truncate_jump_set(prescriptions, ms, cfg.jump_truncation_eps)
    pcfg = cfg.projection
    by_time = {p.t: _jump_map(ms, p, pcfg) for p in prescriptions}
    y_start = _snap_start(ms, y0, pcfg)
    anchors = _merge_times(np.concatenate([ms.anchors(), list(by_time)]), ms.time_tol)

    def run(times):
        maps = _node_maps(times, by_time, ms.time_tol)
        return (*_sweep(ms, times, y_start, maps, pcfg), None)

    times, left, value, jumps, _, report = _refine(run, anchors, cfg, times)
    return _trajectory(times, left, value, jumps, refinement=report, truncation_bound=bound)


def solve_general_bv(ms, y0, cfg=SolverConfig(), left_maps=(), right_maps=(), times=None):
    """Sweeping process driven by a moving set that need not be right-continuous.

    At each jump ``t`` the solution passes through three states:
    ``y(t) = g_l(y(t-))`` in ``C(t)`` and ``y(t+) = g_r(y(t))`` in ``C(t+)``.
    Both maps default to projection; ``left_maps``/``right_maps`` override
    them per time (a :class:`DoubleProject` entry keeps the defaults).  The
    initial value is ``y(a) = proj(C(a), y0)`` for any ``y0``.

    The solve runs on the right-continuous version of ``ms`` with composite
    jump maps ``g_r o g_l``; the values ``y(t)`` are filled in afterwards.
    """
    pcfg = cfg.projection
    left_maps, right_maps = list(left_maps), list(right_maps)
    _validate_times(ms, left_maps, allow_a=True)
    _validate_times(ms, right_maps, allow_a=True)
    a, b = ms.domain
    tol = ms.time_tol
    lmap = {p.t: p for p in left_maps}
    rmap = {p.t: p for p in right_maps}
    jump_t = [float(t) for t in ms.anchors()
              if not (ms.set_at(t, "left") == ms.set_at(t, "value") == ms.set_at(t, "right"))]
    special = sorted(set(jump_t) | set(lmap) | set(rmap))

    def left_fn(t):
        p = lmap.get(t)
        if p is None or isinstance(p, DoubleProject):
            p = Project(t)
        return _jump_map(ms, p, pcfg, "left")

    def right_fn(t):
        p = rmap.get(t)
        if (p is None or isinstance(p, (DoubleProject, Project))) and \
                ms.set_at(t, "value") == ms.set_at(t, "right"):
            return None
        return _jump_map(ms, p if p is not None else Project(t), pcfg, "right")

    gl = {t: left_fn(t) for t in special}
    gr = {t: right_fn(t) for t in special}

    y0 = np.asarray(y0, dtype=float).reshape(-1)
    if y0.shape[0] != ms.dim:
        raise ScenarioError("y0", f"expected {ms.dim} coordinates")
    a_key = next((t for t in special if abs(t - a) <= tol), None)
    if a_key is not None and a_key in lmap and not isinstance(lmap[a_key], (Project, DoubleProject)):
        y_a = gl[a_key](y0)
    else:
        y_a = ms.set_at(a, "value")._project(y0, pcfg)[0]
    y_a_plus = gr[a_key](y_a) if a_key is not None and gr[a_key] is not None else y_a

    def composite(t):
        fl, fr = gl[t], gr[t]
        return fl if fr is None else (lambda x: fr(fl(x)))

    by_time = {t: composite(t) for t in special if abs(t - a) > tol}
    reg = ms.regularized()
    anchors = _merge_times(np.concatenate([ms.anchors(), special]), tol)

    def run(times):
        maps = _node_maps(times, by_time, tol)
        return (*_sweep(reg, times, y_a_plus, maps, pcfg), None)

    times, left, value_hat, jumps, _, report = _refine(run, anchors, cfg, times)
    jumps = jumps.copy()
    value = value_hat.copy()
    right = value_hat.copy()
    for k, t in _node_maps(times, {t: t for t in by_time}, tol).items():
        value[k] = gl[t](left[k])
        jumps[k] = True
    value[0] = left[0] = y_a
    right[0] = y_a_plus
    jumps[0] = not np.array_equal(y_a, y_a_plus)
    return Trajectory(times, left, value, right, jumps, refinement=report)


_KINDS = {"project": Project, "double_project": DoubleProject,
          "segment_play": SegmentPlay, "fixed_target": FixedTarget}


def prescription_from_json(obj, field="prescriptions"):
    if not isinstance(obj, dict):
        raise ScenarioError(field, "expected an object")
    for key in ("t", "kind"):
        if key not in obj:
            raise ScenarioError(f"{field}.{key}", "missing")
    kind = obj["kind"]
    if kind not in _KINDS:
        raise ScenarioError(f"{field}.kind", f"unknown kind {kind!r}")
    t = float(obj["t"])
    if kind == "fixed_target":
        if "target" not in obj:
            raise ScenarioError(f"{field}.target", "missing")
        return FixedTarget(t, obj["target"])
    if kind == "segment_play":
        try:
            return SegmentPlay(t, int(obj.get("substeps", 256)),
                               adaptive=bool(obj.get("adaptive", True)))
        except ScenarioError as exc:
            raise ScenarioError(f"{field}.substeps", str(exc).split(": ", 1)[-1]) from None
    return _KINDS[kind](t)


def prescription_to_json(p):
    kind = {v: k for k, v in _KINDS.items()}[type(p)]
    out = {"t": p.t, "kind": kind}
    if isinstance(p, FixedTarget):
        out["target"] = list(p.point)
    if isinstance(p, SegmentPlay):
        out["substeps"] = p.substeps
        out["adaptive"] = p.adaptive
    return out
