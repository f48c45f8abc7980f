"""Bounded-variation curves with finitely many breakpoints.

A :class:`BVPath` on ``[a, b]`` stores, at each breakpoint ``t_i``, three
vectors: the left limit ``f(t_i-)``, the value ``f(t_i)`` and the right limit
``f(t_i+)``.  Between breakpoints the path is affine from ``f(t_i+)`` to
``f(t_{i+1}-)``.  The conventions ``f(a-) = f(a)`` and ``f(b+) = f(b)`` are
enforced at construction.

Times closer than ``1e-12 * (b - a)`` to a breakpoint are treated as that
breakpoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

from .errors import OutOfDomain, ScenarioError

__all__ = [
    "BVPath",
    "ArcLengthParam",
    "Side",
    "eval_path",
    "variation",
    "arc_length",
    "compose",
    "path_to_json",
    "path_from_json",
]

Side = Literal["left", "value", "right"]
TIME_RTOL = 1e-12


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BVPath:
    """Piecewise-affine BV curve with explicit one-sided limits.

    Parameters
    ----------
    times : array_like, shape (m+1,)
        Strictly increasing breakpoints; ``times[0] = a``, ``times[-1] = b``.
    left, right : array_like, shape (m+1, d)
        One-sided limits at each breakpoint.
    value : array_like, shape (m+1, d), optional
        Values at the breakpoints; defaults to ``right`` (a right-continuous
        path).
    """

    times: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).reshape(-1)
        left = np.asarray(self.left, dtype=float)
        right = np.asarray(self.right, dtype=float)
        value = right if self.value is None else np.asarray(self.value, dtype=float)
        if left.ndim == 1:
            left, right, value = left[:, None], right[:, None], value[:, None]
        if times.size < 2:
            raise ScenarioError("breakpoints", "need at least two breakpoints")
        if not np.all(np.diff(times) > 0):
            raise ScenarioError("breakpoints", "times must be strictly increasing")
        for name, arr in (("left", left), ("right", right), ("value", value)):
            if arr.shape != (times.size, left.shape[1]):
                raise ScenarioError(name, f"expected shape {(times.size, left.shape[1])}")
            if not np.all(np.isfinite(arr)):
                raise ScenarioError(name, "values must be finite")
        if not np.all(np.isfinite(times)):
            raise ScenarioError("breakpoints", "times must be finite")
        left = left.copy()
        right = right.copy()
        left[0] = value[0]
        right[-1] = value[-1]
        object.__setattr__(self, "times", _frozen(times))
        object.__setattr__(self, "left", _frozen(left))
        object.__setattr__(self, "right", _frozen(right))
        object.__setattr__(self, "value", _frozen(value))

    @classmethod
    def from_points(cls, times, points):
        """Continuous piecewise-linear path through ``points``."""
        pts = np.asarray(points, dtype=float)
        return cls(times, pts, pts, pts)

    @classmethod
    def constant(cls, a, b, point):
        p = np.atleast_1d(np.asarray(point, dtype=float))
        pts = np.vstack([p, p])
        return cls([a, b], pts, pts, pts)

    @property
    def a(self):
        return float(self.times[0])

    @property
    def b(self):
        return float(self.times[-1])

    @property
    def dim(self):
        return self.left.shape[1]

    @property
    def right_continuous(self):
        return bool(np.array_equal(self.value, self.right))

    @property
    def time_tol(self):
        return TIME_RTOL * (self.b - self.a)

    def locate(self, t):
        """Return ``(i, exact)``.

        ``exact`` means ``t`` is breakpoint ``i``; otherwise ``t`` lies in the
        open segment ``(t_i, t_{i+1})``.
        """
        tol = self.time_tol
        if t < self.a - tol or t > self.b + tol:
            raise OutOfDomain(f"t={t} outside [{self.a}, {self.b}]")
        times = self.times
        j = int(np.searchsorted(times, t))
        if j < times.size and times[j] - t <= tol:
            return j, True
        if j > 0 and t - times[j - 1] <= tol:
            return j - 1, True
        return j - 1, False

    def __call__(self, t, side="value"):
        return eval_path(self, t, side)

    def jump_indices(self):
        """Indices of breakpoints where the path is discontinuous."""
        jl = np.any(self.left != self.value, axis=1)
        jr = np.any(self.right != self.value, axis=1)
        return np.flatnonzero(jl | jr)

    def right_continuous_version(self):
        """The path with every value replaced by its right limit."""
        return BVPath(self.times, self.left, self.right, self.right)

    def _pieces(self):
        seg = np.linalg.norm(self.left[1:] - self.right[:-1], axis=1)
        jl = np.linalg.norm(self.value - self.left, axis=1)
        jr = np.linalg.norm(self.right - self.value, axis=1)
        return seg, jl, jr

    def _cumulative(self):
        # variation on [a, t_i] (includes the jump into t_i) and on [a, t_i+]
        seg, jl, jr = self._pieces()
        at = np.empty(self.times.size)
        after = np.empty(self.times.size)
        acc = 0.0
        for i in range(self.times.size):
            if i > 0:
                acc += seg[i - 1]
            acc += jl[i]
            at[i] = acc
            acc += jr[i]
            after[i] = acc
        return at, after, seg

    def _cumvar(self, t):
        at, after, seg = self._cum
        i, exact = self.locate(t)
        if exact:
            return at[i]
        theta = (t - self.times[i]) / (self.times[i + 1] - self.times[i])
        return after[i] + theta * seg[i]

    @property
    def _cum(self):
        cached = self.__dict__.get("_cum_cache")
        if cached is None:
            cached = self._cumulative()
            object.__setattr__(self, "_cum_cache", cached)
        return cached


def eval_path(path, t, side="value"):
    """Evaluate ``f(t-)``, ``f(t)`` or ``f(t+)``.

    Raises :class:`OutOfDomain` outside ``[a, b]``.
    """
    i, exact = path.locate(t)
    if exact:
        if side == "left":
            return path.left[i].copy()
        if side == "right":
            return path.right[i].copy()
        if side == "value":
            return path.value[i].copy()
        raise ValueError(f"unknown side {side!r}")
    t0, t1 = path.times[i], path.times[i + 1]
    theta = (t - t0) / (t1 - t0)
    return (1.0 - theta) * path.right[i] + theta * path.left[i + 1]


def variation(path, s, t):
    """Pointwise variation of ``path`` on the closed interval ``[s, t]``.

    Computed exactly as the sum of segment lengths and jump magnitudes inside
    ``[s, t]``: the jump ``f(s) -> f(s+)`` counts, ``f(s-) -> f(s)`` does not,
    and symmetrically at ``t``.
    """
    if s > t:
        raise ValueError("need s <= t")
    return float(path._cumvar(t) - path._cumvar(s))


class ArcLengthParam(NamedTuple):
    """Normalized arc-length parametrization ``f = filled o ell``."""

    ell: BVPath
    filled: BVPath
    lip_bound: float


def arc_length(path):
    """Split ``path`` into an arc-length clock and a jump-free Lipschitz curve.

    ``ell(t) = a + (b - a) * V(a, t) / V(a, b)`` where ``V`` is the pointwise
    variation (``ell = a`` when the path is constant).  ``filled`` runs
    through the same values at unit-normalized speed, crossing each jump of
    the path along the straight segment from ``f(t-)`` to ``f(t)`` and then to
    ``f(t+)``.

    Returns
    -------
    ArcLengthParam
    """
    a, b = path.a, path.b
    at, after, seg = path._cum
    total = after[-1]
    _, jl, _ = path._pieces()
    if total == 0.0:
        ell = BVPath.constant(a, b, [a])
        return ArcLengthParam(ell, BVPath.constant(a, b, path.value[0]), 0.0)

    k = (b - a) / total
    ell_left = a + k * (at - jl)
    ell_value = a + k * at
    ell_right = a + k * after
    ell_left[0] = ell_value[0] = a
    ell_value[-1] = ell_right[-1] = b
    if jl[-1] == 0:
        ell_left[-1] = b
    ell = BVPath(path.times, ell_left[:, None], ell_right[:, None], ell_value[:, None])

    knots = np.column_stack([ell_left, ell_value, ell_right]).reshape(-1)
    vals = np.stack([path.left, path.value, path.right], axis=1).reshape(-1, path.dim)
    tol = TIME_RTOL * (b - a)
    keep_t, keep_v = [knots[0]], [vals[0]]
    for sigma, v in zip(knots[1:], vals[1:]):
        if sigma - keep_t[-1] <= tol:
            # coincident knots carry the same point; keep the later one
            keep_v[-1] = v
        else:
            keep_t.append(sigma)
            keep_v.append(v)
    keep_t[0] = a
    keep_t[-1] = b
    if len(keep_t) == 1:
        keep_t = [a, b]
        keep_v = [keep_v[0], keep_v[0]]
    filled = BVPath.from_points(keep_t, np.array(keep_v))
    return ArcLengthParam(ell, filled, total / (b - a))


def _increasing_before(g, i):
    return i > 0 and g.left[i, 0] > g.right[i - 1, 0]


def _increasing_after(g, i):
    return i < g.times.size - 1 and g.left[i + 1, 0] > g.right[i, 0]


def compose(f, g, extra_times=()):
    """The path ``t -> f(g(t))`` for a scalar nondecreasing ``g``.

    Breakpoints are those of ``g``, the preimages of ``f``'s breakpoints on
    the strictly increasing pieces of ``g``, and any ``extra_times``.  One-sided
    limits follow ``g``: where ``g`` approaches a level strictly from below
    the left limit of ``f`` is used, where ``g`` is flat the value is.

    Raises :class:`OutOfDomain` if the range of ``g`` leaves the domain of ``f``.
    """
    if g.dim != 1:
        raise ValueError("inner path must be scalar")
    gl = g.left[:, 0]
    gr = g.right[:, 0]
    gv = g.value[:, 0]
    tol = f.time_tol
    lo = min(gl.min(), gr.min(), gv.min())
    hi = max(gl.max(), gr.max(), gv.max())
    if lo < f.a - tol or hi > f.b + tol:
        raise OutOfDomain(f"range [{lo}, {hi}] of inner path leaves [{f.a}, {f.b}]")

    times = list(g.times)
    for i in range(g.times.size - 1):
        r, l = gr[i], gl[i + 1]
        if l <= r:
            continue
        t0, t1 = g.times[i], g.times[i + 1]
        for sigma in f.times:
            if r < sigma < l:
                times.append(t0 + (sigma - r) / (l - r) * (t1 - t0))
    times.extend(float(t) for t in extra_times)
    times = np.sort(np.asarray(times, dtype=float))
    merged = [times[0]]
    for t in times[1:]:
        if t - merged[-1] > g.time_tol:
            merged.append(t)
    merged[-1] = g.b

    left, value, right = [], [], []
    for t in merged:
        i, exact = g.locate(t)
        if exact:
            gval = gv[i]
            v = eval_path(f, gval, "value")
            lv = eval_path(f, gl[i], "left" if _increasing_before(g, i) else "value")
            rv = eval_path(f, gr[i], "right" if _increasing_after(g, i) else "value")
        else:
            gval = float(eval_path(g, t)[0])
            v = eval_path(f, gval, "value")
            if _increasing_after(g, i):
                lv = eval_path(f, gval, "left")
                rv = eval_path(f, gval, "right")
            else:
                lv = rv = v
        left.append(lv)
        value.append(v)
        right.append(rv)
    return BVPath(merged, np.array(left), np.array(right), np.array(value))


def path_to_json(path):
    return {
        "domain": [path.a, path.b],
        "breakpoints": [
            {"t": float(t), "left": list(map(float, l)), "right": list(map(float, r)),
             **({} if np.array_equal(v, r) else {"value": list(map(float, v))})}
            for t, l, v, r in zip(path.times, path.left, path.value, path.right)
        ],
        "right_continuous": path.right_continuous,
    }


def path_from_json(obj, field="path"):
    """Decode a path.  A breakpoint may carry an optional ``value`` entry."""
    if not isinstance(obj, dict) or "breakpoints" not in obj:
        raise ScenarioError(f"{field}.breakpoints", "missing")
    bps = obj["breakpoints"]
    if not isinstance(bps, list) or len(bps) < 2:
        raise ScenarioError(f"{field}.breakpoints", "need a list of at least two breakpoints")
    times, left, right, value = [], [], [], []
    for i, bp in enumerate(bps):
        where = f"{field}.breakpoints[{i}]"
        for key in ("t", "left", "right"):
            if not isinstance(bp, dict) or key not in bp:
                raise ScenarioError(f"{where}.{key}", "missing")
        try:
            times.append(float(bp["t"]))
            left.append(np.atleast_1d(np.asarray(bp["left"], dtype=float)))
            right.append(np.atleast_1d(np.asarray(bp["right"], dtype=float)))
            value.append(np.atleast_1d(np.asarray(bp.get("value", bp["right"]), dtype=float)))
        except (TypeError, ValueError):
            raise ScenarioError(where, "expected numbers") from None
    try:
        path = BVPath(times, np.array(left), np.array(right), np.array(value))
    except ScenarioError as exc:
        raise ScenarioError(f"{field}.{exc.field}", str(exc).split(": ", 1)[-1]) from None
    except ValueError as exc:
        raise ScenarioError(f"{field}.breakpoints", str(exc)) from None
    if "domain" in obj:
        dom = obj["domain"]
        if (not isinstance(dom, list) or len(dom) != 2
                or float(dom[0]) != path.a or float(dom[1]) != path.b):
            raise ScenarioError(f"{field}.domain", "must equal [first t, last t]")
    if obj.get("right_continuous") is True and not path.right_continuous:
        raise ScenarioError(f"{field}.right_continuous",
                            "path marked right-continuous but some value differs from right")
    return path
