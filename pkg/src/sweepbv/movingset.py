"""Time-indexed convex sets ``t -> C(t)``.

Two representations are provided:

* :class:`TranslateMode` -- a fixed shape moved along a path,
  ``C(t) = u(t) - Z``.  One-sided limits and variation are exact.
* :class:`FamilyMode` -- consecutive segments on which the parameters of a
  set (center, radius, bounds, offsets, shift) move affinely in time, with
  optional values at the segment boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from . import geometry as geo
from .bvpath import BVPath, eval_path, path_from_json, path_to_json, variation
from .errors import OutOfDomain, ScenarioError

__all__ = [
    "TranslateMode",
    "FamilyMode",
    "FamilySegment",
    "MovingSet",
    "JumpRecord",
    "VariationResult",
    "set_at",
    "moving_variation",
    "jump_times",
    "moving_set_to_json",
    "moving_set_from_json",
]

REFINE_LEVELS = 16
REFINE_RTOL = 1e-6


class JumpRecord(NamedTuple):
    t: float
    left_set: object
    at_set: object
    right_set: object


class VariationResult(NamedTuple):
    value: float
    approximate: bool = False


@dataclass(frozen=True, eq=False)
class TranslateMode:
    """``C(t) = path(t) - base``."""

    base: object
    path: BVPath

    def __post_init__(self):
        if self.base.dim != self.path.dim:
            raise ScenarioError("path", "path dimension differs from the base set")

    @property
    def dim(self):
        return self.path.dim

    @property
    def domain(self):
        return self.path.a, self.path.b

    @property
    def time_tol(self):
        return self.path.time_tol

    def anchors(self):
        return np.array(self.path.times)

    def set_at(self, t, side="value"):
        return geo.Translate(self.base, tuple(eval_path(self.path, t, side)))

    @property
    def right_continuous(self):
        return self.path.right_continuous

    def regularized(self):
        return TranslateMode(self.base, self.path.right_continuous_version())


def _lerp(x0, x1, theta):
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    return tuple((1.0 - theta) * x0 + theta * x1)


def _interpolate(start, end, theta):
    if theta == 0.0:
        return start
    if theta == 1.0:
        return end
    if isinstance(start, geo.Ball):
        return geo.Ball(_lerp(start.center, end.center, theta),
                        (1.0 - theta) * start.radius + theta * end.radius)
    if isinstance(start, geo.Box):
        return geo.Box(_lerp(start.lo, end.lo, theta), _lerp(start.hi, end.hi, theta))
    if isinstance(start, geo.Halfspace):
        return geo.Halfspace(start.normal, (1.0 - theta) * start.offset + theta * end.offset)
    if isinstance(start, geo.HPolytope):
        # the feasible offsets form a convex set, so no emptiness check is needed
        hs = tuple(_interpolate(h0, h1, theta)
                   for h0, h1 in zip(start.halfspaces, end.halfspaces))
        return geo.HPolytope(hs, validate=False)
    if isinstance(start, geo.Translate):
        return geo.Translate(start.base, _lerp(start.shift, end.shift, theta))
    raise TypeError(type(start).__name__)


def _check_compatible(start, end, field):
    if type(start) is not type(end) or start.dim != end.dim:
        raise ScenarioError(field, "segment end sets must have the same type and dimension")
    if isinstance(start, geo.Halfspace) and start.normal != end.normal:
        raise ScenarioError(field, "halfspace normals must be constant on a segment")
    if isinstance(start, geo.HPolytope):
        if len(start.halfspaces) != len(end.halfspaces):
            raise ScenarioError(field, "polytopes need the same number of halfspaces")
        for h0, h1 in zip(start.halfspaces, end.halfspaces):
            _check_compatible(h0, h1, field)
    if isinstance(start, geo.Translate) and start.base != end.base:
        raise ScenarioError(field, "translates must share their base")


@dataclass(frozen=True)
class FamilySegment:
    """Set parameters moving affinely from ``start`` at ``t0`` to ``end`` at ``t1``."""

    t0: float
    t1: float
    start: object
    end: object

    def __post_init__(self):
        if not self.t0 < self.t1:
            raise ScenarioError("segments", "need t0 < t1")
        _check_compatible(self.start, self.end, "segments")

    def at(self, t):
        return _interpolate(self.start, self.end, (t - self.t0) / (self.t1 - self.t0))


@dataclass(frozen=True, eq=False)
class FamilyMode:
    """Piecewise family of sets.

    ``segments`` must tile the domain in order.  ``at_sets`` maps boundary
    times to the value ``C(t)``; where absent, ``C(t)`` is the right limit
    (and, at the final time, the left limit).
    """

    segments: tuple
    at_sets: dict = None

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ScenarioError("segments", "need at least one segment")
        for s0, s1 in zip(segs, segs[1:]):
            if s0.t1 != s1.t0:
                raise ScenarioError("segments", "segments must cover the domain without gaps or overlap")
        dims = {s.start.dim for s in segs}
        if len(dims) != 1:
            raise ScenarioError("segments", "all segments must share one dimension")
        at_sets = dict(self.at_sets or {})
        bounds = {segs[0].t0, *(s.t1 for s in segs)}
        for t, cset in at_sets.items():
            if t not in bounds:
                raise ScenarioError("at", f"time {t} is not a segment boundary")
            if cset.dim != segs[0].start.dim:
                raise ScenarioError("at", "dimension mismatch")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "at_sets", at_sets)

    @property
    def dim(self):
        return self.segments[0].start.dim

    @property
    def domain(self):
        return self.segments[0].t0, self.segments[-1].t1

    @property
    def time_tol(self):
        a, b = self.domain
        return 1e-12 * (b - a)

    def anchors(self):
        return np.array([self.segments[0].t0] + [s.t1 for s in self.segments])

    def _locate(self, t):
        a, b = self.domain
        tol = self.time_tol
        if t < a - tol or t > b + tol:
            raise OutOfDomain(f"t={t} outside [{a}, {b}]")
        anchors = self.anchors()
        j = int(np.argmin(np.abs(anchors - t)))
        if abs(anchors[j] - t) <= tol:
            return j, True
        return int(np.searchsorted(anchors, t)) - 1, False

    def set_at(self, t, side="value"):
        j, exact = self._locate(t)
        if not exact:
            return self.segments[j].at(t)
        n = len(self.segments)
        tj = float(self.anchors()[j])
        left = self.segments[j - 1].end if j > 0 else None
        right = self.segments[j].start if j < n else None
        value = self.at_sets.get(tj, right if right is not None else left)
        if side == "value":
            return value
        if side == "left":
            return value if left is None else left
        if side == "right":
            return value if right is None else right
        raise ValueError(f"unknown side {side!r}")

    @property
    def right_continuous(self):
        return all(self.set_at(t, "value") == self.set_at(t, "right") for t in self.anchors())

    def regularized(self):
        b = self.domain[1]
        at = {b: self.at_sets[b]} if b in self.at_sets else {}
        return FamilyMode(self.segments, at)


MovingSet = Union[TranslateMode, FamilyMode]


def set_at(ms, t, side="value"):
    """``C(t-)``, ``C(t)`` or ``C(t+)`` as a convex set."""
    return ms.set_at(t, side)


def _hausdorff(a, b, seed):
    if a == b:
        return geo.HausdorffResult(0.0)
    return geo.hausdorff(a, b, seed)


def _segment_length(seg, s, t, seed):
    approx = False
    prev = None
    est = 0.0
    for level in range(REFINE_LEVELS + 1):
        n = 2 ** level
        grid = s + (t - s) * np.arange(n + 1) / n
        sets = [seg.at(x) for x in grid]
        est = 0.0
        for c0, c1 in zip(sets, sets[1:]):
            h = _hausdorff(c0, c1, seed)
            est += h.value
            approx = approx or h.approximate
        if prev is not None and abs(est - prev) <= REFINE_RTOL * max(est, 1e-300):
            return est, approx
        prev = est
    return est, True


def moving_variation(ms, s, t, seed=0):
    """Variation of ``C`` in the Hausdorff metric on ``[s, t]``.

    Exact for :class:`TranslateMode`.  For :class:`FamilyMode` each segment is
    refined by doubling until successive estimates agree to a relative
    ``1e-6`` (at most 16 doublings); jumps at boundaries contribute
    ``d_H(C(r-), C(r)) + d_H(C(r), C(r+))`` with only the inner half counted at
    ``s`` and ``t``.

    Returns
    -------
    VariationResult
        ``approximate`` is set when a sampled Hausdorff estimate was used or
        refinement did not settle.
    """
    if s > t:
        raise ValueError("need s <= t")
    if isinstance(ms, TranslateMode):
        return VariationResult(variation(ms.path, s, t))
    a, b = ms.domain
    tol = ms.time_tol
    if s < a - tol or t > b + tol:
        raise OutOfDomain(f"[{s}, {t}] not inside [{a}, {b}]")
    total = 0.0
    approx = False
    for seg in ms.segments:
        lo, hi = max(s, seg.t0), min(t, seg.t1)
        if hi - lo > tol:
            length, ap = _segment_length(seg, lo, hi, seed)
            total += length
            approx = approx or ap
    for r in ms.anchors():
        if r < s - tol or r > t + tol:
            continue
        if r > s + tol:
            h = _hausdorff(ms.set_at(r, "left"), ms.set_at(r, "value"), seed)
            total += h.value
            approx = approx or h.approximate
        if r < t - tol:
            h = _hausdorff(ms.set_at(r, "value"), ms.set_at(r, "right"), seed)
            total += h.value
            approx = approx or h.approximate
    return VariationResult(total, approx)


def jump_times(ms):
    """Jump records ``(t, C(t-), C(t), C(t+))`` in increasing time."""
    out = []
    for t in ms.anchors():
        t = float(t)
        left, at, right = ms.set_at(t, "left"), ms.set_at(t, "value"), ms.set_at(t, "right")
        if left != at or at != right:
            out.append(JumpRecord(t, left, at, right))
    return out


def moving_set_to_json(ms):
    if isinstance(ms, TranslateMode):
        return {"mode": "translate", "base": geo.set_to_json(ms.base),
                "path": path_to_json(ms.path)}
    return {
        "mode": "family",
        "segments": [{"t0": s.t0, "t1": s.t1, "start": geo.set_to_json(s.start),
                      "end": geo.set_to_json(s.end)} for s in ms.segments],
        "at": [{"t": t, "set": geo.set_to_json(c)} for t, c in sorted(ms.at_sets.items())],
    }


def moving_set_from_json(obj, field="moving_set"):
    if not isinstance(obj, dict) or "mode" not in obj:
        raise ScenarioError(f"{field}.mode", "missing")
    mode = obj["mode"]
    if mode == "translate":
        if "base" not in obj:
            raise ScenarioError(f"{field}.base", "missing")
        if "path" not in obj:
            raise ScenarioError(f"{field}.path", "missing")
        base = geo.set_from_json(obj["base"], f"{field}.base")
        path = path_from_json(obj["path"], f"{field}.path")
        try:
            return TranslateMode(base, path)
        except ScenarioError as exc:
            raise ScenarioError(f"{field}.{exc.field}", str(exc).split(": ", 1)[-1]) from None
    if mode == "family":
        segs_raw = obj.get("segments")
        if not isinstance(segs_raw, list):
            raise ScenarioError(f"{field}.segments", "expected a list")
        segs = []
        for i, sj in enumerate(segs_raw):
            where = f"{field}.segments[{i}]"
            for key in ("t0", "t1", "start", "end"):
                if not isinstance(sj, dict) or key not in sj:
                    raise ScenarioError(f"{where}.{key}", "missing")
            start = geo.set_from_json(sj["start"], f"{where}.start")
            end = geo.set_from_json(sj["end"], f"{where}.end")
            try:
                segs.append(FamilySegment(float(sj["t0"]), float(sj["t1"]), start, end))
            except ScenarioError as exc:
                raise ScenarioError(where, str(exc).split(": ", 1)[-1]) from None
        at = {}
        for i, item in enumerate(obj.get("at", [])):
            where = f"{field}.at[{i}]"
            if not isinstance(item, dict) or "t" not in item or "set" not in item:
                raise ScenarioError(where, "need keys t and set")
            at[float(item["t"])] = geo.set_from_json(item["set"], f"{where}.set")
        try:
            return FamilyMode(tuple(segs), at)
        except ScenarioError as exc:
            raise ScenarioError(f"{field}.{exc.field}", str(exc).split(": ", 1)[-1]) from None
    raise ScenarioError(f"{field}.mode", f"unknown mode {mode!r}")
