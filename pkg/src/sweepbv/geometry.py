"""Closed convex sets in R^d.

Five set variants are supported: :class:`Ball`, :class:`Box`,
:class:`Halfspace`, :class:`HPolytope` (a finite intersection of halfspaces)
and :class:`Translate` (the reflected translate ``shift - base``).  All are
immutable; vector fields are stored as tuples of floats so that two sets
compare equal exactly when their parameters do.

Projections are exact for every variant except :class:`HPolytope`, which is
projected with Dykstra's alternating projection over its halfspaces.  A point
that already lies in a set is returned unchanged, bit for bit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import InitVar, dataclass
from functools import cached_property
from typing import NamedTuple, Union

import numpy as np
from scipy.optimize import linprog
from scipy.stats import norm as _normal, qmc

from .errors import IterationLimit, ScenarioError, Unbounded, UnsupportedPair

__all__ = [
    "Ball",
    "Box",
    "Halfspace",
    "HPolytope",
    "Translate",
    "ConvexSet",
    "ProjectionConfig",
    "ProjectionReport",
    "HausdorffResult",
    "project",
    "support",
    "contains",
    "distance",
    "hausdorff",
    "normal_cone_violation",
    "farthest_distance",
    "resolve",
    "set_to_json",
    "set_from_json",
]

UNIT_NORMAL_TOL = 1e-12
NONEMPTY_TOL = 1e-6


def _vec(values, field):
    try:
        out = tuple(float(v) for v in np.atleast_1d(np.asarray(values, dtype=float)))
    except (TypeError, ValueError) as exc:
        raise ScenarioError(field, f"expected a list of numbers ({exc})") from None
    if len(out) == 0:
        raise ScenarioError(field, "vector must have at least one coordinate")
    if not all(math.isfinite(v) for v in out):
        raise ScenarioError(field, "coordinates must be finite")
    return out


def _scalar(value, field):
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ScenarioError(field, f"expected a number, got {value!r}") from None
    if not math.isfinite(out):
        raise ScenarioError(field, "must be finite")
    return out


@dataclass(frozen=True)
class ProjectionConfig:
    """Tolerances for projections and feasibility tests.

    ``tol_proj`` and ``max_iter`` control the Dykstra loop used for
    polytopes; ``tol_feas`` is the distance below which a point counts as a
    member of a set.
    """

    tol_proj: float = 1e-10
    max_iter: int = 10_000
    tol_feas: float = 1e-9


DEFAULT_PROJECTION = ProjectionConfig()


class ProjectionReport(NamedTuple):
    point: np.ndarray
    iterations: int
    residual: float


class HausdorffResult(NamedTuple):
    """Hausdorff distance, possibly estimated.

    ``value`` is exact when ``approximate`` is false.  Otherwise it is a
    lower bound obtained from sampled directions and ``upper`` is an upper
    bound derived from the covering radius of those directions.
    """

    value: float
    approximate: bool = False
    upper: float | None = None


@dataclass(frozen=True)
class Ball:
    """Closed Euclidean ball; a zero radius gives a single point."""

    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center, "center"))
        r = _scalar(self.radius, "radius")
        if r < 0:
            raise ScenarioError("radius", f"must be nonnegative, got {r}")
        object.__setattr__(self, "radius", r)

    @property
    def dim(self):
        return len(self.center)

    @cached_property
    def _c(self):
        return np.array(self.center)

    def _project(self, x, cfg):
        diff = x - self._c
        dist = math.sqrt(float(diff @ diff))
        if dist <= self.radius:
            return x.copy(), 0, 0.0
        return self._c + (self.radius / dist) * diff, 0, 0.0

    def _support(self, d):
        return float(d @ self._c) + self.radius * float(np.linalg.norm(d))

    def _farthest(self, p):
        return float(np.linalg.norm(p - self._c)) + self.radius


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``{x : lo <= x <= hi}``; ``lo == hi`` on an axis is allowed."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = _vec(self.lo, "lo")
        hi = _vec(self.hi, "hi")
        if len(lo) != len(hi):
            raise ScenarioError("hi", "lo and hi must have the same length")
        if any(l > h for l, h in zip(lo, hi)):
            raise ScenarioError("hi", "need lo <= hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return len(self.lo)

    @cached_property
    def _lo(self):
        return np.array(self.lo)

    @cached_property
    def _hi(self):
        return np.array(self.hi)

    def _project(self, x, cfg):
        return np.minimum(np.maximum(x, self._lo), self._hi), 0, 0.0

    def _support(self, d):
        return float(np.sum(np.maximum(d * self._lo, d * self._hi)))

    def _farthest(self, p):
        return float(np.linalg.norm(np.maximum(np.abs(p - self._lo), np.abs(p - self._hi))))


@dataclass(frozen=True)
class Halfspace:
    """The set ``{x : <normal, x> <= offset}`` with a unit normal."""

    normal: tuple
    offset: float

    def __post_init__(self):
        n = _vec(self.normal, "normal")
        if abs(math.sqrt(sum(v * v for v in n)) - 1.0) > UNIT_NORMAL_TOL:
            raise ScenarioError("normal", "must have unit Euclidean norm")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", _scalar(self.offset, "offset"))

    @classmethod
    def from_normal(cls, normal, offset):
        """Build ``{x : <normal, x> <= offset}`` from a normal of any length."""
        n = np.asarray(normal, dtype=float)
        scale = float(np.linalg.norm(n))
        if scale == 0:
            raise ScenarioError("normal", "must be nonzero")
        return cls(tuple(n / scale), float(offset) / scale)

    @property
    def dim(self):
        return len(self.normal)

    @cached_property
    def _n(self):
        return np.array(self.normal)

    def _project(self, x, cfg):
        viol = float(self._n @ x) - self.offset
        if viol <= 0:
            return x.copy(), 0, 0.0
        return x - viol * self._n, 0, 0.0

    def _support(self, d):
        along = float(d @ self._n)
        perp = d - along * self._n
        if along > 0 and float(np.linalg.norm(perp)) <= 1e-12 * float(np.linalg.norm(d)):
            return along * self.offset
        raise Unbounded("halfspace support is infinite off the normal direction")

    def _farthest(self, p):
        raise Unbounded("halfspace is unbounded")


@dataclass(frozen=True)
class HPolytope:
    """Intersection of finitely many halfspaces.

    Nonemptiness is checked at construction by running Dykstra's algorithm
    from the origin; pass ``validate=False`` to skip the check when the
    caller already knows the set is nonempty.
    """

    halfspaces: tuple
    validate: InitVar[bool] = True

    def __post_init__(self, validate):
        hs = tuple(self.halfspaces)
        if not hs:
            raise ScenarioError("halfspaces", "need at least one halfspace")
        if not all(isinstance(h, Halfspace) for h in hs):
            raise ScenarioError("halfspaces", "entries must be Halfspace instances")
        if len({h.dim for h in hs}) != 1:
            raise ScenarioError("halfspaces", "halfspaces must share one dimension")
        object.__setattr__(self, "halfspaces", hs)
        if validate:
            cfg = ProjectionConfig()
            point, _, _ = self._dykstra(np.zeros(self.dim), cfg, raise_on_limit=False)
            if self.max_violation(point) > NONEMPTY_TOL:
                raise ScenarioError("halfspaces", "polytope is empty")

    @property
    def dim(self):
        return self.halfspaces[0].dim

    @cached_property
    def _A(self):
        return np.array([h.normal for h in self.halfspaces])

    @cached_property
    def _b(self):
        return np.array([h.offset for h in self.halfspaces])

    def max_violation(self, x):
        return float(np.max(self._A @ x - self._b))

    def _dykstra(self, x, cfg, raise_on_limit=True):
        A, b = self._A, self._b
        if np.all(A @ x <= b):
            return x.copy(), 0, 0.0
        m = len(b)
        x = x.copy()
        incr = np.zeros((m, len(x)))
        change = math.inf
        for it in range(1, cfg.max_iter + 1):
            change_sq = 0.0
            for i in range(m):
                y = x + incr[i]
                viol = float(A[i] @ y) - b[i]
                x_new = y - viol * A[i] if viol > 0 else y
                new_incr = y - x_new
                dx = x_new - x
                di = new_incr - incr[i]
                change_sq += float(dx @ dx) + float(di @ di)
                incr[i] = new_incr
                x = x_new
            change = math.sqrt(change_sq)
            if change < cfg.tol_proj:
                return x, it, change
        if raise_on_limit:
            raise IterationLimit(
                f"Dykstra stopped after {cfg.max_iter} sweeps with step {change:.3e}"
            )
        return x, cfg.max_iter, change

    def _project(self, x, cfg):
        return self._dykstra(x, cfg)

    def _support(self, d):
        res = linprog(-d, A_ub=self._A, b_ub=self._b, bounds=[(None, None)] * self.dim,
                      method="highs")
        if res.status == 3:
            raise Unbounded("polytope is unbounded in the requested direction")
        if res.status != 0:
            raise RuntimeError(f"support LP failed: {res.message}")
        return float(-res.fun)

    def _bounding_box(self):
        lo, hi = [], []
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = 1.0
            hi.append(self._support(e))
            lo.append(-self._support(-e))
        return np.array(lo), np.array(hi)

    def vertices(self):
        """Vertices by enumeration of ``dim``-subsets of the constraints.

        Intended for the small polytopes used here; raises :class:`Unbounded`
        for unbounded polytopes.
        """
        self._bounding_box()
        A, b = self._A, self._b
        out = []
        for idx in itertools.combinations(range(len(b)), self.dim):
            sub = A[list(idx)]
            if abs(np.linalg.det(sub)) < 1e-12:
                continue
            v = np.linalg.solve(sub, b[list(idx)])
            if np.all(A @ v <= b + 1e-9):
                out.append(v)
        return np.array(out)

    def _farthest(self, p):
        verts = self.vertices()
        return float(np.max(np.linalg.norm(verts - p, axis=1)))


@dataclass(frozen=True)
class Translate:
    """The set ``shift - base = {shift - z : z in base}``.

    This is the moving-set convention ``C(t) = u(t) - Z`` of the play
    operator.  Nested translates are allowed.
    """

    base: "ConvexSet"
    shift: tuple

    def __post_init__(self):
        object.__setattr__(self, "shift", _vec(self.shift, "shift"))
        if len(self.shift) != self.base.dim:
            raise ScenarioError("shift", "dimension differs from the base set")

    @property
    def dim(self):
        return len(self.shift)

    @cached_property
    def _s(self):
        return np.array(self.shift)

    def _project(self, x, cfg):
        w = self._s - x
        pw, it, res = self.base._project(w, cfg)
        out = self._s - pw
        # untouched coordinates stay bit-identical to x
        keep = pw == w
        out[keep] = x[keep]
        return out, it, res

    def _support(self, d):
        return float(d @ self._s) + self.base._support(-d)

    def _farthest(self, p):
        return self.base._farthest(self._s - p)


ConvexSet = Union[Ball, Box, Halfspace, HPolytope, Translate]


def _as_point(x, dim):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != dim:
        raise ValueError(f"point has dimension {x.shape[0]}, set has {dim}")
    if not np.all(np.isfinite(x)):
        raise ValueError("point has non-finite coordinates")
    return x


def project(cset, x, cfg=DEFAULT_PROJECTION):
    """Euclidean projection of ``x`` onto ``cset``.

    Parameters
    ----------
    cset : ConvexSet
    x : array_like
        Query point of the same dimension as the set.
    cfg : ProjectionConfig, optional

    Returns
    -------
    ProjectionReport
        ``point`` is the projection; ``iterations`` and ``residual`` are the
        Dykstra sweep count and last sweep displacement (both zero for
        closed-form variants).

    Raises
    ------
    IterationLimit
        If a polytope projection does not converge within ``cfg.max_iter``.
    """
    point, iterations, residual = cset._project(_as_point(x, cset.dim), cfg)
    return ProjectionReport(point, iterations, residual)


def distance(cset, x, cfg=DEFAULT_PROJECTION):
    x = _as_point(x, cset.dim)
    p, _, _ = cset._project(x, cfg)
    return float(np.linalg.norm(x - p))


def contains(cset, x, tol=0.0, cfg=DEFAULT_PROJECTION):
    """True iff the distance from ``x`` to ``cset`` is at most ``tol``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return distance(cset, x, cfg) <= tol


def support(cset, direction):
    """Support function ``sup_{z in cset} <direction, z>``.

    Raises :class:`Unbounded` when the supremum is infinite.
    """
    d = _as_point(direction, cset.dim)
    if not np.any(d):
        raise ValueError("direction must be nonzero")
    return cset._support(d)


def normal_cone_violation(cset, y, v):
    """How far ``-v`` is from the normal cone of ``cset`` at ``y``.

    Returns ``max(0, sup_{z in cset} <-v, z - y>)``, which vanishes exactly
    when ``-v`` is an outward normal at ``y`` (or ``v`` is zero).
    """
    y = _as_point(y, cset.dim)
    v = _as_point(v, cset.dim)
    if not np.any(v):
        return 0.0
    return max(0.0, cset._support(-v) - float(-v @ y))


def farthest_distance(cset, p):
    """``sup_{x in cset} ||p - x||``; raises :class:`Unbounded` for unbounded sets."""
    return cset._farthest(_as_point(p, cset.dim))


def resolve(cset):
    """Rewrite a :class:`Translate` as an equivalent concrete set."""
    if not isinstance(cset, Translate):
        return cset
    base = resolve(cset.base)
    s = np.array(cset.shift)
    if isinstance(base, Ball):
        return Ball(tuple(s - np.array(base.center)), base.radius)
    if isinstance(base, Box):
        return Box(tuple(s - np.array(base.hi)), tuple(s - np.array(base.lo)))
    if isinstance(base, Halfspace):
        return _reflect_halfspace(base, s)
    if isinstance(base, HPolytope):
        return HPolytope(tuple(_reflect_halfspace(h, s) for h in base.halfspaces),
                         validate=False)
    raise TypeError(f"cannot resolve {type(base).__name__}")


def _reflect_halfspace(h, s):
    # {s - z : <n, z> <= c} = {x : <-n, x> <= c - <n, s>}
    n = np.array(h.normal)
    return Halfspace(tuple(-n), h.offset - float(n @ s))


def _sphere_directions(dim, seed):
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    count = 64 * dim
    if dim == 2:
        rot = np.random.default_rng(seed).uniform(0, 2 * np.pi / count)
        ang = rot + 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(ang), np.sin(ang)])
    sobol = qmc.Sobol(dim, scramble=True, seed=seed)
    pts = sobol.random(count)
    g = _normal.ppf(np.clip(pts, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _covering_chord(dirs, seed):
    dim = dirs.shape[1]
    if dim == 1:
        return 0.0
    if dim == 2:
        return 2 * math.sin(math.pi / (2 * len(dirs)))
    # estimated from random probes, inflated for safety
    probes = np.random.default_rng(seed + 1).normal(size=(4096, dim))
    probes /= np.linalg.norm(probes, axis=1, keepdims=True)
    chord = np.sqrt(np.maximum(0.0, 2 - 2 * np.max(probes @ dirs.T, axis=1)))
    return 1.25 * float(np.max(chord))


def _hausdorff_polytopes(a, b, seed):
    dirs = _sphere_directions(a.dim, seed)
    gaps = [abs(a._support(u) - b._support(u)) for u in dirs]
    lower = max(gaps)
    if a.dim == 1:
        return HausdorffResult(lower)
    radius = sum(float(np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi))))
                 for lo, hi in (a._bounding_box(), b._bounding_box()))
    return HausdorffResult(lower, True, lower + radius * _covering_chord(dirs, seed))


def hausdorff(a, b, seed=0):
    """Hausdorff distance between two convex sets.

    Exact for two translates of the same base, two balls, two boxes and two
    halfspaces with a common normal.  Bounded polytope pairs get a
    direction-sampled estimate flagged as approximate (exact in one
    dimension).

    Raises
    ------
    UnsupportedPair
        For any other combination.
    """
    if a.dim != b.dim:
        raise UnsupportedPair("sets live in different dimensions")
    if isinstance(a, Translate) and isinstance(b, Translate) and a.base == b.base:
        return HausdorffResult(float(np.linalg.norm(a._s - b._s)))
    ra, rb = resolve(a), resolve(b)
    if isinstance(ra, Ball) and isinstance(rb, Ball):
        return HausdorffResult(float(np.linalg.norm(ra._c - rb._c)) + abs(ra.radius - rb.radius))
    if isinstance(ra, Box) and isinstance(rb, Box):
        ab = np.maximum.reduce([np.zeros(ra.dim), rb._lo - ra._lo, ra._hi - rb._hi])
        ba = np.maximum.reduce([np.zeros(ra.dim), ra._lo - rb._lo, rb._hi - ra._hi])
        return HausdorffResult(max(float(np.linalg.norm(ab)), float(np.linalg.norm(ba))))
    if isinstance(ra, Halfspace) and isinstance(rb, Halfspace):
        if ra.normal == rb.normal:
            return HausdorffResult(abs(ra.offset - rb.offset))
        raise UnsupportedPair("halfspaces with different normals are at infinite distance")
    if isinstance(ra, HPolytope) and isinstance(rb, HPolytope):
        try:
            return _hausdorff_polytopes(ra, rb, seed)
        except Unbounded:
            raise UnsupportedPair("polytope pair must be bounded") from None
    raise UnsupportedPair(f"no Hausdorff formula for {type(ra).__name__} vs {type(rb).__name__}")


def set_to_json(cset):
    if isinstance(cset, Ball):
        return {"type": "ball", "center": list(cset.center), "radius": cset.radius}
    if isinstance(cset, Box):
        return {"type": "box", "lo": list(cset.lo), "hi": list(cset.hi)}
    if isinstance(cset, Halfspace):
        return {"type": "halfspace", "normal": list(cset.normal), "offset": cset.offset}
    if isinstance(cset, HPolytope):
        return {"type": "hpolytope", "halfspaces": [set_to_json(h) for h in cset.halfspaces]}
    if isinstance(cset, Translate):
        return {"type": "translate", "base": set_to_json(cset.base), "shift": list(cset.shift)}
    raise TypeError(f"not a convex set: {cset!r}")


def _require(obj, key, field):
    if not isinstance(obj, dict) or key not in obj:
        raise ScenarioError(f"{field}.{key}", "missing")
    return obj[key]


def set_from_json(obj, field="set"):
    """Decode the canonical JSON form; errors name the offending field path."""
    kind = _require(obj, "type", field)
    try:
        if kind == "ball":
            return Ball(_require(obj, "center", field), _require(obj, "radius", field))
        if kind == "box":
            return Box(_require(obj, "lo", field), _require(obj, "hi", field))
        if kind == "halfspace":
            return Halfspace(_require(obj, "normal", field), _require(obj, "offset", field))
        if kind == "hpolytope":
            items = _require(obj, "halfspaces", field)
            if not isinstance(items, list):
                raise ScenarioError("halfspaces", "expected a list")
            hs = tuple(set_from_json(h, f"{field}.halfspaces[{i}]") for i, h in enumerate(items))
            return HPolytope(hs)
        if kind == "translate":
            base = set_from_json(_require(obj, "base", field), f"{field}.base")
            return Translate(base, _require(obj, "shift", field))
    except ScenarioError as exc:
        if exc.field.startswith(field):
            raise
        raise ScenarioError(f"{field}.{exc.field}", str(exc).split(": ", 1)[-1]) from None
    raise ScenarioError(f"{field}.type", f"unknown set type {kind!r}")
