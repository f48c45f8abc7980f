"""Random scenario generators shared by the test modules."""

import numpy as np

from sweepbv import geometry as geo
from sweepbv.bvpath import BVPath
from sweepbv.movingset import FamilyMode, FamilySegment, TranslateMode
from sweepbv.solver import FixedTarget, Project, SegmentPlay


def random_path(rng, d, n_knots=None, n_jumps=None, a=0.0, b=1.0, scale=1.0):
    """Right-continuous piecewise-affine path with a few random jumps."""
    n_knots = int(rng.integers(2, 7)) if n_knots is None else n_knots
    inner = np.sort(rng.uniform(a, b, size=n_knots - 2))
    times = np.unique(np.r_[a, np.round(inner, 6), b])
    m = times.size
    left = rng.normal(scale=scale, size=(m, d))
    right = left.copy()
    n_jumps = int(rng.integers(0, 4)) if n_jumps is None else n_jumps
    candidates = np.arange(1, m)
    for i in rng.choice(candidates, size=min(n_jumps, candidates.size), replace=False):
        right[i] = left[i] + rng.normal(scale=scale, size=d)
    return BVPath(times, left, right)


def random_base(rng, d):
    """A ball or a box centred near the origin."""
    if rng.random() < 0.5:
        return geo.Ball(tuple(rng.normal(scale=0.2, size=d)), float(rng.uniform(0.3, 1.5)))
    lo = -rng.uniform(0.2, 1.2, size=d)
    hi = rng.uniform(0.2, 1.2, size=d)
    return geo.Box(tuple(lo), tuple(hi))


def random_feasible(rng, cset):
    return geo.project(cset, rng.normal(scale=2.0, size=cset.dim)).point


def jump_times_of(path):
    return [float(t) for i, t in enumerate(path.times)
            if not np.array_equal(path.left[i], path.value[i])]


def random_prescribed_scenario(rng, d=None, substeps=16):
    """Translate-mode scenario with random jump prescriptions.

    Segment prescriptions use a fixed substep count so every jump map is
    exactly nonexpansive.
    """
    d = int(rng.integers(1, 4)) if d is None else d
    path = random_path(rng, d)
    ms = TranslateMode(random_base(rng, d), path)
    prescriptions = []
    times = jump_times_of(path)
    if rng.random() < 0.5:
        extra = float(np.round(rng.uniform(0.05, 0.95), 6))
        if all(abs(extra - t) > 1e-3 for t in path.times):
            times.append(extra)
    for t in sorted(times):
        kind = rng.integers(0, 3)
        if kind == 0:
            prescriptions.append(Project(t))
        elif kind == 1:
            prescriptions.append(FixedTarget(t, random_feasible(rng, ms.set_at(t))))
        else:
            prescriptions.append(SegmentPlay(t, substeps, adaptive=False))
    return ms, prescriptions


def random_interval_family(rng, d=None, n_seg=None):
    """Family of boxes with jumps and separate values at the segment boundaries."""
    d = int(rng.integers(1, 3)) if d is None else d
    n_seg = int(rng.integers(2, 5)) if n_seg is None else n_seg
    cuts = np.r_[0.0, np.sort(np.round(rng.uniform(0.1, 0.9, size=n_seg - 1), 6)), 1.0]
    cuts = np.unique(cuts)

    def box():
        c = rng.normal(scale=2.0, size=d)
        w = rng.uniform(0.0, 1.0, size=d)
        return geo.Box(tuple(c - w), tuple(c + w))

    segs = [FamilySegment(float(t0), float(t1), box(), box()) for t0, t1 in zip(cuts, cuts[1:])]
    at = {float(t): box() for t in cuts[1:-1] if rng.random() < 0.7}
    return FamilyMode(tuple(segs), at)
