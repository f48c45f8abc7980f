import numpy as np
import pytest
from hypothesis import given, strategies as st

from scenarios import random_base, random_interval_family, random_path
from sweepbv import geometry as geo
from sweepbv.bvpath import BVPath, variation
from sweepbv.errors import OutOfDomain, ScenarioError
from sweepbv.movingset import (
    FamilyMode,
    FamilySegment,
    TranslateMode,
    jump_times,
    moving_set_from_json,
    moving_set_to_json,
    moving_variation,
    set_at,
)

Z = geo.Box((-1.0,), (1.0,))
RAMP = BVPath.from_points([0.0, 1.0], [[0.0], [1.0]])


def step_path(at=0.5, size=2.0):
    return BVPath([0.0, at, 1.0], [[0.0], [0.0], [size]], [[0.0], [size], [size]])


def test_set_at_examples():
    c = geo.resolve(set_at(TranslateMode(Z, RAMP), 0.5))
    assert (c.lo, c.hi) == ((-0.5,), (1.5,))
    fam = FamilyMode((FamilySegment(0.0, 1.0, geo.Ball((0.0,), 1.0), geo.Ball((0.0,), 2.0)),))
    assert set_at(fam, 0.0) == geo.Ball((0.0,), 1.0)
    ms = TranslateMode(Z, step_path())
    assert set_at(ms, 0.5, "left").shift == (0.0,)
    assert set_at(ms, 0.5, "value").shift == (2.0,)
    with pytest.raises(OutOfDomain):
        set_at(ms, 1.5)


def test_moving_variation_examples():
    assert moving_variation(TranslateMode(Z, RAMP), 0.0, 1.0).value == 1.0
    fam = FamilyMode((FamilySegment(0.0, 1.0, geo.Ball((0.0, 0.0), 1.0), geo.Ball((0.0, 0.0), 2.0)),))
    res = moving_variation(fam, 0.0, 1.0)
    assert res.value == pytest.approx(1.0, rel=1e-9)
    assert not res.approximate
    path = BVPath([0.0, 0.5, 1.0], [[0.0], [0.0], [3.0]], [[0.0], [2.0], [3.0]])
    assert moving_variation(TranslateMode(Z, path), 0.0, 1.0).value == 3.0


def test_family_jump_accounting():
    box = lambda lo, hi: geo.Box((float(lo),), (float(hi),))
    fam = FamilyMode((FamilySegment(0.0, 0.5, box(0, 1), box(0, 1)),
                      FamilySegment(0.5, 1.0, box(2, 3), box(2, 3))), {0.5: box(5, 5)})
    # d_H([0,1],{5}) = 5, d_H({5},[2,3]) = 3
    assert moving_variation(fam, 0.0, 1.0).value == pytest.approx(8.0)
    assert not fam.right_continuous
    reg = fam.regularized()
    assert reg.right_continuous
    assert moving_variation(reg, 0.0, 1.0).value == pytest.approx(2.0)


def test_jump_times_examples():
    assert [r.t for r in jump_times(TranslateMode(Z, step_path()))] == [0.5]
    two = BVPath([0.0, 0.3, 0.7, 1.0], [[0.0], [0.0], [1.0], [2.0]], [[0.0], [1.0], [2.0], [2.0]])
    recs = jump_times(TranslateMode(Z, two))
    assert [r.t for r in recs] == [0.3, 0.7]
    assert recs[0].left_set.shift == (0.0,) and recs[0].at_set.shift == (1.0,)
    assert jump_times(TranslateMode(Z, RAMP)) == []


def test_family_validation():
    with pytest.raises(ScenarioError):
        FamilyMode((FamilySegment(0.0, 0.5, Z, Z), FamilySegment(0.6, 1.0, Z, Z)))
    with pytest.raises(ScenarioError):
        FamilySegment(0.0, 1.0, geo.Ball((0.0,), 1.0), geo.Box((0.0,), (1.0,)))
    with pytest.raises(ScenarioError):
        FamilyMode((FamilySegment(0.0, 1.0, Z, Z),), {0.5: Z})


def test_json_round_trip():
    for ms in (TranslateMode(geo.Ball((0.0, 0.0), 1.0), BVPath.from_points([0, 1], [[0, 0], [1, 1]])),
               random_interval_family(np.random.default_rng(3))):
        back = moving_set_from_json(moving_set_to_json(ms))
        for t in ms.anchors():
            for side in ("left", "value", "right"):
                assert back.set_at(t, side) == ms.set_at(t, side)
    bad = {"mode": "translate", "base": {"type": "ball", "center": [0], "radius": -2},
           "path": moving_set_to_json(TranslateMode(Z, RAMP))["path"]}
    with pytest.raises(ScenarioError) as info:
        moving_set_from_json(bad)
    assert info.value.field == "moving_set.base.radius"


@given(st.integers(0, 2 ** 31))
def test_translate_variation_is_path_variation_bitwise(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 4))
    path = random_path(rng, d)
    ms = TranslateMode(random_base(rng, d), path)
    s, t = np.sort(rng.uniform(0, 1, 2))
    assert moving_variation(ms, s, t).value == variation(path, s, t)


@given(st.integers(0, 2 ** 31))
def test_family_variation_additive(seed):
    rng = np.random.default_rng(seed)
    fam = random_interval_family(rng, d=1)
    r = float(rng.uniform(0.01, 0.99))
    if np.min(np.abs(fam.anchors() - r)) < 1e-3:
        return
    whole = moving_variation(fam, 0.0, 1.0).value
    parts = moving_variation(fam, 0.0, r).value + moving_variation(fam, r, 1.0).value
    assert parts == pytest.approx(whole, rel=1e-9, abs=1e-12)


@given(st.integers(0, 2 ** 31))
def test_jump_records_sit_on_breakpoints(seed):
    rng = np.random.default_rng(seed)
    ms = TranslateMode(random_base(rng, 2), random_path(rng, 2))
    for rec in jump_times(ms):
        assert rec.t in ms.path.times
        assert rec.left_set != rec.at_set or rec.at_set != rec.right_set
