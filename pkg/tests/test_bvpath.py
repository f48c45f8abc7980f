import numpy as np
import pytest
from hypothesis import given, strategies as st

from scenarios import random_path
from sweepbv.bvpath import BVPath, arc_length, compose, eval_path, path_from_json, path_to_json, variation
from sweepbv.errors import OutOfDomain, ScenarioError

RAMP = BVPath.from_points([0.0, 1.0], [[0.0], [1.0]])
STEP = BVPath([0.0, 0.5, 1.0], [[0.0], [0.0], [1.0]], [[0.0], [1.0], [1.0]])
seeds = st.integers(0, 2 ** 31)


def test_eval_examples():
    assert eval_path(RAMP, 0.5, "left")[0] == 0.5
    assert eval_path(STEP, 0.5, "left")[0] == 0.0
    assert eval_path(STEP, 0.5, "value")[0] == 1.0
    assert eval_path(STEP, 0.0, "left")[0] == eval_path(STEP, 0.0, "value")[0]
    assert eval_path(STEP, 1.0, "right")[0] == 1.0
    with pytest.raises(OutOfDomain):
        eval_path(RAMP, 1.5)


def test_non_right_continuous_value():
    f = BVPath([0.0, 0.5, 1.0], [[0.0], [0.0], [1.0]], [[0.0], [1.0], [1.0]], [[0.0], [5.0], [1.0]])
    assert not f.right_continuous
    assert [eval_path(f, 0.5, s)[0] for s in ("left", "value", "right")] == [0.0, 5.0, 1.0]
    assert f.right_continuous_version().right_continuous
    assert variation(f, 0.0, 1.0) == pytest.approx(5.0 + 4.0)


def test_variation_examples():
    assert variation(RAMP, 0.0, 1.0) == 1.0
    jump = BVPath([0.0, 0.5, 1.0], [[0.0], [0.0], [2.0]], [[0.0], [2.0], [2.0]])
    assert variation(jump, 0.0, 1.0) == 2.0
    zigzag = BVPath.from_points([0.0, 0.5, 1.0], [[0.0], [1.0], [0.0]])
    assert variation(zigzag, 0.0, 1.0) == pytest.approx(2.0)
    with pytest.raises(OutOfDomain):
        variation(RAMP, -1.0, 0.5)


def test_variation_jump_ownership():
    # only values inside [s, t] count: f(0.5-) lies outside [0.5, 1]
    assert variation(STEP, 0.5, 1.0) == 0.0
    assert variation(STEP, 0.0, 0.5) == 1.0
    assert variation(STEP, 0.0, 0.4) == 0.0


def test_arc_length_examples():
    const = BVPath.constant(0.0, 1.0, [3.0, 4.0])
    ell, filled, lip = arc_length(const)
    assert lip == 0.0
    assert np.all(ell.value == 0.0)
    assert np.array_equal(eval_path(filled, 0.7), [3.0, 4.0])

    ell, filled, lip = arc_length(RAMP)
    for t in np.linspace(0, 1, 11):
        assert eval_path(ell, t)[0] == pytest.approx(t)
        assert eval_path(filled, t)[0] == pytest.approx(t)

    ell, filled, lip = arc_length(STEP)
    assert eval_path(ell, 0.3)[0] == 0.0
    assert eval_path(ell, 0.5, "left")[0] == 0.0
    assert eval_path(ell, 0.5)[0] == 1.0
    assert eval_path(ell, 0.8)[0] == 1.0
    for s in np.linspace(0, 1, 11):
        assert eval_path(filled, s)[0] == pytest.approx(s)


def test_compose_examples():
    ell, filled, _ = arc_length(STEP)
    back = compose(filled, ell)
    for t in (0.0, 0.25, 0.5, 0.75, 1.0):
        for side in ("left", "value", "right"):
            assert eval_path(back, t, side)[0] == eval_path(STEP, t, side)[0]
    ident = BVPath.from_points([0.0, 1.0], [[0.0], [1.0]])
    e2, _, _ = arc_length(BVPath.from_points([0.0, 0.3, 1.0], [[0.0], [2.0], [1.0]]))
    g = compose(ident, e2)
    for t in np.linspace(0, 1, 9):
        assert eval_path(g, t)[0] == pytest.approx(eval_path(e2, t)[0])


def test_compose_range_violation():
    inner = BVPath.from_points([0.0, 1.0], [[0.0], [2.0]])
    with pytest.raises(OutOfDomain):
        compose(RAMP, inner)


def test_constructor_validation():
    with pytest.raises(ScenarioError):
        BVPath([0.0, 0.0], [[0.0], [1.0]], [[0.0], [1.0]])
    with pytest.raises(ScenarioError):
        BVPath([0.0, 1.0], [[0.0], [np.nan]], [[0.0], [1.0]])


def test_json_round_trip():
    f = BVPath([0.0, 0.5, 1.0], [[0.0, 1.0], [0.5, 0.5], [1.0, 1.0]],
               [[0.0, 1.0], [2.0, 0.0], [1.0, 1.0]], [[0.0, 1.0], [3.0, 3.0], [1.0, 1.0]])
    g = path_from_json(path_to_json(f))
    for name in ("times", "left", "value", "right"):
        assert np.array_equal(getattr(f, name), getattr(g, name))
    bad = path_to_json(f)
    assert bad["right_continuous"] is False
    bad["right_continuous"] = True
    with pytest.raises(ScenarioError):
        path_from_json(bad)


@given(seeds)
def test_round_trip_property(seed):
    rng = np.random.default_rng(seed)
    f = random_path(rng, int(rng.integers(1, 4)), n_knots=int(rng.integers(2, 9)))
    ell, filled, _ = arc_length(f)
    g = compose(filled, ell)
    ts = np.r_[f.times, 0.5 * (f.times[1:] + f.times[:-1]), rng.uniform(0, 1, 50)]
    for t in ts:
        for side in ("left", "value", "right"):
            assert np.linalg.norm(eval_path(g, t, side) - eval_path(f, t, side)) <= 1e-9


@given(seeds)
def test_lipschitz_certificate(seed):
    rng = np.random.default_rng(seed)
    f = random_path(rng, int(rng.integers(1, 4)))
    _, filled, lip = arc_length(f)
    assert lip == pytest.approx(variation(f, f.a, f.b) / (f.b - f.a))
    slopes = np.linalg.norm(np.diff(filled.value, axis=0), axis=1) / np.diff(filled.times)
    assert slopes.max() <= lip + 1e-9


@given(seeds)
def test_ell_properties(seed):
    rng = np.random.default_rng(seed)
    f = random_path(rng, 2)
    ell, _, _ = arc_length(f)
    assert ell.value[0, 0] == f.a and ell.value[-1, 0] == f.b
    seq = np.stack([ell.left[:, 0], ell.value[:, 0], ell.right[:, 0]], axis=1).reshape(-1)
    assert np.all(np.diff(seq) >= -1e-15)
    jumps_f = ~np.all(f.left == f.right, axis=1)
    jumps_ell = ell.left[:, 0] != ell.right[:, 0]
    assert np.array_equal(jumps_f[1:], jumps_ell[1:])


@given(seeds)
def test_variation_additive_and_jump_accounting(seed):
    rng = np.random.default_rng(seed)
    f = random_path(rng, int(rng.integers(1, 4)))
    r = float(rng.uniform(0.01, 0.99))
    if np.min(np.abs(f.times - r)) < 1e-6:
        return
    assert variation(f, 0, 1) == pytest.approx(variation(f, 0, r) + variation(f, r, 1), abs=1e-12)
    cont = sum(np.linalg.norm(f.left[i + 1] - f.right[i]) for i in range(f.times.size - 1))
    jumps = sum(np.linalg.norm(f.value[i] - f.left[i]) + np.linalg.norm(f.right[i] - f.value[i])
                for i in range(f.times.size))
    assert variation(f, 0, 1) == pytest.approx(cont + jumps, rel=1e-14)
