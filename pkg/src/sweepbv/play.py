"""The play operator and its extension to inputs with jumps.

For an input ``u`` and a characteristic set ``Z`` the play operator returns
the solution of the sweeping process driven by ``C(t) = u(t) - Z`` with
``u(a) - y(a) = z0``.  Two extensions across jumps of ``u`` are provided:

* :func:`play` projects at each jump, like the classical Moreau process.
* :func:`play_bar` traverses each jump along the straight segment from
  ``u(t-)`` to ``u(t)`` by running play on the arc-length filled input and
  composing with the arc-length clock.

:func:`segment_play_jump` is the jump map that makes the prescribed-jump
solver reproduce :func:`play_bar`.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import geometry as geo
from ._kernels import play_recursion
from .bvpath import BVPath, arc_length, compose, eval_path
from .errors import InfeasibleStart, InvalidReparam, ScenarioError
from .movingset import TranslateMode
from .solver import (
    SegmentPlay,
    SolverConfig,
    Trajectory,
    _merge_times,
    _refine,
    catching_up,
    solve_prescribed,
)

__all__ = [
    "PlayInput",
    "play",
    "play_bar",
    "segment_play_jump",
    "segment_prescriptions",
    "check_rate_independence",
    "canned_reparametrizations",
    "play_input_to_json",
    "play_input_from_json",
]


class PlayInput(NamedTuple):
    """Input path ``u``, characteristic set ``Z`` and initial offset ``z0 in Z``."""

    u: BVPath
    Z: object
    z0: np.ndarray

    @classmethod
    def make(cls, u, Z, z0, cfg=geo.DEFAULT_PROJECTION):
        z0 = np.atleast_1d(np.asarray(z0, dtype=float))
        if z0.shape != (u.dim,) or Z.dim != u.dim:
            raise ScenarioError("play.z0", f"expected {u.dim} coordinates")
        if not u.right_continuous:
            raise ScenarioError("play.u", "input must be right-continuous")
        if geo.distance(Z, z0, cfg) > cfg.tol_feas:
            raise InfeasibleStart("z0 is not in Z")
        return cls(u, Z, z0)

    @property
    def moving_set(self):
        return TranslateMode(self.Z, self.u)

    @property
    def y0(self):
        return self.u.value[0] - self.z0


def play(inp, cfg=SolverConfig(), times=None):
    """Play operator with projection at the jumps of ``u``.

    Runs the catching-up recursion ``y_{k+1} = u_{k+1} - proj(Z, u_{k+1} - y_k)``
    on ``times`` if given, otherwise on the refined partitions of
    :func:`~sweepbv.solver.solve_prescribed`.
    """
    ms = inp.moving_set
    if times is not None:
        return catching_up(ms, inp.y0, times, cfg.projection)
    return solve_prescribed(ms, [], inp.y0, cfg)


def _traverse(Z, inputs_for, y, substeps, adaptive, tol, max_substeps, pcfg):
    """Play along the inputs ``inputs_for(n)`` with ``n`` doubling from ``substeps``.

    Returns the whole arc of the last run.
    """
    n = int(substeps)
    arc = play_recursion(Z, inputs_for(n), y, pcfg)
    while adaptive and n < max_substeps:
        n = min(2 * n, max_substeps)
        finer = play_recursion(Z, inputs_for(n), y, pcfg)
        change = float(np.linalg.norm(finer[-1] - arc[-1]))
        arc = finer
        if change < tol:
            break
    return arc


def segment_play_jump(Z, u_minus, u_plus, y_minus, substeps=256, adaptive=True,
                      tol=1e-8, max_substeps=2 ** 16, cfg=geo.DEFAULT_PROJECTION):
    """Play along ``sigma -> (1 - sigma) u_minus + sigma u_plus`` on ``[0, 1]``.

    Starts from ``y_minus`` (so ``z0 = u_minus - y_minus``) and returns the
    terminal value, which lies in ``u_plus - Z``.  With ``adaptive`` the
    number of uniform substeps doubles from ``substeps`` until the terminal
    value moves by less than ``tol`` or ``max_substeps`` is reached.

    Raises
    ------
    InfeasibleStart
        If ``u_minus - y_minus`` is not in ``Z``.
    """
    u0 = np.atleast_1d(np.asarray(u_minus, dtype=float))
    u1 = np.atleast_1d(np.asarray(u_plus, dtype=float))
    y = np.atleast_1d(np.asarray(y_minus, dtype=float))
    if geo.distance(Z, u0 - y, cfg) > cfg.tol_feas:
        raise InfeasibleStart("u_minus - y_minus is not in Z")
    if int(substeps) < 1:
        raise ValueError("substeps must be positive")
    if np.array_equal(u0, u1):
        return y.copy()

    def inputs_for(n):
        sigma = (np.arange(1, n + 1) / n)[:, None]
        return (1.0 - sigma) * u0 + sigma * u1

    return _traverse(Z, inputs_for, y, substeps, adaptive, tol, max_substeps, cfg)[-1].copy()


def _filled_values(filled, sigmas):
    # filled is continuous and piecewise affine
    sigmas = np.asarray(sigmas, dtype=float)
    return np.column_stack([np.interp(sigmas, filled.times, filled.value[:, i])
                            for i in range(filled.dim)])


def play_bar(inp, cfg=SolverConfig(), times=None, substeps=256, adaptive=True,
             tol=1e-8, max_substeps=2 ** 16):
    """Extended play operator ``P(filled) o ell`` on the original time grid.

    The filled input is swept on the arc-length images of the time nodes;
    each jump gap ``[ell(t-), ell(t)]`` is crossed in uniform substeps chosen
    by the same doubling rule as :func:`segment_play_jump`.  The result is
    read back through the arc-length clock, so ``y(t-)`` and ``y(t)`` at a
    jump are the solution at ``ell(t-)`` and ``ell(t)``.  The traversal arcs
    are kept in ``aux["arcs"]`` keyed by jump time.

    Without ``times`` the time grid is refined as in
    :func:`~sweepbv.solver.solve_prescribed`.
    """
    u, Z = inp.u, inp.Z
    pcfg = cfg.projection
    ms = inp.moving_set
    ell, filled, _ = arc_length(u)
    y0 = ms.set_at(u.a, "value")._project(inp.y0, pcfg)[0]
    jump_t = [float(t) for t, i in zip(u.times, range(u.times.size))
              if not np.array_equal(u.left[i], u.value[i])]

    def run(tgrid):
        tgrid = np.asarray(tgrid, dtype=float)
        ell_l = np.array([eval_path(ell, t, "left")[0] for t in tgrid])
        ell_v = np.array([eval_path(ell, t, "value")[0] for t in tgrid])
        sig, ys = [ell_v[0]], [y0]
        arcs = {}
        y = y0
        for k in range(1, tgrid.size):
            if ell_v[k] == sig[-1]:
                continue
            t = tgrid[k]
            if any(abs(t - s) <= u.time_tol for s in jump_t) and ell_l[k] < ell_v[k]:
                if ell_l[k] > sig[-1]:
                    y = play_recursion(Z, _filled_values(filled, [ell_l[k]]), y, pcfg)[-1]
                    sig.append(ell_l[k])
                    ys.append(y)
                s0, s1 = ell_l[k], ell_v[k]

                def inputs_for(n, s0=s0, s1=s1):
                    grid = s0 + (s1 - s0) * (np.arange(1, n + 1) / n)
                    grid[-1] = s1
                    return _filled_values(filled, grid)

                arc = _traverse(Z, inputs_for, y, substeps, adaptive, tol, max_substeps, pcfg)
                arcs[float(t)] = arc
                y = arc[-1]
            else:
                y = play_recursion(Z, _filled_values(filled, [ell_v[k]]), y, pcfg)[-1]
            sig.append(ell_v[k])
            ys.append(y)
        if len(sig) == 1:
            sig.append(u.b)
            ys.append(y0)
        result = BVPath.from_points(sig, np.array(ys))
        comp = compose(result, ell, extra_times=tgrid)
        left = np.array([eval_path(comp, t, "left") for t in tgrid])
        value = np.array([eval_path(comp, t, "value") for t in tgrid])
        jumps = np.array([not np.array_equal(l, v) for l, v in zip(left, value)])
        jumps[0] = False
        return left, value, jumps, arcs

    if times is not None:
        left, value, jumps, arcs = run(times)
        return Trajectory(np.asarray(times, dtype=float), left, value, value.copy(), jumps,
                          aux={"arcs": arcs})
    anchors = _merge_times(ms.anchors(), ms.time_tol)
    tgrid, left, value, jumps, arcs, report = _refine(run, anchors, cfg)
    return Trajectory(tgrid, left, value, value.copy(), jumps, refinement=report,
                      aux={"arcs": arcs})


def segment_prescriptions(u, substeps=256, adaptive=True):
    """One :class:`SegmentPlay` per jump of ``u``."""
    return [SegmentPlay(float(t), substeps, adaptive)
            for i, t in enumerate(u.times) if not np.array_equal(u.left[i], u.value[i])]


def _check_psi(psi, a, b):
    if psi.dim != 1:
        raise InvalidReparam("psi must be scalar")
    if psi.a != a or psi.b != b:
        raise InvalidReparam("psi must share the domain of u")
    if not (np.array_equal(psi.left, psi.right) and np.array_equal(psi.left, psi.value)):
        raise InvalidReparam("psi must be continuous")
    v = psi.value[:, 0]
    if v[0] != a or v[-1] != b:
        raise InvalidReparam("psi must map a to a and b to b")
    if np.any(np.diff(v) < 0):
        raise InvalidReparam("psi must be nondecreasing")


def check_rate_independence(inp, psi, cfg=SolverConfig(), steps=None):
    """Compare ``P(u o psi)`` with ``P(u) o psi`` on matched partitions.

    The partition for ``u o psi`` contains the breakpoints of the composite
    and a uniform grid of ``steps`` intervals; the partition for ``u`` is its
    image under ``psi`` (with repeated nodes where ``psi`` is flat).  Both
    recursions then project onto the same sets in the same order, so the
    discrepancy is expected to be exactly zero.

    Returns
    -------
    CheckReport
    """
    from .verify import CheckReport

    u = inp.u
    a, b = u.a, u.b
    _check_psi(psi, a, b)
    steps = cfg.base_steps if steps is None else int(steps)
    grid = a + (b - a) * (np.arange(steps + 1) / steps)
    v = compose(u, psi, extra_times=grid)
    s_grid = v.times
    tau = np.array([eval_path(psi, s)[0] for s in s_grid])
    y_u = catching_up(inp.moving_set, inp.y0, tau, cfg.projection)
    y_v = catching_up(TranslateMode(inp.Z, v), inp.y0, s_grid, cfg.projection)
    diff = np.maximum(np.linalg.norm(y_u.value - y_v.value, axis=1),
                      np.linalg.norm(y_u.left - y_v.left, axis=1))
    k = int(np.argmax(diff))
    worst = float(diff[k])
    return CheckReport("rate_independence", worst <= 0.0, worst, float(s_grid[k]), 0.0,
                       f"{s_grid.size} matched nodes")


def canned_reparametrizations(a, b):
    """Identity, a piecewise-linear ``t^2`` and a map with a flat piece."""
    L = b - a
    ident = BVPath.from_points([a, b], [[a], [b]])
    x = np.arange(9) / 8
    square = BVPath.from_points(a + L * x, (a + L * x ** 2)[:, None])
    square = BVPath.from_points(square.times, np.r_[square.value[:-1, 0], b][:, None])
    flat = BVPath.from_points([a, a + 0.3 * L, a + 0.6 * L, b],
                              [[a], [a + 0.5 * L], [a + 0.5 * L], [b]])
    return {"identity": ident, "square": square, "flat": flat}


def play_input_to_json(inp):
    from .bvpath import path_to_json

    return {"u": path_to_json(inp.u), "Z": geo.set_to_json(inp.Z),
            "z0": [float(v) for v in inp.z0]}


def play_input_from_json(obj, field="play", cfg=geo.DEFAULT_PROJECTION):
    from .bvpath import path_from_json

    if not isinstance(obj, dict):
        raise ScenarioError(field, "expected an object")
    for key in ("u", "Z", "z0"):
        if key not in obj:
            raise ScenarioError(f"{field}.{key}", "missing")
    u = path_from_json(obj["u"], f"{field}.u")
    Z = geo.set_from_json(obj["Z"], f"{field}.Z")
    z0 = np.atleast_1d(np.asarray(obj["z0"], dtype=float))
    if z0.shape != (u.dim,):
        raise ScenarioError(f"{field}.z0", f"expected {u.dim} coordinates")
    if Z.dim != u.dim:
        raise ScenarioError(f"{field}.Z", f"expected dimension {u.dim}")
    return PlayInput.make(u, Z, z0, cfg)
