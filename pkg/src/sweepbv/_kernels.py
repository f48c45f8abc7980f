"""Compiled inner loop of the play recursion ``y <- proj(u_k - Z, y)``.

Balls and boxes get a numba kernel; any other characteristic set falls back
to the generic projection.  Coordinates that the projection leaves untouched
keep their exact previous value, as in :meth:`Translate._project`.
"""

import math

import numpy as np
from numba import njit

from . import geometry as geo


@njit(cache=True)
def _play_ball(center, radius, inputs, y0, record):
    n, d = inputs.shape
    y = y0.copy()
    out = np.empty((n if record else 1, d))
    w = np.empty(d)
    for k in range(n):
        dist2 = 0.0
        for i in range(d):
            w[i] = inputs[k, i] - y[i]
            dist2 += (w[i] - center[i]) ** 2
        dist = math.sqrt(dist2)
        if dist > radius:
            scale = radius / dist
            for i in range(d):
                pw = center[i] + scale * (w[i] - center[i])
                if pw != w[i]:
                    y[i] = inputs[k, i] - pw
        if record:
            out[k] = y
    if not record:
        out[0] = y
    return out


@njit(cache=True)
def _play_box(lo, hi, inputs, y0, record):
    n, d = inputs.shape
    y = y0.copy()
    out = np.empty((n if record else 1, d))
    for k in range(n):
        for i in range(d):
            w = inputs[k, i] - y[i]
            if w < lo[i]:
                y[i] = inputs[k, i] - lo[i]
            elif w > hi[i]:
                y[i] = inputs[k, i] - hi[i]
        if record:
            out[k] = y
    if not record:
        out[0] = y
    return out


def play_recursion(base, inputs, y0, cfg=geo.DEFAULT_PROJECTION, record=True):
    """Apply ``y <- proj(inputs[k] - base, y)`` for each row of ``inputs``.

    Returns every iterate (``record=True``) or only the last one, as a 2-D
    array.
    """
    inputs = np.ascontiguousarray(inputs, dtype=float)
    y0 = np.ascontiguousarray(y0, dtype=float)
    if len(inputs) == 0:
        return y0[None, :].copy()
    if isinstance(base, geo.Ball):
        return _play_ball(base._c, base.radius, inputs, y0, record)
    if isinstance(base, geo.Box):
        return _play_box(base._lo, base._hi, inputs, y0, record)
    y = y0.copy()
    rows = []
    for u in inputs:
        y, _, _ = geo.Translate(base, tuple(u))._project(y, cfg)
        if record:
            rows.append(y)
    return np.array(rows) if record else y[None, :]
