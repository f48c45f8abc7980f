"""Independent reference computations used by the test suite."""

import itertools

import numpy as np


def polytope_projection_by_faces(A, b, x):
    """Project ``x`` onto ``{z : A z <= b}`` by enumerating active sets.

    For every subset of at most ``dim`` constraints the point is projected on
    the affine face they define; the nearest feasible candidate is the
    projection, since the true projection lies in the relative interior of
    some face and coincides with the projection on that face's affine hull.
    """
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    x = np.asarray(x, float)
    if np.all(A @ x <= b):
        return x.copy()
    best, best_d = None, np.inf
    m, d = A.shape
    for k in range(1, min(m, d) + 1):
        for idx in itertools.combinations(range(m), k):
            As, bs = A[list(idx)], b[list(idx)]
            gram = As @ As.T
            if abs(np.linalg.det(gram)) < 1e-14:
                continue
            lam = np.linalg.solve(gram, As @ x - bs)
            z = x - As.T @ lam
            if np.all(A @ z <= b + 1e-11):
                dist = np.linalg.norm(z - x)
                if dist < best_d:
                    best, best_d = z, dist
    return best
