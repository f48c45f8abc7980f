"""Scalar play operator: a hysteresis loop.

The input oscillates with growing amplitude; the output stays put until the
gap ``u - y`` hits the edge of ``Z = [-1, 1]`` and then follows at unit
offset.  Reparametrizing time leaves the output unchanged.
"""

import numpy as np

from sweepbv import BVPath, Box, PlayInput, SolverConfig
from sweepbv.play import canned_reparametrizations, check_rate_independence, play

t = np.linspace(0.0, 1.0, 33)
u = BVPath.from_points(t, (2.5 * t * np.cos(4 * np.pi * t))[:, None])
inp = PlayInput.make(u, Box((-1.0,), (1.0,)), [0.0])
traj = play(inp, SolverConfig(base_steps=64, max_refine=3))

print(f"{'t':>6} {'u':>8} {'y':>8} {'u - y':>8}")
for k in range(0, traj.times.size, traj.times.size // 16):
    tk = traj.times[k]
    uk = u(tk)[0]
    print(f"{tk:6.3f} {uk:8.4f} {traj.value[k, 0]:8.4f} {uk - traj.value[k, 0]:8.4f}")
print(f"refinement: {traj.refinement}")

for name, psi in canned_reparametrizations(0.0, 1.0).items():
    rep = check_rate_independence(inp, psi)
    print(f"rate independence under {name}: discrepancy {rep.worst_violation}")
