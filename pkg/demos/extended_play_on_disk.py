"""Two readings of a jump for the vector play operator.

Z is the unit disk.  The input climbs to the top of the disk and then jumps
sideways.  The plain play operator projects across the jump.  The extended
operator walks the input along the jump segment, so the output is dragged
along the boundary and lands elsewhere.  Prescribing segment play at the
jump through the general solver reproduces the extended operator.
"""

import numpy as np

from sweepbv import Ball, BVPath, variation, PlayInput, SolverConfig, solve_prescribed
from sweepbv.play import play, play_bar, segment_prescriptions

u = BVPath([0.0, 0.25, 0.5, 1.0], [[0, 0], [0.5, 1.0], [0, 1.5], [2, 1.5]],
           [[0, 0], [0.5, 1.0], [2, 1.5], [2, 1.5]])
inp = PlayInput.make(u, Ball((0.0, 0.0), 1.0), [0.0, 0.0])
cfg = SolverConfig(base_steps=32, max_refine=2)

p = play(inp, cfg)
bar = play_bar(inp, cfg)
seg = solve_prescribed(inp.moving_set, segment_prescriptions(u), inp.y0, cfg, times=bar.times)

k = int(np.flatnonzero(p.times == 0.5)[0])
print("y(0.5-)          ", p.left[k])
print("play      y(0.5) ", p.value[k])
print("play_bar  y(0.5) ", bar.value[k])
print("segment   y(0.5) ", seg.value[k])
print(f"play vs play_bar: {np.linalg.norm(p.value[k] - bar.value[k]):.4f}")
print(f"play_bar vs segment prescriptions: {np.max(np.abs(bar.value - seg.value)):.2e}")
arc = bar.aux["arcs"][0.5]
print(f"the traversal arc has {len(arc)} points")
print(f"pV(play_bar) = {bar.variation_total:.4f} <= pV(u) = {variation(u, 0.0, 1.0):.4f}")
