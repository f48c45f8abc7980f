"""Sweeping processes driven by moving convex sets of bounded variation.

Submodules
----------
geometry   convex sets, projections, support functions, Hausdorff distance
bvpath     piecewise-affine BV curves and the arc-length reparametrization
movingset  time-indexed convex sets with one-sided limits
solver     catching-up, prescribed-jump and general BV solvers
play       the play operator and its extension across jumps
verify     invariant checkers
cli        batch runner
"""

from .bvpath import BVPath, arc_length, compose, eval_path, variation
from .geometry import (
    Ball,
    Box,
    Halfspace,
    HPolytope,
    ProjectionConfig,
    Translate,
    contains,
    hausdorff,
    normal_cone_violation,
    project,
    support,
)
from .movingset import FamilyMode, FamilySegment, TranslateMode, jump_times, moving_variation, set_at
from .play import PlayInput, check_rate_independence, play_bar, segment_play_jump
from .solver import (
    DoubleProject,
    FixedTarget,
    Project,
    SegmentPlay,
    SolverConfig,
    Trajectory,
    catching_up,
    solve_general_bv,
    solve_prescribed,
    truncate_jump_set,
)
from .verify import (
    CheckReport,
    check_contraction,
    check_feasibility,
    check_play_properties,
    check_variation_bound,
    vi_residual,
)

__version__ = "0.1.0"
