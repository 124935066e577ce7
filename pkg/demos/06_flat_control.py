"""
Funk functions of a flat spray
==============================

The Funk function of the unit ball solves ``dP/dx = P dP/dy``.  Deforming
the flat spray by it leaves the curvature at zero; deforming by ``-P`` does not
satisfy the equation, which shows the check can fail.
"""

from spraylab import GridSpec
from spraylab.scenarios import run_flat_control

print(run_flat_control(GridSpec(samples=200, seed=0, max_norm=0.8)).to_text())
