"""
Deforming hyperbolic space by its own metric
============================================

For the 3-dimensional hyperbolic ball and ``P = -2 F``, the deformed spray
``S0`` has scalar flag curvature ``-1 + 4 = 3`` with respect to the original
metric, and the Funk equation fails with the two sides in ratio -2.
"""

import numpy as np

from spraylab import GridSpec, sample_grid
from spraylab.finsler import geodesic_spray, poincare, scalar_flag_decompose
from spraylab.projective import ProjectiveFactor, deform, funk_residual
from spraylab.scenarios import run_proposition1

F = poincare(3)
P = ProjectiveFactor(-2.0 * F.F, "-2F")
S0 = deform(geodesic_spray(F), P)
for p in sample_grid(F.chart, GridSpec(samples=4, seed=3, max_norm=0.8)):
    fit = scalar_flag_decompose(S0, F, p)
    fr = funk_residual(S0, P, p)
    print(f"kappa={fit.kappa:.12f}  lhs/rhs={np.round(fr.lhs / fr.rhs, 12)}")

print()
print(run_proposition1(F, 2.0, GridSpec(samples=200, seed=0, max_norm=0.8)).to_text())
