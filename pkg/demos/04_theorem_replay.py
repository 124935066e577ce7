"""
Complete lifts cannot repair a curved metric
============================================

Start from the Poincare disk (curvature -1) and the candidate factor
``P = a^c`` with ``a = x1``.  The report checks the scalar flag form, the
conformal chain ``S0(e^{2a} F0) / (2 e^{2a} F0) = a^c``, that ``P`` fails the
Funk equation, and that the only remaining candidate ``F = b(x) da`` has a
singular fiber Hessian.
"""

from spraylab import GridSpec
from spraylab.finsler import poincare
from spraylab.scenarios import run_theorem1

report = run_theorem1(poincare(2), "x1", GridSpec(samples=200, seed=0, max_norm=0.8))
print(report.to_text())
