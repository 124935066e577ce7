"""
Derivative towers from jets
===========================

Every field in the package is evaluated through truncated Taylor series, so
gradients, Hessians and third derivatives come out together and exactly
symmetric.  Here we compare them with finite differences.
"""

import numpy as np

from spraylab import TangentSample, evaluate_tower
from spraylab.finsler import poincare

F = poincare(2)
p = TangentSample([0.3, -0.2], [1.0, 0.5])
tower = evaluate_tower(F.F2, p, 3)
print("F^2 =", tower.value)
print("gradient (x1, x2, y1, y2):", tower.first)

# central differences of plain float evaluations
h = 1e-5
fd = []
for k in range(4):
    e = np.zeros(4)
    e[k] = h
    zp, zm = p.z + e, p.z - e
    fd.append((F.F2(zp[:2], zp[2:]) - F.F2(zm[:2], zm[2:])) / (2 * h))
print("finite differences:        ", np.array(fd))

# the fiber block of the Hessian is twice the metric tensor
print("g =", 0.5 * tower.second[2:, 2:])
print("max asymmetry of third derivatives:",
      np.max(np.abs(tower.third - np.transpose(tower.third, (2, 0, 1)))))
