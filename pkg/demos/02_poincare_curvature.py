"""
Curvature of the Poincare disk
==============================

The geodesic spray of ``F = 2|y| / (1 - |x|^2)`` has Jacobi endomorphism
``Phi = -(F^2 Id - F y (x) d_J F)``: constant flag curvature -1.  The bracket
definition and the coordinate formula are computed independently.
"""

import numpy as np

from spraylab import GridSpec, sample_grid
from spraylab.finsler import geodesic_spray, poincare, scalar_flag_decompose
from spraylab.spraycalc import (isotropy_decompose, jacobi_endomorphism,
                                jacobi_endomorphism_coordinates)

F = poincare(2)
S = geodesic_spray(F)
samples = sample_grid(F.chart, GridSpec(samples=8, seed=0, max_norm=0.8))

for p in samples:
    Phi = jacobi_endomorphism(S, p)
    gap = np.max(np.abs(Phi - jacobi_endomorphism_coordinates(S, p)))
    fit = scalar_flag_decompose(S, F, p, Phi)
    iso = isotropy_decompose(S, p, Phi)
    print(f"|x|={np.linalg.norm(p.x):.3f}  kappa={fit.kappa:+.12f}  "
          f"sfc residual={fit.residual:.1e}  rho={iso.rho:+.4f}  dual-path gap={gap:.1e}")
