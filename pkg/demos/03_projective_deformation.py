"""
Projective deformations
=======================

Replacing ``G^i`` by ``G^i + P y^i`` keeps the geodesics as point sets.  The
connection and Jacobi endomorphism of the new spray follow closed transformation
laws; here both sides are compared for a complete lift on the Poincare disk.
"""

from spraylab import GridSpec, sample_grid
from spraylab.expr import field_from_expression
from spraylab.finsler import geodesic_spray, poincare
from spraylab.projective import (complete_lift, deform, deformed_connection_residual,
                                 deformed_jacobi_residual)
from spraylab.spraycalc import jacobi_endomorphism

F = poincare(2)
S0 = geodesic_spray(F)
P = complete_lift(field_from_expression("x1", F.chart))  # P = y1
S = deform(S0, P)

for p in sample_grid(F.chart, GridSpec(samples=5, seed=1, max_norm=0.8)):
    print(f"connection law {deformed_connection_residual(S0, P, p):.1e}   "
          f"Jacobi law {deformed_jacobi_residual(S0, P, p):.1e}")

# undoing the deformation gives back the original object
print("deform(S, -P) is S0:", deform(S, -P) is S0)
p = sample_grid(F.chart, GridSpec(samples=1, seed=2, max_norm=0.8))[0]
print("Phi0 =\n", jacobi_endomorphism(S0, p))
print("Phi  =\n", jacobi_endomorphism(S, p))
