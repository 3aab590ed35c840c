"""
Fundamental Poisson brackets of the Lax matrix
==============================================

Compute {L1(z), L2(w)} entry by entry from the product Poisson structure and
compare it with the r-matrix expression, with and without the dynamical term.
"""

import numpy as np

from spincm import build_representation, build_root_system
from spincm.dynamics import SpinSystem, coordinate, fpb_residual, poisson_bracket
from spincm.rmatrix import rational, sample_q, trigonometric

rep = build_representation(build_root_system("A", 2))
rng = np.random.default_rng(0)

for spec in (rational(rep, tuple(range(6))), trigonometric(rep, rep.root_system.simple)):
    sys = SpinSystem(spec)
    x = sys.point(sample_q(spec, rng), rng.normal(size=2), rng.normal(size=8))
    z, w = 0.4 + 0.1j, -0.2 + 0.3j
    print(spec.family)
    print(f"  |{{L1, L2}} + [r12, L1 + L2] + X_J r|  = {fpb_residual(sys, x, z, w):.1e}")
    print(f"  same without the dynamical term      = {fpb_residual(sys, x, z, w, anomaly=False):.2f}")

# the canonical part uses {p_i, q_j} = delta_ij; the spin part is the plus
# Lie-Poisson bracket
q1, p1 = coordinate(sys, "q", 0), coordinate(sys, "p", 0)
print("\n{p1, q1} =", poisson_bracket(sys, p1, q1, x).real)
xi = [coordinate(sys, "xi", a) for a in range(8)]
B = np.array([[poisson_bracket(sys, a, b, x) for b in xi] for a in xi])
print("spin bracket matrix is antisymmetric:", np.allclose(B, -B.T))
