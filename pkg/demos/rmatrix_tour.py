"""
The three canonical dynamical r-matrices
========================================

Build r(q, z) for sl(3) in the rational, trigonometric and elliptic families
and check the four defining conditions at a random point.
"""

import numpy as np

from spincm import build_representation, build_root_system
from spincm.algebra import casimir_tensor, parse_root_subset, root_label
from spincm.rmatrix import (
    cdybe_residual, elliptic, eval_r, rational, residue_check, sample_q, sample_z,
    trigonometric, unitarity_check, zero_weight_check,
)

rep = build_representation(build_root_system("A", 2))
rs = rep.root_system
print("roots of sl(3):", [root_label(rs, k) for k in range(len(rs.roots))])

# Delta' for the rational family must be closed; Pi' is a set of simple roots
specs = {
    "rational, Delta' = all": rational(rep, parse_root_subset(rs, "all")),
    "rational, Delta' = +-a1": rational(rep, parse_root_subset(rs, "+-a1")),
    "trigonometric, Pi' = {a1}": trigonometric(rep, parse_root_subset(rs, "a1")),
    "elliptic, square lattice": elliptic(rep),
}

rng = np.random.default_rng(1)
for name, spec in specs.items():
    q = sample_q(spec, rng)
    z1, z2, z3 = sample_z(rng, 3)
    print(f"\n{name}   q = {np.round(q, 3)}")
    print(f"  zero weight  {zero_weight_check(spec, q, z1):.1e}")
    print(f"  unitarity    {unitarity_check(spec, q, z1):.1e}")
    print(f"  residue      {residue_check(spec, q):.1e}")
    print(f"  CDYBE        {cdybe_residual(spec, q, z1, z2, z3):.1e}")

# near z = 0 every family looks like Omega / z; the gap closes linearly in z
spec = specs["elliptic, square lattice"]
q = sample_q(spec, rng)
print()
for z in (1e-2, 1e-3, 1e-4):
    gap = np.linalg.norm(z * eval_r(spec, q, z).matrix - casimir_tensor(rep).matrix)
    print(f"|z r(q, z) - Omega| at z = {z:.0e} (elliptic): {gap:.1e}")

# a non-closed subset breaks the Yang-Baxter equation
from spincm.rmatrix import RMatrixSpec

bad = RMatrixSpec("rational", rep, parse_root_subset(rs, "a1"), check_closure=False)
q = sample_q(bad, rng)
print(f"CDYBE with Delta' = {{a1}} only: {cdybe_residual(bad, q, *sample_z(rng, 3)):.2f}")
