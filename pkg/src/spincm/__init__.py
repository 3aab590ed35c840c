"""Spin Calogero-Moser systems and their dynamical r-matrices.

Modules:
    algebra: root systems, matrix realizations, invariant form, Casimir.
    elliptic: Weierstrass sigma, zeta and P functions.
    rmatrix: the rational, trigonometric and elliptic dynamical r-matrices.
    dynamics: phase space, Hamiltonians, Lax operators, brackets and flows.
    verify: seeded property suites with JSON reports.
    cli: command-line front end.
"""

from .algebra import (
    build_representation,
    build_root_system,
    casimir_tensor,
    invariant_form,
    parse_root_subset,
    root_label,
)
from .dynamics import (
    PhasePoint,
    SpinSystem,
    energy_via_contour,
    fpb_residual,
    hamiltonian,
    integrate,
    lax,
    momentum_map,
    poisson_bracket,
    sigma_membership,
    spectral_invariants,
    vector_field,
)
from .elliptic import Lattice
from .errors import (
    InvalidSpec,
    PoleError,
    ShapeError,
    SingularApproach,
    SingularConfiguration,
    SpinCMError,
    StepError,
    UnsupportedAlgebra,
)
from .rmatrix import RMatrixSpec, cdybe_residual, elliptic, eval_r, rational, trigonometric

__version__ = "0.1.0"
