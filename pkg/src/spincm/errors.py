"""Exception types raised across the package."""


class SpinCMError(Exception):
    """Base class for all package errors."""


class UnsupportedAlgebra(SpinCMError, ValueError):
    """Requested (family, rank) has no matrix realization here."""


class ShapeError(SpinCMError, ValueError):
    """Matrix arguments do not match the representation dimension."""


class PoleError(SpinCMError, ZeroDivisionError):
    """An elliptic function was evaluated on (or too close to) a lattice point."""


class SingularConfiguration(SpinCMError, ZeroDivisionError):
    """An r-matrix, Hamiltonian or Lax operator was evaluated on its divisor.

    Attributes:
        root: index of the offending root, or None when the spectral
            parameter itself is singular.
        value: the offending pairing or spectral parameter.
    """

    def __init__(self, message, root=None, value=None):
        super().__init__(message)
        self.root = root
        self.value = value


class SingularApproach(SpinCMError, RuntimeError):
    """An integrated trajectory came too close to the singular set."""

    def __init__(self, message, t, trajectory=None):
        super().__init__(message)
        self.t = t
        self.trajectory = trajectory


class StepError(SpinCMError, ValueError):
    """Invalid integration step or horizon."""


class InvalidSpec(SpinCMError, ValueError):
    """r-matrix parameters violate their admissibility conditions."""
