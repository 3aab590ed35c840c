"""Weierstrass sigma, zeta and P functions of a period lattice.

Evaluation goes through theta-function q-series in a reduced basis of the
lattice (``Im tau >= sqrt(3)/2``, so the nome is below 0.07 and 20 terms reach
machine precision), after reducing the argument into the fundamental cell with
the exact quasi-periodicity factors.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from .errors import PoleError

_NTERMS = 24
POLE_TOL = 1e-12


def _reduce_basis(w1, w2):
    """SL(2, Z)-reduce the half-period pair so that tau = w2/w1 lies in the fundamental domain."""
    for _ in range(200):
        tau = w2 / w1
        k = round(tau.real)
        if k:
            w2 = w2 - k * w1
            tau = w2 / w1
        if abs(tau) < 1.0 - 1e-14:
            w1, w2 = w2, -w1
        else:
            break
    return w1, w2


@dataclass(frozen=True)
class Lattice:
    """Period lattice generated by ``2*omega1`` and ``2*omega2``.

    Raises:
        ValueError: if ``Im(omega2/omega1) < 0.1`` (wrong orientation or too
            extreme an aspect ratio) or the lattice is degenerate.
    """

    omega1: complex = 1.0
    omega2: complex = 1j
    # reduced basis and series constants, filled in __post_init__
    _w1: complex = field(init=False, repr=False, compare=False)
    _w2: complex = field(init=False, repr=False, compare=False)
    _q: complex = field(init=False, repr=False, compare=False)
    _eta1: complex = field(init=False, repr=False, compare=False)
    _eta2: complex = field(init=False, repr=False, compare=False)
    _minv: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        w1, w2 = complex(self.omega1), complex(self.omega2)
        object.__setattr__(self, "omega1", w1)
        object.__setattr__(self, "omega2", w2)
        if w1 == 0 or (w2 / w1).imag < 0.1:
            raise ValueError(
                f"need Im(omega2/omega1) >= 0.1, got omega1={w1}, omega2={w2}"
            )
        r1, r2 = _reduce_basis(w1, w2)
        tau = r2 / r1
        q = cmath.exp(1j * np.pi * tau)
        n = np.arange(1, _NTERMS + 1)
        q2n = q ** (2 * n)
        e2 = 1 - 24 * np.sum(n * q2n / (1 - q2n))
        eta1 = np.pi**2 * e2 / (12 * r1)
        eta2 = (eta1 * r2 - 0.5j * np.pi) / r1
        object.__setattr__(self, "_w1", r1)
        object.__setattr__(self, "_w2", r2)
        object.__setattr__(self, "_q", q)
        object.__setattr__(self, "_eta1", complex(eta1))
        object.__setattr__(self, "_eta2", complex(eta2))
        M = np.array([[2 * r1.real, 2 * r2.real], [2 * r1.imag, 2 * r2.imag]])
        object.__setattr__(self, "_minv", np.linalg.inv(M))
        if abs(self.discriminant) < 1e-12 * max(1.0, abs(self.g2) ** 1.5):
            raise ValueError("degenerate lattice (g2^3 - 27 g3^2 = 0)")

    @property
    def tau(self) -> complex:
        return self.omega2 / self.omega1

    @property
    def nome(self) -> complex:
        """Nome ``exp(i pi tau)`` of the reduced basis used for evaluation."""
        return self._q

    @property
    def eta1(self) -> complex:
        """``zeta(omega1)``."""
        return complex(weierstrass_zeta(self, self.omega1))

    @property
    def eta2(self) -> complex:
        """``zeta(omega2)``."""
        return complex(weierstrass_zeta(self, self.omega2))

    @property
    def g2(self) -> complex:
        n = np.arange(1, _NTERMS + 1)
        q2n = self._q ** (2 * n)
        e4 = 1 + 240 * np.sum(n**3 * q2n / (1 - q2n))
        return complex(4.0 / 3.0 * (np.pi / (2 * self._w1)) ** 4 * e4)

    @property
    def g3(self) -> complex:
        n = np.arange(1, _NTERMS + 1)
        q2n = self._q ** (2 * n)
        e6 = 1 - 504 * np.sum(n**5 * q2n / (1 - q2n))
        return complex(8.0 / 27.0 * (np.pi / (2 * self._w1)) ** 6 * e6)

    @property
    def discriminant(self) -> complex:
        return self.g2**3 - 27 * self.g3**2

    def reduce(self, z):
        """Split ``z = z0 + 2m w1 + 2n w2`` with ``z0`` in the reduced fundamental cell.

        Returns ``(z0, m, n)`` in terms of the internal reduced basis.
        """
        z = np.asarray(z, dtype=complex)
        Mi = self._minv
        m = np.round(Mi[0, 0] * z.real + Mi[0, 1] * z.imag)
        n = np.round(Mi[1, 0] * z.real + Mi[1, 1] * z.imag)
        z0 = z - 2 * m * self._w1 - 2 * n * self._w2
        return z0, m, n

    def distance_to_lattice(self, z) -> np.ndarray:
        """Euclidean distance from ``z`` to the nearest lattice point."""
        z0, _, _ = self.reduce(z)
        best = np.abs(z0)
        for i in (-1, 0, 1):
            for j in (-1, 0, 1):
                best = np.minimum(best, np.abs(z0 - 2 * i * self._w1 - 2 * j * self._w2))
        return best

    def _quasi(self, m, n):
        return 2 * m * self._eta1 + 2 * n * self._eta2, 2 * m * self._w1 + 2 * n * self._w2

    def _check_pole(self, z0):
        if np.any(np.abs(z0) < POLE_TOL * abs(self.omega1)):
            raise PoleError("argument is a lattice point")


def _scalar(x):
    return complex(x) if np.ndim(x) == 0 else x


def _theta1(q, v):
    n = np.arange(_NTERMS)
    v = np.asarray(v, dtype=complex)[..., None]
    c = (-1.0) ** n * q ** ((n + 0.5) ** 2)
    return 2 * np.sum(c * np.sin((2 * n + 1) * v), axis=-1)


def _theta1_prime0(q):
    n = np.arange(_NTERMS)
    return 2 * np.sum((-1.0) ** n * q ** ((n + 0.5) ** 2) * (2 * n + 1))


def _lambert(q, v, power, trig):
    n = np.arange(1, _NTERMS + 1)
    q2n = q ** (2 * n)
    v = np.asarray(v, dtype=complex)[..., None]
    return np.sum(n**power * q2n / (1 - q2n) * trig(2 * n * v), axis=-1)


def weierstrass_sigma(L: Lattice, z):
    """Weierstrass sigma function (entire, odd, ``sigma(z) = z + O(z^5)``)."""
    z0, m, n = L.reduce(z)
    v = np.pi * z0 / (2 * L._w1)
    s0 = (2 * L._w1 / np.pi) * np.exp(L._eta1 * z0**2 / (2 * L._w1)) * _theta1(L._q, v) / _theta1_prime0(L._q)
    eta_w, w = L._quasi(m, n)
    sign = (-1.0) ** ((m + n + m * n) % 2)
    return _scalar(sign * np.exp(eta_w * (z0 + w / 2)) * s0)


def weierstrass_zeta(L: Lattice, z):
    """Weierstrass zeta function ``sigma'/sigma``.

    Raises:
        PoleError: if ``z`` is a lattice point.
    """
    z0, m, n = L.reduce(z)
    L._check_pole(z0)
    v = np.pi * z0 / (2 * L._w1)
    zeta0 = L._eta1 * z0 / L._w1 + (np.pi / (2 * L._w1)) * (
        1 / np.tan(v) + 4 * _lambert(L._q, v, 0, np.sin)
    )
    eta_w, _ = L._quasi(m, n)
    return _scalar(zeta0 + eta_w)


def weierstrass_p(L: Lattice, z):
    """Weierstrass P function ``-zeta'``.

    Raises:
        PoleError: if ``z`` is a lattice point.
    """
    z0, _, _ = L.reduce(z)
    L._check_pole(z0)
    v = np.pi * z0 / (2 * L._w1)
    k = np.pi / (2 * L._w1)
    return _scalar(-L._eta1 / L._w1 + k**2 * (1 / np.sin(v) ** 2 - 8 * _lambert(L._q, v, 1, np.cos)))


def weierstrass_p_prime(L: Lattice, z):
    """Derivative of the Weierstrass P function.

    Raises:
        PoleError: if ``z`` is a lattice point.
    """
    z0, _, _ = L.reduce(z)
    L._check_pole(z0)
    v = np.pi * z0 / (2 * L._w1)
    k = np.pi / (2 * L._w1)
    s = np.sin(v)
    return _scalar(k**3 * (-2 * np.cos(v) / s**3 + 16 * _lambert(L._q, v, 2, np.sin)))


def elliptic_l(L: Lattice, x, z):
    """Kernel ``l(x, z) = -sigma(x + z) / (sigma(x) sigma(z))``.

    Raises:
        PoleError: if ``x`` or ``z`` is a lattice point.
    """
    for a in (x, z):
        z0, _, _ = L.reduce(a)
        L._check_pole(z0)
    return _scalar(-weierstrass_sigma(L, np.add(x, z)) / (weierstrass_sigma(L, x) * weierstrass_sigma(L, z)))


def elliptic_l_dx(L: Lattice, x, z):
    """Partial derivative of ``l(x, z)`` in its first argument, ``l * (zeta(x+z) - zeta(x))``.

    ``x + z`` on the lattice is a removable point of this product and is handled
    through ``sigma`` directly.
    """
    lv = elliptic_l(L, x, z)
    s = np.add(x, z)
    z0, m, n = L.reduce(s)
    if np.ndim(s) == 0 and abs(z0) < POLE_TOL * abs(L.omega1):
        # l vanishes here; d/dx l = -sigma'(x+z) / (sigma(x) sigma(z)) with
        # sigma'(W) = (-1)^(m+n+mn) exp(eta(W) W / 2) at the lattice point W
        eta_w, w = L._quasi(m, n)
        dsig = (-1.0) ** ((m + n + m * n) % 2) * np.exp(eta_w * w / 2)
        return complex(-dsig / (weierstrass_sigma(L, x) * weierstrass_sigma(L, z)))
    return _scalar(lv * (weierstrass_zeta(L, s) - weierstrass_zeta(L, x)))
