"""Independent reference computations used as test oracles.

Nothing here calls the package's evaluation code: elliptic functions come from
direct lattice sums, derivatives from central differences.
"""

import numpy as np

SHELLS = (50, 100, 200)


def lattice_points(w1, w2, K):
    """Nonzero points ``2m w1 + 2n w2`` with ``max(|m|, |n|) <= K``."""
    m, n = np.meshgrid(np.arange(-K, K + 1), np.arange(-K, K + 1), indexing="ij")
    w = (2 * m * w1 + 2 * n * w2).ravel()
    return w[(m.ravel() != 0) | (n.ravel() != 0)]


def _richardson(f, shells=SHELLS):
    """Extrapolate a square-shell sum.

    Odd powers of ``1/w`` cancel over symmetric shells, so the tail of these
    sums behaves like ``a/K^2 + b/K^3 + ...``.
    """
    s = [f(K) for K in shells]
    r1 = (4 * s[1] - s[0]) / 3
    r2 = (4 * s[2] - s[1]) / 3
    return (8 * r2 - r1) / 7


def zeta_sum(w1, w2, z):
    """``zeta(z) = 1/z + sum' [1/(z-w) + 1/w + z/w^2]``."""

    def f(K):
        w = lattice_points(w1, w2, K)
        return 1 / z + np.sum(1 / (z - w) + 1 / w + z / w**2)

    return _richardson(f)


def p_sum(w1, w2, z):
    """``P(z) = 1/z^2 + sum' [1/(z-w)^2 - 1/w^2]``."""

    def f(K):
        w = lattice_points(w1, w2, K)
        return 1 / z**2 + np.sum(1 / (z - w) ** 2 - 1 / w**2)

    return _richardson(f)


def sigma_product(w1, w2, z):
    """Weierstrass product ``z prod' (1 - z/w) exp(z/w + z^2 / 2w^2)`` via its logarithm."""

    def f(K):
        w = lattice_points(w1, w2, K)
        u = z / w
        return np.sum(np.log1p(-u) + u + u**2 / 2)

    return z * np.exp(_richardson(f))


def eisenstein_g2_g3(w1, w2, shells=(100, 200, 400)):
    """``g2 = 60 sum' w^-4`` and ``g3 = 140 sum' w^-6`` (absolutely convergent).

    The shell tails go like ``1/K^2, 1/K^3`` for ``g2`` and ``1/K^4`` for ``g3``.
    """
    pts = [lattice_points(w1, w2, K) for K in shells]
    a = [60 * np.sum(w**-4.0) for w in pts]
    r = [(4 * a[i + 1] - a[i]) / 3 for i in range(2)]
    g2 = (8 * r[1] - r[0]) / 7
    b = [140 * np.sum(w**-6.0) for w in pts[1:]]
    g3 = (16 * b[1] - b[0]) / 15
    return g2, g3


def central_difference(f, x, h=1e-5):
    """Gradient of ``f`` at the real vector ``x`` by fourth-order central differences."""
    x = np.asarray(x, dtype=float)
    out = []
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        out.append((-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h))
    return np.array(out)


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))
