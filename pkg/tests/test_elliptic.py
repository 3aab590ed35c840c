import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import eisenstein_g2_g3, p_sum, rel_err, sigma_product, zeta_sum

from spincm.elliptic import (
    Lattice,
    elliptic_l,
    elliptic_l_dx,
    weierstrass_p,
    weierstrass_p_prime,
    weierstrass_sigma,
    weierstrass_zeta,
)
from spincm.errors import PoleError

SQUARE = Lattice(1.0, 1j)
LATTICES = [SQUARE, Lattice(1.0, 0.5 + 0.9j), Lattice(0.7 + 0.1j, 0.2 + 1.3j)]


def grid(L, n=7, frac=0.9):
    """Points of the fundamental parallelogram, shifted off the lattice."""
    s = np.linspace(-frac, frac, n) + 0.0137
    a, b = np.meshgrid(s, s)
    return (a * L.omega1 + b * L.omega2).ravel()


def random_points(L, rng, k, scale=2.0):
    z = scale * (rng.uniform(-1, 1, k) * L.omega1 + rng.uniform(-1, 1, k) * L.omega2)
    return z[L.distance_to_lattice(z) > 0.1]


def test_lattice_validation():
    with pytest.raises(ValueError):
        Lattice(1.0, 1.0)
    with pytest.raises(ValueError):
        Lattice(1.0, -1j)
    with pytest.raises(ValueError):
        Lattice(1.0, 0.05j + 3)
    with pytest.raises(ValueError):
        Lattice(0.0, 1j)


def test_square_lattice_symmetry():
    # g3 vanishes on the square lattice, and P(iz) = -P(z)
    assert abs(SQUARE.g3) < 1e-12
    assert SQUARE.discriminant != 0
    z = 0.31 + 0.17j
    assert abs(weierstrass_p(SQUARE, 1j * z) + weierstrass_p(SQUARE, z)) < 1e-12


@pytest.mark.parametrize("L", LATTICES)
def test_sigma_parity_and_origin(L):
    assert weierstrass_sigma(L, 0.0) == 0
    z = grid(L)
    assert np.abs(weierstrass_sigma(L, -z) + weierstrass_sigma(L, z)).max() <= 1e-12 * max(
        1, np.abs(weierstrass_sigma(L, z)).max()
    )
    h = 1e-3 * L.omega1
    assert abs(weierstrass_sigma(L, h) - h) <= 1e-10


@pytest.mark.parametrize("L", LATTICES)
def test_zeta_and_p_parity(L):
    z = grid(L)
    assert np.abs(weierstrass_zeta(L, z) + weierstrass_zeta(L, -z)).max() <= 1e-11
    assert np.abs(weierstrass_p(L, z) - weierstrass_p(L, -z)).max() <= 1e-11 * max(
        1, np.abs(weierstrass_p(L, z)).max()
    )


@pytest.mark.parametrize("L", LATTICES)
def test_zeta_principal_part(L):
    z = 1e-3 * L.omega1
    assert abs(z * weierstrass_zeta(L, z) - 1) <= 1e-5


def test_sigma_quasi_periodicity(rng):
    # eta1 from the independent lattice sum, not from the package
    L = SQUARE
    eta1 = zeta_sum(1.0, 1j, 1.0)
    z = 0.8 * (rng.uniform(-1, 1, 20) + 1j * rng.uniform(-1, 1, 20))
    lhs = weierstrass_sigma(L, z + 2 * L.omega1)
    rhs = -np.exp(2 * eta1 * (z + L.omega1)) * weierstrass_sigma(L, z)
    assert rel_err(lhs, rhs) <= 1e-9


@pytest.mark.parametrize("L", LATTICES)
def test_sigma_quasi_periodicity_both_periods(L, rng):
    z = random_points(L, rng, 20, scale=0.8)
    for w, eta in ((L.omega1, L.eta1), (L.omega2, L.eta2)):
        lhs = weierstrass_sigma(L, z + 2 * w)
        rhs = -np.exp(2 * eta * (z + w)) * weierstrass_sigma(L, z)
        assert rel_err(lhs, rhs) <= 1e-9


@pytest.mark.parametrize("L", LATTICES)
def test_periodicity(L, rng):
    z = random_points(L, rng, 20)
    for w in (L.omega1, L.omega2):
        assert rel_err(weierstrass_p(L, z + 2 * w), weierstrass_p(L, z)) <= 1e-9
        assert rel_err(weierstrass_zeta(L, z + 2 * w), weierstrass_zeta(L, z) + 2 * weierstrass_zeta(L, w)) <= 1e-9


ORACLE_POINTS = [0.3 + 0.0j, 0.3 + 0.7j, -0.45 + 0.2j, 0.9 - 0.8j, 1.7 + 0.4j]


@pytest.mark.parametrize("z", ORACLE_POINTS)
def test_against_lattice_sums(z):
    assert abs(weierstrass_zeta(SQUARE, z) - zeta_sum(1.0, 1j, z)) <= 1e-8
    assert abs(weierstrass_p(SQUARE, z) - p_sum(1.0, 1j, z)) <= 1e-8
    assert abs(weierstrass_sigma(SQUARE, z) - sigma_product(1.0, 1j, z)) <= 1e-8


def test_against_lattice_sums_oblique():
    w1, w2 = 1.0, 0.5 + 0.9j
    L = Lattice(w1, w2)
    for z in (0.21 + 0.33j, -0.6 + 0.1j):
        assert abs(weierstrass_zeta(L, z) - zeta_sum(w1, w2, z)) <= 1e-8
        assert abs(weierstrass_p(L, z) - p_sum(w1, w2, z)) <= 1e-8


def test_l_against_sigma_product_oracle():
    x, z = 0.3, 0.7
    s = lambda u: sigma_product(1.0, 1j, u)
    expected = -s(x + z) / (s(x) * s(z))
    assert abs(elliptic_l(SQUARE, x, z) - expected) <= 1e-8


@pytest.mark.parametrize("L", LATTICES)
def test_invariants_against_eisenstein(L):
    g2, g3 = eisenstein_g2_g3(L.omega1, L.omega2)
    assert abs(L.g2 - g2) <= 1e-8 * max(1, abs(g2))
    assert abs(L.g3 - g3) <= 1e-8 * max(1, abs(g3))


@pytest.mark.parametrize("L", LATTICES)
def test_differential_equation(L, rng):
    g2, g3 = eisenstein_g2_g3(L.omega1, L.omega2)
    z = random_points(L, rng, 60, scale=1.0)[:50]
    P, dP = weierstrass_p(L, z), weierstrass_p_prime(L, z)
    res = np.abs(dP**2 - 4 * P**3 + g2 * P + g3) / np.maximum(1, np.abs(P) ** 3)
    assert res.max() <= 1e-9


@pytest.mark.parametrize("L", LATTICES)
def test_legendre_relation(L):
    assert abs(L.eta1 * L.omega2 - L.eta2 * L.omega1 - 0.5j * np.pi) <= 1e-9


@pytest.mark.parametrize("L", LATTICES)
def test_derivatives_by_finite_differences(L, rng):
    h = 1e-4
    for z in random_points(L, rng, 15, scale=0.9):
        dz = (weierstrass_zeta(L, z + h) - weierstrass_zeta(L, z - h)) / (2 * h)
        P = weierstrass_p(L, z)
        assert abs(dz + P) <= 1e-6 * max(1, abs(P))
        dP = (weierstrass_p(L, z + h) - weierstrass_p(L, z - h)) / (2 * h)
        assert abs(dP - weierstrass_p_prime(L, z)) <= 1e-6 * max(1, abs(dP))
        ds = (weierstrass_sigma(L, z + h) - weierstrass_sigma(L, z - h)) / (2 * h)
        assert abs(ds / weierstrass_sigma(L, z) - weierstrass_zeta(L, z)) <= 1e-6 * max(1, abs(ds))


@pytest.mark.parametrize("fn", [weierstrass_sigma, weierstrass_zeta, weierstrass_p])
def test_cauchy_riemann(fn, rng):
    h = 1e-5
    for z in random_points(SQUARE, rng, 15, scale=0.9):
        fx = (fn(SQUARE, z + h) - fn(SQUARE, z - h)) / (2 * h)
        fy = (fn(SQUARE, z + 1j * h) - fn(SQUARE, z - 1j * h)) / (2 * h)
        assert abs(fy - 1j * fx) <= 1e-6 * max(1, abs(fx))


@pytest.mark.parametrize("fn", [weierstrass_zeta, weierstrass_p, weierstrass_p_prime])
def test_pole_errors(fn):
    for w in (0.0, 2.0, 2j, 2 + 2j, 1e-14):
        with pytest.raises(PoleError):
            fn(SQUARE, w)
    with pytest.raises(PoleError):
        elliptic_l(SQUARE, 0.0, 0.3)
    with pytest.raises(PoleError):
        elliptic_l(SQUARE, 0.3, 2j)


def test_vectorized_matches_scalar(rng):
    z = random_points(SQUARE, rng, 10)
    vec = weierstrass_p(SQUARE, z)
    assert vec.shape == z.shape
    np.testing.assert_allclose(vec, [weierstrass_p(SQUARE, complex(u)) for u in z], rtol=1e-15)


def test_l_residue_and_parity():
    for x in (0.3, 0.4 + 0.2j, -0.7 + 0.5j):
        # z l(x, z) = -1 - z zeta(x) + O(z^2); the raw limit needs smaller z
        z = 1e-3
        assert abs(z * elliptic_l(SQUARE, x, z) + 1 + z * weierstrass_zeta(SQUARE, x)) <= 1e-5
        z = 1e-6
        assert abs(z * elliptic_l(SQUARE, x, z) + 1) <= 1e-5
        for zz in (0.25 + 0.1j, -0.6 + 0.3j):
            assert abs(elliptic_l(SQUARE, x, -zz) + elliptic_l(SQUARE, -x, zz)) <= 1e-10


def test_l_product_identity():
    # l(x, z) l(-x, z) = P(z) - P(x)
    for x, z in [(0.3, 0.7), (0.2 + 0.5j, -0.4 + 0.1j)]:
        lhs = elliptic_l(SQUARE, x, z) * elliptic_l(SQUARE, -x, z)
        assert abs(lhs - (weierstrass_p(SQUARE, z) - weierstrass_p(SQUARE, x))) <= 1e-10


@given(
    x=st.complex_numbers(max_magnitude=0.9, allow_nan=False, allow_infinity=False),
    z=st.complex_numbers(max_magnitude=0.9, allow_nan=False, allow_infinity=False),
)
def test_l_dx_matches_finite_difference(x, z):
    L = SQUARE
    if min(L.distance_to_lattice(np.array([x, z, x + z]))) < 0.15:
        return
    h = 1e-5
    fd = (elliptic_l(L, x + h, z) - elliptic_l(L, x - h, z)) / (2 * h)
    an = elliptic_l_dx(L, x, z)
    assert abs(an - fd) <= 1e-6 * max(1, abs(fd))


def test_l_dx_at_removable_point():
    x, z = 0.3, -0.3
    h = 1e-5
    fd = (elliptic_l(SQUARE, x + h, z) - elliptic_l(SQUARE, x - h, z)) / (2 * h)
    assert abs(elliptic_l(SQUARE, x, z)) < 1e-14
    assert abs(elliptic_l_dx(SQUARE, x, z) - fd) <= 1e-6 * max(1, abs(fd))
