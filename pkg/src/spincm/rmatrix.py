"""The three canonical families of dynamical r-matrices with spectral parameter.

Every family has the shape::

    r(q, z) = c(z) * sum_i h_i (x) h_i + sum_a phi_a((a, q), z) * e_a (x) e_{-a}

and the Lax operator built from it is
``L(z) = p + c(z) * J + sum_a phi_a((a, q), z) * xi_a * e_a``, so both are driven
by the same scalar coefficient functions computed in :func:`coefficients`.

Tensors in ``g (x) g`` are ``n^2 x n^2`` matrices in ``numpy.kron`` layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import Representation, casimir_tensor, closed_subset_check, root_label
from .elliptic import Lattice, elliptic_l, elliptic_l_dx, weierstrass_zeta
from .errors import InvalidSpec, SingularConfiguration

FAMILIES = ("rational", "trigonometric", "elliptic")
SINGULAR_TOL = 1e-10
THIRD = 1.0 / 3.0


def _span_indices(rs, members):
    """Indices of the roots lying in the linear span of ``rs.roots[members]``."""
    members = list(members)
    if not members:
        return ()
    S = rs.roots[members].T
    coef, *_ = np.linalg.lstsq(S, rs.roots.T, rcond=None)
    resid = np.abs(S @ coef - rs.roots.T).max(axis=0)
    return tuple(int(k) for k in np.nonzero(resid < 1e-9)[0])


def _indecomposable(rs, positive):
    pos = set(positive)
    out = []
    for k in sorted(pos):
        if not any(
            rs.index_of(rs.roots[k] - rs.roots[a]) in pos for a in pos if a != k
        ):
            out.append(k)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class RMatrixSpec:
    """Family tag plus parameters of a canonical dynamical r-matrix.

    Attributes:
        family: ``"rational"``, ``"trigonometric"`` or ``"elliptic"``.
        rep: the matrix realization of ``g``.
        subset: root indices; the closed set for the rational family, the
            chosen simple roots for the trigonometric family, unused otherwise.
        polarization: ``+1``/``-1`` per root (trigonometric only); defaults to
            the standard positive system of the root system.
        lattice: the period lattice (elliptic only).
        check_closure: validate that the rational subset is closed; switched
            off only to build negative controls.
    """

    family: str
    rep: Representation
    subset: tuple = ()
    polarization: tuple | None = None
    lattice: Lattice | None = None
    check_closure: bool = True
    _kind: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        rs = self.rep.root_system
        M = len(rs.roots)
        if self.family not in FAMILIES:
            raise InvalidSpec(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "subset", tuple(sorted(int(k) for k in self.subset)))
        bad = [k for k in self.subset if not 0 <= k < M]
        if bad:
            raise InvalidSpec(f"root indices out of range: {bad}")
        # kind: 0 = no dynamical term, 1 = dynamical term, +2/-2 = polarized (trig)
        kind = np.zeros(M, dtype=int)
        if self.family == "rational":
            if self.check_closure and not closed_subset_check(rs, self.subset):
                raise InvalidSpec("Δ′ not closed under negation and root addition")
            kind[list(self.subset)] = 1
        elif self.family == "trigonometric":
            pol = self.polarization
            if pol is None:
                pol = tuple(1 if k < rs.n_positive else -1 for k in range(M))
            pol = tuple(int(s) for s in pol)
            object.__setattr__(self, "polarization", pol)
            if len(pol) != M or any(s not in (1, -1) for s in pol):
                raise InvalidSpec("polarization must give +1 or -1 for every root")
            if any(pol[k] != -pol[rs.negative_of(k)] for k in range(M)):
                raise InvalidSpec("polarization must satisfy Delta_- = -Delta_+")
            positive = [k for k in range(M) if pol[k] == 1]
            for a in positive:
                for b in positive:
                    s = rs.index_of(rs.roots[a] + rs.roots[b])
                    if s is not None and pol[s] != 1:
                        raise InvalidSpec("polarization is not a positive system")
            simple = _indecomposable(rs, positive)
            stray = [k for k in self.subset if k not in simple]
            if stray:
                raise InvalidSpec(f"Pi' must consist of simple roots of Delta_+, got {stray}")
            kind[:] = [2 * s for s in pol]
            kind[list(_span_indices(rs, self.subset))] = 1
        else:
            if self.lattice is None:
                object.__setattr__(self, "lattice", Lattice(1.0, 1j))
            kind[:] = 1
        kind.setflags(write=False)
        object.__setattr__(self, "_kind", kind)

    @property
    def root_system(self):
        return self.rep.root_system

    @property
    def dynamical_roots(self) -> tuple:
        """Roots carrying a q-dependent coefficient: Delta', Delta(Pi') or all roots."""
        return tuple(int(k) for k in np.nonzero(self._kind == 1)[0])

    def describe(self) -> dict:
        rs = self.root_system
        d = {"family": self.family, "algebra": f"{rs.family}{rs.rank}"}
        if self.family == "rational":
            d["delta_prime"] = list(self.subset)
        elif self.family == "trigonometric":
            d["pi_prime"] = list(self.subset)
            d["polarization"] = list(self.polarization)
        else:
            d["omega1"] = [self.lattice.omega1.real, self.lattice.omega1.imag]
            d["omega2"] = [self.lattice.omega2.real, self.lattice.omega2.imag]
        return d


def rational(rep, delta_prime=()) -> RMatrixSpec:
    return RMatrixSpec("rational", rep, subset=tuple(delta_prime))


def trigonometric(rep, pi_prime=(), polarization=None) -> RMatrixSpec:
    return RMatrixSpec("trigonometric", rep, subset=tuple(pi_prime), polarization=polarization)


def elliptic(rep, lattice=None) -> RMatrixSpec:
    return RMatrixSpec("elliptic", rep, lattice=lattice)


# -- coefficient functions ----------------------------------------------------------


def _check_z(spec, z):
    if spec.family == "rational":
        bad = abs(z) < SINGULAR_TOL
    elif spec.family == "trigonometric":
        bad = abs(np.sin(z)) < SINGULAR_TOL
    else:
        bad = spec.lattice.distance_to_lattice(z) < SINGULAR_TOL
    if bad:
        raise SingularConfiguration(f"spectral parameter z={z} is a pole of the {spec.family} family", value=z)


def pairings(spec, q) -> np.ndarray:
    """``(a, q)`` for every root ``a``."""
    q = np.asarray(q)
    rs = spec.root_system
    if q.shape != (rs.ambient_dim,):
        raise ValueError(f"q must have shape ({rs.ambient_dim},), got {q.shape}")
    return rs.roots @ q


def check_q(spec, q):
    """Raise SingularConfiguration if ``q`` lies on the divisor of the family."""
    x = pairings(spec, q)
    dyn = list(spec.dynamical_roots)
    if not dyn:
        return x
    if spec.family == "rational":
        v = np.abs(x[dyn])
    elif spec.family == "trigonometric":
        v = np.abs(np.sin(x[dyn]))
    else:
        v = spec.lattice.distance_to_lattice(x[dyn])
    bad = np.nonzero(~(v >= SINGULAR_TOL))[0]
    if len(bad):
        k = dyn[bad[0]]
        raise SingularConfiguration(
            f"root {k} ({root_label(spec.root_system, k)}) is singular: (alpha, q) = {x[k]:.6g}",
            root=k,
            value=x[k],
        )
    return x


def coefficients(spec, q, z, derivative=False):
    """Cartan coefficient ``c(z)`` and root coefficients ``phi_a((a, q), z)``.

    With ``derivative=True`` also returns ``d phi_a / d(a, q)``.

    Raises:
        SingularConfiguration: if ``z`` or ``q`` is on the family's divisor.
    """
    _check_z(spec, z)
    x = check_q(spec, q)
    kind = spec._kind
    M = len(x)
    phi = np.zeros(M, dtype=complex)
    dphi = np.zeros(M, dtype=complex)
    if spec.family == "rational":
        c = 1.0 / z
        phi[:] = c
        dyn = kind == 1
        phi[dyn] += 1.0 / x[dyn]
        dphi[dyn] = -1.0 / x[dyn] ** 2
    elif spec.family == "trigonometric":
        cot_z = np.cos(z) / np.sin(z)
        c = cot_z + THIRD * z
        gauge = np.exp(THIRD * z * x)
        dyn = kind == 1
        xd = x[dyn]
        base = cot_z + np.cos(xd) / np.sin(xd)  # sin(x + z) / (sin x sin z)
        phi[dyn] = base * gauge[dyn]
        dphi[dyn] = (-1.0 / np.sin(xd) ** 2 + THIRD * z * base) * gauge[dyn]
        for sgn, mask in ((-1j, kind == 2), (1j, kind == -2)):
            phi[mask] = np.exp(sgn * z) / np.sin(z) * gauge[mask]
            dphi[mask] = THIRD * z * phi[mask]
    else:
        L = spec.lattice
        c = weierstrass_zeta(L, z)
        phi[:] = -elliptic_l(L, x, np.full(M, z))
        if derivative:
            dphi[:] = [-elliptic_l_dx(L, xk, z) for xk in x]
    if derivative:
        return c, phi, dphi
    return c, phi


# -- tensors ------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TensorValue:
    """Element of ``g (x) g`` as a coefficient table over basis pairs.

    ``coeffs[a, b]`` multiplies ``basis[a] (x) basis[b]``.
    """

    rep: Representation
    coeffs: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        B = self.rep.basis
        n = self.rep.dim
        T = np.einsum("ab,aij,bkl->ikjl", self.coeffs, B, B, optimize=True)
        return T.reshape(n * n, n * n)

    @classmethod
    def from_matrix(cls, rep, matrix):
        n = rep.dim
        T = np.asarray(matrix).reshape(n, n, n, n)
        D = rep.dual_basis
        C = rep.form_scale**2 * np.einsum("ikjl,aji,blk->ab", T, D, D, optimize=True)
        return cls(rep, C)

    def swap(self) -> "TensorValue":
        return TensorValue(self.rep, self.coeffs.T.copy())

    def __add__(self, other):
        return TensorValue(self.rep, self.coeffs + other.coeffs)

    def __sub__(self, other):
        return TensorValue(self.rep, self.coeffs - other.coeffs)

    def __mul__(self, s):
        return TensorValue(self.rep, self.coeffs * s)

    __rmul__ = __mul__


def _table(rep, c, phi):
    rs = rep.root_system
    N = rs.ambient_dim
    C = np.zeros((rep.dim_g, rep.dim_g), dtype=complex)
    C[np.arange(N), np.arange(N)] = c
    k = np.arange(len(phi))
    neg = np.array([rs.negative_of(i) for i in k], dtype=int)
    C[N + k, N + neg] = phi
    return C


def eval_r(spec: RMatrixSpec, q, z) -> TensorValue:
    """``r(q, z)`` for the family of ``spec``.

    Raises:
        SingularConfiguration: naming the offending root or spectral parameter.
    """
    c, phi = coefficients(spec, q, z)
    return TensorValue(spec.rep, _table(spec.rep, c, phi))


def dq_derivative(spec: RMatrixSpec, q, z, direction) -> TensorValue:
    """Derivative of ``r(q, z)`` in ``q`` along ``direction`` (the Cartan part is constant)."""
    _, _, dphi = coefficients(spec, q, z, derivative=True)
    ad = spec.root_system.roots @ np.asarray(direction)
    return TensorValue(spec.rep, _table(spec.rep, 0.0, dphi * ad))


def _norm(A) -> float:
    return float(np.linalg.norm(A))


def residue_check(spec: RMatrixSpec, q, steps=(1e-2, 5e-3, 2.5e-3)) -> float:
    """Distance between the extrapolated ``lim z r(q, z)`` and the Casimir element.

    The even part ``(z r(z) + (-z) r(-z)) / 2`` is sampled at the given step
    sizes and Richardson-extrapolated in ``z^2``.
    """
    h = np.asarray(steps, dtype=float)
    if not np.allclose(h[1:] / h[:-1], 0.5):
        raise ValueError("steps must halve successively")
    S = [0.5 * (hh * eval_r(spec, q, hh).coeffs - hh * eval_r(spec, q, -hh).coeffs) for hh in h]
    # each level removes the next even power
    table = S
    factor = 4.0
    while len(table) > 1:
        table = [(factor * b - a) / (factor - 1.0) for a, b in zip(table[:-1], table[1:])]
        factor *= 4.0
    Om = TensorValue.from_matrix(spec.rep, casimir_tensor(spec.rep).matrix)
    return _norm(TensorValue(spec.rep, table[0]).matrix - Om.matrix)


def zero_weight_check(spec: RMatrixSpec, q, z) -> float:
    """``max_h ||[h (x) 1 + 1 (x) h, r(q, z)]||`` over the Cartan basis."""
    return _zero_weight(spec.rep, eval_r(spec, q, z).matrix)


def _zero_weight(rep, R):
    I = np.eye(rep.dim)
    out = 0.0
    for h in rep.cartan:
        D = np.kron(h, I) + np.kron(I, h)
        out = max(out, _norm(D @ R - R @ D))
    return out


def unitarity_check(spec: RMatrixSpec, q, z) -> float:
    """``||r(q, z) + r^21(q, -z)||``."""
    R = eval_r(spec, q, z)
    Rm = eval_r(spec, q, -z)
    return _norm((R + Rm.swap()).matrix)


def permute_slots(A, n, order):
    """Re-express an operator on ``(V^n)^{(x)3}`` whose factors sit in physical slots ``order``.

    ``order[k]`` is the physical slot of the k-th tensor factor of ``A``.
    """
    T = np.asarray(A).reshape((n,) * 6)
    inv = np.argsort(order)
    return T.transpose(list(inv) + [3 + i for i in inv]).reshape(n**3, n**3)


def embed(R, n, slots):
    """Place a two-factor tensor into slots ``(s, t)`` of a three-fold product."""
    s, t = slots
    u = 3 - s - t
    return permute_slots(np.kron(R, np.eye(n)), n, (s, t, u))


def cdybe_terms(spec, q, z1, z2, z3):
    """Derivative term and the three commutators of the dynamical Yang-Baxter equation.

    The derivative term is ``sum_i h_i^(1) d_i r^23 + h_i^(2) d_i r^31 + h_i^(3) d_i r^12``
    with ``r^31`` evaluated at ``z3 - z1``.
    """
    rep = spec.rep
    n = rep.dim
    N = spec.root_system.ambient_dim
    basis_dirs = np.eye(N)

    def pieces(z):
        R = eval_r(spec, q, z).matrix
        dR = [dq_derivative(spec, q, z, d).matrix for d in basis_dirs]
        return R, dR

    r12, d12 = pieces(z1 - z2)
    r13, _ = pieces(z1 - z3)
    r23, d23 = pieces(z2 - z3)
    _, d31 = pieces(z3 - z1)
    R12 = embed(r12, n, (0, 1))
    R13 = embed(r13, n, (0, 2))
    R23 = embed(r23, n, (1, 2))
    alt = np.zeros((n**3, n**3), dtype=complex)
    for i, h in enumerate(rep.cartan):
        alt += np.kron(h, d23[i])
        alt += permute_slots(np.kron(h, d31[i]), n, (1, 2, 0))
        alt += np.kron(d12[i], h)
    quad = (R12 @ R13 - R13 @ R12) + (R12 @ R23 - R23 @ R12) + (R13 @ R23 - R23 @ R13)
    return alt, quad


def cdybe_residual(spec: RMatrixSpec, q, z1, z2, z3) -> float:
    """Norm of the left side of the classical dynamical Yang-Baxter equation."""
    alt, quad = cdybe_terms(spec, q, z1, z2, z3)
    return _norm(alt + quad)


# -- sampling -----------------------------------------------------------------------


def sample_q(spec, rng, low=0.3, high=1.2, margin=0.15, max_tries=10_000):
    """Random real ``q`` with entries in ``[low, high]`` kept ``margin`` away from the divisor."""
    rs = spec.root_system
    for _ in range(max_tries):
        q = rng.uniform(low, high, rs.ambient_dim)
        x = rs.roots @ q
        dyn = list(spec.dynamical_roots) or list(range(len(x)))
        if spec.family == "trigonometric":
            ok = np.all(np.abs(np.sin(x[dyn])) > margin)
        elif spec.family == "elliptic":
            ok = np.all(spec.lattice.distance_to_lattice(x) > margin)
        else:
            ok = np.all(np.abs(x[dyn]) > margin)
        if ok:
            return q
    raise RuntimeError("could not sample a nonsingular q")


def sample_z(rng, k=1, radius=0.9, separation=0.2, max_tries=10_000):
    """``k`` complex spectral parameters in ``|z| <= radius`` with pairwise and origin separation."""
    for _ in range(max_tries):
        r = radius * np.sqrt(rng.uniform(0.0, 1.0, k))
        t = rng.uniform(0.0, 2 * np.pi, k)
        z = r * np.exp(1j * t)
        pts = np.concatenate([[0.0], z])
        d = np.abs(pts[:, None] - pts[None, :]) + np.eye(k + 1) * 10
        if d.min() > separation:
            return z
    raise RuntimeError("could not sample separated spectral parameters")
