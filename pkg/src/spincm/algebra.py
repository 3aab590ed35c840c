"""Root systems and defining matrix realizations of the classical simple Lie algebras.

Conventions used throughout the package:

* The invariant form is ``(X, Y) = kappa * trace(X @ Y)`` in the defining
  representation, with ``kappa`` chosen so that long roots have ``(a, a) = 2``.
* ``h_1, ..., h_N`` is an orthonormal basis of the Cartan subalgebra and a root
  ``a`` is stored through its coordinates ``a(h_i)``, so the induced pairing on
  the dual of the Cartan subalgebra is the Euclidean dot product.
* Roots are ordered as ``positive[0..P-1]`` followed by their negatives in the
  same order, so ``roots[k + P] == -roots[k]``.
* The Lie algebra basis is ``(h_1..h_N, e_{roots[0]}, ..., e_{roots[2P-1]})``;
  the dual basis with respect to the form is ``(h_1..h_N, e_{-roots[k]})``.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError, UnsupportedAlgebra

FAMILIES = ("A", "B", "C", "D")


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RootSystem:
    """Root system of a classical simple Lie algebra in orthonormal Cartan coordinates.

    Attributes:
        family: one of ``"A"``, ``"B"``, ``"C"``, ``"D"``.
        rank: rank of the algebra, equal to ``ambient_dim``.
        ambient_dim: dimension N of the Cartan subalgebra.
        roots: ``(2P, N)`` array of root coordinates.
        positive: indices of the positive roots (``0..P-1``).
        simple: indices of the simple roots.
        pairing: Gram matrix of the form on the dual Cartan subalgebra.
    """

    family: str
    rank: int
    ambient_dim: int
    roots: np.ndarray
    positive: tuple
    simple: tuple
    pairing: np.ndarray

    @property
    def n_positive(self) -> int:
        return len(self.positive)

    def negative_of(self, k: int) -> int:
        """Index of ``-roots[k]``."""
        P = self.n_positive
        return k + P if k < P else k - P

    def index_of(self, vec, tol=1e-9):
        """Index of the root with coordinates ``vec``, or None."""
        d = np.abs(self.roots - np.asarray(vec)[None, :]).max(axis=1)
        k = int(np.argmin(d))
        return k if d[k] < tol else None

    def pair(self, a, b):
        return np.asarray(a) @ self.pairing @ np.asarray(b)

    def simple_coefficients(self) -> np.ndarray:
        """Expansion coefficients of every root in the simple roots, shape ``(2P, rank)``."""
        S = self.roots[list(self.simple)]
        coeffs, *_ = np.linalg.lstsq(S.T, self.roots.T, rcond=None)
        return coeffs.T

    def __repr__(self):
        return f"RootSystem({self.family}{self.rank}, |roots|={len(self.roots)})"


@dataclass(frozen=True, eq=False)
class Representation:
    """Defining matrix realization of ``g`` with a Cartan-Weyl basis.

    ``basis[a]`` and ``dual_basis[a]`` satisfy ``(basis[a], dual_basis[b]) = delta_ab``.
    ``structure_constants[a, b, c]`` is the coefficient of ``basis[c]`` in
    ``[basis[a], basis[b]]``.
    """

    root_system: RootSystem
    dim: int
    cartan: np.ndarray
    root_vectors: np.ndarray
    form_scale: float
    basis: np.ndarray
    dual_basis: np.ndarray
    structure_constants: np.ndarray = field(repr=False)

    @property
    def dim_g(self) -> int:
        return len(self.basis)

    @property
    def rank(self) -> int:
        return len(self.cartan)

    def form(self, X, Y):
        return invariant_form(self, X, Y)

    def coords(self, X) -> np.ndarray:
        """Coordinates of a g-element: ``X = sum_a coords[a] * basis[a]``."""
        X = np.asarray(X)
        return self.form_scale * np.einsum("aji,ij->a", self.dual_basis, X)

    def element(self, coords) -> np.ndarray:
        """Matrix of the g-element with the given coordinates."""
        return np.tensordot(np.asarray(coords, dtype=complex), self.basis, axes=1)

    def bracket(self, X, Y):
        return X @ Y - Y @ X

    def __repr__(self):
        rs = self.root_system
        return f"Representation({rs.family}{rs.rank}, n={self.dim}, dim g={self.dim_g})"


@dataclass(frozen=True, eq=False)
class CasimirTensor:
    """Casimir element of ``g (x) g`` as an ``n^2 x n^2`` matrix (``kron`` layout)."""

    matrix: np.ndarray

    def swap_residual(self) -> float:
        n = int(round(np.sqrt(np.sqrt(self.matrix.size))))
        T = self.matrix.reshape(n, n, n, n)
        return float(np.abs(T - T.transpose(1, 0, 3, 2)).max())


@dataclass(frozen=True)
class RootSubset:
    """A subset of roots: ``kind`` is ``"closed"`` (a closed set) or ``"simple"`` (simple roots)."""

    kind: str
    members: tuple


# -- realization -----------------------------------------------------------------


def _check(family, rank):
    if family not in FAMILIES:
        raise UnsupportedAlgebra(f"unsupported family {family!r}; expected one of {FAMILIES}")
    if not isinstance(rank, (int, np.integer)) or rank < 1:
        raise UnsupportedAlgebra(f"rank must be a positive integer, got {rank!r}")
    if family == "D" and rank < 2:
        raise UnsupportedAlgebra("family D needs rank >= 2")


def _bilinear(family, r):
    """Matrix size and the form preserved by the defining representation (None for sl)."""
    if family == "A":
        return r + 1, None
    if family == "B":
        return 2 * r + 1, np.eye(2 * r + 1)[::-1]
    if family == "D":
        return 2 * r, np.eye(2 * r)[::-1]
    J = np.eye(r)[::-1]
    Z = np.zeros((r, r))
    return 2 * r, np.block([[Z, J], [-J, Z]])


def _diag_weights(family, r, m):
    """Linear map from the diagonal index to weight (epsilon) coordinates."""
    if family == "A":
        return np.eye(m)
    W = np.zeros((m, r))
    for k in range(r):
        W[k, k] = 1.0
        W[m - 1 - k, k] = -1.0
    return W


@functools.lru_cache(maxsize=None)
def _realize(family, r):
    m, B = _bilinear(family, r)
    W = _diag_weights(family, r, m)

    # root vectors, keyed by epsilon-weight
    found = {}
    for i, j in itertools.product(range(m), range(m)):
        if i == j:
            continue
        X = np.zeros((m, m))
        X[i, j] = 1.0
        if B is not None:
            X = X - np.linalg.solve(B, X.T @ B)
        if np.abs(X).max() < 1e-12:
            continue
        wt = tuple(np.round(W[i] - W[j], 9) + 0.0)
        found.setdefault(wt, X)

    def is_positive(wt):
        for c in wt:
            if abs(c) > 1e-9:
                return c > 0
        return False

    pos = [wt for wt in found if is_positive(wt)]

    # Cartan basis (unnormalized, trace-orthogonal), and the scale kappa
    if family == "A":
        H = []
        for k in range(1, m):
            d = np.zeros(m)
            d[:k] = 1.0
            d[k] = -k
            H.append(np.diag(d))
    else:
        H = []
        for k in range(r):
            d = np.zeros(m)
            d[k], d[m - 1 - k] = 1.0, -1.0
            H.append(np.diag(d))
    H = [h / np.sqrt(np.trace(h @ h)) for h in H]

    # a(h) for h = diag(d) is wt . (W^+ d)
    Wp = np.linalg.pinv(W)
    norms = [np.sum(np.array([(Wp @ np.diag(h)) @ np.asarray(wt) for h in H]) ** 2) for wt in pos]
    kappa = 1.0 if family == "A" else float(np.round(max(norms) / 2.0, 12))
    H = [h / np.sqrt(kappa) for h in H]

    def coord(wt):
        return np.array([(Wp @ np.diag(h).real) @ np.asarray(wt) for h in H])

    return m, B, W, found, pos, H, kappa, coord


def _height_key(coeffs, wt):
    return (round(float(np.sum(coeffs)), 6), tuple(-c for c in wt))


def build_root_system(family: str, rank: int) -> RootSystem:
    """Root system of ``A_n``, ``B_n``, ``C_n`` or ``D_n``.

    Root coordinates are taken in the orthonormal Cartan basis of the defining
    realization, normalized so long roots have squared length 2.

    Raises:
        UnsupportedAlgebra: for an unknown family or inadmissible rank.
    """
    _check(family, rank)
    return _root_system(family, int(rank))


@functools.lru_cache(maxsize=None)
def _root_system(family, rank):
    m, B, W, found, pos, H, kappa, coord = _realize(family, rank)
    pos_vec = {wt: coord(wt) for wt in pos}

    # simple roots: positive roots that are not a sum of two positive roots
    keys = list(pos)
    sums = set()
    for a, b in itertools.combinations(keys, 2):
        s = tuple(np.round(np.add(a, b), 9) + 0.0)
        sums.add(s)
    simple_wts = [wt for wt in keys if wt not in sums]
    if len(simple_wts) != rank:
        raise UnsupportedAlgebra(f"internal error: found {len(simple_wts)} simple roots for rank {rank}")
    S = np.array([pos_vec[wt] for wt in simple_wts])
    coeffs = {wt: np.linalg.solve(S @ S.T, S @ pos_vec[wt]) for wt in keys}
    # simple roots first in their own (lexicographic) order, then by height
    keys.sort(key=lambda wt: _height_key(coeffs[wt], wt))
    roots = np.array([pos_vec[wt] for wt in keys] + [-pos_vec[wt] for wt in keys])
    simple = tuple(keys.index(wt) for wt in simple_wts)
    P = len(keys)
    return RootSystem(
        family=family,
        rank=rank,
        ambient_dim=len(H),
        roots=_frozen(roots),
        positive=tuple(range(P)),
        simple=tuple(sorted(simple)),
        pairing=_frozen(np.eye(len(H))),
    )


def _root_keys(family, rank):
    """Epsilon-weight keys in the same order as ``RootSystem.roots`` (positive half)."""
    m, B, W, found, pos, H, kappa, coord = _realize(family, rank)
    rs = _root_system(family, rank)
    keys = []
    for k in range(rs.n_positive):
        for wt in pos:
            if np.allclose(coord(wt), rs.roots[k]):
                keys.append(wt)
                break
    return keys


def build_representation(rs: RootSystem) -> Representation:
    """Defining representation (``sl``, ``so(2n+1)``, ``sp(2n)``, ``so(2n)``) of ``rs``.

    Root vectors are the natural elementary (skew-)matrices scaled by a positive
    real so that ``(e_a, e_{-a}) = 1``, with ``e_{-a}`` the transpose of ``e_a``.
    """
    return _representation(rs.family, rs.rank)


@functools.lru_cache(maxsize=None)
def _representation(family, rank):
    rs = _root_system(family, rank)
    m, B, W, found, pos, H, kappa, coord = _realize(family, rank)
    cartan = np.array(H, dtype=complex)
    P = rs.n_positive
    ev = np.zeros((2 * P, m, m), dtype=complex)
    for k, wt in enumerate(_root_keys(family, rank)):
        X = found[wt]
        s = kappa * np.trace(X @ X.T)
        ev[k] = X / np.sqrt(s)
        ev[k + P] = X.T / np.sqrt(s)
    basis = np.concatenate([cartan, ev])
    dual = np.concatenate([cartan, ev[P:], ev[:P]])
    dim_g = len(basis)
    sc = np.zeros((dim_g, dim_g, dim_g), dtype=complex)
    for a in range(dim_g):
        for b in range(dim_g):
            C = basis[a] @ basis[b] - basis[b] @ basis[a]
            sc[a, b] = kappa * np.einsum("cji,ij->c", dual, C)
    sc[np.abs(sc) < 1e-14] = 0.0
    return Representation(
        root_system=rs,
        dim=m,
        cartan=_frozen(cartan),
        root_vectors=_frozen(ev),
        form_scale=float(kappa),
        basis=_frozen(basis),
        dual_basis=_frozen(dual),
        structure_constants=_frozen(sc),
    )


def invariant_form(rep: Representation, X, Y) -> complex:
    """``kappa * trace(X Y)``.

    Raises:
        ShapeError: if X or Y is not an ``n x n`` matrix of the representation.
    """
    X = np.asarray(X)
    Y = np.asarray(Y)
    n = rep.dim
    if X.shape != (n, n) or Y.shape != (n, n):
        raise ShapeError(f"expected {n}x{n} matrices, got {X.shape} and {Y.shape}")
    return complex(rep.form_scale * np.einsum("ij,ji->", X, Y))


def casimir_tensor(rep: Representation) -> CasimirTensor:
    """``Omega = sum_i h_i (x) h_i + sum_{a in roots} e_a (x) e_{-a}``."""
    Om = sum(np.kron(b, d) for b, d in zip(rep.basis, rep.dual_basis))
    Om = np.asarray(Om)
    Om.setflags(write=False)
    return CasimirTensor(Om)


def closed_subset_check(rs: RootSystem, subset) -> bool:
    """True iff ``subset`` (root indices) is closed under negation and root addition."""
    S = set(int(k) for k in subset)
    for k in S:
        if rs.negative_of(k) not in S:
            return False
    for a, b in itertools.product(S, S):
        s = rs.index_of(rs.roots[a] + rs.roots[b])
        if s is not None and s not in S:
            return False
    return True


def roots_spanned_by(rs: RootSystem, simple_subset) -> tuple:
    """Indices of all roots lying in the linear span of the given simple roots.

    Raises:
        ValueError: if an index is not a simple root.
    """
    sub = sorted(set(int(k) for k in simple_subset))
    bad = [k for k in sub if k not in rs.simple]
    if bad:
        raise ValueError(f"indices {bad} are not simple roots")
    coeffs = rs.simple_coefficients()
    outside = [j for j, k in enumerate(rs.simple) if k not in sub]
    return tuple(i for i in range(len(rs.roots)) if np.all(np.abs(coeffs[i, outside]) < 1e-9))


def root_label(rs: RootSystem, k: int) -> str:
    """Label of ``roots[k]`` as a signed sum of simple roots, e.g. ``"a1+a2"`` or ``"-a1-2a2"``."""
    coeffs = np.rint(rs.simple_coefficients()[k]).astype(int)
    parts = []
    for j, c in enumerate(coeffs):
        if c:
            mag = "" if abs(c) == 1 else str(abs(c))
            parts.append(("-" if c < 0 else "+") + f"{mag}a{j + 1}")
    return "".join(parts).lstrip("+")


def parse_root_subset(rs: RootSystem, text) -> tuple:
    """Root indices from a subset description.

    Accepts ``"all"``, ``"none"`` (or empty), ``"simple"``, or comma-separated
    tokens. A token is a signed sum of simple roots (``"a1"``, ``"-a1"``,
    ``"a1+a2"``, ``"2a1+a2"`` for B2), optionally prefixed by ``"+-"`` or ``"±"``
    to include the negative as well, or a raw index ``"r5"``. A sequence of
    integers is taken as indices.

    Raises:
        ValueError: for malformed tokens or vectors that are not roots.
    """
    M = len(rs.roots)
    if not isinstance(text, str):
        idx = tuple(sorted({int(k) for k in text}))
        bad = [k for k in idx if not 0 <= k < M]
        if bad:
            raise ValueError(f"root indices out of range: {bad}")
        return idx
    t = text.strip().lower()
    if t in ("", "none", "empty"):
        return ()
    if t == "all":
        return tuple(range(M))
    if t == "simple":
        return tuple(rs.simple)
    out = set()
    S = rs.roots[list(rs.simple)]
    for tok in t.replace(" ", "").split(","):
        both = tok.startswith(("+-", "±"))
        body = tok[2:] if tok.startswith("+-") else tok[1:] if tok.startswith("±") else tok
        if body.startswith("r") and body[1:].isdigit():
            k = int(body[1:])
            if not 0 <= k < M:
                raise ValueError(f"root index {k} out of range in {tok!r}")
        else:
            vec = np.zeros(rs.ambient_dim)
            terms = body.replace("-", "+-").split("+")
            if not body or any(not term or term == "-" for term in terms[1:]):
                raise ValueError(f"malformed root token {tok!r}")
            for term in terms:
                if not term:
                    continue
                sign = -1 if term.startswith("-") else 1
                term = term.lstrip("-")
                mult, _, j = term.partition("a")
                if not j.isdigit() or (mult and not mult.isdigit()):
                    raise ValueError(f"malformed root token {tok!r}")
                j = int(j)
                if not 1 <= j <= len(rs.simple):
                    raise ValueError(f"no simple root a{j} in rank {len(rs.simple)}")
                vec += sign * (int(mult) if mult else 1) * S[j - 1]
            k = rs.index_of(vec)
            if k is None:
                raise ValueError(f"{tok!r} is not a root")
        out.add(k)
        if both:
            out.add(rs.negative_of(k))
    return tuple(sorted(out))
