"""Spin Calogero-Moser systems on ``T*h* x g*``.

Phase space conventions
-----------------------
A point is ``(q, p, xi)`` with ``q`` and ``p`` in orthonormal Cartan coordinates
and ``xi`` in the coordinates ``xi_a = <xi, basis_dual[a]>``, i.e. Cartan
components ``xi_i = (xi, h_i)`` followed by ``xi_a = (xi, e_{-a})``. Through the
invariant form ``xi`` is the g-element ``X = sum_a xi_a basis[a]``.

The Poisson bracket is the product of the cotangent bracket, written with
``{p_i, q_j} = delta_ij``, and the plus Lie-Poisson bracket
``{xi_a, xi_b} = (X, [basis_dual[a], basis_dual[b]])``. With these signs the
Lax matrix satisfies ``{L1(z), L2(w)} = -[r12(q, z-w), L1(z) + L2(w)] - X_J r``
exactly. Time evolution is ``dF/dt = {H, F}``, which gives ``dq/dt = p``,
``dp/dt = -dH/dq`` and ``dxi/dt = ad*_{dH/dxi} xi``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .elliptic import weierstrass_p, weierstrass_p_prime
from .errors import SingularApproach, SingularConfiguration, StepError
from .rmatrix import RMatrixSpec, check_q, coefficients, dq_derivative, eval_r

TRAJECTORY_SCHEMA = "spincm.trajectory/1"
GUARD_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class PhasePoint:
    """State ``(q, p, xi)`` of a spin system."""

    q: np.ndarray
    p: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        for name in ("q", "p", "xi"):
            a = np.array(getattr(self, name))
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.q.shape != self.p.shape:
            raise ValueError("q and p must have the same length")

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.p, self.xi])

    @classmethod
    def from_vector(cls, v, rank):
        v = np.asarray(v)
        return cls(v[:rank], v[rank : 2 * rank], v[2 * rank :])

    def replace(self, **kw):
        d = {"q": self.q, "p": self.p, "xi": self.xi}
        d.update(kw)
        return PhasePoint(**d)


@dataclass(frozen=True, eq=False)
class SpinSystem:
    """Spin Calogero-Moser system attached to a canonical r-matrix.

    ``energy`` selects the trigonometric Hamiltonian: ``"display"`` (default)
    uses the coefficient ``-5/6`` on roots outside ``Delta(Pi')``; ``"contour"``
    uses ``+1/6``, the value obtained from the constant Laurent coefficient of
    ``(L(z), L(z)) / 2``. The two differ by ``sum xi_a xi_{-a}`` over those roots
    and coincide for the other families.
    """

    spec: RMatrixSpec
    energy: str = "display"
    _lp: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.energy not in ("display", "contour"):
            raise ValueError("energy must be 'display' or 'contour'")
        rep = self.spec.rep
        D = rep.dual_basis
        comm = np.einsum("aij,bjk->abik", D, D) - np.einsum("bij,ajk->abik", D, D)
        # lp[a, b, c] = (basis[c], [dual[a], dual[b]])
        lp = rep.form_scale * np.einsum("abik,cki->abc", comm, rep.basis)
        lp[np.abs(lp) < 1e-14] = 0.0
        lp.setflags(write=False)
        object.__setattr__(self, "_lp", lp)

    @property
    def rep(self):
        return self.spec.rep

    @property
    def rank(self) -> int:
        return self.spec.root_system.ambient_dim

    def poisson_tensor(self, xi) -> np.ndarray:
        """``{xi_a, xi_b}`` at ``xi``."""
        return self._lp @ np.asarray(xi)

    def point(self, q, p, xi) -> PhasePoint:
        x = PhasePoint(np.asarray(q), np.asarray(p), np.asarray(xi))
        if x.q.shape != (self.rank,) or x.xi.shape != (self.rep.dim_g,):
            raise ValueError(
                f"expected q, p of length {self.rank} and xi of length {self.rep.dim_g}"
            )
        return x


# -- Hamiltonian ----------------------------------------------------------------------


def _spin_weights(sys: SpinSystem, q):
    """Weights ``w_a`` and ``dw_a/d(a, q)`` with ``H = |p|^2/2 - sum_a w_a xi_a xi_{-a} / 2``."""
    spec = sys.spec
    x = check_q(spec, q)
    M = len(x)
    w = np.zeros(M, dtype=complex)
    dw = np.zeros(M, dtype=complex)
    dyn = np.zeros(M, dtype=bool)
    dyn[list(spec.dynamical_roots)] = True
    if spec.family == "rational":
        w[dyn] = 1.0 / x[dyn] ** 2
        dw[dyn] = -2.0 / x[dyn] ** 3
    elif spec.family == "trigonometric":
        s = np.sin(x[dyn])
        w[dyn] = 1.0 / s**2 - 1.0 / 3.0
        dw[dyn] = -2.0 * np.cos(x[dyn]) / s**3
        w[~dyn] = 5.0 / 3.0 if sys.energy == "display" else -1.0 / 3.0
    else:
        w[:] = weierstrass_p(spec.lattice, x)
        dw[:] = weierstrass_p_prime(spec.lattice, x)
    return x, w, dw


def _neg(sys):
    rs = sys.spec.root_system
    return np.array([rs.negative_of(k) for k in range(len(rs.roots))], dtype=int)


def hamiltonian(sys: SpinSystem, x: PhasePoint) -> complex:
    """Energy ``|p|^2/2 - (1/2) sum_a w_a((a, q)) xi_a xi_{-a}`` of the family.

    Raises:
        SingularConfiguration: if ``q`` is on the divisor.
    """
    N = sys.rank
    _, w, _ = _spin_weights(sys, x.q)
    xr = x.xi[N:]
    return complex(0.5 * np.sum(x.p**2) - 0.5 * np.sum(w * xr * xr[_neg(sys)]))


def hamiltonian_gradient(sys: SpinSystem, x: PhasePoint):
    """Analytic ``(dH/dq, dH/dp, dH/dxi)``."""
    N = sys.rank
    rs = sys.spec.root_system
    _, w, dw = _spin_weights(sys, x.q)
    xr = x.xi[N:]
    xneg = xr[_neg(sys)]
    gq = -0.5 * (dw * xr * xneg) @ rs.roots
    gxi = np.zeros(sys.rep.dim_g, dtype=complex)
    gxi[N:] = -w * xneg
    return gq, np.asarray(x.p, dtype=complex), gxi


# -- Lax operator ---------------------------------------------------------------------


def lax(sys: SpinSystem, x: PhasePoint, z) -> np.ndarray:
    """``L(z) = p + c(z) J + sum_a phi_a((a, q), z) xi_a e_a`` as an ``n x n`` matrix."""
    rep = sys.rep
    N = sys.rank
    c, phi = coefficients(sys.spec, x.q, z)
    coeffs = np.concatenate([x.p + c * x.xi[:N], phi * x.xi[N:]])
    return rep.element(coeffs)


def lax_partials(sys: SpinSystem, x: PhasePoint, z):
    """Partial derivatives of ``L(z)`` in every phase-space coordinate.

    Returns ``(dL/dq_i, dL/dp_i, dL/dxi_a)`` as stacks of ``n x n`` matrices.
    """
    rep = sys.rep
    N = sys.rank
    rs = sys.spec.root_system
    c, phi, dphi = coefficients(sys.spec, x.q, z, derivative=True)
    E = rep.root_vectors
    dq = np.einsum("k,ki,kab->iab", dphi * x.xi[N:], rs.roots, E)
    dp = rep.cartan.astype(complex)
    dxi = np.concatenate([c * rep.cartan, phi[:, None, None] * E])
    return dq, dp, dxi


# -- Poisson structure ----------------------------------------------------------------


@dataclass(frozen=True)
class Observable:
    """Function on phase space with an analytic gradient ``(d/dq, d/dp, d/dxi)``."""

    evaluate: Callable
    gradient: Callable
    name: str = ""

    def __call__(self, x):
        return self.evaluate(x)


def coordinate(sys: SpinSystem, kind: str, index: int) -> Observable:
    """Coordinate function ``q_i``, ``p_i`` or ``xi_a``."""
    N, D = sys.rank, sys.rep.dim_g
    sizes = {"q": N, "p": N, "xi": D}
    if kind not in sizes:
        raise ValueError("kind must be 'q', 'p' or 'xi'")

    def grad(x):
        g = {k: np.zeros(n) for k, n in sizes.items()}
        g[kind][index] = 1.0
        return g["q"], g["p"], g["xi"]

    return Observable(lambda x: getattr(x, kind)[index], grad, f"{kind}_{index}")


def hamiltonian_observable(sys: SpinSystem) -> Observable:
    return Observable(lambda x: hamiltonian(sys, x), lambda x: hamiltonian_gradient(sys, x), "H")


def lax_entry(sys: SpinSystem, z, a: int, b: int) -> Observable:
    """Matrix entry ``L(z)[a, b]``."""

    def grad(x):
        dq, dp, dxi = lax_partials(sys, x, z)
        return dq[:, a, b], dp[:, a, b], dxi[:, a, b]

    return Observable(lambda x: lax(sys, x, z)[a, b], grad, f"L({z})[{a},{b}]")


def poisson_bracket(sys: SpinSystem, F: Observable, G: Observable, x: PhasePoint) -> complex:
    """``{F, G} = sum_i (dF/dp_i dG/dq_i - dF/dq_i dG/dp_i) + (X, [dF/dxi, dG/dxi])``."""
    fq, fp, fx = F.gradient(x)
    gq, gp, gx = G.gradient(x)
    can = np.dot(fp, gq) - np.dot(fq, gp)
    Pi = sys.poisson_tensor(x.xi)
    # written antisymmetrically so that {F, F} vanishes exactly
    return complex(can + 0.5 * (fx @ Pi @ gx - gx @ Pi @ fx))


def lax_bracket(sys: SpinSystem, x: PhasePoint, z, w) -> np.ndarray:
    """``{L1(z), L2(w)}`` as an ``n^2 x n^2`` matrix, entry by entry from the gradients."""
    qz, pz, Xz = lax_partials(sys, x, z)
    qw, pw, Xw = lax_partials(sys, x, w)
    n = sys.rep.dim
    Pi = sys.poisson_tensor(x.xi)
    T = np.einsum("iab,icd->acbd", pz, qw) - np.einsum("iab,icd->acbd", qz, pw)
    T = T + np.einsum("ef,eab,fcd->acbd", Pi, Xz, Xw, optimize=True)
    return T.reshape(n * n, n * n)


def fpb_sides(sys: SpinSystem, x: PhasePoint, z, w, anomaly=True):
    """Left side and the two equivalent right sides of the fundamental bracket relations.

    Returns ``(lhs, rhs_two_commutators, rhs_one_commutator)``:

    * ``-[r12(z-w), L1(z)] + [r21(w-z), L2(w)] - X_J r(z-w)``
    * ``-[r12(z-w), L1(z) + L2(w)] - X_J r(z-w)``
    """
    n = sys.rep.dim
    N = sys.rank
    I = np.eye(n)
    Lz = np.kron(lax(sys, x, z), I)
    Lw = np.kron(I, lax(sys, x, w))
    r = eval_r(sys.spec, x.q, z - w).matrix
    r21 = eval_r(sys.spec, x.q, w - z).swap().matrix
    anom = dq_derivative(sys.spec, x.q, z - w, x.xi[:N]).matrix if anomaly else 0.0
    rhs6 = -(r @ Lz - Lz @ r) + (r21 @ Lw - Lw @ r21) - anom
    L12 = Lz + Lw
    rhs7 = -(r @ L12 - L12 @ r) - anom
    return lax_bracket(sys, x, z, w), rhs6, rhs7


def fpb_residual(sys: SpinSystem, x: PhasePoint, z, w, anomaly=True) -> float:
    """``||{L1(z), L2(w)} + [r12(z-w), L1(z) + L2(w)] + X_J r(z-w)||``."""
    lhs, _, rhs = fpb_sides(sys, x, z, w, anomaly=anomaly)
    return float(np.linalg.norm(lhs - rhs))


# -- flow -----------------------------------------------------------------------------


def vector_field(sys: SpinSystem, x: PhasePoint):
    """Hamiltonian vector field ``(dq, dp, dxi)`` of the system."""
    gq, gp, gx = hamiltonian_gradient(sys, x)
    dxi = gx @ sys.poisson_tensor(x.xi)
    return gp, -gq, dxi


def momentum_map(x: PhasePoint, rank=None) -> np.ndarray:
    """Cartan components of ``xi`` (the restriction of ``xi`` to the Cartan subalgebra)."""
    N = len(x.q) if rank is None else rank
    return np.asarray(x.xi[:N])


def sigma_membership(sys: SpinSystem, x: PhasePoint, tol=1e-8) -> bool:
    """Whether ``x`` lies in the set where the anomaly term of the bracket vanishes.

    Trigonometric and elliptic: ``J = 0``. Rational: ``(a, J) = 0`` for ``a`` in Delta'.
    """
    J = momentum_map(x, sys.rank)
    if sys.spec.family != "rational":
        return bool(np.linalg.norm(J) <= tol)
    roots = sys.spec.root_system.roots[list(sys.spec.dynamical_roots)]
    return bool(np.all(np.abs(roots @ J) <= tol)) if len(roots) else True


def project_to_sigma(sys: SpinSystem, x: PhasePoint) -> PhasePoint:
    """Orthogonal projection of ``J`` onto the set where the anomaly vanishes."""
    N = sys.rank
    xi = np.array(x.xi)
    J = xi[:N]
    if sys.spec.family == "rational":
        R = sys.spec.root_system.roots[list(sys.spec.dynamical_roots)]
        if len(R):
            J = J - np.linalg.pinv(R) @ (R @ J)
    else:
        J = np.zeros_like(J)
    xi[:N] = J
    return x.replace(xi=xi)


def random_point(sys: SpinSystem, rng, on_sigma=True, spin_scale=0.3, momentum_scale=0.3, j_scale=0.3):
    """Seeded real phase point with skew spins ``xi_{-a} = -xi_a``.

    Skew spins make ``xi_a xi_{-a} <= 0``, so every family's potential is
    repulsive and trajectories stay away from the divisor. Off the anomaly-free
    set the Cartan part ``J`` is drawn with scale ``j_scale``.
    """
    from .rmatrix import sample_q

    N = sys.rank
    P = sys.spec.root_system.n_positive
    q = sample_q(sys.spec, rng)
    p = momentum_scale * rng.normal(size=N)
    half = spin_scale * rng.normal(size=P)
    J = j_scale * rng.normal(size=N)
    x = PhasePoint(q, p, np.concatenate([J, half, -half]))
    return project_to_sigma(sys, x) if on_sigma else x


def spectral_invariants(sys: SpinSystem, x: PhasePoint, z, k_max=3) -> list:
    """``trace(L(z)^k)`` for ``k = 1..k_max``."""
    L = lax(sys, x, z)
    out, P = [], np.eye(L.shape[0], dtype=complex)
    for _ in range(k_max):
        P = P @ L
        out.append(complex(np.trace(P)))
    return out


def contour_offset(sys: SpinSystem, x: PhasePoint) -> complex:
    """``hamiltonian - energy_via_contour`` derived from the Laurent expansion of ``L``.

    Zero for the rational and elliptic families. For the trigonometric family
    the roots outside ``Delta(Pi')`` carry ``1/sin^2 z`` in ``phi_a phi_{-a}``,
    whose constant Laurent coefficient is ``1/3``; the contour therefore yields
    ``+1/6`` per ``xi_a xi_{-a}`` where the displayed energy has ``-5/6``, an
    offset of ``-sum xi_a xi_{-a}`` over those roots.
    """
    spec = sys.spec
    if spec.family != "trigonometric" or sys.energy == "contour":
        return 0j
    N = sys.rank
    outside = np.ones(len(spec.root_system.roots), dtype=bool)
    outside[list(spec.dynamical_roots)] = False
    xr = x.xi[N:]
    return complex(-np.sum((xr * xr[_neg(sys)])[outside]))


def max_contour_radius(spec: RMatrixSpec) -> float:
    """Radius of the largest punctured disc around ``z = 0`` free of other poles."""
    if spec.family == "rational":
        return np.inf
    if spec.family == "trigonometric":
        return np.pi
    L = spec.lattice
    pts = [2 * m * L._w1 + 2 * n * L._w2 for m in (-1, 0, 1) for n in (-1, 0, 1) if m or n]
    return float(min(abs(w) for w in pts))


def energy_via_contour(sys: SpinSystem, x: PhasePoint, radius=0.5, nodes=256) -> complex:
    """``(1/2) oint (L(z), L(z)) dz / (2 pi i z)`` by the trapezoid rule on ``|z| = radius``.

    This is the constant Laurent coefficient of ``(L, L) / 2`` at ``z = 0``;
    adding :func:`contour_offset` gives :func:`hamiltonian`.

    Raises:
        ValueError: if ``nodes < 64`` or the circle leaves the punctured disc of analyticity.
        SingularConfiguration: if a node hits a pole.
    """
    if nodes < 64:
        raise ValueError("need at least 64 nodes")
    if not 0 < radius < max_contour_radius(sys.spec):
        raise ValueError(f"radius {radius} outside the analyticity disc of the {sys.spec.family} family")
    rep = sys.rep
    zs = radius * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    total = 0j
    for z in zs:
        L = lax(sys, x, z)
        total += rep.form_scale * np.einsum("ij,ji->", L, L)
    return complex(0.5 * total / nodes)


# -- integration ----------------------------------------------------------------------


@dataclass
class Trajectory:
    """Sampled solution of the equations of motion with per-sample diagnostics."""

    times: list
    states: list
    H: list = field(default_factory=list)
    J: list = field(default_factory=list)
    spectral: list = field(default_factory=list)
    spectral_z: tuple = ()
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states must have the same length")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly increasing")

    def drift(self, values, relative=False):
        v = np.asarray(values)
        d = np.abs(v - v[0])
        if v.ndim > 1:
            d = np.linalg.norm(v - v[0], axis=-1) if not relative else d
        if relative:
            d = d / np.maximum(1.0, np.abs(v[0]))
        return float(d.max())

    def energy_drift(self) -> float:
        return self.drift(self.H, relative=True)

    def momentum_drift(self) -> float:
        return self.drift(self.J)

    def spectral_drift(self) -> float:
        if not self.spectral:
            return 0.0
        S = np.asarray(self.spectral)
        return float(np.abs(S - S[0]).max())

    def rows(self):
        for t, x, H, J, S in zip(self.times, self.states, self.H, self.J, self.spectral or [[]] * len(self.times)):
            yield {
                "t": float(t),
                "q": [float(v) for v in np.real(x.q)],
                "p": [float(v) for v in np.real(x.p)],
                "xi": [float(v) for v in np.real(x.xi)],
                "H": [float(np.real(H)), float(np.imag(H))],
                "J_norm": float(np.linalg.norm(J)),
                "spectral": [[float(np.real(s)), float(np.imag(s))] for s in np.ravel(S)],
            }

    def to_json(self) -> str:
        doc = {
            "schema": TRAJECTORY_SCHEMA,
            "config": self.config,
            "spectral_z": [[float(np.real(z)), float(np.imag(z))] for z in self.spectral_z],
            "rows": list(self.rows()),
        }
        return json.dumps(doc, indent=1, sort_keys=True)

    def to_csv(self) -> str:
        rows = list(self.rows())
        buf = io.StringIO()
        if not rows:
            return ""
        r0 = rows[0]
        header = ["t"]
        header += [f"q{i}" for i in range(len(r0["q"]))]
        header += [f"p{i}" for i in range(len(r0["p"]))]
        header += [f"xi{i}" for i in range(len(r0["xi"]))]
        header += ["H_re", "H_im", "J_norm"]
        header += [f"spectral{i}_{part}" for i in range(len(r0["spectral"])) for part in ("re", "im")]
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(header)
        for r in rows:
            wr.writerow(
                [repr(r["t"])]
                + [repr(v) for v in r["q"] + r["p"] + r["xi"]]
                + [repr(r["H"][0]), repr(r["H"][1]), repr(r["J_norm"])]
                + [repr(v) for s in r["spectral"] for v in s]
            )
        return buf.getvalue()


def singular_margin(spec: RMatrixSpec, q) -> float:
    """Distance-like measure of ``q`` from the divisor (smaller is closer)."""
    x = spec.root_system.roots @ np.asarray(q)
    dyn = list(spec.dynamical_roots)
    if not dyn:
        return np.inf
    if spec.family == "rational":
        return float(np.min(np.abs(x[dyn])))
    if spec.family == "trigonometric":
        return float(np.min(np.abs(np.sin(x[dyn]))))
    return float(np.min(spec.lattice.distance_to_lattice(x[dyn])))


def _segment_to_point(a, b, w):
    """Distance from the points ``w`` to the segments ``[a, b]`` (broadcast)."""
    d = b - a
    L2 = np.abs(d) ** 2
    t = np.where(L2 > 0, np.real((w - a) * np.conj(d)) / np.where(L2 > 0, L2, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.abs(a + t * d - w)


def step_margin(spec: RMatrixSpec, q0, q1) -> float:
    """Smallest distance from a pole to the straight path of ``(a, q)`` between two steps.

    Guards against steps that jump across the divisor, which endpoint checks miss.
    """
    dyn = list(spec.dynamical_roots)
    if not dyn:
        return np.inf
    R = spec.root_system.roots[dyn]
    a = R @ np.asarray(q0, dtype=complex)
    b = R @ np.asarray(q1, dtype=complex)
    if spec.family == "rational":
        return float(np.min(_segment_to_point(a, b, 0.0)))
    if spec.family == "trigonometric":
        lo = np.floor(np.minimum(a.real, b.real) / np.pi)
        hi = np.ceil(np.maximum(a.real, b.real) / np.pi)
        best = np.inf
        for k in range(int(np.min(lo)), int(np.max(hi)) + 1):
            best = min(best, float(np.min(_segment_to_point(a, b, k * np.pi))))
        # |sin| grows like the distance near its zeros, and an imaginary part only helps
        return best
    L = spec.lattice
    h = 0.5 * min(abs(L._w1), abs(L._w2))
    n = int(np.max(np.ceil(np.abs(b - a) / h))) + 1
    best = np.inf
    for s in np.linspace(0.0, 1.0, n + 1):
        z = a + s * (b - a)
        z0, _, _ = L.reduce(z)
        w0 = z - z0
        for i in (-1, 0, 1):
            for j in (-1, 0, 1):
                w = w0 + 2 * i * L._w1 + 2 * j * L._w2
                best = min(best, float(np.min(_segment_to_point(a, b, w))))
    return best


def _rhs(sys, v):
    x = PhasePoint.from_vector(v, sys.rank)
    dq, dp, dxi = vector_field(sys, x)
    return np.concatenate([dq, dp, dxi])


def integrate(
    sys: SpinSystem,
    x0: PhasePoint,
    t_end: float,
    dt: float = 1e-3,
    method: str = "rk4",
    output_every: int = 100,
    spectral_z=(),
    k_max: int = 2,
    rtol: float = 1e-12,
    atol: float = 1e-12,
) -> Trajectory:
    """Integrate the equations of motion from ``x0`` to ``t_end``.

    ``method="rk4"`` takes fixed steps of size ``dt`` and records every
    ``output_every`` steps; ``method="dop853"`` is adaptive (8th order) with
    output at the same times.

    Raises:
        StepError: for a non-positive ``dt`` or ``t_end``, or if the adaptive
            solver fails.
        SingularApproach: when ``q``, or the straight path of a fixed step,
            comes within ``1e-6`` of the divisor.
    """
    if not dt > 0 or not np.isfinite(dt):
        raise StepError(f"dt must be positive, got {dt}")
    if not t_end > 0:
        raise StepError(f"t_end must be positive, got {t_end}")
    if method not in ("rk4", "dop853"):
        raise StepError(f"unknown method {method!r}")
    n_steps = int(round(t_end / dt))
    if n_steps < 1:
        raise StepError("t_end shorter than one step")
    dt = t_end / n_steps
    N = sys.rank
    spectral_z = tuple(complex(z) for z in np.ravel(spectral_z))
    traj = Trajectory([], [], spectral_z=spectral_z)

    def record(t, v):
        x = PhasePoint.from_vector(v, N)
        traj.times.append(t)
        traj.states.append(x)
        traj.H.append(hamiltonian(sys, x))
        traj.J.append(momentum_map(x, N).copy())
        if spectral_z:
            traj.spectral.append([spectral_invariants(sys, x, z, k_max) for z in spectral_z])

    dyn_roots = sys.spec.root_system.roots[list(sys.spec.dynamical_roots)]
    margins = []

    def guard(t, v, prev=None):
        m = singular_margin(sys.spec, v[:N])
        if prev is not None and len(dyn_roots):
            # every point of the step lies within half a step of an endpoint,
            # and each margin is at most the distance to the divisor
            half = 0.5 * float(np.max(np.abs(dyn_roots @ (v[:N] - prev[:N]))))
            if min(m, margins[-1]) - half < GUARD_TOL:
                m = min(m, step_margin(sys.spec, prev[:N], v[:N]))
        margins[:] = [m]
        if not m >= GUARD_TOL or not np.all(np.isfinite(v)):
            raise SingularApproach(f"trajectory reached the singular set at t={t:.6g}", t, traj)

    v = np.asarray(x0.vector, dtype=complex)
    guard(0.0, v)
    record(0.0, v)
    if method == "rk4":
        f = lambda u: _rhs(sys, u)  # noqa: E731
        for k in range(1, n_steps + 1):
            try:
                k1 = f(v)
                k2 = f(v + 0.5 * dt * k1)
                k3 = f(v + 0.5 * dt * k2)
                k4 = f(v + dt * k3)
            except SingularConfiguration as exc:
                raise SingularApproach(str(exc), (k - 1) * dt, traj) from exc
            prev, v = v, v + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            guard(k * dt, v, prev)
            if k % output_every == 0 or k == n_steps:
                record(k * dt, v)
    else:
        from scipy.integrate import solve_ivp

        t_out = [k * dt for k in range(output_every, n_steps + 1, output_every)]
        if not t_out or t_out[-1] < t_end:
            t_out.append(t_end)

        def event(t, u):
            return singular_margin(sys.spec, u[:N]) - GUARD_TOL

        event.terminal = True
        sol = solve_ivp(
            lambda t, u: _rhs(sys, u), (0.0, t_end), v, method="DOP853",
            t_eval=t_out, rtol=rtol, atol=atol, events=event,
        )
        for t, u in zip(sol.t, sol.y.T):
            record(float(t), u)
        if sol.status == 1:
            raise SingularApproach("trajectory reached the singular set", float(sol.t_events[0][0]), traj)
        if sol.status < 0:
            raise StepError(f"adaptive integration failed: {sol.message}")
    return traj
