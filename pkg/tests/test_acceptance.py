"""Acceptance criteria, each checked at its stated tolerance.

Every test prints one ``PASS``/``FAIL`` line. Suite reports are computed once
and reused by the determinism criterion, which reruns each suite.
"""

import time

import numpy as np
import pytest
from conftest import rep_of
from oracles import central_difference, eisenstein_g2_g3, p_sum, sigma_product, zeta_sum

from spincm import dynamics as dyn
from spincm import rmatrix as rm
from spincm.elliptic import Lattice, weierstrass_p, weierstrass_p_prime, weierstrass_sigma, weierstrass_zeta
from spincm.verify import SuiteConfig, run_conservation_suite, run_energy_suite, run_fpb_suite, run_rmatrix_suite

pytestmark = pytest.mark.slow

_RUNS = {}


def timed(name, fn):
    if name not in _RUNS:
        t0 = time.perf_counter()
        rep = fn(SuiteConfig())
        _RUNS[name] = (rep, time.perf_counter() - t0)
    return _RUNS[name]


def report(capsys, number, title, ok, detail):
    with capsys.disabled():
        print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")


def worst(rep, prefix):
    return max(c.max_residual for c in rep.checks if c.check.startswith(prefix + ":"))


def test_criterion_1_rmatrix_conditions(capsys):
    rep, secs = timed("rmatrix", run_rmatrix_suite)
    algebras = {c.check.split(":")[2] for c in rep.checks}
    families = {c.check.split(":")[1] for c in rep.checks}
    samples = {c.samples for c in rep.checks}
    ell = max(c.max_residual for c in rep.checks if c.check.startswith("cdybe:elliptic"))
    ok = rep.passed and algebras == {"A1", "A2", "B2"} and len(families) == 3 and samples == {100} and secs < 120
    report(
        capsys, 1, "r-matrix conditions",
        ok,
        f"zero_weight {worst(rep, 'zero_weight'):.1e}, unitarity {worst(rep, 'unitarity'):.1e}, "
        f"residue {worst(rep, 'residue'):.1e}, cdybe {worst(rep, 'cdybe'):.1e} (elliptic {ell:.1e}), "
        f"{len(rep.checks)} checks in {secs:.0f}s",
    )
    assert ok


def test_criterion_2_fundamental_brackets(capsys):
    rep, secs = timed("fpb", run_fpb_suite)
    algebras = {c.check.split(":")[2] for c in rep.checks}
    ablation = min(c.min_residual for c in rep.checks if c.check.startswith("fpb_ablation:"))
    ok = rep.passed and {"A1", "A2"} <= algebras and all(c.samples == 100 for c in rep.checks) and secs < 120
    report(
        capsys, 2, "fundamental Poisson brackets",
        ok,
        f"residual {worst(rep, 'fpb'):.1e} (<=1e-9), forms {worst(rep, 'fpb_forms'):.1e} (<=1e-11), "
        f"ablation min {ablation:.1e} (>1e-3), {secs:.0f}s",
    )
    assert ok


def test_criterion_3_energy_from_contour(capsys):
    rep, secs = timed("energy", run_energy_suite)
    families = {c.check.split(":")[1] for c in rep.checks}
    ok = rep.passed and len(families) == 3 and all(c.samples == 20 for c in rep.checks) and secs < 60
    report(capsys, 3, "H = L*E via 256-node contour", ok, f"max |H - E - offset| {worst(rep, 'energy_contour'):.1e} (<=1e-8), {secs:.0f}s")
    assert ok


def test_criterion_4_conservation_and_isospectrality(capsys):
    rep, secs = timed("conservation", run_conservation_suite)
    by = {c.check: c for c in rep.checks}
    need = [
        "spectral_drift:rational:A2:0,1,2,3,4,5:on",
        "spectral_drift:trigonometric:A1:0:on",
        "anomaly_witness:trigonometric:A1:0:off",
    ]
    ok = rep.passed and all(k in by for k in need) and secs < 180
    report(
        capsys, 4, "conservation and isospectrality",
        ok,
        f"H drift {worst(rep, 'energy_drift'):.1e}, J drift {worst(rep, 'momentum_drift'):.1e}, "
        f"sigma {worst(rep, 'sigma_membership'):.1e}, on-set spectral {worst(rep, 'spectral_drift'):.1e} (<=1e-5), "
        f"off-set witness {by[need[2]].max_residual:.2e} (>1e-2), {secs:.0f}s",
    )
    assert ok


def _gradient_errors(rng):
    errs = []
    for fam, rank in [("A", 1), ("A", 2), ("B", 2)]:
        rep = rep_of(fam, rank)
        rs = rep.root_system
        for spec in (rm.rational(rep, tuple(range(len(rs.roots)))), rm.trigonometric(rep, (rs.simple[0],)), rm.elliptic(rep)):
            sys = dyn.SpinSystem(spec)
            N = sys.rank
            for _ in range(4):
                x = sys.point(rm.sample_q(spec, rng), rng.normal(size=N), rng.normal(size=rep.dim_g))
                z = rm.sample_z(rng)[0]
                f_h = lambda v: dyn.hamiltonian(sys, dyn.PhasePoint.from_vector(v, N))
                f_l = lambda v: dyn.lax(sys, dyn.PhasePoint.from_vector(v, N), z)
                for an, fd in (
                    (np.concatenate(dyn.hamiltonian_gradient(sys, x)), central_difference(f_h, x.vector)),
                    (np.concatenate(dyn.lax_partials(sys, x, z)), central_difference(f_l, x.vector)),
                ):
                    errs.append(np.abs(an - fd).max() / max(1.0, np.abs(fd).max()))
                d = rng.normal(size=N)
                f_r = lambda t: rm.eval_r(spec, x.q + t[0] * d, z).matrix
                fd = central_difference(f_r, [0.0])[0]
                an = rm.dq_derivative(spec, x.q, z, d).matrix
                errs.append(np.abs(an - fd).max() / max(1.0, np.abs(fd).max()))
    return max(errs)


def test_criterion_5_oracle_cross_checks(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    grad = _gradient_errors(rng)
    L = Lattice(1.0, 1j)
    pts = [0.3, 0.3 + 0.7j, -0.45 + 0.2j, 0.9 - 0.8j, 0.15 - 0.55j]
    lattice = max(
        max(abs(weierstrass_zeta(L, z) - zeta_sum(1.0, 1j, z)),
            abs(weierstrass_p(L, z) - p_sum(1.0, 1j, z)),
            abs(weierstrass_sigma(L, z) - sigma_product(1.0, 1j, z)))
        for z in pts
    )
    ode = 0.0
    legendre = 0.0
    for lat in (L, Lattice(1.0, 0.5 + 0.9j)):
        g2, g3 = eisenstein_g2_g3(lat.omega1, lat.omega2)
        z = 0.9 * (rng.uniform(-1, 1, 80) * lat.omega1 + rng.uniform(-1, 1, 80) * lat.omega2)
        z = z[lat.distance_to_lattice(z) > 0.1][:50]
        P, dP = weierstrass_p(lat, z), weierstrass_p_prime(lat, z)
        ode = max(ode, float(np.max(np.abs(dP**2 - 4 * P**3 + g2 * P + g3) / np.maximum(1, np.abs(P) ** 3))))
        legendre = max(legendre, abs(lat.eta1 * lat.omega2 - lat.eta2 * lat.omega1 - 0.5j * np.pi))
    secs = time.perf_counter() - t0
    ok = grad <= 1e-6 and lattice <= 1e-8 and ode <= 1e-9 and legendre <= 1e-9 and secs < 60
    report(
        capsys, 5, "oracle cross-checks",
        ok,
        f"gradients {grad:.1e} (<=1e-6), lattice sums {lattice:.1e} (<=1e-8), "
        f"P ODE {ode:.1e} (<=1e-9), Legendre {legendre:.1e} (<=1e-9), {secs:.0f}s",
    )
    assert ok


def test_criterion_6_determinism(capsys):
    suites = {"rmatrix": run_rmatrix_suite, "fpb": run_fpb_suite, "energy": run_energy_suite, "conservation": run_conservation_suite}
    same = {}
    for name, fn in suites.items():
        first, _ = timed(name, fn)
        same[name] = first.to_json() == fn(SuiteConfig()).to_json()
    ok = all(same.values())
    report(capsys, 6, "byte-identical reruns", ok, ", ".join(f"{k} {'identical' if v else 'DIFFERENT'}" for k, v in same.items()))
    assert ok
