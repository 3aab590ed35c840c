import json

import numpy as np
import pytest

from spincm.errors import InvalidSpec
from spincm.verify import (
    OFF_SIGMA_SEED,
    SCHEMA,
    SUITES,
    TOLERANCES,
    CheckReport,
    SuiteConfig,
    _aggregate,
    case_rng,
    parse_algebra,
    replay,
    rmatrix_cases,
    run_energy_suite,
    run_fpb_suite,
    run_rmatrix_suite,
)

SMALL = dict(algebras=("A1", "A2"), samples=3)


def test_config_validation():
    with pytest.raises(ValueError):
        SuiteConfig(samples=0)
    with pytest.raises(ValueError):
        SuiteConfig(families=("hyperbolic",))
    with pytest.raises(ValueError):
        SuiteConfig(tolerances={"cdybe": -1.0})
    with pytest.raises(ValueError):
        SuiteConfig(tolerances={"nonsense": 1.0})
    with pytest.raises(ValueError):
        SuiteConfig(omega1=1.0, omega2=1.0)
    with pytest.raises(InvalidSpec, match="not closed"):
        SuiteConfig(families=("rational",), delta_prime=("a1",))
    with pytest.raises(ValueError):
        SuiteConfig(algebras=("E8",))
    cfg = SuiteConfig(tolerances={"cdybe": 1e-6})
    assert cfg.tolerance("cdybe") == (1e-6, "upper")
    assert cfg.tolerance("fpb_ablation") == (1e-3, "lower")
    json.dumps(cfg.to_dict())


def test_parse_algebra():
    assert parse_algebra("A2") == ("A", 2)
    assert parse_algebra(" b3 ") == ("B", 3)
    for bad in ("A", "2A", "Ax"):
        with pytest.raises(ValueError):
            parse_algebra(bad)


def test_case_rng_depends_on_seed_and_name():
    a = case_rng(0, "x").normal()
    assert a == case_rng(0, "x").normal()
    assert a != case_rng(1, "x").normal()
    assert a != case_rng(0, "y").normal()


def test_tolerances_match_acceptance_values():
    assert TOLERANCES["zero_weight"] == (1e-11, "upper")
    assert TOLERANCES["unitarity"] == (1e-9, "upper")
    assert TOLERANCES["residue"] == (1e-8, "upper")
    assert TOLERANCES["cdybe"] == (1e-9, "upper")
    assert TOLERANCES["cdybe_elliptic"] == (1e-7, "upper")
    assert TOLERANCES["fpb"] == (1e-9, "upper")
    assert TOLERANCES["fpb_forms"] == (1e-11, "upper")
    assert TOLERANCES["fpb_ablation"] == (1e-3, "lower")
    assert TOLERANCES["energy_contour"] == (1e-8, "upper")
    assert TOLERANCES["spectral_drift"] == (1e-5, "upper")
    assert TOLERANCES["anomaly_witness"] == (1e-2, "lower")
    assert OFF_SIGMA_SEED == 0


def test_aggregate_bounds():
    cfg = SuiteConfig()
    up = _aggregate("s", "c", cfg, [1e-12, 3e-10, 2e-9], [{}, {}, {"i": 2}], "cdybe")
    assert not up.passed and up.failures == [{"i": 2, "residual": 2e-9}]
    assert up.max_residual == 2e-9 and up.min_residual == 1e-12
    low = _aggregate("s", "c", cfg, [5e-3, 1.0], [{}, {}], "fpb_ablation")
    assert low.passed is True and low.bound == "lower"
    low = _aggregate("s", "c", cfg, [5e-4, 1.0], [{}, {}], "fpb_ablation")
    assert not low.passed
    nan = _aggregate("s", "c", cfg, [np.nan], [{}], "cdybe")
    assert not nan.passed


def test_default_cases_cover_required_subsets():
    cfg = SuiteConfig(algebras=("A2",))
    names = [(k["family"], tuple(k["subset"])) for k in rmatrix_cases(cfg)]
    rational = [s for f, s in names if f == "rational"]
    trig = [s for f, s in names if f == "trigonometric"]
    assert () in rational and (0, 1, 2, 3, 4, 5) in rational and any(len(s) == 2 for s in rational)
    assert () in trig and any(len(s) == 1 for s in trig) and any(len(s) == 2 for s in trig)
    assert sum(f == "elliptic" for f, _ in names) == 1


def test_rmatrix_suite_small_passes():
    rep = run_rmatrix_suite(SuiteConfig(**SMALL))
    assert rep.passed
    checks = {c.check.split(":")[0] for c in rep.checks}
    assert checks == {"zero_weight", "unitarity", "residue", "cdybe"}
    doc = json.loads(rep.to_json())
    assert doc["schema"] == SCHEMA and doc["pass"] is True
    for c in doc["checks"]:
        assert {"suite", "check", "samples", "max_residual", "median_residual", "tolerance", "pass", "failures"} <= set(c)


def test_negative_control_fails_and_replays():
    cfg = SuiteConfig(families=("rational",), algebras=("A1",), samples=4, negative_control=True)
    rep = run_rmatrix_suite(cfg)
    assert not rep.passed
    bad = [c for c in rep.checks if not c.passed]
    assert all(c.check.startswith("cdybe") for c in bad)
    entry = bad[0].failures[0]
    assert replay(entry) == entry["residual"]


def test_fpb_suite_small():
    rep = run_fpb_suite(SuiteConfig(**SMALL))
    assert rep.passed
    kinds = {c.check.split(":")[0] for c in rep.checks}
    assert kinds == {"fpb", "fpb_forms", "fpb_ablation"}


def test_energy_suite_small():
    rep = run_energy_suite(SuiteConfig(**SMALL))
    assert rep.passed


@pytest.mark.parametrize("suite", ["rmatrix", "fpb", "energy"])
def test_reports_are_deterministic(suite):
    cfg = SuiteConfig(algebras=("A1",), samples=2, seed=11)
    assert SUITES[suite](cfg).to_json() == SUITES[suite](SuiteConfig(algebras=("A1",), samples=2, seed=11)).to_json()
    assert SUITES[suite](cfg).to_json() != SUITES[suite](SuiteConfig(algebras=("A1",), samples=2, seed=12)).to_json()


def test_forced_failures_replay_exactly():
    # an impossible tolerance records every sample, which must replay bit for bit
    cfg = SuiteConfig(families=("trigonometric", "elliptic"), algebras=("A1",), samples=2,
                      tolerances={"cdybe": 1e-300, "cdybe_elliptic": 1e-300, "fpb": 1e-300, "energy_contour": 1e-300})
    for run in (run_rmatrix_suite, run_fpb_suite, run_energy_suite):
        for c in run(cfg).checks:
            for entry in c.failures:
                assert abs(replay(entry) - entry["residual"]) <= 1e-15 * max(1.0, entry["residual"])


def test_check_report_dict_uses_pass_key():
    c = CheckReport("s", "c", 1, 0.0, 0.0, 1.0, True, [])
    assert c.to_dict()["pass"] is True and "passed" not in c.to_dict()


def test_conservation_suite_short_window_replays():
    from spincm.verify import run_conservation_suite

    cfg = SuiteConfig(t_end=0.2, dt=1e-2, tolerances={"energy_drift": 1e-300})
    rep = run_conservation_suite(cfg)
    energy = [c for c in rep.checks if c.check.startswith("energy_drift")]
    assert energy and all(not c.passed for c in energy)
    entry = energy[0].failures[0]
    assert replay(entry) == entry["residual"]
    assert rep.to_json() == run_conservation_suite(cfg).to_json()
