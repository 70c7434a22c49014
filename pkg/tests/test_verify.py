import warnings

import numpy as np
import pytest

from lazyrm import HDGinibre, HDHaar, RandomSource, faults
from lazyrm.verify import (CheckResult, ConsistencyReport, _schedule, consistency_suite, contract_operators,
                           equivalence_suite, haar_probe_fixture, ista_fixture, loglog_slope, reflector_suite,
                           scaling_bench, two_sample_ks)


def test_ks_identical_samples():
    a = np.random.default_rng(0).standard_normal(500)
    rep = two_sample_ks(a, a.copy())
    assert rep.ks == 0.0 and rep.pvalue == 1.0 and rep.passed


def test_ks_power():
    rng = np.random.default_rng(1)
    rep = two_sample_ks(rng.standard_normal(1000), 3 + rng.standard_normal(1000))
    assert rep.pvalue < 1e-6 and not rep.passed
    assert "FAIL" in rep.line()


def test_ks_calibration():
    # [DERIVED] the asymptotic p-value must not over-reject: 1000 null repetitions at 10^4 each
    rng = np.random.default_rng(2)
    rejects = sum(not two_sample_ks(rng.standard_normal(10_000), rng.standard_normal(10_000)).passed
                  for _ in range(1000))
    assert rejects <= 4  # expectation 1; P(Binomial(1000, 1e-3) > 4) < 0.4%


def test_report_invariants():
    rep = two_sample_ks([1.0, 2.0], [3.0, 4.0])
    assert 0.0 <= rep.pvalue <= 1.0 and rep.passed == (rep.pvalue >= rep.significance)
    assert CheckResult("x", 1e-12, 1e-10, 3).passed and not CheckResult("x", np.nan, 1e-10, 3).passed
    r = ConsistencyReport("op", 4, [CheckResult("a", 0, 1, 1), CheckResult("b", 2, 1, 1)])
    assert not r.passed and r.failed == ["b"]


def test_schedule_covers_both_sides_and_repeats():
    s = _schedule(20)
    assert len(s) == 20
    kinds = {k for k, _ in s}
    assert {"new", "repeat", "combo"} <= kinds
    assert {side for _, side in s} == {"right", "left"}
    assert sum(k == "new" for k, _ in s) <= 20


@pytest.mark.parametrize("field", ["real", "complex"])
def test_reflector_suite_passes(field):
    rep = reflector_suite(200, nmax=128, field=field)
    assert rep.passed, rep.lines()


def test_consistency_on_contract_operators():
    for name, op in contract_operators(3, "real"):
        rep = consistency_suite(op, 10, seed=3, label=name)
        assert rep.passed, rep.lines()
    rep = consistency_suite(HDHaar(64, RandomSource(1)), 10)
    assert any(c.name == "isometry" for c in rep.checks) and rep.passed


def test_consistency_detects_skipped_reflector():
    with faults.inject("skip-reflector"):
        rep = consistency_suite(HDGinibre(64, 48, 1.0, RandomSource(0)), 10)
    assert not rep.passed
    assert set(rep.failed) & {"span-linearity", "adjoint-bilinear"}


def test_consistency_detects_sign_zero_miswiring():
    with faults.inject("sign-zero"):
        rep = consistency_suite(HDGinibre(64, 48, 1.0, RandomSource(0)), 10)
        refl = reflector_suite(50, nmax=64)
    assert "first-probe formula" in rep.failed
    assert not refl.passed


def test_faults_are_scoped():
    with pytest.raises(ValueError):
        with faults.inject("nonsense"):
            pass
    with faults.inject("skip-reflector"):
        assert faults.is_active("skip-reflector")
    assert not faults.is_active("skip-reflector")


def test_equivalence_small_ginibre_fixture_passes():
    # a square 32 x 32 Ginibre design with a 5-step ISTA map
    reports = equivalence_suite(ista_fixture(32, 32, 5, "ginibre"), trials=3000)
    assert len(reports) == 3 and all(r.passed for r in reports), [r.line() for r in reports]


def test_equivalence_detects_uncorrected_qr():
    with faults.inject("uncorrected-qr"):
        reports = equivalence_suite(haar_probe_fixture(16), trials=1000)
    assert not all(r.passed for r in reports)
    assert all(r.attempt == 2 for r in reports)


def test_equivalence_wrong_pair_fails():
    reports = equivalence_suite(ista_fixture(32, None, 15, "haar"), trials=2000,
                                reference=ista_fixture(32, 32, 15, "ginibre"), retry=False)
    assert not all(r.passed for r in reports)


def test_equivalence_requires_matching_stats():
    with pytest.raises(ValueError):
        equivalence_suite(ista_fixture(16, 16, 2), trials=2, reference=haar_probe_fixture(16))


def test_loglog_slope_exact():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    assert loglog_slope(x, 3 * x**1.7) == pytest.approx(1.7)


def test_scaling_bench_smoke():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = scaling_bench("hd", dims=(256, 512), T=3, repeats=1)
        rt = scaling_bench("hd", dims=(256,), T=(2, 4), repeats=1)
    assert res.variable == "n" and [r.n for r in res.rows] == [256, 512] and np.isfinite(res.slope)
    assert rt.variable == "T" and "slope" in rt.summary()
    with pytest.raises(ValueError):
        scaling_bench("hd", dims=(64, 128), T=(2, 3))
