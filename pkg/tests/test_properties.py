import numpy as np
import pytest

from hessquot import symcalc
from hessquot.errors import SamplingError
from hessquot.harness import properties
from hessquot.harness.properties import run_property_suite, sample_cone


def test_suite_passes_small():
    rep = run_property_suite(3, 2, 1, seed=42, sample_count=2000)
    assert rep.passed, [r.describe() for r in rep.failures()]
    assert rep.results["euler_identity"].count == 2000
    assert rep.results["ratio_sigma_deleted"].calibrated


def test_injected_ones_give_zero_slack():
    rep = run_property_suite(4, 2, 1, seed=1, sample_count=200)
    # equality case of the generalized Newton-Maclaurin inequality
    assert rep.results["newton_maclaurin_r1_s0"].worst_slack == pytest.approx(0.0, abs=1e-12)
    assert rep.results["projection_quotient"].worst_slack == pytest.approx(0.0, abs=1e-12)


def test_thread_count_does_not_change_outcome():
    a = run_property_suite(3, 2, 0, seed=5, sample_count=800, threads=1).to_dict()
    b = run_property_suite(3, 2, 0, seed=5, sample_count=800, threads=4).to_dict()
    assert a == b


def test_samples_are_in_cone():
    lam = sample_cone(np.random.default_rng(0), 4, 3, 500)
    assert lam.shape == (500, 4)
    assert np.all(symcalc.in_cone(lam, 3)[0])
    assert np.all((lam >= -1) & (lam <= 3))


def test_starvation():
    with pytest.raises(SamplingError, match="acceptance"):
        sample_cone(np.random.default_rng(0), 40, 40, 10)


def test_corrupted_sigma_is_caught(monkeypatch):
    real = symcalc._sigma_dp

    def off_by_one(lam_sorted, kmax):
        e = real(lam_sorted, kmax)
        shifted = e.copy()
        shifted[..., 2:] = e[..., 1:-1]
        return shifted

    monkeypatch.setattr(symcalc, "_sigma_dp", off_by_one)
    rep = run_property_suite(3, 2, 1, seed=42, sample_count=500)
    assert not rep.passed
    msg = rep.failures()[0].describe()
    assert msg.startswith("FAIL") and "sample" in msg


def test_failure_description_is_rerunnable():
    rep = run_property_suite(3, 2, 1, seed=42, sample_count=300)
    r = rep.results["euler_identity"]
    lam = np.array(r.sample)
    slack = properties.gamma_checks(lam[None, :], 2, 1)["euler_identity"][0]
    assert slack == pytest.approx(r.worst_slack, abs=1e-15)


def test_bad_orders():
    with pytest.raises(ValueError):
        run_property_suite(3, 1, 1)
