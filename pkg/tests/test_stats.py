"""Estimation plumbing: reports, KS machinery, and the experiment gates."""

import math

import numpy as np
import pytest

from haarlab.moments import LimitMomentQuery, MomentSpec
from haarlab.rng import RngStream, complex_normal
from haarlab.stats import (
    EstimateReport,
    ExperimentConfig,
    collect_samples,
    correlation_experiment,
    entry_experiment,
    eigenpower_experiment,
    jpdf_normalization,
    ks_critical,
    ks_statistic,
    ks_two_sample,
    ks_two_sample_critical,
    make_report,
    mc_estimate,
    moment_estimate,
    trace_experiment,
    truncation_convergence,
    truncation_experiment,
    _trend_check,
)


def _draw(stream, c):
    return complex_normal(stream, c)


def test_collect_samples_is_worker_invariant():
    kwargs = dict(seed=9, streams=4, N=10_001, chunk=333, produce=_draw)
    a = collect_samples(**kwargs, workers=1)
    b = collect_samples(**kwargs, workers=3)
    assert a.shape == (10_001,)
    assert np.array_equal(a, b)


def test_collect_samples_validation():
    with pytest.raises(ValueError):
        collect_samples(0, 2, 0, 10, _draw)
    with pytest.raises(ValueError):
        collect_samples(0, 0, 10, 10, _draw)


def test_make_report_real_case():
    rep = make_report("m", 3, np.array([1.0, 2.0, 3.0, 4.0]), 2.5, "exact")
    assert rep.estimate == 2.5 + 0j
    assert rep.se_im == 0.0
    assert rep.se_re == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2.0)
    assert rep.z_score == 0.0
    assert rep.std_error == rep.se_re
    assert rep.N == 4 and rep.reference_kind == "exact"


def test_make_report_complex_componentwise():
    rep = make_report("c", 2, np.array([1 + 1j, 3 - 1j]), 2.0, "exact")
    assert rep.estimate == 2 + 0j
    assert rep.se_im == pytest.approx(1.0)
    assert rep.z_score == 0.0


def test_make_report_degenerate_se():
    rep = make_report("const", 2, np.array([5.0, 5.0, 5.0]), 6.0, "exact")
    assert math.isinf(rep.z_score)
    assert make_report("const", 2, np.array([5.0, 5.0]), 5.0, "exact").z_score == 0.0
    with pytest.raises(ValueError):
        make_report("short", 2, np.array([1.0]), 1.0, "exact")


def test_report_zscores_are_calibrated():
    # 100 independent estimates of known moments: |z| > 3 should be rare
    hits = 0
    for i in range(100):
        k = i % 3 + 1
        xi = complex_normal(RngStream(1000 + i), 2000)
        rep = make_report("cal", 0, np.abs(xi) ** (2 * k), float(math.factorial(k)), "exact")
        hits += rep.z_score > 3.0
    assert hits <= 5


def test_ks_statistic_small_case():
    assert ks_statistic([0.25, 0.75], lambda x: x) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        ks_statistic([], lambda x: x)


def test_ks_statistic_detects_and_accepts():
    u = RngStream(55).uniform(20_000)
    assert ks_statistic(u, lambda x: x) < ks_critical(20_000)
    assert ks_statistic(u**2, lambda x: x) > ks_critical(20_000)


def test_ks_two_sample_small_case():
    assert ks_two_sample([0.0, 1.0], [0.5]) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        ks_two_sample([], [0.5])


def test_ks_two_sample_behavior():
    a = RngStream(60).uniform(20_000)
    b = RngStream(61).uniform(20_000)
    crit = ks_two_sample_critical(20_000, 20_000)
    assert ks_two_sample(a, b) < crit
    assert ks_two_sample(a, b + 0.05) > crit


def test_ks_critical_values():
    assert ks_critical(10_000) == pytest.approx(0.0163)
    assert ks_two_sample_critical(100, 100) == pytest.approx(1.63 * math.sqrt(0.02))
    with pytest.raises(ValueError):
        ks_critical(100, alpha=0.05)
    with pytest.raises(ValueError):
        ks_two_sample_critical(100, 100, alpha=0.05)


def test_mc_estimate_statistics():
    rep = mc_estimate("const:2.5", 1, 100)
    assert rep.estimate == 2.5 + 0j and rep.z_score == 0.0
    rep = mc_estimate("abs_trace_sq", 3, 2000, seed=7)
    assert rep.reference == 1 + 0j and rep.z_score <= 5.0
    rep = mc_estimate("scaled_entry_abs_sq", 5, 2000, seed=7)
    assert rep.reference == 1 + 0j and rep.z_score <= 5.0
    rep = mc_estimate("entry_abs_pow:2", 5, 2000, seed=7)
    assert rep.reference == pytest.approx(2 / 30) and rep.z_score <= 5.0
    rep = mc_estimate("diag_pair", 6, 2000, seed=7)
    assert rep.reference_kind == "limit"
    with pytest.raises(ValueError):
        mc_estimate("nope", 3, 100)
    with pytest.raises(ValueError):
        mc_estimate("abs_trace_sq", 3, 1)
    with pytest.raises(ValueError):
        mc_estimate("abs_trace_sq", 3, 100, method="lu")


def test_mc_estimate_worker_invariance():
    a = mc_estimate("abs_trace_sq", 4, 3000, seed=3, streams=4, workers=1)
    b = mc_estimate("abs_trace_sq", 4, 3000, seed=3, streams=4, workers=4)
    assert a.estimate == b.estimate and a.se_re == b.se_re


def test_moment_estimate_forced_zero():
    rep = moment_estimate(MomentSpec([(1, 1, 1, 0)]), 3, 4000, seed=2)
    assert rep.statistic == "entry_product(1,1,1,0)"
    assert rep.z_score <= 5.0
    with pytest.raises(ValueError):
        moment_estimate(MomentSpec([(4, 1, 1, 0)]), 3, 100)


def test_entry_experiment_passes_and_reports():
    res = entry_experiment(8, 5000, seed=11, streams=2)
    assert res.name == "entries" and res.passed
    assert [r.statistic for r in res.reports] == [
        "entry_abs_moment(k=1)", "entry_abs_moment(k=2)", "entry_abs_moment(k=3)"]
    assert res.meta["n"] == 8 and res.meta["N"] == 5000
    assert any(c.name == "entry_law_ks" for c in res.checks)


def test_correlation_experiment_passes():
    res = correlation_experiment(4, 20_000, seed=12, streams=2)
    assert res.passed
    r, r0 = res.reports
    assert r.reference == pytest.approx(1.0 / 9)
    assert r0.reference == 0j
    with pytest.raises(ValueError):
        correlation_experiment(1, 100)


def test_trend_check_rule():
    def fake(dev, se):
        return EstimateReport(statistic="s", n=8, N=10, estimate=complex(dev),
                              se_re=se, se_im=0.0, reference=0j,
                              reference_kind="limit", z_score=0.0)

    falling = [fake(3.0, 0.01), fake(1.0, 0.01), fake(2.0, 0.01)]
    assert _trend_check("s", falling).passed  # one real inversion tolerated
    rising = [fake(1.0, 0.01), fake(2.0, 0.01), fake(3.0, 0.01)]
    assert not _trend_check("s", rising).passed
    noisy = [fake(1.0, 1.0), fake(1.5, 1.0), fake(2.0, 1.0)]
    assert _trend_check("s", noisy).passed  # increases within 2 SE ignored


def test_trace_experiment_structure():
    cfg = ExperimentConfig(seed=5, streams=2, n_list=(4, 8), samples=4000,
                           pairs=((1, 1), (1, 2)),
                           mixed=(LimitMomentQuery((1, 1), (1, 1)),))
    res = trace_experiment(cfg)
    assert res.name == "traces" and res.passed
    labels = {r.statistic for r in res.reports}
    assert "abs_trace_moment(k=1,l=1)" in labels
    assert "mixed_trace_moment(a=1,1;b=1,1)" in labels
    # one terminal z gate and one trend check per statistic
    assert sum(c.name.startswith("trend:") for c in res.checks) == 3
    assert res.meta["pairs"] == [[1, 1], [1, 2]]


def test_experiment_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(samples=1)
    with pytest.raises(ValueError):
        ExperimentConfig(n_list=())
    with pytest.raises(ValueError):
        ExperimentConfig(pairs=((0, 1),))


def test_eigenpower_experiment_gate_and_run():
    with pytest.raises(ValueError):
        eigenpower_experiment(4, 3, 100)
    res = eigenpower_experiment(3, 5, 3000, seed=6, streams=2)
    assert res.passed and res.meta["hypothesis_met"]
    assert sum(r.statistic.startswith("circular_cross_moment") for r in res.reports) == 3
    low = eigenpower_experiment(3, 2, 500, seed=6, streams=2, allow_low_power=True)
    assert not low.meta["hypothesis_met"]
    assert all(not c.gated for c in low.checks)
    assert low.passed  # nothing gated, nothing asserted


def test_truncation_experiment_m1_exact_law():
    res = truncation_experiment(16, 1, 8000, seed=8, streams=2)
    assert res.passed
    names = [c.name for c in res.checks]
    assert "radial_ks" in names


def test_truncation_experiment_block_case():
    res = truncation_experiment(64, 2, 4000, seed=9, streams=2)
    assert res.name == "truncation"
    assert {r.statistic for r in res.reports} == {
        "eig_radius_sq_sum(truncation)", "eig_radius_sq_sum(ginibre)"}
    gated = {c.name: c.gated for c in res.checks}
    assert gated["z:eig_radius_sq_sum(truncation)@n=64"] is False
    assert res.passed  # n = 64 is deep enough for the KS gate at this N


def test_truncation_convergence_couples_and_orders():
    res = truncation_convergence((16, 128), 2, 3000, seed=10, streams=2)
    assert res.meta["coupled_reference"] is True
    order = [c for c in res.checks if c.name == "ks_decreases_with_n"]
    assert len(order) == 1 and order[0].passed
    assert res.passed
    with pytest.raises(ValueError):
        truncation_convergence((32, 16), 2, 100)
    with pytest.raises(ValueError):
        truncation_convergence((32,), 2, 100)


def test_jpdf_normalization_small():
    res = jpdf_normalization(6, 2, 40_000, seed=13, streams=2)
    assert res.name == "jpdf_normalization"
    rep = res.reports[0]
    assert rep.reference == 1 + 0j
    assert abs(rep.estimate.real - 1.0) < 0.05
