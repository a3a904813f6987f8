"""Sampler laws: unitarity, invariance, and truncation marginals."""

import numpy as np
import pytest

from haarlab.ensembles import (
    TruncationSpec,
    coupled_truncation_pair,
    haar_unitary,
    haar_unitary_qr,
    sample_truncation,
    truncate,
    unitarity_defect,
)
from haarlab.rng import RngStream
from haarlab.stats import ks_two_sample, ks_two_sample_critical, make_report

TWO_PI = 2.0 * np.pi


@pytest.mark.parametrize("sampler", [haar_unitary, haar_unitary_qr])
@pytest.mark.parametrize("n", [1, 2, 5, 32, 128])
def test_samplers_produce_unitaries(sampler, n):
    u = sampler(RngStream(n), n, count=4)
    assert u.shape == (4, n, n)
    assert unitarity_defect(u) <= 1e-12


@pytest.mark.parametrize("sampler", [haar_unitary, haar_unitary_qr])
def test_sampler_is_reproducible(sampler):
    a = sampler(RngStream(5, 2), 6, count=3)
    b = sampler(RngStream(5, 2), 6, count=3)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("sampler", [haar_unitary, haar_unitary_qr])
def test_sampler_input_validation(sampler):
    with pytest.raises(ValueError):
        sampler(RngStream(0), 0)
    with pytest.raises(ValueError):
        sampler(RngStream(0), 3, count=0)


def test_single_draw_shape():
    assert haar_unitary(RngStream(1), 3).shape == (3, 3)
    assert haar_unitary_qr(RngStream(1), 3).shape == (3, 3)


def test_constructions_agree_in_law_n1():
    # U(1) reduces both samplers to z/|z|; angles should share one law
    a = np.angle(haar_unitary(RngStream(10), 1, count=100_000)[:, 0, 0])
    b = np.angle(haar_unitary_qr(RngStream(11), 1, count=100_000)[:, 0, 0])
    d = ks_two_sample(a, b)
    assert d < ks_two_sample_critical(100_000, 100_000)


def test_constructions_agree_in_law_n5():
    a = np.abs(haar_unitary(RngStream(20), 5, count=20_000)[:, 0, 0])
    b = np.abs(haar_unitary_qr(RngStream(21), 5, count=20_000)[:, 0, 0])
    d = ks_two_sample(a, b)
    assert d < ks_two_sample_critical(20_000, 20_000)


def test_left_invariance_of_trace_statistic():
    # MU ~ U for fixed unitary M, so E|Tr(MU)|^2 keeps the exact value 1
    n = 4
    m = np.zeros((n, n), dtype=np.complex128)
    m[0, 2], m[1, 0], m[2, 3], m[3, 1] = np.exp(1j * np.array([0.3, 1.1, 0.0, 2.7]))
    assert unitarity_defect(m) < 1e-15
    u = haar_unitary_qr(RngStream(30), n, count=100_000)
    tr = np.einsum("ij,bji->b", m, u)
    rep = make_report("trace_sq_rotated", n, np.abs(tr) ** 2, 1.0, "exact")
    assert rep.z_score <= 5.0


def test_entry_exchangeability():
    n = 4
    u = haar_unitary_qr(RngStream(31), n, count=20_000)
    for i in range(n):
        for j in range(n):
            rep = make_report(f"abs_sq_{i}{j}", n, np.abs(u[:, i, j]) ** 2, 1.0 / n, "exact")
            assert rep.z_score <= 5.0, (i, j, rep.z_score)


def test_truncation_spec_bounds():
    TruncationSpec(3, 2)
    with pytest.raises(ValueError):
        TruncationSpec(3, 3)
    with pytest.raises(ValueError):
        TruncationSpec(3, 0)


def test_truncate_slices_and_scales():
    u = haar_unitary_qr(RngStream(40), 5)
    block = truncate(u, TruncationSpec(5, 2))
    assert np.array_equal(block, u[:2, :2])
    scaled = truncate(u, TruncationSpec(5, 2, scaled=True))
    assert np.allclose(scaled, u[:2, :2] * np.sqrt(5 / 2), rtol=0, atol=0)
    with pytest.raises(ValueError):
        truncate(u[:4], TruncationSpec(5, 2))
    with pytest.raises(ValueError):
        truncate(u, TruncationSpec(4, 2))


def test_unscaled_block_is_a_contraction():
    spec = TruncationSpec(8, 3)
    blocks = sample_truncation(RngStream(41), spec, count=200)
    s = np.linalg.svd(blocks, compute_uv=False)
    assert s.max() <= 1.0 + 1e-12


def test_direct_truncation_matches_full_matrix_law():
    spec = TruncationSpec(6, 2)
    a = np.abs(sample_truncation(RngStream(50), spec, count=20_000)[:, 0, 0])
    full = haar_unitary_qr(RngStream(51), 6, count=20_000)
    b = np.abs(full[:, 0, 0])
    d = ks_two_sample(a, b)
    assert d < ks_two_sample_critical(20_000, 20_000)


@pytest.mark.parametrize("m", [1, 2, 5])
def test_coupled_pair_contract(m):
    spec = TruncationSpec(12, m)
    t, g = coupled_truncation_pair(RngStream(60 + m, 1), spec, count=4000)
    assert t.shape == g.shape == (4000, m, m)
    # T is bitwise what sample_truncation draws from the same stream state
    assert np.array_equal(t, sample_truncation(RngStream(60 + m, 1), spec, count=4000))
    # G marginal: entries are complex normal standardized by 1/sqrt(m)
    rep = make_report("g_abs_sq", spec.n, m * np.abs(g[:, 0, -1]) ** 2, 1.0, "exact")
    assert rep.z_score <= 5.0
    single = coupled_truncation_pair(RngStream(9), spec)
    assert single[0].shape == (m, m) and single[1].shape == (m, m)


@pytest.mark.parametrize("scaled,ref", [(False, 1.0 / 9), (True, 1.0 / 4)])
def test_truncation_entry_second_moment(scaled, ref):
    spec = TruncationSpec(9, 4, scaled=scaled)
    t = sample_truncation(RngStream(70), spec, count=20_000)
    rep = make_report("t_abs_sq", 9, np.abs(t[:, 0, 0]) ** 2, ref, "exact")
    assert rep.z_score <= 5.0


def test_coupled_pair_closes_with_n():
    # ||T - G|| shrinks like 1/sqrt(n) along n at fixed m
    gaps = []
    for n in (16, 256):
        spec = TruncationSpec(n, 2, scaled=True)
        t, g = coupled_truncation_pair(RngStream(80), spec, count=500)
        gaps.append(float(np.abs(t - g).max(axis=(1, 2)).mean()))
    assert gaps[1] < gaps[0] / 2
