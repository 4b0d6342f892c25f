"""Receiver chain: correlator, estimation, equalization, demapping, BER math."""

import numpy as np
import pytest

from dpris.modulation import CONSTELLATION16, TWO_PI, TmSymbolParams, harmonic_exact, waveform
from dpris.receiver import (
    BerRecord,
    PilotBlock,
    SingularChannelError,
    ber_count,
    default_pilot_block,
    demap,
    demap_indices,
    estimate_channel,
    extract_harmonic,
    slicer_demap_indices,
    theoretical_ber_16qam,
    wilson_interval_halfwidth,
    zf_equalize,
)

TS = 4e-7


# -- harmonic extraction -----------------------------------------------------


def test_extract_matched_tone():
    m = 64
    rx = np.exp(-2j * np.pi * np.arange(m) / m)
    assert abs(extract_harmonic(rx, order=-1) - 1.0) < 1e-12


def test_extract_constant_is_orthogonal():
    assert abs(extract_harmonic(np.ones(16), order=-1)) < 1e-12


def test_extract_convergence_to_exact_oracle():
    rng = np.random.default_rng(2718)
    cases = [
        TmSymbolParams(
            delta_phi=rng.uniform(1e-6, TWO_PI),
            t_shift_s=rng.uniform(0.0, TS * 0.999999),
            symbol_period_s=TS,
        )
        for _ in range(200)
    ]
    bounds = {64: 2e-2, 256: 6e-3, 1024: 1.5e-3, 4096: 3e-4}
    worst = {}
    for m in bounds:
        err = 0.0
        for params in cases:
            est = extract_harmonic(waveform(params, m), order=-1)
            err = max(err, abs(est - harmonic_exact(params, -1).value))
        worst[m] = err
        assert err <= bounds[m], f"M={m}: {err:.3e} > {bounds[m]:.0e}"
    # O(1/M): strictly decreasing, and 64 -> 4096 improves by at least 16x
    assert worst[64] > worst[256] > worst[1024] > worst[4096]
    assert worst[64] / worst[4096] >= 16.0


# -- channel estimation -----------------------------------------------------


def test_default_pilot_block_is_orthogonal_full_rank():
    pilot = default_pilot_block(16)
    s = pilot.symbols
    gram = s @ s.conj().T
    assert abs(gram[0, 1]) < 1e-14
    assert abs(gram[1, 0]) < 1e-14
    assert np.all(np.abs(np.abs(s) - 1.0) < 1e-12)  # unit-amplitude corners
    # every pilot entry is a legal constellation point
    dist = np.min(np.abs(s.reshape(-1)[:, None] - CONSTELLATION16[None, :]), axis=1)
    assert np.max(dist) < 1e-12


def test_estimate_channel_noiseless_recovery():
    rng = np.random.default_rng(10)
    pilot = default_pilot_block(16)
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    g_hat = estimate_channel(pilot, g @ pilot.symbols)
    assert np.max(np.abs(g_hat - g)) < 1e-10


def test_estimate_channel_identity_case():
    pilot = default_pilot_block(8)
    g_hat = estimate_channel(pilot, pilot.symbols)
    assert np.max(np.abs(g_hat - np.eye(2))) < 1e-12


def test_estimate_channel_rejects_rank_deficient_pilots():
    s = np.ones((2, 8), dtype=complex)  # identical rows
    with pytest.raises(ValueError):
        PilotBlock(symbols=s)


def test_estimate_channel_error_scales_inverse_with_length():
    # LS theory: E||G_hat - G||_F^2 = 4 * sigma^2 / L for these unit pilots
    rng = np.random.default_rng(31337)
    g = np.array([[1.0 + 0.2j, 0.1], [0.05j, 0.9 - 0.1j]])
    sigma2 = 0.1
    mean_err = {}
    for length in (8, 32, 128):
        pilot = default_pilot_block(length)
        errs = []
        for _ in range(400):
            noise = np.sqrt(sigma2 / 2) * (
                rng.standard_normal((2, length)) + 1j * rng.standard_normal((2, length))
            )
            g_hat = estimate_channel(pilot, g @ pilot.symbols + noise)
            errs.append(np.sum(np.abs(g_hat - g) ** 2))
        mean_err[length] = np.mean(errs)
        expected = 4.0 * sigma2 / length
        assert abs(mean_err[length] - expected) / expected < 0.25
    assert 3.0 < mean_err[8] / mean_err[32] < 5.4
    assert 3.0 < mean_err[32] / mean_err[128] < 5.4


# -- zero forcing -------------------------------------------------------------


def test_zf_identity_and_scaling():
    y = np.array([1.0 + 1j, 2.0 - 1j])
    assert np.array_equal(zf_equalize(np.eye(2), y), y)
    assert np.max(np.abs(zf_equalize(2.0 * np.eye(2), y) - y / 2.0)) < 1e-15


def test_zf_recovers_streams():
    rng = np.random.default_rng(44)
    for _ in range(50):
        g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        if np.linalg.cond(g) > 1e6:
            continue
        s = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        assert np.max(np.abs(zf_equalize(g, g @ s) - s)) < 1e-10


def test_zf_rejects_near_singular():
    g = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-12]])
    with pytest.raises(SingularChannelError) as err:
        zf_equalize(g, np.ones(2))
    assert err.value.condition > 1e8


# -- demapping -----------------------------------------------------------------


def test_demap_exact_points_round_trip():
    for idx, point in enumerate(CONSTELLATION16):
        bits, got = demap(point)
        assert got == idx
        assert np.array_equal(
            bits, np.array([(idx >> 3) & 1, (idx >> 2) & 1, (idx >> 1) & 1, idx & 1])
        )


def test_demap_origin_tie_breaks_to_lowest_index():
    bits, idx = demap(0j)
    assert idx == 5  # lowest-index inner point
    assert np.array_equal(bits, np.array([0, 1, 0, 1]))


def test_slicer_matches_nearest_point_demap():
    rng = np.random.default_rng(3)
    pts = 1.4 * (rng.standard_normal(4000) + 1j * rng.standard_normal(4000))
    assert np.array_equal(slicer_demap_indices(pts), demap_indices(pts))


# -- theoretical BER ------------------------------------------------------------


def test_theory_limits():
    assert theoretical_ber_16qam(60.0) < 1e-30
    assert abs(theoretical_ber_16qam(-60.0) - 0.5) < 1e-3


def test_theory_monotone_decreasing():
    grid = np.linspace(-10.0, 20.0, 301)
    vals = theoretical_ber_16qam(grid)
    assert np.all(np.diff(vals) < 0)


def test_theory_matches_scalar_awgn_monte_carlo():
    # 1e7-symbol scalar AWGN oracle at 10 dB, compared within 3 Wilson SE
    ebn0_db = 10.0
    es = float(np.mean(np.abs(CONSTELLATION16) ** 2))
    n0 = es / (4.0 * 10 ** (ebn0_db / 10.0))
    rng = np.random.default_rng(987654321)
    total_syms = 10**7
    errors = 0
    pop = np.array([bin(i).count("1") for i in range(16)])
    for _ in range(10):
        n = total_syms // 10
        sym = rng.integers(0, 16, n)
        noise = np.sqrt(n0 / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        rx = slicer_demap_indices(CONSTELLATION16[sym] + noise)
        errors += int(pop[rx ^ sym].sum())
    bits = 4 * total_syms
    mc_ber = errors / bits
    se = wilson_interval_halfwidth(errors, bits) / 1.959963984540054
    assert abs(mc_ber - theoretical_ber_16qam(ebn0_db)) <= 3.0 * se


# -- BER accounting ---------------------------------------------------------------


def test_ber_count_identical_streams():
    bits = np.array([0, 1, 1, 0] * 8)
    record = ber_count(bits, bits.copy(), ebn0_db=8.0)
    assert record.bit_errors == 0 and record.ber == 0.0
    assert record.symbol_errors == 0
    assert record.bits_sent == bits.size
    assert record.wilson_interval_halfwidth > 0.0


def test_ber_count_complemented_stream():
    bits = np.array([0, 1] * 10)
    record = ber_count(bits, 1 - bits)
    assert record.ber == 1.0
    assert record.symbol_errors == 5


def test_ber_count_scripted_corruption():
    rng = np.random.default_rng(55)
    bits = rng.integers(0, 2, 4000)
    flip = rng.choice(4000, size=137, replace=False)
    rx = bits.copy()
    rx[flip] ^= 1
    record = ber_count(bits, rx)
    assert record.bit_errors == 137
    assert record.ber == 137 / 4000


def test_ber_count_rejects_mismatched_lengths():
    with pytest.raises(ValueError):
        ber_count([0, 1], [0, 1, 0])
    with pytest.raises(ValueError):
        ber_count([], [])


def test_wilson_halfwidth_behaves():
    assert wilson_interval_halfwidth(0, 1000) > 0.0
    assert wilson_interval_halfwidth(10, 1000) > wilson_interval_halfwidth(1, 1000)
    assert isinstance(BerRecord(0.0, 10, 1, 1, 0.1, 0.05), BerRecord)
