"""Monte-Carlo engine: reproducibility, estimator correctness, invariants."""

import math

import numpy as np
import pytest

from relaysel import (
    BPSK,
    ChannelRealization,
    NetworkConfig,
    RngStream,
    SnrPolicy,
    average_ser,
    combined_snr,
    empirical_cdf,
    estimate_diversity,
    select_multiple,
    simulate_ser,
    sample_selected_snr,
)
from relaysel.montecarlo import _draw_chunk


def sym_cfg(n, psi_db=10.0, rho=0.9):
    psi = 10.0 ** (psi_db / 10.0)
    return NetworkConfig.create(n, sigma2=1.0, rho=rho, psi_s=psi, psi_r=psi)


class TestReproducibility:
    def test_bit_identical_reruns(self):
        cfg = sym_cfg(3)
        a = simulate_ser(cfg, BPSK, 50_000, RngStream(42), chunk_size=8192)
        b = simulate_ser(cfg, BPSK, 50_000, RngStream(42), chunk_size=8192)
        assert a == b

    def test_seed_and_stream_change_results(self):
        cfg = sym_cfg(3)
        base = simulate_ser(cfg, BPSK, 20_000, RngStream(42))[0].value
        assert simulate_ser(cfg, BPSK, 20_000, RngStream(43))[0].value != base
        assert simulate_ser(cfg, BPSK, 20_000, RngStream(42, 1))[0].value != base

    def test_worker_count_invariance(self):
        cfg = sym_cfg(4)
        kw = dict(chunk_size=4096, snr_mode="symbol_detection")
        one = simulate_ser(cfg, BPSK, 40_000, RngStream(7), workers=1, **kw)
        four = simulate_ser(cfg, BPSK, 40_000, RngStream(7), workers=4, **kw)
        assert one == four

    def test_rng_stream_identity(self):
        g1 = RngStream(5, 2).generator().standard_normal(8)
        g2 = RngStream(5, 2).generator().standard_normal(8)
        assert np.array_equal(g1, g2)


class TestEstimators:
    def test_deep_noise_limit(self):
        cfg = sym_cfg(2, psi_db=-60.0)
        est, _ = simulate_ser(cfg, BPSK, 20_000, RngStream(1))
        assert est.value == pytest.approx(0.5, abs=1e-3)

    def test_modes_agree(self):
        cfg = sym_cfg(2, psi_db=5.0)
        q, _ = simulate_ser(cfg, BPSK, 400_000, RngStream(2), snr_mode="q_average")
        s, _ = simulate_ser(cfg, BPSK, 400_000, RngStream(3), snr_mode="symbol_detection")
        se = math.hypot(q.half_width, s.half_width) / 1.96
        assert abs(q.value - s.value) < 3.0 * se
        assert s.errors_observed > 0 and not s.unreliable

    def test_single_relay_matches_closed_form(self):
        # no selection competition: the closed form is exact here
        for rho in (1.0, 0.6):
            cfg = NetworkConfig.create(1, sigma2=np.array([[1.2], [0.8]]), rho=rho,
                                       psi_s=10.0, psi_r=30.0)
            est, _ = simulate_ser(cfg, BPSK, 600_000, RngStream(4),
                                  snr_policy=SnrPolicy.UPPER_BOUND)
            want = average_ser(cfg, BPSK, 0)
            assert abs(est.value - want) < 3.0 * est.half_width

    def test_source_symmetry(self):
        cfg = sym_cfg(3, psi_db=8.0)
        e1, e2 = simulate_ser(cfg, BPSK, 400_000, RngStream(5))
        se = math.hypot(e1.half_width, e2.half_width) / 1.96
        assert abs(e1.value - e2.value) < 3.0 * se

    def test_unreliable_flag(self):
        cfg = sym_cfg(2, psi_db=25.0)  # almost no errors in 2000 trials
        est, _ = simulate_ser(cfg, BPSK, 2_000, RngStream(6),
                              snr_mode="symbol_detection")
        assert est.unreliable
        assert est.value == est.errors_observed / 2_000

    def test_k1_selection_matches_argmax_trial_by_trial(self):
        # selecting the best 1 of N must follow the plain argmax rule on
        # every draw of a shared stream
        cfg = sym_cfg(4, psi_db=10.0)
        hsq, hhsq = _draw_chunk(cfg, RngStream(8).substream_generator(0), 5_000)
        gamma = np.empty((2, 5_000))
        from relaysel.backend import kernel
        kernel.e2e_snr(hsq, hhsq, cfg.psi_s, cfg.psi_r, 1, 0, gamma)
        best = np.argmax(np.minimum(hhsq[0], hhsq[1]), axis=0)
        idx = np.arange(5_000)
        own, oth = hsq[0, best, idx], hsq[1, best, idx]
        want = cfg.psi_s * cfg.psi_r * own * oth / (
            (cfg.psi_s + cfg.psi_r) * own + cfg.psi_s * oth + 1.0)
        assert np.allclose(gamma[0], want, rtol=1e-13)

    def test_trials_validation(self):
        with pytest.raises(ValueError):
            simulate_ser(sym_cfg(2), BPSK, 0, RngStream(1))
        with pytest.raises(ValueError):
            simulate_ser(sym_cfg(2), BPSK, 10, RngStream(1), snr_mode="ser")

    def test_curve_monotone_within_noise(self):
        # shared channel draws across SNR points make the sampled curve
        # decrease essentially surely when the true curve does
        sers = []
        for db in (0.0, 8.0, 16.0, 24.0):
            est, _ = simulate_ser(sym_cfg(3, psi_db=db), BPSK, 200_000,
                                  RngStream(55, 0))
            sers.append((est.value, est.half_width))
        for (v1, h1), (v2, h2) in zip(sers, sers[1:]):
            assert v2 < v1 + 3.0 * math.hypot(h1, h2)

    def test_mrc_gain_with_k(self):
        # at high SNR more selected relays must help despite the power split
        cfg = sym_cfg(4, psi_db=22.0, rho=0.9)
        v1 = simulate_ser(cfg, BPSK, 150_000, RngStream(9), n_selected=1)[0].value
        v4 = simulate_ser(cfg, BPSK, 150_000, RngStream(9), n_selected=4)[0].value
        assert v4 < v1


class TestKernelAgainstModelLayer:
    def test_combined_snr_consistency(self):
        # the vectorized engine must reproduce the scalar model functions
        cfg = NetworkConfig.create(4, sigma2=np.linspace(0.5, 2.0, 8).reshape(2, 4),
                                   rho=0.85, psi_s=12.0, psi_r=20.0)
        stream = RngStream(77)
        h, h_hat = _draw_chunk(cfg, stream.generator(), 200, complex_gains=True)
        hsq = (h.real**2 + h.imag**2)
        hhsq = (h_hat.real**2 + h_hat.imag**2)
        for k, policy in ((1, SnrPolicy.EXACT), (2, SnrPolicy.UPPER_BOUND),
                          (4, SnrPolicy.EXACT)):
            gamma = np.empty((2, 200))
            from relaysel.backend import kernel
            kernel.e2e_snr(np.ascontiguousarray(hsq), np.ascontiguousarray(hhsq),
                           cfg.psi_s, cfg.psi_r, k, 0 if policy is SnrPolicy.EXACT else 1,
                           gamma)
            for m in (0, 7, 123, 199):
                real = ChannelRealization(h=h[:, :, m], h_hat=h_hat[:, :, m])
                idx = select_multiple(real.h_hat, k)
                for src in (0, 1):
                    want = combined_snr(real, idx, cfg, src, policy)
                    assert gamma[src, m] == pytest.approx(want, rel=1e-12)


class TestSelectionDominance:
    def test_outdated_choice_never_beats_fresh(self):
        # on shared draws the fresh-gain choice maximizes the realized
        # min-gain exactly, so its empirical CDF lies below everywhere
        cfg = sym_cfg(4, rho=0.7)
        hsq, hhsq = _draw_chunk(cfg, RngStream(21).generator(), 300_000)
        phi_true = np.minimum(hsq[0], hsq[1])
        stale = np.take_along_axis(
            phi_true, np.argmax(np.minimum(hhsq[0], hhsq[1]), axis=0)[None, :], 0)[0]
        fresh = phi_true.max(axis=0)
        assert np.all(fresh >= stale)
        grid = np.quantile(fresh, np.linspace(0.05, 0.95, 19))
        stale_sorted, fresh_sorted = np.sort(stale), np.sort(fresh)
        assert np.all(empirical_cdf(stale_sorted, grid) >= empirical_cdf(fresh_sorted, grid))


class TestEmpiricalCdf:
    def test_step_values(self):
        samples = np.array([1.0, 2.0, 3.0])
        assert empirical_cdf(samples, 0.5) == 0.0
        assert empirical_cdf(samples, 3.0) == 1.0
        assert empirical_cdf(samples, 2.0) == pytest.approx(2.0 / 3.0)
        assert empirical_cdf(samples, 2.5) == pytest.approx(2.0 / 3.0)  # right-continuous

    def test_array_and_validation(self):
        samples = np.array([1.0, 2.0])
        out = empirical_cdf(samples, np.array([0.0, 1.5, 5.0]))
        assert np.allclose(out, [0.0, 0.5, 1.0])
        with pytest.raises(ValueError):
            empirical_cdf(np.array([]), 1.0)


class TestSampleSelectedSnr:
    def test_policy_ordering(self):
        cfg = sym_cfg(3, psi_db=6.0)
        up = sample_selected_snr(cfg, 50_000, RngStream(30), snr_policy="upper_bound")
        ex = sample_selected_snr(cfg, 50_000, RngStream(30), snr_policy="exact")
        assert np.all(ex <= up + 1e-12)
        assert up.shape == (2, 50_000)


class TestEstimateDiversity:
    def test_power_laws(self):
        snr_db = np.arange(0.0, 31.0, 2.0)
        snr = 10.0 ** (snr_db / 10.0)
        for power in (1.0, 2.0):
            prof = estimate_diversity(snr_db, 0.3 / snr**power)
            assert np.allclose(prof.d_of_snr, power, atol=1e-9)

    def test_validation(self):
        with pytest.raises(ValueError):
            estimate_diversity([0.0, 1.0], [0.1, 0.01])
        with pytest.raises(ValueError):
            estimate_diversity([0.0, 1.0, 1.0], [0.1, 0.01, 0.001])
        with pytest.raises(ValueError):
            estimate_diversity([0.0, 1.0, 2.0], [0.1, 0.0, 0.001])
