"""Core system-model math: SNR formulas, bounds, selection rules."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relaysel import (
    BPSK,
    ChannelRealization,
    Modulation,
    NetworkConfig,
    SnrPolicy,
    combined_snr,
    jakes_correlation,
    max_fd_td,
    min_snr_bound,
    select_multiple,
    select_single,
    snr_exact,
    snr_upper,
)


def make_cfg(psi_s=10.0, psi_r=10.0, n=1, rho=1.0):
    return NetworkConfig.create(n, sigma2=1.0, rho=rho, psi_s=psi_s, psi_r=psi_r)


class TestJakesCorrelation:
    def test_zero_is_one(self):
        assert jakes_correlation(0.0) == 1.0

    def test_small_argument_value(self):
        # power-series oracle for J0(2*pi*0.1)
        x = 2 * math.pi * 0.1
        term, total = 1.0, 1.0
        for k in range(1, 30):
            term *= -(x / 2) ** 2 / k**2
            total += term
        assert jakes_correlation(0.1) == pytest.approx(total, rel=1e-12)
        assert jakes_correlation(0.1) == pytest.approx(0.9037, abs=1e-4)

    def test_first_zero_by_bisection_on_series(self):
        def j0_series(x):
            term, total = 1.0, 1.0
            for k in range(1, 60):
                term *= -(x / 2) ** 2 / k**2
                total += term
            return total

        lo, hi = 2.0, 3.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if j0_series(lo) * j0_series(mid) <= 0:
                hi = mid
            else:
                lo = mid
        zero = 0.5 * (lo + hi) / (2 * math.pi)
        assert jakes_correlation(zero) == pytest.approx(0.0, abs=1e-9)
        assert max_fd_td() == pytest.approx(zero, abs=1e-9)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            jakes_correlation(-0.1)

    def test_operating_range_positive(self):
        for fd in np.linspace(0.0, 0.3, 16):
            assert 0.0 < jakes_correlation(fd) <= 1.0


class TestSnrFormulas:
    def test_exact_hand_value(self):
        cfg = make_cfg(10.0, 10.0)
        # x = y = 1: 10*10/((10+10) + 10 + 1)
        assert snr_exact(1.0, 1.0, cfg) == pytest.approx(100.0 / 31.0, rel=1e-14)

    def test_exact_zero_gain(self):
        cfg = make_cfg()
        assert snr_exact(0.0, 1.0, cfg) == 0.0

    def test_upper_hand_value(self):
        cfg = make_cfg(10.0, 10.0)  # psi_h = 5
        assert snr_upper(1.0, 1.0, cfg) == pytest.approx(10.0 / 3.0, rel=1e-14)

    def test_upper_zero_conventions(self):
        cfg = make_cfg()
        assert snr_upper(1.0, 0.0, cfg) == 0.0
        assert snr_upper(0.0, 0.0, cfg) == 0.0

    def test_upper_equal_gains_halve(self):
        # psi_r = psi_h = psi requires psi_s -> inf; emulate with huge psi_s
        cfg = make_cfg(psi_s=1e12, psi_r=4.0)
        x = 2.3
        h = math.sqrt(x)
        assert snr_upper(h, h, cfg) == pytest.approx(4.0 * x / 2.0, rel=1e-9)

    @given(st.floats(0, 10), st.floats(0, 10), st.floats(0.1, 100), st.floats(0.1, 100))
    @settings(max_examples=200, deadline=None)
    def test_exact_below_upper(self, x, y, ps, pr):
        cfg = make_cfg(ps, pr)
        h1, h2 = math.sqrt(x), math.sqrt(y)
        assert snr_exact(h1, h2, cfg) <= snr_upper(h1, h2, cfg) + 1e-12

    def test_direction_convention(self):
        cfg = make_cfg(3.0, 7.0)
        x, y = 2.0, 5.0
        got = snr_exact(math.sqrt(x), math.sqrt(y), cfg, source=1)
        want = 3.0 * 7.0 * y * x / ((3.0 + 7.0) * y + 3.0 * x + 1.0)
        assert got == pytest.approx(want, rel=1e-14)


class TestMinSnrBound:
    def test_hand_value(self):
        cfg = make_cfg(10.0, 10.0)
        assert min_snr_bound(1.0, 2.0, cfg) == pytest.approx(5.0, rel=1e-14)

    def test_zero(self):
        assert min_snr_bound(0.0, 0.0, make_cfg()) == 0.0

    def test_dominates_min_direction_sampled(self, rng):
        cfg = make_cfg(17.0, 5.0)
        h1 = rng.standard_normal(20000) + 1j * rng.standard_normal(20000)
        h2 = rng.standard_normal(20000) + 1j * rng.standard_normal(20000)
        worst = np.minimum(snr_upper(h1, h2, cfg, 0), snr_upper(h2, h1, cfg, 0))
        bound = min_snr_bound(h1, h2, cfg)
        assert np.all(bound >= worst - 1e-12)

    def test_tightness_in_the_fade_tail(self, rng):
        # The bound/min ratio is scale-free in the transmit SNRs (with x < y
        # it equals 1 + x/(2y) under equal powers), so it does NOT shrink
        # with SNR pointwise; it tightens exactly where errors happen, i.e.
        # when one hop fades much deeper than the other.
        n = 200_000
        h1 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        h2 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        ratio = {}
        for tag, psi in (("lo", 1e2), ("hi", 1e6)):
            cfg = make_cfg(psi, psi)
            worst = np.minimum(snr_upper(h1, h2, cfg, 0), snr_upper(h2, h1, cfg, 0))
            ratio[tag] = min_snr_bound(h1, h2, cfg) / worst
        # scale-free under the bound policy: identical distribution
        assert np.median(ratio["lo"]) == pytest.approx(np.median(ratio["hi"]), rel=1e-12)
        assert np.all(ratio["hi"] >= 1.0 - 1e-12)
        assert np.all(ratio["hi"] <= 1.5 + 1e-12)
        # deep unbalanced fades: ratio -> 1
        x, y = np.abs(h1) ** 2, np.abs(h2) ** 2
        deep = np.minimum(x, y) / np.maximum(x, y) < 0.02
        assert np.max(ratio["hi"][deep]) < 1.011


class TestSelection:
    def test_single_relay(self):
        assert select_single(np.array([[1.0 + 0j], [2.0]])) == 0

    def test_hand_example(self):
        # squared gains [[4,1],[2,3]] -> per-relay minima (2,1) -> first relay
        h_hat = np.sqrt(np.array([[4.0, 1.0], [2.0, 3.0]])).astype(complex)
        assert select_single(h_hat) == 0

    def test_tie_breaks_low_index(self):
        h_hat = np.ones((2, 3), dtype=complex)
        assert select_single(h_hat) == 0
        assert select_multiple(h_hat, 2) == (0, 1)

    def test_multiple_all(self):
        h_hat = np.random.default_rng(0).standard_normal((2, 5)) + 0j
        assert select_multiple(h_hat, 5) == (0, 1, 2, 3, 4)

    def test_multiple_one_equals_single(self, rng):
        for _ in range(50):
            h_hat = rng.standard_normal((2, 6)) + 1j * rng.standard_normal((2, 6))
            assert select_multiple(h_hat, 1) == (select_single(h_hat),)

    def test_multiple_hand_example(self):
        phi = np.array([0.5, 2.0, 1.0, 1.5])
        h_hat = np.vstack([np.sqrt(phi), np.sqrt(phi) * 2]).astype(complex)
        assert select_multiple(h_hat, 2) == (1, 3)

    def test_k_out_of_range(self):
        h_hat = np.ones((2, 3), dtype=complex)
        with pytest.raises(ValueError):
            select_multiple(h_hat, 0)
        with pytest.raises(ValueError):
            select_multiple(h_hat, 4)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            select_single(np.empty((2, 0), dtype=complex))

    def test_scale_invariance(self, rng):
        for _ in range(25):
            h_hat = rng.standard_normal((2, 5)) + 1j * rng.standard_normal((2, 5))
            c = math.sqrt(float(rng.uniform(0.01, 100.0)))
            assert select_single(h_hat) == select_single(c * h_hat)
            assert select_multiple(h_hat, 3) == select_multiple(c * h_hat, 3)

    def test_subset_nesting(self, rng):
        # the single pick stays inside every larger selection
        for _ in range(25):
            h_hat = rng.standard_normal((2, 5)) + 1j * rng.standard_normal((2, 5))
            best = select_single(h_hat)
            for k in range(1, 6):
                assert best in select_multiple(h_hat, k)

    def test_perfect_csi_degeneracy(self, rng):
        # when h_hat equals h, stale-gain selection equals fresh-gain selection
        for _ in range(25):
            h = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
            assert select_single(h) == select_single(h.copy())


class TestCombinedSnr:
    def _realization(self, rng, n=4):
        h = rng.standard_normal((2, n)) + 1j * rng.standard_normal((2, n))
        return ChannelRealization(h=h, h_hat=h.copy())

    def test_single_index_matches_plain_snr(self, rng):
        cfg = make_cfg(8.0, 12.0, n=4)
        real = self._realization(rng)
        got = combined_snr(real, (2,), cfg, source=0)
        want = snr_exact(real.h[0, 2], real.h[1, 2], cfg, 0)
        assert got == want  # bit-identical on the K=1 path

    def test_two_identical_channels_double_half_power(self, rng):
        cfg = make_cfg(8.0, 12.0, n=2)
        h = rng.standard_normal() + 1j * rng.standard_normal()
        real = ChannelRealization(h=np.array([[h, h], [2 * h, 2 * h]]),
                                  h_hat=np.array([[h, h], [2 * h, 2 * h]]))
        half = NetworkConfig.create(2, rho=1.0, psi_s=8.0, psi_r=6.0)
        per_path = snr_exact(real.h[0, 0], real.h[1, 0], half, 0)
        got = combined_snr(real, (0, 1), cfg, source=0)
        assert got == pytest.approx(2.0 * per_path, rel=1e-14)

    def test_monotone_in_each_gain(self, rng):
        cfg = make_cfg(5.0, 5.0, n=3)
        for policy in (SnrPolicy.EXACT, SnrPolicy.UPPER_BOUND):
            real = self._realization(rng, 3)
            base = combined_snr(real, (0, 1, 2), cfg, 0, policy)
            h2 = real.h.copy()
            h2[0, 1] *= 1.5  # grow one gain magnitude
            real2 = ChannelRealization(h=h2, h_hat=real.h_hat)
            assert combined_snr(real2, (0, 1, 2), cfg, 0, policy) >= base - 1e-15

    def test_bad_indices(self, rng):
        cfg = make_cfg(n=3)
        real = self._realization(rng, 3)
        for idx in ((), (0, 0), (3,), (-1,)):
            with pytest.raises(ValueError):
                combined_snr(real, idx, cfg, 0)


class TestTypes:
    def test_config_validation(self):
        with pytest.raises(ValueError):
            NetworkConfig.create(0, psi_s=1.0, psi_r=1.0)
        with pytest.raises(ValueError):
            NetworkConfig.create(2, sigma2=-1.0, psi_s=1.0, psi_r=1.0)
        with pytest.raises(ValueError, match="rho"):
            NetworkConfig.create(2, rho=1.5, psi_s=1.0, psi_r=1.0)
        with pytest.raises(ValueError):
            NetworkConfig.create(2, psi_s=0.0, psi_r=1.0)

    def test_psi_h_between_zero_and_min(self):
        cfg = make_cfg(3.0, 9.0)
        assert 0.0 < cfg.psi_h < min(cfg.psi_s, cfg.psi_r)

    def test_combined_sigma2(self):
        cfg = NetworkConfig.create(2, sigma2=np.array([[1.0, 2.0], [1.0, 6.0]]),
                                   rho=1.0, psi_s=1.0, psi_r=1.0)
        assert cfg.combined_sigma2 == pytest.approx([0.5, 1.5])

    def test_modulation(self):
        assert BPSK == Modulation(1.0, 2.0) == Modulation.bpsk()
        with pytest.raises(ValueError):
            Modulation(0.0, 2.0)

    def test_config_hashable_and_symmetric_flag(self):
        cfg = make_cfg(n=3)
        assert cfg == make_cfg(n=3)
        assert hash(cfg) == hash(make_cfg(n=3))
        assert cfg.is_symmetric
        asym = NetworkConfig.create(2, sigma2=np.array([[1.0, 2.0], [1.0, 1.0]]),
                                    rho=1.0, psi_s=1.0, psi_r=1.0)
        assert not asym.is_symmetric

    def test_realization_shape_check(self):
        with pytest.raises(ValueError):
            ChannelRealization(h=np.ones((2, 3), complex), h_hat=np.ones((2, 2), complex))
