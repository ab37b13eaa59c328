"""Tests for the closed-form clipping-noise model and its sampling oracles."""

import numpy as np
import pytest
from scipy import integrate

from crip_ofdm.channel import ClipperConfig
from crip_ofdm.clipnoise import (
    ClipNoiseReport,
    ClipRegime,
    clip_noise_power_ocrip,
    clip_noise_power_single,
    clipped_mean,
    decomposed_power,
    gauss_kernels,
    ifft_clip_noise,
    monte_carlo_ocrip,
    monte_carlo_single,
    truncated_moments,
)
from crip_ofdm.errors import DomainError

B, T = -0.25, 0.25
GRID = [0.05, 0.1, 0.25, 0.5, 1.0]


def _samples(sigma, size, seed):
    return np.random.default_rng(seed).normal(0.0, sigma, size)


class TestGaussKernels:
    """Tests for Q, phi and phi'."""

    def test_at_zero(self):
        k = gauss_kernels(0.0)
        assert k.q == 0.5
        assert k.pdf == pytest.approx(1 / np.sqrt(2 * np.pi))
        assert k.pdf == pytest.approx(0.39894, abs=1e-5)
        assert k.dpdf == 0.0

    def test_symmetry(self):
        x = np.random.default_rng(0).normal(0, 3, 100)
        k_pos, k_neg = gauss_kernels(x), gauss_kernels(-x)
        np.testing.assert_allclose(k_neg.q, 1 - k_pos.q, atol=1e-15)

    def test_q_of_one(self):
        assert gauss_kernels(1.0).q == pytest.approx(0.158655, abs=1e-6)

    def test_q_matches_integral(self):
        x = 1.3
        tail, _ = integrate.quad(lambda t: np.exp(-t * t / 2) / np.sqrt(2 * np.pi), x, np.inf)
        assert gauss_kernels(x).q == pytest.approx(tail, rel=1e-10)

    def test_derivative(self):
        x = np.linspace(-3, 3, 13)
        k = gauss_kernels(x)
        np.testing.assert_allclose(k.dpdf, -x * k.pdf)


class TestClipRegime:
    """Tests for ClipRegime validation."""

    def test_bounds_must_bracket_zero(self):
        with pytest.raises(DomainError, match="B < 0 < T"):
            ClipRegime(1.0, 0.1, 0.3)

    def test_positive_variance(self):
        with pytest.raises(DomainError, match="sigma_x"):
            ClipRegime(0.0, B, T)

    def test_from_clipper(self):
        regime = ClipRegime.from_clipper(0.25, ClipperConfig().shifted(0.1))
        assert regime.lower == pytest.approx(-0.35)
        assert regime.upper == pytest.approx(0.15)


class TestTruncatedMoments:
    """Tests for truncated_moments."""

    def test_symmetric_mean_zero(self):
        assert truncated_moments(ClipRegime(0.3, -0.2, 0.2)).mean_middle == pytest.approx(0.0, abs=1e-15)

    def test_probabilities_sum_to_one(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            regime = ClipRegime(rng.uniform(0.01, 2.0), -rng.uniform(0.01, 1.0), rng.uniform(0.01, 1.0))
            m = truncated_moments(regime)
            assert m.p_lower + m.p_middle + m.p_upper == pytest.approx(1.0, abs=1e-14)

    def test_degenerate(self):
        with pytest.raises(DomainError, match="Degenerate"):
            truncated_moments(ClipRegime(1.0, -1e-17, 1e-17))

    def test_against_samples(self):
        regime = ClipRegime(0.25, B, T)
        s = _samples(0.5, 10_000_000, 2)
        m = truncated_moments(regime)
        mid = s[(s > B) & (s < T)]
        assert m.second_moment_middle == pytest.approx(np.mean(mid**2), rel=0.005)
        assert m.mean_lower == pytest.approx(np.mean(s[s < B]), rel=0.005)
        assert m.mean_upper == pytest.approx(np.mean(s[s > T]), rel=0.005)
        assert m.p_middle == pytest.approx(mid.size / s.size, rel=0.005)

    def test_asymmetric_mean_middle(self):
        regime = ClipRegime(0.25, -0.1, 0.3)
        s = _samples(0.5, 10_000_000, 3)
        mid = s[(s > -0.1) & (s < 0.3)]
        assert truncated_moments(regime).mean_middle == pytest.approx(np.mean(mid), rel=0.005)


class TestClipNoisePowerSingle:
    """Tests for the single-branch clipping-noise power."""

    def test_vanishing_signal(self):
        assert clip_noise_power_single(ClipRegime(1e-8, B, T)) < 1e-20

    def test_monotone_in_variance(self):
        powers = [clip_noise_power_single(ClipRegime(s2, B, T)) for s2 in np.linspace(0.01, 1.0, 50)]
        assert all(b > a for a, b in zip(powers, powers[1:]))

    def test_monotone_growth_large_variance(self):
        powers = [clip_noise_power_single(ClipRegime(s2, B, T)) for s2 in [1, 10, 100, 1000]]
        assert all(b > a for a, b in zip(powers, powers[1:]))
        assert powers[-1] < 1000

    def test_decomposition_identity(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            regime = ClipRegime(rng.uniform(0.01, 2.0), -rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0))
            assert decomposed_power(regime) == pytest.approx(
                clip_noise_power_single(regime), rel=1e-12, abs=1e-15
            )

    def test_matches_direct_sampling(self):
        regime = ClipRegime(0.25, B, T)
        s = _samples(0.5, 10_000_000, 5)
        direct = np.mean((s - np.clip(s, B, T)) ** 2)
        assert clip_noise_power_single(regime) == pytest.approx(direct, rel=0.01)

    def test_random_regimes_within_sampling_error(self):
        rng = np.random.default_rng(6)
        for i in range(50):
            regime = ClipRegime(rng.uniform(0.05, 1.0), -rng.uniform(0.1, 0.6), rng.uniform(0.1, 0.6))
            report = monte_carlo_single(regime, 200_000, seed=i)
            assert abs(report.monte_carlo - report.analytic) < 5 * report.stderr + 1e-12


class TestClippedMean:
    """Tests for the clipped-signal mean."""

    def test_symmetric_zero(self):
        assert clipped_mean(ClipRegime(0.5, -0.3, 0.3)) == pytest.approx(0.0, abs=1e-15)

    def test_against_samples(self):
        s = _samples(0.5, 10_000_000, 7)
        assert clipped_mean(ClipRegime(0.25, -0.1, 0.3)) == pytest.approx(
            np.mean(np.clip(s, -0.1, 0.3)), rel=0.005
        )

    def test_sign(self):
        for s2 in [0.01, 0.1, 1.0]:
            for b, t in [(-0.1, 0.3), (-0.2, 0.25), (-0.05, 0.5)]:
                assert clipped_mean(ClipRegime(s2, b, t)) > 0
                assert clipped_mean(ClipRegime(s2, -t, -b)) < 0


class TestClipNoisePowerOcrip:
    """Tests for the two-LED clipping-noise power."""

    def test_symmetric_reduces_to_two_branches(self):
        for s2 in GRID:
            assert clip_noise_power_ocrip(s2, B, T) == pytest.approx(
                2 * clip_noise_power_single(ClipRegime(s2 / 2, B, T)), rel=1e-14
            )

    def test_below_single_branch(self):
        for s2 in np.linspace(0.05, 1.0, 40):
            assert clip_noise_power_ocrip(s2, B, T) < clip_noise_power_single(ClipRegime(s2, B, T))

    def test_asymmetric_bounds_include_mean_term(self):
        half = ClipRegime(0.125, -0.35, 0.15)
        expected = 2 * clip_noise_power_single(half) + 2 * clipped_mean(half) ** 2
        assert clip_noise_power_ocrip(0.25, -0.35, 0.15) == pytest.approx(expected)

    def test_matches_two_branch_sampling(self):
        rng = np.random.default_rng(8)
        s = rng.normal(0.0, np.sqrt(0.125), (2, 10_000_000))
        noise = (s - np.clip(s, B, T)).sum(axis=0)
        assert clip_noise_power_ocrip(0.25, B, T) == pytest.approx(np.mean(noise**2), rel=0.01)


class TestMonteCarlo:
    """Tests for the sampling estimators and reports."""

    def test_report_gap(self):
        report = ClipNoiseReport(analytic=2.0, monte_carlo=2.1, samples=10)
        assert report.relative_gap == pytest.approx(0.05)

    def test_report_rejects_negative(self):
        with pytest.raises(DomainError):
            ClipNoiseReport(analytic=-1.0, monte_carlo=0.0, samples=1)

    def test_reproducible(self):
        regime = ClipRegime(0.25, B, T)
        assert monte_carlo_single(regime, 10_000, seed=3) == monte_carlo_single(regime, 10_000, seed=3)

    def test_chunked_count(self):
        report = monte_carlo_single(ClipRegime(0.25, B, T), 1_500_000, seed=1)
        assert report.samples == 1_500_000

    def test_zero_samples_rejected(self):
        with pytest.raises(DomainError, match="at least one sample"):
            monte_carlo_single(ClipRegime(0.25, B, T), 0)

    @pytest.mark.slow
    @pytest.mark.parametrize("sigma2", GRID)
    def test_closed_forms_at_ten_million(self, sigma2):
        single = monte_carlo_single(ClipRegime(sigma2, B, T), 10_000_000, seed=11)
        ocrip = monte_carlo_ocrip(sigma2, B, T, 10_000_000, seed=11)
        assert single.relative_gap < 0.01
        assert ocrip.relative_gap < 0.01
        assert ocrip.analytic < single.analytic


class TestIfftAudit:
    """Tests for clip noise measured on real IDFT outputs."""

    def test_single_branch_close_to_gaussian_model(self):
        report = ifft_clip_noise(0.25, B, T, n_frames=20_000, two_branches=False, seed=1)
        assert report.samples == 20_000 * 64
        assert report.relative_gap < 0.05

    @pytest.mark.slow
    @pytest.mark.parametrize("sigma2", GRID)
    def test_two_branch_gap_is_small(self, sigma2):
        report = ifft_clip_noise(sigma2, B, T, n_frames=50_000, two_branches=True, seed=2)
        assert report.relative_gap < 0.05
        assert report.monte_carlo < clip_noise_power_single(ClipRegime(sigma2, B, T))
