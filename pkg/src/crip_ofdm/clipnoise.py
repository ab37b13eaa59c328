"""Closed-form clipping-noise power of a Gaussian drive signal, with Monte-Carlo checks.

The drive S ~ N(0, sigma^2) is clamped to [B, T]; the clipping noise is
N_c = S - clip(S). With b = B / sigma and t = T / sigma:

    P_single = sigma^2 - sigma^2 (Q(b) - Q(t) + b phi(b) - t phi(t))
               + B^2 (1 - Q(b)) + T^2 Q(t) + 2 B sigma phi(b) - 2 T sigma phi(t)

    E[clip(S)] = -sigma (phi(t) - phi(b)) + B (1 - Q(b)) + T Q(t)

For O-CRIP the real and imaginary branches each carry sigma^2 / 2 and are
clipped on their own LED; treating the two branch noises as independent,

    P_ocrip = 2 P_single(sigma^2 / 2) + 2 E[clip(S)]^2 |sigma^2 / 2

Hermitian symmetry and E-CRIP both use P_single with the full sigma^2.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import erfc

from .channel import ClipperConfig, RngStream
from .errors import DomainError
from .frames import Modulation, ModulationSpec, build_crip_frame, map_bits
from .transforms import split_even_odd_parts

logger = logging.getLogger(__name__)

# Middle-region probability below which truncated moments are undefined
_MIN_MIDDLE_MASS = 1e-15

# Both tails below this count as "never clips"
_NEGLIGIBLE_TAIL = 1e-30

# Samples drawn per Monte-Carlo chunk
_MC_CHUNK = 1_000_000

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


class GaussKernels(NamedTuple):
    q: np.ndarray | float
    pdf: np.ndarray | float
    dpdf: np.ndarray | float


def gauss_kernels(x: ArrayLike) -> GaussKernels:
    """Q(x) = 0.5 erfc(x / sqrt 2), phi(x), and phi'(x) = -x phi(x)."""
    x = np.asarray(x, dtype=np.float64)
    q = 0.5 * erfc(x / np.sqrt(2.0))
    pdf = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    dpdf = -x * pdf
    if x.ndim == 0:
        return GaussKernels(float(q), float(pdf), float(dpdf))
    return GaussKernels(q, pdf, dpdf)


def q_function(x: ArrayLike) -> np.ndarray | float:
    return gauss_kernels(x).q


@dataclass(frozen=True)
class ClipRegime:
    """Zero-mean Gaussian of variance sigma2 clipped to [lower, upper]."""

    sigma2: float
    lower: float
    upper: float

    def __post_init__(self):
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise DomainError(f"sigma_x^2 must be > 0, got {self.sigma2}")
        if not self.lower < 0 < self.upper:
            raise DomainError(
                f"Clip bounds must satisfy B < 0 < T, got B={self.lower}, T={self.upper}"
            )

    @classmethod
    def from_clipper(cls, sigma2: float, clipper: ClipperConfig) -> "ClipRegime":
        return cls(sigma2, clipper.lower, clipper.upper)

    @property
    def sigma(self) -> float:
        return float(np.sqrt(self.sigma2))

    def normalized_bounds(self) -> tuple[float, float]:
        return self.lower / self.sigma, self.upper / self.sigma

    def halved(self) -> "ClipRegime":
        """Per-branch regime of an O-CRIP link with total variance sigma2."""
        return ClipRegime(self.sigma2 / 2.0, self.lower, self.upper)


@dataclass(frozen=True)
class TruncatedMoments:
    """Truncated-Gaussian pieces of a clip regime."""

    mean_middle: float
    second_moment_middle: float
    mean_lower: float
    mean_upper: float
    p_lower: float
    p_middle: float
    p_upper: float


def _tail_masses(regime: ClipRegime) -> tuple[float, float, float]:
    b, t = regime.normalized_bounds()
    p_lower = q_function(-b)  # 1 - Q(b) without cancellation
    p_upper = q_function(t)
    p_middle = q_function(b) - p_upper
    return p_lower, p_middle, p_upper


def truncated_moments(regime: ClipRegime) -> TruncatedMoments:
    """Doubly, lower and upper truncated moments plus region probabilities.

    Raises:
        DomainError: If Q(b) - Q(t) <= 1e-15 (no mass between the bounds).
    """
    sigma = regime.sigma
    b, t = regime.normalized_bounds()
    kb, kt = gauss_kernels(b), gauss_kernels(t)
    p_lower, p_middle, p_upper = _tail_masses(regime)
    if p_middle <= _MIN_MIDDLE_MASS:
        raise DomainError(
            f"Degenerate clip regime: P(B < S < T) = {p_middle:.3g} "
            f"(sigma^2={regime.sigma2}, B={regime.lower}, T={regime.upper})"
        )

    mean_middle = -sigma * (kt.pdf - kb.pdf) / p_middle
    second_middle = regime.sigma2 + regime.sigma2 * (kt.dpdf - kb.dpdf) / p_middle
    mean_lower = -sigma * kb.pdf / p_lower if p_lower > 0 else regime.lower
    mean_upper = sigma * kt.pdf / p_upper if p_upper > 0 else regime.upper

    return TruncatedMoments(
        mean_middle=mean_middle,
        second_moment_middle=second_middle,
        mean_lower=mean_lower,
        mean_upper=mean_upper,
        p_lower=p_lower,
        p_middle=p_middle,
        p_upper=p_upper,
    )


def clip_noise_power_single(regime: ClipRegime) -> float:
    """Clipping-noise power E[(S - clip(S))^2] of one clipped Gaussian branch."""
    p_lower, p_middle, p_upper = _tail_masses(regime)
    if p_lower < _NEGLIGIBLE_TAIL and p_upper < _NEGLIGIBLE_TAIL:
        return 0.0

    s2, sigma = regime.sigma2, regime.sigma
    lo, hi = regime.lower, regime.upper
    b, t = regime.normalized_bounds()
    kb, kt = gauss_kernels(b), gauss_kernels(t)
    power = (
        s2
        - s2 * (p_middle + b * kb.pdf - t * kt.pdf)
        + lo * lo * p_lower
        + hi * hi * p_upper
        + 2.0 * lo * sigma * kb.pdf
        - 2.0 * hi * sigma * kt.pdf
    )
    return max(float(power), 0.0)


def clipped_mean(regime: ClipRegime) -> float:
    """E[clip(S)]; equal to minus the mean clipping noise."""
    p_lower, _, p_upper = _tail_masses(regime)
    b, t = regime.normalized_bounds()
    kb, kt = gauss_kernels(b), gauss_kernels(t)
    return float(
        -regime.sigma * (kt.pdf - kb.pdf) + regime.lower * p_lower + regime.upper * p_upper
    )


def clip_noise_power_ocrip(total_sigma2: float, lower: float, upper: float) -> float:
    """Two-LED clipping-noise power at total drive variance ``total_sigma2``."""
    branch = ClipRegime(total_sigma2, lower, upper).halved()
    mean = clipped_mean(branch)
    return 2.0 * clip_noise_power_single(branch) + 2.0 * mean * mean


def decomposed_power(regime: ClipRegime) -> float:
    """E[S^2] + E[S_c^2] - 2 E[S S_c] rebuilt from :func:`truncated_moments`."""
    m = truncated_moments(regime)
    lo, hi = regime.lower, regime.upper
    e_clipped_sq = lo * lo * m.p_lower + m.second_moment_middle * m.p_middle + hi * hi * m.p_upper
    e_cross = (
        lo * m.mean_lower * m.p_lower
        + m.second_moment_middle * m.p_middle
        + hi * m.mean_upper * m.p_upper
    )
    return regime.sigma2 + e_clipped_sq - 2.0 * e_cross


# =============================================================================
# Monte-Carlo estimators
# =============================================================================


@dataclass(frozen=True)
class ClipNoiseReport:
    """Analytic prediction next to a sampled estimate."""

    analytic: float
    monte_carlo: float
    samples: int
    stderr: float = 0.0

    def __post_init__(self):
        if self.analytic < 0 or self.monte_carlo < 0:
            raise DomainError(
                f"Clip-noise powers must be >= 0, got analytic={self.analytic}, "
                f"monte_carlo={self.monte_carlo}"
            )

    @property
    def relative_gap(self) -> float:
        """|MC - analytic| / analytic (absolute gap when analytic is 0)."""
        gap = abs(self.monte_carlo - self.analytic)
        return gap / self.analytic if self.analytic > 0 else gap


class _Accumulator:
    """Running first and second moments of squared clip-noise samples."""

    def __init__(self):
        self.count = 0
        self.total = 0.0
        self.total_sq = 0.0

    def add(self, noise: np.ndarray) -> None:
        p = noise * noise
        self.count += p.size
        self.total += float(p.sum())
        self.total_sq += float((p * p).sum())

    def result(self) -> tuple[float, float]:
        mean = self.total / self.count
        var = max(self.total_sq / self.count - mean * mean, 0.0)
        return mean, float(np.sqrt(var / self.count))


def _chunks(n_samples: int) -> list[int]:
    if n_samples < 1:
        raise DomainError(f"Monte-Carlo needs at least one sample, got {n_samples}")
    full, rest = divmod(n_samples, _MC_CHUNK)
    return [_MC_CHUNK] * full + ([rest] if rest else [])


def _clip_noise(s: np.ndarray, lower: float, upper: float) -> np.ndarray:
    return s - np.clip(s, lower, upper)


def monte_carlo_single(regime: ClipRegime, n_samples: int, seed: int = 0) -> ClipNoiseReport:
    """Sample E[(S - clip(S))^2] for Gaussian S; chunks use disjoint streams."""
    acc = _Accumulator()
    for i, size in enumerate(_chunks(n_samples)):
        gen = RngStream(seed, (1, i)).generator()
        s = gen.normal(0.0, regime.sigma, size=size)
        acc.add(_clip_noise(s, regime.lower, regime.upper))
    power, stderr = acc.result()
    return ClipNoiseReport(clip_noise_power_single(regime), power, n_samples, stderr)


def monte_carlo_ocrip(
    total_sigma2: float, lower: float, upper: float, n_samples: int, seed: int = 0
) -> ClipNoiseReport:
    """Two independent Gaussian branches of variance sigma^2/2, clipped separately."""
    branch = ClipRegime(total_sigma2, lower, upper).halved()
    acc = _Accumulator()
    for i, size in enumerate(_chunks(n_samples)):
        gen = RngStream(seed, (2, i)).generator()
        s = gen.normal(0.0, branch.sigma, size=(2, size))
        acc.add(_clip_noise(s, lower, upper).sum(axis=0))
    power, stderr = acc.result()
    return ClipNoiseReport(
        clip_noise_power_ocrip(total_sigma2, lower, upper), power, n_samples, stderr
    )


def ifft_clip_noise(
    total_sigma2: float,
    lower: float,
    upper: float,
    n_frames: int,
    n_subcarriers: int = 64,
    order_m: int = 4,
    two_branches: bool = True,
    seed: int = 0,
) -> ClipNoiseReport:
    """Clip noise of real IDFT outputs of random M-PAM CRIP frames.

    Frames are scaled to total drive variance ``total_sigma2``. With
    ``two_branches`` S_FR and S_FI are clipped separately (O-CRIP) and compared
    against the two-LED formula, which assumes the branch noises independent;
    otherwise S_FR + S_FI is clipped and compared against the single-branch
    formula.
    """
    spec = ModulationSpec(Modulation.PAM, order_m)
    frames_per_chunk = max(1, _MC_CHUNK // n_subcarriers)
    sigma = float(np.sqrt(total_sigma2))
    acc = _Accumulator()

    done, chunk = 0, 0
    while done < n_frames:
        count = min(frames_per_chunk, n_frames - done)
        gen = RngStream(seed, (3, chunk)).generator()
        bits = gen.integers(0, 2, size=(count, n_subcarriers * spec.bits_per_symbol))
        frame = build_crip_frame(map_bits(bits, spec), n_subcarriers, s0_loaded=True)
        s_fr, s_fi = split_even_odd_parts(frame)
        s_fr, s_fi = sigma * s_fr, sigma * s_fi
        if two_branches:
            noise = _clip_noise(s_fr, lower, upper) + _clip_noise(s_fi, lower, upper)
        else:
            noise = _clip_noise(s_fr + s_fi, lower, upper)
        acc.add(noise)
        done += count
        chunk += 1

    power, stderr = acc.result()
    if two_branches:
        analytic = clip_noise_power_ocrip(total_sigma2, lower, upper)
    else:
        analytic = clip_noise_power_single(ClipRegime(total_sigma2, lower, upper))
    report = ClipNoiseReport(analytic, power, n_frames * n_subcarriers, stderr)
    logger.debug(
        "IDFT clip-noise audit sigma^2=%g: analytic=%.4g sampled=%.4g gap=%.2f%%",
        total_sigma2, analytic, power, 100.0 * report.relative_gap,
    )
    return report
