"""Multipath intensity channel, AWGN, reproducible random streams and the LED clipper.

After cyclic-prefix removal the channel acts on a frame as an N x N circulant
matrix H = F^H diag(lambda) F, where lambda is the *unnormalized* DFT of the
zero-padded tap vector. With the unitary F used throughout this package the
identity holds without any extra scale factor:

    circular_convolve(s, ch) == idft(lambda * dft(s))

All signals are in bias-relative coordinates: the LED bias v_dc is added
conceptually at the transmitter and removed perfectly at the receiver, so it
only shows up through the clip bounds B = v_th - v_dc and T = v_st - v_dc.
"""

import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike
from scipy.signal import lfilter

from .errors import ConfigError, SingularChannelError, SizingError
from .validation import require_nonnegative, require_subcarriers

logger = logging.getLogger(__name__)

# |lambda_k| below this makes the zero-forcing equalizer undefined
SINGULAR_THRESHOLD = 1e-12

# Receiver noise figure used for the room-scale VLC link (dBm)
NOISE_PRESET_DBM = -98.71


def dbm_to_watts(dbm: float) -> float:
    return float(10.0 ** ((dbm - 30.0) / 10.0))


# =============================================================================
# Channel model
# =============================================================================


@dataclass(frozen=True)
class ChannelModel:
    """Causal tap vector h_0..h_mu, receiver noise power and subcarrier count."""

    taps: np.ndarray
    noise_power: float = 0.0
    n_subcarriers: int = 64

    def __post_init__(self):
        n = require_subcarriers(self.n_subcarriers, minimum=2)
        taps = np.array(self.taps, dtype=np.float64).reshape(-1)
        if taps.size == 0:
            raise ConfigError("Channel needs at least one tap")
        if not np.all(np.isfinite(taps)):
            raise ConfigError("Channel taps must be finite")
        if taps[0] == 0:
            raise ConfigError("Leading channel tap h_0 must be nonzero")
        if taps.size > n:
            raise SizingError(f"Channel has {taps.size} taps but N is only {n}")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)
        object.__setattr__(self, "n_subcarriers", n)
        object.__setattr__(self, "noise_power", require_nonnegative(self.noise_power, "noise_power"))

    @property
    def memory(self) -> int:
        """Channel memory mu (taps - 1); the CP must be at least this long."""
        return self.taps.size - 1

    def scaled(self, factor: float) -> "ChannelModel":
        return replace(self, taps=self.taps * factor)

    def with_noise(self, noise_power: float) -> "ChannelModel":
        return replace(self, noise_power=noise_power)

    @classmethod
    def identity(cls, n_subcarriers: int = 64, noise_power: float = 0.0) -> "ChannelModel":
        return cls(np.ones(1), noise_power, n_subcarriers)

    @classmethod
    def exponential(
        cls,
        n_subcarriers: int = 64,
        memory: int = 4,
        decay: float = 1.5,
        noise_power: float = 0.0,
    ) -> "ChannelModel":
        """Exponentially decaying positive taps h_m ~ exp(-m / decay), summing to 1."""
        if memory < 0:
            raise ConfigError(f"Channel memory must be >= 0, got {memory}")
        if decay <= 0:
            raise ConfigError(f"Decay constant must be > 0, got {decay}")
        taps = np.exp(-np.arange(memory + 1) / decay)
        return cls(taps / taps.sum(), noise_power, n_subcarriers)

    @classmethod
    def from_tap_file(
        cls, path: str | Path, n_subcarriers: int = 64, noise_power: float = 0.0
    ) -> "ChannelModel":
        """Load taps from a plain-text column file (one tap per line, '#' comments).

        Raises:
            FileNotFoundError: If the file doesn't exist.
            ConfigError: If the file holds no parsable taps.
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Tap file not found: {path}")
        try:
            taps = np.loadtxt(path, dtype=np.float64, comments="#", ndmin=1)
        except ValueError as e:
            raise ConfigError(f"Invalid tap file {path}: {e}")
        logger.info("Loaded %d channel taps from %s", taps.size, path)
        return cls(taps, noise_power, n_subcarriers)


def channel_eigenvalues(ch: ChannelModel, check: bool = True) -> np.ndarray:
    """Circulant eigenvalues lambda_k = sum_m h_m exp(-j 2 pi k m / N).

    Raises:
        SingularChannelError: If ``check`` and any |lambda_k| < 1e-12.
    """
    lam = np.fft.fft(ch.taps, n=ch.n_subcarriers)
    if check:
        bad = np.flatnonzero(np.abs(lam) < SINGULAR_THRESHOLD)
        if bad.size:
            raise SingularChannelError(bad.tolist(), SINGULAR_THRESHOLD)
    return lam


def circulant_matrix(ch: ChannelModel) -> np.ndarray:
    """Dense H with H[n, k] = h_{(n - k) mod N}."""
    n = ch.n_subcarriers
    col = np.zeros(n)
    col[: ch.taps.size] = ch.taps
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return col[idx]


def circular_convolve(signal: ArrayLike, ch: ChannelModel) -> np.ndarray:
    """H s for the post-CP-removal circulant system, along the last axis."""
    s = np.asarray(signal, dtype=np.float64)
    if s.ndim == 0 or s.shape[-1] != ch.n_subcarriers:
        raise SizingError(
            f"Signal length must equal N={ch.n_subcarriers}, got shape {s.shape}"
        )
    out = np.zeros_like(s)
    for m, h in enumerate(ch.taps):
        if h:
            out += h * np.roll(s, m, axis=-1)
    return out


def propagate(stream: ArrayLike, ch: ChannelModel) -> np.ndarray:
    """Causal linear convolution of a CP-bearing sample stream with the taps.

    Frames sent back to back interfere through the channel memory; a CP at
    least ``ch.memory`` long absorbs that interference.
    """
    x = np.asarray(stream, dtype=np.float64)
    return lfilter(ch.taps, [1.0], x, axis=-1)


# =============================================================================
# Random streams and noise
# =============================================================================


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream identified by (seed, stream id).

    Identical (seed, stream) pairs give identical draws; distinct stream ids are
    independent (numpy SeedSequence spawn keys).
    """

    seed: int
    stream: tuple[int, ...] = ()

    def __post_init__(self):
        if self.seed < 0:
            raise ConfigError(f"Seed must be >= 0, got {self.seed}")
        stream = (self.stream,) if isinstance(self.stream, (int, np.integer)) else self.stream
        object.__setattr__(self, "stream", tuple(int(s) for s in stream))

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of this stream."""
        seq = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        return np.random.Generator(np.random.PCG64(seq))

    def child(self, *ids: int) -> "RngStream":
        return RngStream(self.seed, self.stream + tuple(ids))


def _as_generator(rng: RngStream | np.random.Generator) -> np.random.Generator:
    return rng.generator() if isinstance(rng, RngStream) else rng


def add_awgn(
    signal: ArrayLike, noise_power: float, rng: RngStream | np.random.Generator
) -> np.ndarray:
    """Add i.i.d. zero-mean Gaussian noise of variance ``noise_power``.

    Raises:
        ConfigError: If the variance is negative.
    """
    noise_power = require_nonnegative(noise_power, "Noise variance")
    s = np.asarray(signal, dtype=np.float64)
    if noise_power == 0:
        return s.copy()
    return s + _as_generator(rng).normal(0.0, np.sqrt(noise_power), size=s.shape)


# =============================================================================
# LED front end
# =============================================================================


@dataclass(frozen=True)
class ClipperConfig:
    """LED active region [v_th, v_st] around bias v_dc, plus amplifier gain."""

    v_th: float = 2.65
    v_st: float = 3.15
    v_dc: float = 2.9
    gain: float = 1.0

    def __post_init__(self):
        if not self.v_th < self.v_dc < self.v_st:
            raise ConfigError(
                f"Clipper needs v_th < v_dc < v_st, got "
                f"v_th={self.v_th}, v_dc={self.v_dc}, v_st={self.v_st}"
            )
        if not (np.isfinite(self.gain) and self.gain > 0):
            raise ConfigError(f"Amplifier gain must be > 0, got {self.gain}")

    @property
    def lower(self) -> float:
        """B = v_th - v_dc (< 0)."""
        return self.v_th - self.v_dc

    @property
    def upper(self) -> float:
        """T = v_st - v_dc (> 0)."""
        return self.v_st - self.v_dc

    def shifted(self, offset: float) -> "ClipperConfig":
        """Same LED with the bias moved by ``offset`` volts."""
        return replace(self, v_dc=self.v_dc + offset)

    def with_gain(self, gain: float) -> "ClipperConfig":
        return replace(self, gain=gain)

    @classmethod
    def unbounded(cls, gain: float = 1.0) -> "ClipperConfig":
        return cls(v_th=-np.inf, v_st=np.inf, v_dc=0.0, gain=gain)


def clip(signal: ArrayLike, cfg: ClipperConfig) -> np.ndarray:
    """Amplify by cfg.gain, then clamp to [B, T]."""
    return np.clip(cfg.gain * np.asarray(signal, dtype=np.float64), cfg.lower, cfg.upper)


def clip_events(signal: ArrayLike, cfg: ClipperConfig) -> int:
    """Number of amplified samples outside [B, T]."""
    amplified = cfg.gain * np.asarray(signal, dtype=np.float64)
    return int(np.count_nonzero((amplified < cfg.lower) | (amplified > cfg.upper)))
