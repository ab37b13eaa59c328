"""Transmit and receive chains for Hermitian-symmetry, E-CRIP and O-CRIP OFDM.

Transmit:
    hermitian  s = idft(S_H)                      (real by construction)
    ecrip      s = S_FR + S_FI                    (one LED)
    ocrip      (S_FR, S_FI)                       (two LEDs, summed in the air)
  followed by a cyclic prefix of mu samples on every branch.

Receive (perfect CSI, zero-forcing):
    RR = dft(y without CP) / lambda
    hermitian  bins 1 .. N/2-1 of RR
    crip       Re{RR} - Im{RR} on the loaded bins

Signals are float arrays whose last axis is time; leading axes index frames.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike

from .channel import (
    ChannelModel,
    ClipperConfig,
    RngStream,
    add_awgn,
    channel_eigenvalues,
    clip,
    clip_events,
    propagate,
)
from .errors import ConfigError, FrameError, SizingError
from .frames import (
    FrameLayout,
    FrequencyFrame,
    ModulationSpec,
    Scheme,
    bits_per_frame,
    build_frame,
    default_modulation,
    demap_symbols,
    map_bits,
)
from .transforms import dft, idft, split_even_odd_parts

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TxOutput:
    """Drive waveform(s) with cyclic prefix: one branch, or two for O-CRIP."""

    branches: tuple[np.ndarray, ...]
    scheme: Scheme
    n_subcarriers: int
    cp_length: int
    s0_loaded: bool

    @property
    def combined(self) -> np.ndarray:
        """Branch sum, i.e. what a single photodetector sees."""
        return np.sum(self.branches, axis=0)


@dataclass(frozen=True)
class EqualizedFrame:
    """Post-equalizer bins RR = lambda^-1 F y."""

    values: np.ndarray
    scheme: Scheme


def add_cyclic_prefix(signal: ArrayLike, cp_length: int) -> np.ndarray:
    """Prepend the last ``cp_length`` samples."""
    x = np.asarray(signal)
    if cp_length == 0:
        return x.copy()
    return np.concatenate([x[..., -cp_length:], x], axis=-1)


def remove_cyclic_prefix(signal: ArrayLike, cp_length: int) -> np.ndarray:
    return np.asarray(signal)[..., cp_length:]


def _check_cp(cp_length: int, n: int) -> None:
    if cp_length < 0:
        raise SizingError(f"CP length must be >= 0, got {cp_length}")
    if cp_length >= n:
        raise SizingError(f"CP length {cp_length} must be shorter than N={n}")


def tx(
    frame: FrequencyFrame | ArrayLike,
    cp_length: int,
    scheme: Scheme | str,
    s0_loaded: bool = True,
) -> TxOutput:
    """Synthesize the drive branch(es) of one frame (or a batch of frames).

    A raw bin array is wrapped into a FrequencyFrame of the scheme's layout
    first; ``s0_loaded`` only applies in that case.

    Raises:
        FrameError: If the frame does not satisfy the scheme's layout.
        SizingError: If cp_length is negative or >= N.
    """
    scheme = Scheme(scheme)
    if not isinstance(frame, FrequencyFrame):
        bins = np.asarray(frame)
        frame = FrequencyFrame(bins, scheme.layout, bins.shape[-1], s0_loaded)
    if frame.layout is not scheme.layout:
        raise FrameError(
            f"{scheme.value} needs a {scheme.layout.value} frame, got {frame.layout.value}"
        )
    n = frame.n_subcarriers
    _check_cp(cp_length, n)

    if scheme is Scheme.HERMITIAN:
        parts = (idft(frame.bins).real,)
    else:
        s_fr, s_fi = split_even_odd_parts(frame)
        parts = (s_fr + s_fi,) if scheme is Scheme.ECRIP else (s_fr, s_fi)

    return TxOutput(
        branches=tuple(add_cyclic_prefix(p, cp_length) for p in parts),
        scheme=scheme,
        n_subcarriers=n,
        cp_length=cp_length,
        s0_loaded=frame.s0_loaded,
    )


def equalize(received: ArrayLike, ch: ChannelModel, cp_length: int, scheme: Scheme) -> EqualizedFrame:
    """Remove the CP, transform and divide by the channel eigenvalues.

    Raises:
        SingularChannelError: If any |lambda_k| < 1e-12.
    """
    lam = channel_eigenvalues(ch)
    y = remove_cyclic_prefix(received, cp_length)
    return EqualizedFrame(dft(y) / lam, Scheme(scheme))


def rx(
    received: ArrayLike | tuple[ArrayLike, ...],
    ch: ChannelModel,
    scheme: Scheme | str,
    s0_loaded: bool = True,
) -> np.ndarray:
    """Soft data symbols from received samples of length N + mu.

    A tuple of branch signals is summed first (optical combining). The CP
    length is inferred from the sample count.

    Raises:
        SizingError: If the received length is not in [N, 2N).
        SingularChannelError: If the channel cannot be zero-forced.
    """
    scheme = Scheme(scheme)
    if isinstance(received, tuple):
        y = np.sum([np.asarray(b, dtype=np.float64) for b in received], axis=0)
    else:
        y = np.asarray(received, dtype=np.float64)

    n = ch.n_subcarriers
    cp_length = y.shape[-1] - n
    if cp_length < 0 or cp_length >= n:
        raise SizingError(
            f"Received length {y.shape[-1]} does not match N={n} plus a CP shorter than N"
        )

    rr = equalize(y, ch, cp_length, scheme).values
    if scheme.layout is FrameLayout.HERMITIAN:
        return rr[..., 1 : n // 2]
    soft = rr.real - rr.imag
    return soft if s0_loaded else soft[..., 1:]


# =============================================================================
# Full link
# =============================================================================


@dataclass(frozen=True)
class LinkConfig:
    """One end-to-end link: scheme, framing, modulation, channel, optional LED clipper.

    The CP must cover the channel memory unless ``allow_short_cp`` is set,
    which exists to demonstrate what happens without it.
    """

    scheme: Scheme
    channel: ChannelModel
    cp_length: int = 8
    spec: ModulationSpec | None = None
    order_m: int = 4
    clipper: ClipperConfig | None = None
    s0_loaded: bool = True
    allow_short_cp: bool = False

    def __post_init__(self):
        scheme = Scheme(self.scheme)
        object.__setattr__(self, "scheme", scheme)
        if self.spec is None:
            object.__setattr__(self, "spec", default_modulation(scheme, self.order_m))
        if scheme.layout is FrameLayout.CRIP and self.spec.is_complex:
            raise ConfigError(f"{scheme.value} carries real symbols; use PAM, not QAM")

        n = self.channel.n_subcarriers
        _check_cp(self.cp_length, n)
        if self.channel.memory > self.cp_length and not self.allow_short_cp:
            raise SizingError(
                f"CP length {self.cp_length} is shorter than the channel memory "
                f"{self.channel.memory}"
            )

    @property
    def n_subcarriers(self) -> int:
        return self.channel.n_subcarriers

    @property
    def loaded_bins(self) -> int:
        n = self.n_subcarriers
        if self.scheme.layout is FrameLayout.HERMITIAN:
            return n - 2
        return n if self.s0_loaded else n - 1

    @property
    def bits_per_frame(self) -> int:
        return bits_per_frame(self.scheme, self.n_subcarriers, self.spec, self.s0_loaded)

    @property
    def drive_scale(self) -> float:
        """Scale giving every scheme unit mean drive power before the amplifier."""
        return float(np.sqrt(self.n_subcarriers / self.loaded_bins))

    @property
    def front_end_gain(self) -> float:
        return self.clipper.gain if self.clipper is not None else 1.0


@dataclass
class FrameDiagnostics:
    bit_errors: int = 0
    bits: int = 0
    frames: int = 0
    tx_power: float = 0.0
    clip_events: int = 0
    samples: int = field(default=0)


def noise_power_for_ebn0(
    ebn0_db: float, drive_variance: float, n_subcarriers: int, bits_per_frame: int
) -> float:
    """AWGN variance for an electrical, DC-excluded Eb/N0.

    Eb = drive_variance * N / bits_per_frame (CP not counted); N0 = 2 sigma_n^2.
    """
    if drive_variance < 0:
        raise ConfigError(f"Drive variance must be >= 0, got {drive_variance}")
    eb = drive_variance * n_subcarriers / bits_per_frame
    return eb / (2.0 * 10.0 ** (ebn0_db / 10.0))


def _transmit(link: LinkConfig, bits: np.ndarray) -> tuple[TxOutput, list[np.ndarray], int]:
    symbols = map_bits(bits, link.spec)
    frame = build_frame(symbols, link.n_subcarriers, link.scheme, link.s0_loaded)
    out = tx(frame, link.cp_length, link.scheme)

    alpha = link.drive_scale
    drives, events = [], 0
    for branch in out.branches:
        drive = alpha * branch
        if link.clipper is not None:
            # each O-CRIP branch has its own LED and clips independently
            events += clip_events(drive, link.clipper)
            drive = clip(drive, link.clipper)
        drives.append(drive)
    return out, drives, events


def run_frame(
    bits: ArrayLike,
    link: LinkConfig,
    rng: RngStream | np.random.Generator,
) -> tuple[np.ndarray, FrameDiagnostics]:
    """bits -> map -> frame -> tx -> [gain, clip] -> channel -> noise -> rx -> demap.

    ``bits`` has shape (bits_per_frame,) or (frames, bits_per_frame). Frames of
    a batch are sent back to back through the same linear channel. Noise is
    added once, after optical summation of the branches.

    Returns:
        (decoded bits with the shape of ``bits``, diagnostics)
    """
    tx_bits = np.asarray(bits, dtype=np.int64)
    if tx_bits.ndim == 0 or tx_bits.shape[-1] != link.bits_per_frame:
        raise SizingError(
            f"Expected {link.bits_per_frame} bits per frame, got shape {tx_bits.shape}"
        )
    batch = tx_bits.reshape(-1, link.bits_per_frame)

    _, drives, events = _transmit(link, batch)
    combined = np.sum(drives, axis=0)
    frame_len = combined.shape[-1]

    received = propagate(combined.reshape(-1), link.channel)
    received = add_awgn(received, link.channel.noise_power, rng).reshape(-1, frame_len)

    # perfect CSI: the receiver knows the drive scale and amplifier gain
    csi = link.channel.scaled(link.drive_scale * link.front_end_gain)
    soft = rx(received, csi, link.scheme, link.s0_loaded)
    decoded = demap_symbols(soft, link.spec).reshape(tx_bits.shape)

    diagnostics = FrameDiagnostics(
        bit_errors=int(np.count_nonzero(decoded != tx_bits)),
        bits=int(tx_bits.size),
        frames=int(batch.shape[0]),
        tx_power=float(np.mean(combined**2)),
        clip_events=events,
        samples=sum(int(d.size) for d in drives),
    )
    return decoded, diagnostics


def run_batch(
    link: LinkConfig, n_frames: int, rng: RngStream | np.random.Generator
) -> FrameDiagnostics:
    """Draw random bits for ``n_frames`` frames and run them through the link."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    bits = gen.integers(0, 2, size=(n_frames, link.bits_per_frame))
    _, diagnostics = run_frame(bits, link, gen)
    return diagnostics
