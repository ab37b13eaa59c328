"""Bit/symbol mapping and frequency-domain frame assembly.

Two frame layouts are supported:

  hermitian: S_H = [0, x_0 .. x_{N/2-2}, 0, conj(x_{N/2-2}) .. conj(x_0)]
             N/2 - 1 complex (M^2-QAM) symbols per frame.
  crip:      S_P = [x_0 .. x_{N-1}] with real (M-PAM) symbols; bin 0 is left
             empty (zero) when s0 is not loaded.

Arrays may carry leading batch axes; the last axis is always the symbol or
subcarrier axis.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike

from .errors import ConfigError, FrameError, SizingError
from .validation import require_order, require_subcarriers

logger = logging.getLogger(__name__)

# Relative tolerance for the symmetry / realness checks on frames
_FRAME_TOL = 1e-12

# Tolerance when checking that a value is a constellation point
_POINT_TOL = 1e-9


class Modulation(str, Enum):
    PAM = "pam"
    QAM = "qam"


class FrameLayout(str, Enum):
    HERMITIAN = "hermitian"
    CRIP = "crip"


class Scheme(str, Enum):
    """Transmission scheme: one frame layout plus a combining rule."""

    HERMITIAN = "hermitian"
    ECRIP = "ecrip"  # real + imaginary parts summed electrically, one LED
    OCRIP = "ocrip"  # real and imaginary parts on separate LEDs, summed optically

    @property
    def layout(self) -> FrameLayout:
        return FrameLayout.HERMITIAN if self is Scheme.HERMITIAN else FrameLayout.CRIP

    @property
    def branches(self) -> int:
        return 2 if self is Scheme.OCRIP else 1


@dataclass(frozen=True)
class ModulationSpec:
    """Gray-labeled PAM or square QAM with unit mean symbol energy.

    ``order_m`` is the per-dimension depth; a QAM constellation has M^2 points.
    """

    modulation: Modulation
    order_m: int

    def __post_init__(self):
        object.__setattr__(self, "modulation", Modulation(self.modulation))
        object.__setattr__(self, "order_m", require_order(self.order_m))

    @property
    def bits_per_dimension(self) -> int:
        return int(self.order_m).bit_length() - 1

    @property
    def bits_per_symbol(self) -> int:
        k = self.bits_per_dimension
        return 2 * k if self.modulation is Modulation.QAM else k

    @property
    def is_complex(self) -> bool:
        return self.modulation is Modulation.QAM

    @property
    def scale(self) -> float:
        """Normalization applied to the odd-integer levels."""
        m2 = self.order_m**2 - 1
        if self.modulation is Modulation.QAM:
            return float(np.sqrt(3.0 / (2.0 * m2)))
        return float(np.sqrt(3.0 / m2))

    def levels(self) -> np.ndarray:
        """Normalized per-dimension amplitudes, ascending."""
        m = self.order_m
        return (2.0 * np.arange(m) - (m - 1)) * self.scale

    def constellation(self) -> np.ndarray:
        """All constellation points, indexed by their integer label."""
        k = self.bits_per_symbol
        labels = np.arange(2**k)
        bits = (labels[:, None] >> np.arange(k - 1, -1, -1)) & 1
        return map_bits(bits.reshape(-1), self).values


def default_modulation(scheme: Scheme | FrameLayout, order_m: int) -> ModulationSpec:
    """M^2-QAM for the Hermitian layout, M-PAM for CRIP."""
    layout = scheme.layout if isinstance(scheme, Scheme) else FrameLayout(scheme)
    if layout is FrameLayout.HERMITIAN:
        return ModulationSpec(Modulation.QAM, order_m)
    return ModulationSpec(Modulation.PAM, order_m)


@dataclass(frozen=True)
class SymbolVector:
    """Mapped data symbols (real for PAM, complex for QAM)."""

    values: np.ndarray
    spec: ModulationSpec

    def __post_init__(self):
        dtype = np.complex128 if self.spec.is_complex else np.float64
        raw = np.asarray(self.values)
        if not self.spec.is_complex and np.iscomplexobj(raw):
            raise FrameError("PAM symbols must be real-valued")
        values = np.array(raw, dtype=dtype)
        if not _on_constellation(values, self.spec):
            raise FrameError(
                f"Values are not points of {self.spec.order_m}-"
                f"{self.spec.modulation.value.upper()}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.shape[-1]


def _on_constellation(values: np.ndarray, spec: ModulationSpec) -> bool:
    if values.size == 0:
        return True
    levels = spec.levels()

    def _near(part: np.ndarray) -> bool:
        dist = np.abs(part[..., None] - levels).min(axis=-1)
        return bool(np.all(dist < _POINT_TOL))

    if spec.is_complex:
        return _near(values.real) and _near(values.imag)
    return _near(values)


# =============================================================================
# Mapping
# =============================================================================


def _bits_to_levels(bits: np.ndarray, k: int, m: int) -> np.ndarray:
    """Gray-labeled k-bit groups (MSB first) on the last axis -> odd integer levels."""
    weights = 1 << np.arange(k - 1, -1, -1)
    gray = (bits * weights).sum(axis=-1)
    binary = gray.copy()
    shift = gray >> 1
    while np.any(shift):
        binary ^= shift
        shift >>= 1
    return 2 * binary - (m - 1)


def _levels_to_bits(index: np.ndarray, k: int) -> np.ndarray:
    gray = index ^ (index >> 1)
    return (gray[..., None] >> np.arange(k - 1, -1, -1)) & 1


def map_bits(bits: ArrayLike, spec: ModulationSpec) -> SymbolVector:
    """Map a bit sequence onto Gray-labeled, unit-energy symbols.

    For QAM the first log2(M) bits of each group select the in-phase level and
    the next log2(M) bits the quadrature level.

    Raises:
        SizingError: If the bit count is not a multiple of bits-per-symbol.
    """
    arr = np.asarray(bits, dtype=np.int64)
    if arr.ndim == 0:
        raise SizingError("bits must be a sequence")
    if np.any((arr != 0) & (arr != 1)):
        raise ConfigError("bits must contain only 0 and 1")

    per_symbol = spec.bits_per_symbol
    if arr.shape[-1] % per_symbol:
        raise SizingError(
            f"Bit count {arr.shape[-1]} is not a multiple of {per_symbol} "
            f"(bits per {spec.order_m}-{spec.modulation.value.upper()} symbol)"
        )

    groups = arr.reshape(*arr.shape[:-1], -1, per_symbol)
    k, m = spec.bits_per_dimension, spec.order_m
    if spec.is_complex:
        values = _bits_to_levels(groups[..., :k], k, m) + 1j * _bits_to_levels(
            groups[..., k:], k, m
        )
    else:
        values = _bits_to_levels(groups, k, m)
    return SymbolVector(values * spec.scale, spec)


def _decide(part: np.ndarray, spec: ModulationSpec) -> np.ndarray:
    # Nearest level index; ties round toward the lower level.
    m = spec.order_m
    u = (part / spec.scale + (m - 1)) / 2.0
    return np.clip(np.ceil(u - 0.5), 0, m - 1).astype(np.int64)


def demap_symbols(observed: SymbolVector | ArrayLike, spec: ModulationSpec) -> np.ndarray:
    """Minimum-distance decision per symbol followed by inverse Gray labeling.

    Always decides. A point exactly on a decision boundary goes to the lower
    amplitude level (so 0.0 under BPSK decides bit 0).
    """
    if isinstance(observed, SymbolVector):
        observed = observed.values
    values = np.asarray(observed)
    k = spec.bits_per_dimension

    if spec.is_complex:
        i_bits = _levels_to_bits(_decide(values.real, spec), k)
        q_bits = _levels_to_bits(_decide(values.imag, spec), k)
        groups = np.concatenate([i_bits, q_bits], axis=-1)
    else:
        groups = _levels_to_bits(_decide(np.real(values), spec), k)
    return groups.reshape(*groups.shape[:-2], -1).astype(np.int8)


# =============================================================================
# Frames
# =============================================================================


def symbols_per_frame(layout: FrameLayout | Scheme, n: int, s0_loaded: bool = True) -> int:
    """Data symbols carried by one frame of N subcarriers."""
    if isinstance(layout, Scheme):
        layout = layout.layout
    if FrameLayout(layout) is FrameLayout.HERMITIAN:
        return n // 2 - 1
    return n if s0_loaded else n - 1


def bits_per_frame(
    layout: FrameLayout | Scheme, n: int, spec: ModulationSpec, s0_loaded: bool = True
) -> int:
    return symbols_per_frame(layout, n, s0_loaded) * spec.bits_per_symbol


@dataclass(frozen=True)
class FrequencyFrame:
    """Length-N subcarrier vector ready for the IDFT (leading batch axes allowed)."""

    bins: np.ndarray
    layout: FrameLayout
    n_subcarriers: int
    s0_loaded: bool = True

    def __post_init__(self):
        object.__setattr__(self, "layout", FrameLayout(self.layout))
        n = require_subcarriers(self.n_subcarriers)
        bins = np.array(self.bins, dtype=np.complex128)
        if bins.ndim == 0 or bins.shape[-1] != n:
            raise SizingError(f"Frame must have {n} bins, got shape {bins.shape}")

        if self.layout is FrameLayout.HERMITIAN:
            object.__setattr__(self, "s0_loaded", False)
            _check_hermitian(bins)
        else:
            _check_crip(bins, self.s0_loaded)
        bins.setflags(write=False)
        object.__setattr__(self, "bins", bins)

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.bins.shape[:-1]

    def data_symbols(self) -> np.ndarray:
        """Information-bearing bins, in transmission order."""
        if self.layout is FrameLayout.HERMITIAN:
            return self.bins[..., 1 : self.n_subcarriers // 2]
        if self.s0_loaded:
            return self.bins.real
        return self.bins[..., 1:].real


def _check_hermitian(bins: np.ndarray) -> None:
    n = bins.shape[-1]
    scale = max(1.0, float(np.max(np.abs(bins), initial=0.0)))
    tol = _FRAME_TOL * scale
    if np.any(np.abs(bins[..., 0]) > tol) or np.any(np.abs(bins[..., n // 2]) > tol):
        raise FrameError("Hermitian frame must have zero bins at 0 and N/2")
    mirrored = np.conj(bins[..., n - 1 : n // 2 : -1])
    if np.any(np.abs(bins[..., 1 : n // 2] - mirrored) > tol):
        raise FrameError("Hermitian frame violates bins[k] = conj(bins[N-k])")


def _check_crip(bins: np.ndarray, s0_loaded: bool) -> None:
    scale = max(1.0, float(np.max(np.abs(bins), initial=0.0)))
    if np.any(np.abs(bins.imag) > _FRAME_TOL * scale):
        raise FrameError("CRIP frame bins must be purely real")
    if not s0_loaded and np.any(bins[..., 0] != 0):
        raise FrameError("CRIP frame with s0 empty must have bins[0] = 0")


def _symbol_values(x: SymbolVector | ArrayLike) -> np.ndarray:
    return x.values if isinstance(x, SymbolVector) else np.asarray(x)


def build_hermitian_frame(x: SymbolVector | ArrayLike, n: int) -> FrequencyFrame:
    """Arrange N/2-1 complex symbols with Hermitian symmetry.

    Raises:
        SizingError: If len(x) != N/2 - 1.
    """
    n = require_subcarriers(n)
    values = np.asarray(_symbol_values(x), dtype=np.complex128)
    half = n // 2 - 1
    if values.ndim == 0 or values.shape[-1] != half:
        raise SizingError(
            f"Hermitian frame of N={n} needs {half} symbols, got "
            f"{0 if values.ndim == 0 else values.shape[-1]}"
        )
    bins = np.zeros((*values.shape[:-1], n), dtype=np.complex128)
    bins[..., 1 : n // 2] = values
    bins[..., n // 2 + 1 :] = np.conj(values[..., ::-1])
    return FrequencyFrame(bins, FrameLayout.HERMITIAN, n, s0_loaded=False)


def build_crip_frame(x: SymbolVector | ArrayLike, n: int, s0_loaded: bool = True) -> FrequencyFrame:
    """Place real symbols on all N bins (s0 loaded) or on bins 1..N-1 (s0 empty).

    Raises:
        FrameError: If the symbols are complex.
        SizingError: If the symbol count does not match N or N-1.
    """
    n = require_subcarriers(n)
    values = np.asarray(_symbol_values(x))
    if np.iscomplexobj(values):
        raise FrameError("CRIP frames carry real-valued symbols only")
    expected = n if s0_loaded else n - 1
    if values.ndim == 0 or values.shape[-1] != expected:
        raise SizingError(
            f"CRIP frame of N={n} (s0 {'loaded' if s0_loaded else 'empty'}) needs "
            f"{expected} symbols, got {0 if values.ndim == 0 else values.shape[-1]}"
        )
    bins = np.zeros((*values.shape[:-1], n), dtype=np.complex128)
    bins[..., n - expected :] = values
    return FrequencyFrame(bins, FrameLayout.CRIP, n, s0_loaded=s0_loaded)


def build_frame(x: SymbolVector | ArrayLike, n: int, scheme: Scheme, s0_loaded: bool = True) -> FrequencyFrame:
    if scheme.layout is FrameLayout.HERMITIAN:
        return build_hermitian_frame(x, n)
    return build_crip_frame(x, n, s0_loaded)


# =============================================================================
# Rate arithmetic
# =============================================================================


@dataclass(frozen=True)
class FrameRate:
    bits_per_frame: int
    bitrate_bps: float


def frame_rate(
    scheme: Scheme | FrameLayout,
    n: int,
    m: int,
    s0_loaded: bool = True,
    bandwidth_hz: float = 100e6,
) -> FrameRate:
    """Peak error-free bits per frame and bitrate W * R / N (CP not counted).

    Hermitian: (N-2) log2 M.  CRIP: N log2 M, or (N-1) log2 M with s0 empty.
    """
    n = require_subcarriers(n)
    spec = default_modulation(scheme, m)
    bits = bits_per_frame(scheme, n, spec, s0_loaded)
    return FrameRate(bits_per_frame=bits, bitrate_bps=bandwidth_hz * bits / n)
