"""Unitary DFT/IDFT and the transform operation-count model.

The Fourier matrix is F[k, n] = W_N^{kn} / sqrt(N) with W_N = exp(-j 2 pi / N),
so F F^H = I. ``idft`` applies F^H and ``dft`` applies F, both along the last
axis through numpy's FFT with ``norm="ortho"``.

The operation counts are a closed-form model of a split-radix style kernel,
not instrumentation of numpy's FFT:

    C1 = (N/2)(log2 N - 3) + 2
    C2 = (N/2)(3 log2 N - 5) + 4
"""

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike

from .errors import FrameError, SizingError
from .frames import FrequencyFrame
from .validation import require_subcarriers

logger = logging.getLogger(__name__)


class Domain(str, Enum):
    TIME = "time"
    FREQUENCY = "frequency"


@dataclass(frozen=True)
class SpectrumVector:
    """Length-N complex samples tagged with their domain."""

    values: np.ndarray
    domain: Domain

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128)
        if values.ndim == 0:
            raise SizingError("SpectrumVector needs at least one axis")
        require_subcarriers(values.shape[-1], minimum=2, what="Transform length")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "domain", Domain(self.domain))

    def __len__(self) -> int:
        return self.values.shape[-1]


def _as_array(v: SpectrumVector | ArrayLike) -> np.ndarray:
    arr = v.values if isinstance(v, SpectrumVector) else np.asarray(v)
    if arr.ndim == 0:
        raise SizingError("Transform input must be a sequence")
    require_subcarriers(arr.shape[-1], minimum=2, what="Transform length")
    return arr


def idft(freq: SpectrumVector | ArrayLike) -> SpectrumVector | np.ndarray:
    """F^H applied along the last axis.

    A SpectrumVector in gives a time-domain SpectrumVector out; a plain array in
    gives a plain complex array out.

    Raises:
        SizingError: If the length is not a power of two.
    """
    out = np.fft.ifft(_as_array(freq), axis=-1, norm="ortho")
    if isinstance(freq, SpectrumVector):
        if freq.domain is not Domain.FREQUENCY:
            logger.debug("idft applied to a %s-domain vector", freq.domain.value)
        return SpectrumVector(out, Domain.TIME)
    return out


def dft(time: SpectrumVector | ArrayLike) -> SpectrumVector | np.ndarray:
    """F applied along the last axis; inverse of :func:`idft`."""
    out = np.fft.fft(_as_array(time), axis=-1, norm="ortho")
    if isinstance(time, SpectrumVector):
        if time.domain is not Domain.TIME:
            logger.debug("dft applied to a %s-domain vector", time.domain.value)
        return SpectrumVector(out, Domain.FREQUENCY)
    return out


# =============================================================================
# Dense reference path
# =============================================================================


@dataclass
class DenseOpCounter:
    """Tally of complex operations spent on the dense matrix path (debug only)."""

    multiplications: int = 0
    additions: int = 0
    calls: int = field(default=0)

    def record(self, n: int, vectors: int) -> None:
        self.multiplications += vectors * n * n
        self.additions += vectors * n * (n - 1)
        self.calls += 1


def dft_matrix(n: int) -> np.ndarray:
    """Dense unitary Fourier matrix F (N x N)."""
    require_subcarriers(n, minimum=2, what="Transform length")
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def dense_idft(freq: ArrayLike, counter: DenseOpCounter | None = None) -> np.ndarray:
    """F^H v by explicit matrix product; O(N^2) reference for the fast path."""
    arr = _as_array(freq).astype(np.complex128)
    n = arr.shape[-1]
    out = arr @ dft_matrix(n).conj()  # F is symmetric, so v F^* == (F^H v^T)^T
    if counter is not None:
        counter.record(n, int(np.prod(arr.shape[:-1], dtype=np.int64)))
    return out


# =============================================================================
# Real / imaginary split of a real frame
# =============================================================================


def split_even_odd_parts(frame: FrequencyFrame | SpectrumVector | ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    """Real and imaginary parts (S_FR, S_FI) of the IDFT of a real frame.

    For real input S_FR is even (S_FR[N-n] = S_FR[n]) and S_FI is odd
    (S_FI[N-n] = -S_FI[n]); the DFT of S_FR is therefore purely real and the DFT
    of S_FI purely imaginary.

    Raises:
        FrameError: If the frame has a nonzero imaginary component.
    """
    if isinstance(frame, FrequencyFrame):
        bins = frame.bins
    elif isinstance(frame, SpectrumVector):
        bins = frame.values
    else:
        bins = np.asarray(frame)
    if np.iscomplexobj(bins) and np.any(bins.imag != 0):
        raise FrameError("split_even_odd_parts requires a real-valued frame")
    s_f = idft(np.real(bins))
    return s_f.real.copy(), s_f.imag.copy()


# =============================================================================
# Operation-count model
# =============================================================================


class TransformMethod(str, Enum):
    OCRIP = "ocrip"
    ECRIP = "ecrip"
    HERMITIAN = "hermitian"
    DCT = "dct"


@dataclass(frozen=True)
class OpCount:
    multiplications: int
    additions: int

    def __post_init__(self):
        if self.multiplications < 0 or self.additions < 0:
            raise ValueError(f"Operation counts must be >= 0, got {self}")

    def __add__(self, other: "OpCount") -> "OpCount":
        return OpCount(
            self.multiplications + other.multiplications,
            self.additions + other.additions,
        )


@dataclass(frozen=True)
class ReceiverExtras:
    """Receiver-side work beyond the transform itself."""

    subtractions: int = 0
    conjugations: int = 0


def _log2(n: int) -> int:
    return int(n).bit_length() - 1


def c1(n: int) -> int:
    n = require_subcarriers(n, minimum=8)
    return (n // 2) * (_log2(n) - 3) + 2


def c2(n: int) -> int:
    n = require_subcarriers(n, minimum=8)
    return (n // 2) * (3 * _log2(n) - 5) + 4


def op_count(method: TransformMethod | str, n: int) -> OpCount:
    """Real multiplications and additions of one transmit transform.

    Raises:
        SizingError: If N is not a power of two >= 8.
    """
    method = TransformMethod(method)
    m1, a1 = c1(n), c2(n)
    if method is TransformMethod.OCRIP:
        return OpCount(m1, a1)
    if method is TransformMethod.ECRIP:
        # extra N additions to combine the real and imaginary parts
        return OpCount(m1, a1 + n)
    if method is TransformMethod.HERMITIAN:
        return OpCount(2 * m1, 2 * a1 + 2 * n - 4)
    return OpCount(m1 + 3 * n // 2 - 2, a1 + 3 * n // 2 - 3)


def receiver_extras(method: TransformMethod | str, n: int) -> ReceiverExtras:
    """N subtractions (Re - Im) for CRIP; (N-2)/2 conjugations for Hermitian."""
    method = TransformMethod(method)
    n = require_subcarriers(n, minimum=8)
    if method in (TransformMethod.OCRIP, TransformMethod.ECRIP):
        return ReceiverExtras(subtractions=n)
    if method is TransformMethod.HERMITIAN:
        return ReceiverExtras(conjugations=(n - 2) // 2)
    return ReceiverExtras()
