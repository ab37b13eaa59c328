"""Exception hierarchy for crip-ofdm.

Everything raised on purpose by the toolkit derives from CripError, so the CLI
can map failures onto exit codes. Input problems also derive from ValueError.
"""

from collections.abc import Sequence


class CripError(Exception):
    """Base class for toolkit errors."""


class ConfigError(CripError, ValueError):
    """Invalid parameter or parameter combination (M not a power of two, bad scheme/modulation pair)."""


class SizingError(CripError, ValueError):
    """Length or size mismatch (bit count, frame length, CP length, tap count)."""


class FrameError(CripError, ValueError):
    """Frame content violates the layout invariant of its scheme."""


class DomainError(CripError, ValueError):
    """Numerically degenerate regime (e.g. empty middle region of a clip regime)."""


class SingularChannelError(CripError):
    """Channel eigenvalue too small for zero-forcing equalization."""

    def __init__(self, indices: Sequence[int], threshold: float):
        self.indices = list(indices)
        self.threshold = threshold
        shown = ", ".join(str(i) for i in self.indices[:8])
        more = "" if len(self.indices) <= 8 else f" (+{len(self.indices) - 8} more)"
        super().__init__(
            f"Singular channel: |lambda_k| < {threshold:g} at k = {shown}{more}"
        )
