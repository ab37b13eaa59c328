"""Shared argument checks.

Small helpers used by the frame, transform and channel layers so that every
module reports the same message for the same mistake.
"""

import numpy as np

from .errors import ConfigError, SizingError


def is_power_of_two(n: int) -> bool:
    return isinstance(n, (int, np.integer)) and n > 0 and (int(n) & (int(n) - 1)) == 0


def require_subcarriers(n: int, minimum: int = 4, what: str = "N") -> int:
    """Validate a subcarrier / transform length.

    Raises:
        SizingError: If n is not a power of two or is below ``minimum``.
    """
    if not is_power_of_two(n):
        raise SizingError(f"{what} must be a power of two, got {n!r}")
    if n < minimum:
        raise SizingError(f"{what} must be >= {minimum}, got {n}")
    return int(n)


def require_order(m: int) -> int:
    """Validate a per-dimension modulation depth M.

    Raises:
        ConfigError: If M is not a power of two >= 2.
    """
    if not is_power_of_two(m) or m < 2:
        raise ConfigError(f"Modulation order M must be a power of two >= 2, got {m!r}")
    return int(m)


def require_nonnegative(value: float, what: str) -> float:
    if not np.isfinite(value) or value < 0:
        raise ConfigError(f"{what} must be a finite value >= 0, got {value!r}")
    return float(value)
