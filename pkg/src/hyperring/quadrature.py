"""Composite Simpson rules on uniform grids."""

from __future__ import annotations

import numpy as np


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Weights of the composite Simpson rule on ``n`` (odd) equispaced nodes."""
    if n < 3 or n % 2 == 0:
        raise ValueError(f"Simpson's rule needs an odd number of nodes >= 3, got {n}")
    w = np.empty(n)
    w[0::2] = 2.0
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (h / 3.0)


def simpson(values: np.ndarray, h: float, axis: int = -1):
    """Integrate samples along ``axis`` with the composite Simpson rule."""
    values = np.moveaxis(np.asarray(values), axis, -1)
    return values @ simpson_weights(values.shape[-1], h)


def simpson_with_error(values: np.ndarray, h: float, axis: int = -1):
    """Simpson integral plus a Richardson error estimate from the half grid.

    The number of nodes along ``axis`` must be ``4k + 1`` so that every
    other node forms a valid Simpson grid with step ``2h``.
    Returns ``(integral, abs_error_estimate)``.
    """
    values = np.moveaxis(np.asarray(values), axis, -1)
    n = values.shape[-1]
    if (n - 1) % 4:
        raise ValueError(f"need 4k+1 nodes for the error estimate, got {n}")
    fine = values @ simpson_weights(n, h)
    coarse = values[..., ::2] @ simpson_weights((n + 1) // 2, 2 * h)
    return fine, np.abs(fine - coarse) / 15.0


def odd_count(span: float, step: float, multiple: int = 2, minimum: int = 5) -> int:
    """Smallest ``multiple * k + 1`` node count covering ``span`` at ``step``."""
    k = int(np.ceil(span / step / multiple))
    return max(multiple * k + 1, minimum)
