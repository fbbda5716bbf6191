"""Sixth-order finite differences on uniform grids."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = ["fornberg_weights", "derivative"]


def fornberg_weights(x0: float, nodes, m: int) -> np.ndarray:
    """Weights of the m-th derivative at x0 from values at ``nodes`` (Fornberg's algorithm)."""
    nodes = np.asarray(nodes, dtype=float)
    n = nodes.size
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, nodes[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


@lru_cache(maxsize=None)
def _stencils(m: int):
    central = fornberg_weights(0.0, np.arange(-3, 4), m)
    width = 7 + (1 if m >= 2 else 0)
    left = [fornberg_weights(float(i), np.arange(width), m) for i in range(3)]
    right = [fornberg_weights(float(width - 1 - i), np.arange(width), m) for i in range(3)]
    return central, width, left, right


def derivative(f: np.ndarray, h: float, m: int = 1) -> np.ndarray:
    """m-th derivative (m = 1 or 2) along the last axis, sixth order throughout.

    Central 7-point stencils in the interior; the three points at each end
    use one-sided stencils of matching order.
    """
    f = np.asarray(f)
    n = f.shape[-1]
    central, width, left, right = _stencils(m)
    if n < width + 3:
        raise ValueError("grid too short for sixth-order stencils")
    out = np.zeros_like(f, dtype=np.result_type(f, float))
    for k, c in enumerate(central):
        out[..., 3:-3] += c * f[..., k : n - 6 + k]
    for i in range(3):
        out[..., i] = f[..., :width] @ left[i]
        out[..., n - 1 - i] = f[..., n - width :] @ right[i]
    return out / h**m
