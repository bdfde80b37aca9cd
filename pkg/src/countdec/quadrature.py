"""Composite Gauss-Legendre rules."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(q: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the q-point rule on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(q)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def composite_rule(breaks, q: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Gauss nodes/weights on every panel [breaks[k], breaks[k+1]].

    ``breaks`` may be a 1-D array (one rule) or an array of shape (B, P+1),
    in which case the result has shape (B, P*q).
    """
    b = np.asarray(breaks, dtype=float)
    x, w = gauss_legendre(q)
    lo, hi = b[..., :-1, None], b[..., 1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) * 0.5 + half * x
    weights = half * w
    shape = b.shape[:-1] + (-1,)
    return nodes.reshape(shape), weights.reshape(shape)


def panel_breaks(a, b, panels: int) -> np.ndarray:
    """Equal-width panel boundaries; ``a``/``b`` may be arrays (broadcast)."""
    s = np.linspace(0.0, 1.0, panels + 1)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    return a + (b - a) * s
