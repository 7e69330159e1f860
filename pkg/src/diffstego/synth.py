"""Synthetic test images.

Piecewise-flat scenes with a little texture, standing in for the natural
or generated images the embedding scheme targets.  Uniform random noise is
deliberately not used as a stand-in: its prediction errors almost never
hit zero, leaving no room to embed anything.
"""

from __future__ import annotations

import numpy as np

from .images import PixelGrid


def blocky_secret(seed: int = 0, size: int = 64, levels: int = 6) -> PixelGrid:
    """Overlapping flat rectangles on a flat background."""
    rng = np.random.default_rng(seed)
    img = np.full((size, size), int(rng.integers(40, 200)), dtype=np.int16)
    for _ in range(levels):
        h = int(rng.integers(size // 6, size // 2))
        w = int(rng.integers(size // 6, size // 2))
        r = int(rng.integers(0, size - h))
        c = int(rng.integers(0, size - w))
        img[r : r + h, c : c + w] = int(rng.integers(20, 230))
    # sparse texture so the error histogram has occupied nonzero bins
    n = size * size // 20
    idx = rng.choice(size * size, size=n, replace=False)
    img.reshape(-1)[idx] += rng.integers(1, 4, size=n) * rng.choice([-1, 1], size=n)
    return PixelGrid(np.clip(img, 0, 255).astype(np.uint8))


def gradient_secret(seed: int = 0, size: int = 64) -> PixelGrid:
    """Coarse terraced gradient (flat 4-pixel steps)."""
    rng = np.random.default_rng(seed)
    lo = int(rng.integers(30, 90))
    hi = int(rng.integers(150, 220))
    ramp = np.linspace(lo, hi, size // 4)
    row = np.repeat(ramp, 4)[:size]
    img = np.tile(row, (size, 1))
    return PixelGrid(img.astype(np.uint8))
