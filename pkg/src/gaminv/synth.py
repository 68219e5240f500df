"""Seeded synthetic test images standing in for a camera corpus.

Every generator returns a smooth, textured, strictly positive image in
``[1, 255]``.  With ``quantize=True`` (default) samples are rounded to
integers, which models 8-bit acquisition.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter

from gaminv.image_ops import ScalarField

KINDS = ("gaussians", "ripple", "checker-blur")
LO, HI = 1.0, 255.0


def _rescale(a, lo=LO, hi=HI):
    a = a - a.min()
    span = a.max()
    if span == 0:
        return np.full_like(a, (lo + hi) / 2)
    return lo + (hi - lo) * a / span


def _grid(w, h):
    y, x = np.mgrid[0:h, 0:w].astype(np.float64)
    return x, y


def gaussians(rng, w, h, n_blobs=None):
    """Sum of random isotropic Gaussian blobs of mixed sign and width."""
    x, y = _grid(w, h)
    n_blobs = n_blobs or max(8, (w * h) // 160)
    out = np.zeros((h, w))
    for _ in range(n_blobs):
        cx, cy = rng.uniform(0, w), rng.uniform(0, h)
        s = rng.uniform(1.5, 6.0)
        amp = rng.uniform(-1.0, 1.0)
        out += amp * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * s * s))
    return out


def ripple(rng, w, h):
    """Radial ``3 r sin(2 pi r) + 30`` pattern (r in units of a random
    wavelength), the 2-d analogue of the 1-d test signal, plus blob texture."""
    x, y = _grid(w, h)
    cx, cy = rng.uniform(0.3 * w, 0.7 * w), rng.uniform(0.3 * h, 0.7 * h)
    lam = rng.uniform(9.0, 14.0)
    r = np.hypot(x - cx, y - cy) / lam
    base = 3.0 * r * np.sin(2 * np.pi * r) + 30.0
    base = base / np.abs(base).max()
    return base + gaussians(rng, w, h)


def checker_blur(rng, w, h):
    """Rotated checkerboard with random cell size, blurred, plus blob texture."""
    x, y = _grid(w, h)
    cell = rng.uniform(6.0, 10.0)
    theta = rng.uniform(0, np.pi / 2)
    u = np.cos(theta) * x + np.sin(theta) * y + rng.uniform(0, cell)
    v = -np.sin(theta) * x + np.cos(theta) * y + rng.uniform(0, cell)
    board = ((np.floor(u / cell) + np.floor(v / cell)) % 2).astype(np.float64)
    board = gaussian_filter(board, rng.uniform(2.0, 3.0), mode="reflect")
    return board + gaussians(rng, w, h)


_GENERATORS = {"gaussians": gaussians, "ripple": ripple, "checker-blur": checker_blur}


def synth_image(kind: str = "gaussians", seed: int = 0, w: int = 128, h: int = 128,
                quantize: bool = True) -> ScalarField:
    """Deterministic synthetic test image of the given kind."""
    if kind not in _GENERATORS:
        raise ValueError(f"unknown synthetic image kind {kind!r}; choose from {KINDS}")
    if w < 8 or h < 8:
        raise ValueError("synthetic images must be at least 8x8")
    rng = np.random.default_rng(seed)
    img = _rescale(_GENERATORS[kind](rng, w, h))
    if quantize:
        img = np.clip(np.rint(img), LO, HI)
    return ScalarField(img)


def synth_corpus(w: int = 128, h: int = 128, seed: int = 0, quantize: bool = True) -> dict[str, ScalarField]:
    """One image of each kind, keyed by kind name."""
    return {k: synth_image(k, seed + i, w, h, quantize) for i, k in enumerate(KINDS)}
