"""Scalar fields, direct convolution and rotationally symmetric operators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, prange
from scipy.ndimage import binary_erosion

from gaminv.kernels import DEFAULT_SIGMA, DEFAULT_SIZE, Kernel, gaussian_kernel


@dataclass(frozen=True)
class ScalarField:
    """A 2-d grid of doubles with an invalid border of ``margin`` pixels.

    ``mask`` optionally flags further invalid pixels inside the border
    (``False`` = invalid).  Invalid samples are stored as 0 so that every
    stored value is finite.
    """

    data: np.ndarray
    margin: int = 0
    mask: np.ndarray | None = None

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError(f"expected a 2-d array, got shape {data.shape}")
        if self.margin < 0:
            raise ValueError("margin must be non-negative")
        mask = None
        if self.mask is not None:
            mask = np.array(self.mask, dtype=bool)
            if mask.shape != data.shape:
                raise ValueError("mask shape does not match data")
        object.__setattr__(self, "mask", mask)
        valid = self._valid(data.shape, self.margin, mask)
        data[~valid] = 0.0
        if not np.all(np.isfinite(data)):
            raise ValueError("ScalarField samples must be finite")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        if mask is not None:
            mask.setflags(write=False)

    @staticmethod
    def _valid(shape, margin, mask):
        valid = np.zeros(shape, dtype=bool)
        h, w = shape
        if 2 * margin < h and 2 * margin < w:
            valid[margin:h - margin, margin:w - margin] = True
        if mask is not None:
            valid &= mask
        return valid

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def valid(self) -> np.ndarray:
        """Boolean map of valid pixels."""
        return self._valid(self.data.shape, self.margin, self.mask)

    @property
    def n_valid(self) -> int:
        return int(self.valid.sum())

    def values(self) -> np.ndarray:
        """1-d array of the valid samples (row-major order)."""
        return self.data[self.valid]

    def with_data(self, data, margin=None, mask=None) -> ScalarField:
        """New field with the same validity (or an explicitly given one)."""
        return ScalarField(data, self.margin if margin is None else margin,
                           self.mask if mask is None else mask)

    def rot90(self, k: int = 1) -> ScalarField:
        mask = None if self.mask is None else np.rot90(self.mask, k)
        return ScalarField(np.rot90(self.data, k), self.margin, mask)


def as_field(img) -> ScalarField:
    return img if isinstance(img, ScalarField) else ScalarField(img)


@njit(cache=True)
def _exact_sum(vals, n, partials):
    # correctly rounded sum (Shewchuk / math.fsum); independent of order and sign
    m = 0
    for k in range(n):
        x = vals[k]
        i = 0
        for j in range(m):
            y = partials[j]
            if abs(x) < abs(y):
                x, y = y, x
            hi = x + y
            lo = y - (hi - x)
            if lo != 0.0:
                partials[i] = lo
                i += 1
            x = hi
        partials[i] = x
        m = i + 1
    if m == 0:
        return 0.0
    m -= 1
    hi = partials[m]
    lo = 0.0
    while m > 0:
        x = hi
        m -= 1
        y = partials[m]
        hi = x + y
        lo = y - (hi - x)
        if lo != 0.0:
            break
    if m > 0 and ((lo < 0.0 and partials[m - 1] < 0.0) or (lo > 0.0 and partials[m - 1] > 0.0)):
        y = lo * 2.0
        x = hi + y
        if y == x - hi:
            hi = x
    return hi


@njit(parallel=True, cache=True)
def _convolve_exact(src, taps, out):
    H, W = src.shape
    k = taps.shape[0]
    h = (k - 1) // 2
    for r in prange(h, H - h):
        vals = np.empty(k * k)
        partials = np.empty(k * k + 64)
        for c in range(h, W - h):
            n = 0
            for a in range(k):
                for b in range(k):
                    t = taps[a, b]
                    if t != 0.0:
                        vals[n] = t * src[r - (a - h), c - (b - h)]
                        n += 1
            out[r, c] = _exact_sum(vals, n, partials)


def convolve(img, kern: Kernel) -> ScalarField:
    """Discrete convolution ``img (*) kern`` over the k x k support.

    Each output pixel is the correctly rounded sum of its k*k tap products,
    so the result does not depend on summation order or thread layout, and
    an integer-grid rotation of the input rotates the output bit-for-bit
    when the kernels rotate onto each other.  No boundary extension: the
    output margin grows by ``(k - 1) / 2``.
    """
    img = as_field(img)
    k = kern.size
    h = kern.half
    H, W = img.shape
    if H < k or W < k:
        raise ValueError(f"image {W}x{H} is smaller than the {k}x{k} kernel")
    out = np.zeros(img.shape)
    _convolve_exact(np.ascontiguousarray(img.data), np.ascontiguousarray(kern.taps), out)
    mask = None
    if img.mask is not None:
        mask = binary_erosion(img.mask, structure=np.ones((k, k), bool), border_value=0)
    return ScalarField(out, img.margin + h, mask)


class Jet:
    """Gaussian-derivative responses of one image, computed lazily and cached."""

    def __init__(self, img, sigma: float = DEFAULT_SIGMA, size: int = DEFAULT_SIZE):
        self.img = as_field(img)
        self.sigma = sigma
        self.size = size
        self._cache: dict[tuple[int, int], ScalarField] = {}

    def __getitem__(self, order) -> ScalarField:
        order = tuple(order)
        if order not in self._cache:
            kern = gaussian_kernel(self.sigma, self.size, order)
            self._cache[order] = convolve(self.img, kern)
        return self._cache[order]

    def d(self, order) -> np.ndarray:
        return self[order].data

    @property
    def margin(self) -> int:
        return self.img.margin + (self.size - 1) // 2

    def _field(self, data) -> ScalarField:
        return self[(1, 0)].with_data(data)

    # sums below are grouped so that a 90-degree rotation, which swaps x and y
    # responses (up to sign), leaves every rounding step unchanged

    def gradient_magnitude(self) -> ScalarField:
        x, y = self.d((1, 0)), self.d((0, 1))
        return self._field(np.sqrt(x * x + y * y))

    def laplacian(self) -> ScalarField:
        return self._field(self.d((2, 0)) + self.d((0, 2)))

    def quadratic_variation(self) -> ScalarField:
        xx, xy, yy = self.d((2, 0)), self.d((1, 1)), self.d((0, 2))
        return self._field(np.sqrt((xx * xx + yy * yy) + 2 * (xy * xy)))

    def cubic_variation(self) -> ScalarField:
        xxx, xxy = self.d((3, 0)), self.d((2, 1))
        xyy, yyy = self.d((1, 2)), self.d((0, 3))
        return self._field(np.sqrt((xxx * xxx + yyy * yyy) + 3 * (xxy * xxy + xyy * xyy)))


def gradient_magnitude(img, sigma: float = DEFAULT_SIGMA, size: int = DEFAULT_SIZE) -> ScalarField:
    """sqrt(I_x^2 + I_y^2) with Gaussian-derivative filters."""
    return Jet(img, sigma, size).gradient_magnitude()


def laplacian(img, sigma: float = DEFAULT_SIGMA, size: int = DEFAULT_SIZE) -> ScalarField:
    """I_xx + I_yy."""
    return Jet(img, sigma, size).laplacian()


def quadratic_variation(img, sigma: float = DEFAULT_SIGMA, size: int = DEFAULT_SIZE) -> ScalarField:
    """sqrt(I_xx^2 + 2 I_xy^2 + I_yy^2), the nonlinear alternative to the Laplacian."""
    return Jet(img, sigma, size).quadratic_variation()


def cubic_variation(img, sigma: float = DEFAULT_SIGMA, size: int = DEFAULT_SIZE) -> ScalarField:
    """sqrt(I_xxx^2 + 3 I_xxy^2 + 3 I_xyy^2 + I_yyy^2)."""
    return Jet(img, sigma, size).cubic_variation()
