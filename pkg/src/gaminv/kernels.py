"""Sampled 2-d Gaussian and Gaussian-derivative kernels up to third order."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_SIGMA = 1.0
DEFAULT_SIZE = 7

# All partial-derivative orders (dx, dy) with 1 <= dx + dy <= 3, in the
# usual display order G_x, G_y, G_xx, G_xy, G_yy, G_xxx, G_xxy, G_xyy, G_yyy.
DERIVATIVE_ORDERS = (
    (1, 0), (0, 1),
    (2, 0), (1, 1), (0, 2),
    (3, 0), (2, 1), (1, 2), (0, 3),
)

ORDER_NAMES = {
    (0, 0): "G",
    (1, 0): "Gx", (0, 1): "Gy",
    (2, 0): "Gxx", (1, 1): "Gxy", (0, 2): "Gyy",
    (3, 0): "Gxxx", (2, 1): "Gxxy", (1, 2): "Gxyy", (0, 3): "Gyyy",
}


@dataclass(frozen=True)
class Kernel:
    """A k x k filter with its anchor at the center tap.

    ``taps[row, col]`` holds the value at offset ``(x, y) = (col - h, row - h)``
    with ``h = (k - 1) // 2``, so x runs along columns.
    """

    taps: np.ndarray
    sigma: float
    order: tuple[int, int]

    def __post_init__(self):
        taps = np.array(self.taps, dtype=np.float64)
        if taps.ndim != 2 or taps.shape[0] != taps.shape[1] or taps.shape[0] % 2 == 0:
            raise ValueError(f"kernel taps must be a square odd-sized grid, got {taps.shape}")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def size(self) -> int:
        return self.taps.shape[0]

    @property
    def half(self) -> int:
        return (self.size - 1) // 2

    @property
    def name(self) -> str:
        return ORDER_NAMES[self.order]

    def offsets(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer (x, y) offset grids matching ``taps``."""
        r = np.arange(-self.half, self.half + 1, dtype=np.float64)
        return np.meshgrid(r, r, indexing="xy")


def _polynomial_factor(x, y, sigma, order):
    # closed-form partials of the Gaussian, written as factor * G
    s2 = sigma * sigma
    s4 = s2 * s2
    s6 = s4 * s2
    dx, dy = order
    if order == (0, 0):
        return np.ones_like(x)
    if order == (1, 0):
        return -x / s2
    if order == (0, 1):
        return -y / s2
    if order == (2, 0):
        return (x * x - s2) / s4
    if order == (1, 1):
        return x * y / s4
    if order == (0, 2):
        return (y * y - s2) / s4
    if order == (3, 0):
        return (3 * s2 * x - x ** 3) / s6
    if order == (2, 1):
        return (s2 * y - x * x * y) / s6
    if order == (1, 2):
        return (s2 * x - x * y * y) / s6
    if order == (0, 3):
        return (3 * s2 * y - y ** 3) / s6
    raise ValueError(f"unsupported derivative order {(dx, dy)}")


def gaussian_2d(x, y, sigma):
    """Continuous zero-mean isotropic 2-d Gaussian."""
    return np.exp(-(x * x + y * y) / (2.0 * sigma * sigma)) / (2.0 * np.pi * sigma * sigma)


def sampled_taps(sigma: float, size: int, order: tuple[int, int]) -> np.ndarray:
    """Raw point samples of the closed-form kernel, no normalization."""
    _check_args(sigma, size, order)
    h = (size - 1) // 2
    r = np.arange(-h, h + 1, dtype=np.float64)
    x, y = np.meshgrid(r, r, indexing="xy")
    return _polynomial_factor(x, y, sigma, tuple(order)) * gaussian_2d(x, y, sigma)


def annihilate_lower_orders(taps: np.ndarray, degree: int) -> np.ndarray:
    """Remove the kernel's response to every polynomial of total degree < ``degree``.

    Least-squares projection of the taps off the monomials ``x^a y^b`` with
    ``a + b < degree``.  The continuous Gaussian derivative of that order has
    zero response to such polynomials; the truncated samples do not (e.g. the
    7x7 ``Gxx`` at sigma 1 sums to about -4e-3, ``Gxxx`` leaks about 6% of
    the first derivative).  The monomials removed share the kernel's parity,
    so symmetry patterns survive tap-exactly.
    """
    if degree <= 0:
        return taps
    h = (taps.shape[0] - 1) // 2
    r = np.arange(-h, h + 1, dtype=np.float64)
    x, y = np.meshgrid(r, r, indexing="xy")
    basis = np.stack([(x ** a * y ** b).ravel()
                      for a in range(degree) for b in range(degree - a)], axis=1)
    coef, *_ = np.linalg.lstsq(basis, taps.ravel(), rcond=None)
    return taps - (basis @ coef).reshape(taps.shape)


def gaussian_kernel(sigma: float = DEFAULT_SIGMA, size: int = DEFAULT_SIZE,
                    order: tuple[int, int] = (0, 0), annihilate: bool = True) -> Kernel:
    """Point-sampled Gaussian (derivative) kernel.

    The smoothing kernel (order ``(0, 0)``) is rescaled to unit sum.  Derivative
    kernels are never rescaled; with ``annihilate`` (default) their response
    to lower-degree polynomials is projected out, see
    :func:`annihilate_lower_orders`.
    """
    order = tuple(order)
    if order[1] > order[0]:
        # exact transpose of the mirrored order, so that 90-degree rotations
        # map kernels onto each other tap-for-tap
        k = gaussian_kernel(sigma, size, order[::-1], annihilate)
        return Kernel(taps=k.taps.T, sigma=k.sigma, order=order)
    taps = sampled_taps(sigma, size, order)
    if order == (0, 0):
        taps = taps / taps.sum()
    elif annihilate:
        taps = _symmetrize(annihilate_lower_orders(taps, sum(order)), order)
    return Kernel(taps=taps, sigma=float(sigma), order=order)


def _symmetrize(taps, order):
    # lstsq leaves ~1e-18 asymmetry; restore the exact parity of the closed form
    sx = -1.0 if order[0] % 2 else 1.0
    sy = -1.0 if order[1] % 2 else 1.0
    t = (taps + sx * taps[:, ::-1]) / 2
    t = (t + sy * t[::-1, :]) / 2
    if order[0] == order[1]:
        t = (t + t.T) / 2
    return t


def derivative_bank(sigma: float = DEFAULT_SIGMA, size: int = DEFAULT_SIZE,
                    annihilate: bool = True) -> dict[tuple[int, int], Kernel]:
    """All nine derivative kernels keyed by order."""
    return {o: gaussian_kernel(sigma, size, o, annihilate=annihilate) for o in DERIVATIVE_ORDERS}


def _check_args(sigma, size, order):
    if not (sigma > 0 and np.isfinite(sigma)):
        raise ValueError(f"sigma must be positive, got {sigma}")
    if int(size) != size or size < 3 or size % 2 == 0:
        raise ValueError(f"kernel size must be an odd integer >= 3, got {size}")
    dx, dy = order
    if dx < 0 or dy < 0 or dx + dy > 3:
        raise ValueError(f"derivative order must satisfy 0 <= dx + dy <= 3, got {order}")
