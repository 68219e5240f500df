"""Per-pixel gamma invariants on images.

Two evaluation routes are provided:

``method="log"`` (default)
    Differentiate ``L = ln I`` with the Gaussian-derivative filters and form
    ``|grad L| / lap L`` (and ``|grad L| CV(L) / (lap L)^2``).  Gamma correction
    adds ``ln p`` to ``L`` and multiplies it by ``gamma``; the zero-sum
    derivative kernels remove the first and every operator returns the second
    as a common factor, so the ratios are invariant to rounding level.
``method="raw"``
    The direct intensity-domain expressions ``I |grad I| / (I lap I - |grad I|^2)``
    and the third-order analogue with ``CV(I)``.  Equivalent in the continuum
    for the second-order invariant, but only approximately invariant once
    the derivatives are discretized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gaminv.image_ops import Jet, ScalarField, as_field, convolve
from gaminv.kernels import DEFAULT_SIGMA, DEFAULT_SIZE, gaussian_kernel

WHITE = 255.0
EPS_IMG = 1e-9
TINY = 1e-12
KINDS = ("m12g", "m123g")


@dataclass(frozen=True)
class InvariantMap:
    """An invariant image plus the numerator/denominator it was formed from.

    ``conditioning`` is the intensity-domain second-order denominator
    ``I lap I - |grad I|^2`` (pole distance); invariance is only claimed where
    its magnitude is large.
    """

    values: ScalarField
    kind: str
    sigma_der: float
    sigma_pre: float
    numerator: np.ndarray
    denominator: np.ndarray
    conditioning: np.ndarray
    method: str = "log"

    @property
    def margin(self) -> int:
        return self.values.margin

    @property
    def data(self) -> np.ndarray:
        return self.values.data

    def well_conditioned(self, tau: float) -> np.ndarray:
        return self.values.valid & (np.abs(self.conditioning) > tau)


def tau_den(white: float = WHITE) -> float:
    """Default conditioning threshold 1e-4 * white^2."""
    return 1e-4 * white * white


def gamma_correct(img, gamma: float, white: float = WHITE, requantize: bool = False) -> ScalarField:
    """``p I^gamma`` with ``p = white^(1 - gamma)`` so that ``white`` is a fixed point.

    With ``requantize`` the result is rounded to integers in ``[0, white]``,
    i.e. gamma is applied after the 8-bit quantization of the input.
    """
    img = as_field(img)
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    vals = img.data[img.valid]
    if vals.size and vals.min() < 0:
        raise ValueError("gamma correction needs non-negative intensities")
    p = white ** (1.0 - gamma)
    out = p * np.power(np.maximum(img.data, 0.0), gamma)
    if requantize:
        out = np.clip(np.rint(out), 0, white)
    return img.with_data(out)


def prefilter(img, sigma_pre: float, size: int = DEFAULT_SIZE) -> ScalarField:
    """Gaussian smoothing with a unit-sum kernel; ``sigma_pre == 0`` is the identity."""
    img = as_field(img)
    if sigma_pre < 0:
        raise ValueError("sigma_pre must be non-negative")
    if sigma_pre == 0:
        return img
    return convolve(img, gaussian_kernel(sigma_pre, size, (0, 0)))


def positive(img: ScalarField, floor: float | None = None) -> ScalarField:
    """Intensities made strictly positive for the log-domain derivation.

    Integer-valued (8-bit) data is clamped to ``max(I, 1)`` by default; other
    data only has non-positive samples lifted to a tiny positive value.
    """
    data = img.data
    if floor is None:
        vals = data[img.valid]
        floor = 1.0 if np.array_equal(vals, np.round(vals)) else 0.0
    out = np.maximum(data, floor)
    return img.with_data(np.where(out > 0, out, TINY))


def modified_ratio(num, den, eps_rel: float = EPS_IMG) -> np.ndarray:
    """Elementwise three-case pole handling with a scale-relative zero test."""
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    eps = eps_rel * np.maximum(np.maximum(np.abs(num), np.abs(den)), 1.0)
    both_zero = (np.abs(num) < eps) & (np.abs(den) < eps)
    direct = np.abs(num) < np.abs(den)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.where(direct, num / den, den / num)
    out = np.where(both_zero, 0.0, out)
    return np.where(np.isfinite(out), out, 0.0)


def _prepare(img, sigma_pre, size, floor):
    img = prefilter(positive(as_field(img), floor), sigma_pre, size)
    pos = np.where(img.data > 0, img.data, TINY)
    return img, pos


def _finish(kind, jet_field, num, den, cond, sigma_der, sigma_pre, method):
    valid = jet_field.valid
    num = np.where(valid, num, 0.0)
    den = np.where(valid, den, 0.0)
    cond = np.where(valid, cond, 0.0)
    values = jet_field.with_data(modified_ratio(num, den))
    return InvariantMap(values, kind, float(sigma_der), float(sigma_pre), num, den, cond, method)


def invariant_m12g(img, sigma_der: float = DEFAULT_SIGMA, sigma_pre: float = 0.0,
                   size: int = DEFAULT_SIZE, method: str = "log",
                   floor: float | None = None) -> InvariantMap:
    """Gamma invariant from gradient magnitude and Laplacian, clamped to [-1, 1]."""
    img, pos = _prepare(img, sigma_pre, size, floor)
    if method == "log":
        jet = Jet(img.with_data(np.log(pos)), sigma_der, size)
        grad = jet.gradient_magnitude()
        lap = jet.laplacian().data
        num, den = grad.data, lap
        cond = pos * pos * lap
    elif method == "raw":
        jet = Jet(img.with_data(pos), sigma_der, size)
        grad = jet.gradient_magnitude()
        g = grad.data
        num = pos * g
        den = pos * jet.laplacian().data - g * g
        cond = den
    else:
        raise ValueError(f"unknown method {method!r}")
    return _finish("m12g", grad, num, den, cond, sigma_der, sigma_pre, method)


def invariant_m123g(img, sigma_der: float = DEFAULT_SIGMA, sigma_pre: float = 0.0,
                    size: int = DEFAULT_SIZE, method: str = "log",
                    floor: float | None = None) -> InvariantMap:
    """Gamma and scale invariant using gradient magnitude, Laplacian and cubic variation."""
    img, pos = _prepare(img, sigma_pre, size, floor)
    if method == "log":
        jet = Jet(img.with_data(np.log(pos)), sigma_der, size)
        grad = jet.gradient_magnitude()
        g1, g2, g3 = grad.data, jet.laplacian().data, jet.cubic_variation().data
        num = g1 * g3
        den = g2 * g2
        cond = pos * pos * g2
    elif method == "raw":
        jet = Jet(img.with_data(pos), sigma_der, size)
        grad = jet.gradient_magnitude()
        g = pos
        g1, g2, g3 = grad.data, jet.laplacian().data, jet.cubic_variation().data
        num = g * g * g1 * g3 - 3 * g * g1 * g1 * g2 + 2 * g1 ** 4
        den = g * g * g2 * g2 - 2 * g * g1 * g1 * g2 + g1 ** 4
        cond = g * g2 - g1 * g1
    else:
        raise ValueError(f"unknown method {method!r}")
    return _finish("m123g", grad, num, den, cond, sigma_der, sigma_pre, method)


def invariant_map(img, kind: str = "m12g", **kwargs) -> InvariantMap:
    if kind == "m12g":
        return invariant_m12g(img, **kwargs)
    if kind == "m123g":
        return invariant_m123g(img, **kwargs)
    raise ValueError(f"unknown invariant kind {kind!r}")
