"""Exact 1-d invariants on a closed-form test signal.

The signal family ``f(x) = a x sin(2 pi c x) + b`` comes with exact first to
third derivatives.  Gamma and scale wrappers propagate the derivatives by the
chain rule, so the invariants below can be checked against ground truth
without any discretization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

EPS_ZERO = 1e-12
WHITE = 255.0

# Derivative chains are evaluated in extended precision (80-bit on x86-64);
# near poles the invariants amplify float64 rounding past 1e-9 absolute.
WORK = np.longdouble


class PoleError(ZeroDivisionError):
    """An unmodified invariant was evaluated where its denominator vanishes."""


class AnalyticSignal:
    """Base class: subclasses implement ``derivatives``."""

    def derivatives(self, x):
        """Return ``(f, f', f'', f''')`` evaluated at ``x``."""
        raise NotImplementedError

    def __call__(self, x):
        return self.derivatives(x)[0]

    def gamma_corrected(self, gamma: float, p: float | None = None) -> GammaSignal:
        return GammaSignal(self, gamma, p)

    def scaled(self, alpha: float) -> ScaledSignal:
        return ScaledSignal(self, alpha)


@dataclass(frozen=True)
class SineRamp(AnalyticSignal):
    """f(x) = a x sin(2 pi c x) + b.  Defaults give 3 x sin(2 pi x) + 30."""

    a: float = 3.0
    b: float = 30.0
    c: float = 1.0

    def derivatives(self, x):
        x = np.asarray(x, dtype=WORK)
        a, b = WORK(self.a), WORK(self.b)
        w = 2 * WORK(np.pi) * WORK(self.c)
        s, co = np.sin(w * x), np.cos(w * x)
        f = a * x * s + b
        f1 = a * s + a * w * x * co
        f2 = 2 * a * w * co - a * w * w * x * s
        f3 = -3 * a * w * w * s - a * w ** 3 * x * co
        return f, f1, f2, f3


@dataclass(frozen=True)
class Constant(AnalyticSignal):
    value: float = 30.0

    def derivatives(self, x):
        x = np.asarray(x, dtype=WORK)
        z = np.zeros_like(x)
        return z + WORK(self.value), z, z.copy(), z.copy()


@dataclass(frozen=True)
class GammaSignal(AnalyticSignal):
    """p f(x)^gamma.  ``p`` defaults to ``255**(1 - gamma)`` (fixes 255)."""

    base: AnalyticSignal
    gamma: float
    p: float | None = None

    @property
    def scale(self) -> float:
        return WORK(WHITE) ** (1 - WORK(self.gamma)) if self.p is None else self.p

    def derivatives(self, x):
        f, f1, f2, f3 = self.base.derivatives(x)
        g, p = WORK(self.gamma), WORK(self.scale)
        fg1 = f ** (g - 1)
        fg2 = f ** (g - 2)
        fg3 = f ** (g - 3)
        h = p * f ** g
        h1 = p * g * fg1 * f1
        h2 = p * g * ((g - 1) * fg2 * f1 ** 2 + fg1 * f2)
        h3 = p * g * ((g - 1) * (g - 2) * fg3 * f1 ** 3
                      + 3 * (g - 1) * fg2 * f1 * f2
                      + fg1 * f3)
        return h, h1, h2, h3


@dataclass(frozen=True)
class ScaledSignal(AnalyticSignal):
    """g(alpha x); evaluating at ``x / alpha`` reproduces the base at ``x``."""

    base: AnalyticSignal
    alpha: float

    def derivatives(self, x):
        a = WORK(self.alpha)
        f, f1, f2, f3 = self.base.derivatives(a * np.asarray(x, dtype=WORK))
        return f, a * f1, a * a * f2, a ** 3 * f3


def _terms_12(f, x):
    g, g1, g2, _ = f.derivatives(x)
    return g * g1, g * g2 - g1 * g1


def _terms_123(f, x):
    g, g1, g2, g3 = f.derivatives(x)
    num = g * g * g1 * g3 - 3 * g * g1 * g1 * g2 + 2 * g1 ** 4
    den = g * g * g2 * g2 - 2 * g * g1 * g1 * g2 + g1 ** 4
    return num, den


def _ratio(num, den):
    if np.any(den == 0):
        raise PoleError("invariant denominator is zero")
    out = np.asarray(num / den, dtype=np.float64)
    return out if out.ndim else float(out)


def modified_ratio(num, den, eps=EPS_ZERO):
    """Three-case pole handling: 0 if both vanish, else the ratio with |.| <= 1."""
    num = np.asarray(num)
    den = np.asarray(den)
    both_zero = (np.abs(num) < eps) & (np.abs(den) < eps)
    direct = np.abs(num) < np.abs(den)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(direct, num / den, den / num)
    out = np.where(both_zero, 0.0, out).astype(np.float64)
    return out if out.ndim else float(out)


def theta_12g(f: AnalyticSignal, x):
    """Gamma invariant f f' / (f f'' - f'^2)."""
    return _ratio(*_terms_12(f, x))


def theta_m12g(f: AnalyticSignal, x, eps: float = EPS_ZERO):
    """Pole-free version of :func:`theta_12g`, bounded to [-1, 1]."""
    return modified_ratio(*_terms_12(f, x), eps=eps)


def theta_123g(f: AnalyticSignal, x):
    """Gamma and scale invariant from derivatives up to third order."""
    return _ratio(*_terms_123(f, x))


def theta_m123g(f: AnalyticSignal, x, eps: float = EPS_ZERO):
    """Pole-free version of :func:`theta_123g`, bounded to [-1, 1]."""
    return modified_ratio(*_terms_123(f, x), eps=eps)


INVARIANTS = {
    "12g": theta_12g,
    "m12g": theta_m12g,
    "123g": theta_123g,
    "m123g": theta_m123g,
}


def denominator_roots(f: AnalyticSignal, lo: float, hi: float, n: int = 20001) -> np.ndarray:
    """Roots of f f'' - f'^2 on [lo, hi], bracketed by sign changes and refined.

    These are the poles of both invariants (the third-order denominator is the
    square of this expression).
    """
    def den(x):
        return _terms_12(f, x)[1]

    xs = np.linspace(lo, hi, n)
    d = den(xs)
    roots = [xs[i] for i in np.flatnonzero(d == 0)]
    for i in np.flatnonzero(d[:-1] * d[1:] < 0):
        roots.append(brentq(lambda t: float(den(t)), xs[i], xs[i + 1], xtol=1e-15))
    return np.sort(np.array(roots, dtype=np.float64))


def pole_free_grid(f: AnalyticSignal, lo: float, hi: float, n: int, radius: float = 1e-3) -> np.ndarray:
    """Uniform grid of ``n`` points with pole neighbourhoods of ``radius`` removed."""
    xs = np.linspace(lo, hi, n)
    roots = denominator_roots(f, lo - radius, hi + radius)
    if roots.size == 0:
        return xs
    dist = np.min(np.abs(xs[:, None] - roots[None, :]), axis=1)
    return xs[dist > radius]
