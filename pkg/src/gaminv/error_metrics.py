"""Absolute/relative invariant errors and reliable-point statistics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from gaminv.image_ops import ScalarField
from gaminv.invariants import InvariantMap

EPS_REF = 1e-3
THRESHOLDS = (5.0, 10.0, 20.0)


@dataclass
class ErrorReport:
    abs_err: ScalarField
    rel_err: ScalarField
    prp: dict[float, float] = field(default_factory=dict)

    @property
    def n_valid(self) -> int:
        """Pixels entering the reliable-point percentages."""
        return self.rel_err.n_valid

    @property
    def mean_abs(self) -> float:
        v = self.abs_err.values()
        return float(v.mean()) if v.size else float("nan")

    @property
    def median_abs(self) -> float:
        v = self.abs_err.values()
        return float(np.median(v)) if v.size else float("nan")


def _field(m) -> ScalarField:
    return m.values if isinstance(m, InvariantMap) else m


def absolute_error(a, b) -> ScalarField:
    """|a - b| on the intersection of the valid regions."""
    if isinstance(a, InvariantMap) and isinstance(b, InvariantMap) and a.kind != b.kind:
        raise ValueError(f"cannot compare invariant kinds {a.kind!r} and {b.kind!r}")
    fa, fb = _field(a), _field(b)
    if fa.shape != fb.shape:
        raise ValueError(f"map sizes differ: {fa.shape} vs {fb.shape}")
    valid = fa.valid & fb.valid
    return ScalarField(np.abs(fa.data - fb.data), max(fa.margin, fb.margin), valid)


def relative_error(abs_err: ScalarField, reference, eps_ref: float = EPS_REF) -> ScalarField:
    """Percent error ``100 * delta / |reference|``.

    Pixels with ``|reference| < eps_ref`` are marked invalid instead of
    producing huge or infinite ratios.
    """
    ref = _field(reference)
    if ref.shape != abs_err.shape:
        raise ValueError("reference and error map sizes differ")
    mag = np.abs(ref.data)
    valid = abs_err.valid & ref.valid & (mag >= eps_ref)
    rel = np.zeros(abs_err.shape)
    rel[valid] = 100.0 * abs_err.data[valid] / mag[valid]
    return ScalarField(rel, abs_err.margin, valid)


def reliable_points(rel_err: ScalarField, epsilon: float) -> tuple[np.ndarray, float]:
    """Mask of valid pixels with relative error <= epsilon, and their percentage."""
    valid = rel_err.valid
    rp = valid & (rel_err.data <= epsilon)
    n = int(valid.sum())
    return rp, (100.0 * int(rp.sum()) / n if n else 0.0)


def error_report(test, reference, thresholds=THRESHOLDS, eps_ref: float = EPS_REF) -> ErrorReport:
    """Full comparison of a gamma-corrected map against its uncorrected reference."""
    d = absolute_error(test, reference)
    rel = relative_error(d, reference, eps_ref)
    prp = {float(e): reliable_points(rel, e)[1] for e in thresholds}
    return ErrorReport(d, rel, prp)
