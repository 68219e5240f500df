"""Exhaustive template location with a normalized mean squared difference.

For a template ``T`` placed with its top-left corner at ``(x, y)`` over image
``I``::

    c = sum(((I - mean I) - (T - mean T))**2) / sqrt(sum((I - mean I)**2) * sum((T - mean T)**2))
    s = max(0, 1 - c)

Template sizes are given as ``tn x tm`` = width x height.  Every score,
whether evaluated singly or inside the exhaustive scan, goes through the same
compiled routine, so single evaluations and scans agree bit for bit.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numba
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from gaminv.image_ops import ScalarField, as_field

DEGENERATE_REL = 1e-12


@numba.njit(cache=True)
def _centered(patch):
    n = patch.size
    flat = patch.ravel()
    m = 0.0
    for i in range(n):
        m += flat[i]
    m /= n
    out = np.empty(n)
    e = 0.0
    for i in range(n):
        d = flat[i] - m
        out[i] = d
        e += d * d
    return out, e


@numba.njit(cache=True)
def _score(win_c, e_win, tmpl_c, e_tmpl):
    # both inputs already mean-centred; -1.0 flags an undefined denominator
    if e_win <= 0.0 or e_tmpl <= 0.0:
        return -1.0
    num = 0.0
    for i in range(tmpl_c.size):
        d = win_c[i] - tmpl_c[i]
        num += d * d
    c = num / np.sqrt(e_win * e_tmpl)
    s = 1.0 - c
    if s < 0.0:
        s = 0.0
    elif s > 1.0:
        s = 1.0
    return s


@numba.njit(cache=True)
def _prepare_windows(windows, threshold):
    # windows: (P, n) raw samples -> centred copies and energies
    P, n = windows.shape
    cent = np.empty((P, n))
    energy = np.empty(P)
    for p in range(P):
        c, e = _centered(windows[p])
        cent[p] = c
        energy[p] = e if e > threshold[p] else 0.0
    return cent, energy


@numba.njit(cache=True)
def _surface(tmpl_c, e_tmpl, win_c, e_win):
    out = np.empty(win_c.shape[0])
    for p in range(win_c.shape[0]):
        out[p] = max(_score(win_c[p], e_win[p], tmpl_c, e_tmpl), 0.0)
    return out


@numba.njit(cache=True, parallel=True)
def _scan(tmpl_c, e_tmpl, win_c, e_win, true_idx):
    # For each template: best window, its score, and whether it is the unique
    # maximum located at the template's own position.
    T = tmpl_c.shape[0]
    P = win_c.shape[0]
    best = np.full(T, -1, dtype=np.int64)
    best_s = np.zeros(T)
    correct = np.zeros(T, dtype=np.bool_)
    for t in numba.prange(T):
        if e_tmpl[t] <= 0.0:
            continue
        bs = -1.0
        bi = -1
        ties = 0
        for p in range(P):
            s = _score(win_c[p], e_win[p], tmpl_c[t], e_tmpl[t])
            if s < 0.0:
                s = 0.0
            if s > bs:
                bs = s
                bi = p
                ties = 1
            elif s == bs:
                ties += 1
        best[t] = bi
        best_s[t] = bs
        correct[t] = (bi == true_idx[t]) and ties == 1
    return best, best_s, correct


@dataclass
class MatchReport:
    """Outcome of the all-anchors template location experiment.

    ``cmcp_mask`` is ``True`` where the template cut at that top-left anchor
    was found back at exactly the same place as the unique maximum.
    """

    template_size: tuple[int, int]
    cmcp_mask: np.ndarray
    anchor_mask: np.ndarray
    degenerate_mask: np.ndarray
    best_x: np.ndarray
    best_y: np.ndarray
    best_score: np.ndarray
    correlation_surface: ScalarField | None = field(default=None)

    @property
    def n(self) -> int:
        """Number of valid, non-degenerate anchors."""
        return int((self.anchor_mask & ~self.degenerate_mask).sum())

    @property
    def n_degenerate(self) -> int:
        return int((self.anchor_mask & self.degenerate_mask).sum())

    @property
    def n_correct(self) -> int:
        return int(self.cmcp_mask.sum())

    @property
    def ca(self) -> float:
        """Correlation accuracy in percent."""
        return 100.0 * self.n_correct / self.n if self.n else 0.0

    def rows(self):
        """(anchor_x, anchor_y, best_x, best_y, score, is_cmcp) per scored anchor."""
        ys, xs = np.nonzero(self.anchor_mask & ~self.degenerate_mask)
        for y, x in zip(ys, xs):
            yield (int(x), int(y), int(self.best_x[y, x]), int(self.best_y[y, x]),
                   float(self.best_score[y, x]), bool(self.cmcp_mask[y, x]))


def anchor_mask(img: ScalarField, tn: int, tm: int, margin: int = 0) -> np.ndarray:
    """Top-left anchors whose ``tn x tm`` window lies inside the valid region.

    The mask has the image's shape; ``margin`` widens the excluded border.
    """
    valid = img.valid.copy()
    if margin:
        valid[:margin, :] = False
        valid[-margin:, :] = False
        valid[:, :margin] = False
        valid[:, -margin:] = False
    H, W = img.shape
    out = np.zeros((H, W), dtype=bool)
    if tm > H or tn > W:
        return out
    win = sliding_window_view(valid, (tm, tn)).all(axis=(2, 3))
    out[:win.shape[0], :win.shape[1]] = win
    return out


def _windows(data, tn, tm, mask):
    ys, xs = np.nonzero(mask)
    view = sliding_window_view(data, (tm, tn))
    return np.ascontiguousarray(view[ys, xs].reshape(len(ys), tm * tn)), ys, xs


def _threshold(raw):
    scale = np.maximum(np.abs(raw).max(axis=1), 1.0)
    return (DEGENERATE_REL * scale) ** 2 * raw.shape[1]


def correlation_score(img, tmpl, at: tuple[int, int]) -> float:
    """Score ``s`` in [0, 1] of ``tmpl`` placed at top-left ``at = (x, y)`` in ``img``.

    Returns 0.0 when the template or the covered subimage is constant; use
    :func:`is_degenerate` to tell that case apart.
    """
    img = as_field(img).data
    tmpl = np.asarray(tmpl.data if isinstance(tmpl, ScalarField) else tmpl, dtype=np.float64)
    tm, tn = tmpl.shape
    x, y = at
    if x < 0 or y < 0 or y + tm > img.shape[0] or x + tn > img.shape[1]:
        raise ValueError(f"template {tn}x{tm} at {at} does not fit the image")
    raw = np.stack([np.ascontiguousarray(img[y:y + tm, x:x + tn]).ravel(), tmpl.ravel()])
    cent, energy = _prepare_windows(raw, _threshold(raw))
    return max(_score(cent[0], energy[0], cent[1], energy[1]), 0.0)


def is_degenerate(patch) -> bool:
    raw = np.asarray(patch, dtype=np.float64).reshape(1, -1)
    _, energy = _prepare_windows(raw, _threshold(raw))
    return bool(energy[0] == 0.0)


def correlation_surface(img, tmpl, margin: int = 0) -> ScalarField:
    """Score of ``tmpl`` at every valid top-left anchor of ``img`` (0 elsewhere)."""
    img = as_field(img)
    tmpl = np.asarray(tmpl.data if isinstance(tmpl, ScalarField) else tmpl, dtype=np.float64)
    tm, tn = tmpl.shape
    mask = anchor_mask(img, tn, tm, margin)
    raw, ys, xs = _windows(img.data, tn, tm, mask)
    win_c, e_win = _prepare_windows(raw, _threshold(raw))
    traw = tmpl.reshape(1, -1)
    t_c, e_t = _prepare_windows(traw, _threshold(traw))
    out = np.zeros(img.shape)
    out[ys, xs] = _surface(t_c[0], e_t[0], win_c, e_win)
    return ScalarField(out, mask=mask)


def locate_template(img, tmpl, true_pos: tuple[int, int], margin: int = 0):
    """Exhaustive search for ``tmpl`` in ``img``.

    Returns ``(best_pos, is_cmcp, degenerate)``.  ``is_cmcp`` requires the
    maximum to be unique and located at ``true_pos``; a constant template is
    never correct.
    """
    img = as_field(img)
    tmpl = np.asarray(tmpl.data if isinstance(tmpl, ScalarField) else tmpl, dtype=np.float64)
    tm, tn = tmpl.shape
    mask = anchor_mask(img, tn, tm, margin)
    raw, ys, xs = _windows(img.data, tn, tm, mask)
    win_c, e_win = _prepare_windows(raw, _threshold(raw))
    traw = tmpl.reshape(1, -1)
    t_c, e_t = _prepare_windows(traw, _threshold(traw))
    tx, ty = true_pos
    hit = np.flatnonzero((xs == tx) & (ys == ty))
    true_idx = np.array([hit[0] if hit.size else -1], dtype=np.int64)
    best, _, correct = _scan(t_c, e_t, win_c, e_win, true_idx)
    if e_t[0] == 0.0:
        return None, False, True
    b = best[0]
    return (int(xs[b]), int(ys[b])), bool(correct[0]), False


def correlation_accuracy(source, target, tn: int = 6, tm: int = 8, margin: int = 0,
                         surface_at: tuple[int, int] | None = None) -> MatchReport:
    """Cut a ``tn x tm`` template at every valid anchor of ``source`` and locate it in ``target``.

    Anchors must be valid in both images.  Constant templates are excluded from
    the accuracy count and reported in ``degenerate_mask``.  ``surface_at``
    additionally records the full score surface for the template at that anchor.
    """
    source, target = as_field(source), as_field(target)
    if source.shape != target.shape:
        raise ValueError(f"source {source.shape} and target {target.shape} differ in size")
    mask = anchor_mask(source, tn, tm, margin) & anchor_mask(target, tn, tm, margin)
    traw, ys, xs = _windows(source.data, tn, tm, mask)
    wraw, _, _ = _windows(target.data, tn, tm, mask)
    t_c, e_t = _prepare_windows(traw, _threshold(traw))
    w_c, e_w = _prepare_windows(wraw, _threshold(wraw))
    true_idx = np.arange(len(ys), dtype=np.int64)
    best, best_s, correct = _scan(t_c, e_t, w_c, e_w, true_idx)

    shape = source.shape
    cmcp = np.zeros(shape, bool)
    degenerate = np.zeros(shape, bool)
    bx = np.full(shape, -1, dtype=np.int64)
    by = np.full(shape, -1, dtype=np.int64)
    bs = np.zeros(shape)
    cmcp[ys, xs] = correct
    degenerate[ys, xs] = e_t == 0.0
    ok = best >= 0
    bx[ys[ok], xs[ok]] = xs[best[ok]]
    by[ys[ok], xs[ok]] = ys[best[ok]]
    bs[ys, xs] = best_s

    surface = None
    if surface_at is not None:
        x, y = surface_at
        if not mask[y, x]:
            raise ValueError(f"surface anchor {surface_at} is not a valid anchor")
        surface = correlation_surface(target, source.data[y:y + tm, x:x + tn], margin)
        surface = ScalarField(surface.data, mask=mask)
    return MatchReport((tn, tm), cmcp, mask, degenerate, bx, by, bs, surface)


def apply_thread_cap() -> None:
    """Honour ``GAMINV_THREADS`` for the parallel anchor scan.

    Anchors are scanned independently, so results do not depend on the
    thread count.
    """
    v = os.environ.get("GAMINV_THREADS")
    if v:
        numba.set_num_threads(max(1, min(int(v), numba.config.NUMBA_NUM_THREADS)))
