import numpy as np
import pytest

from gaminv.image_ops import ScalarField
from gaminv.matching import (
    anchor_mask, correlation_accuracy, correlation_score, correlation_surface, is_degenerate,
    locate_template,
)


@pytest.fixture
def noise():
    return ScalarField(np.random.default_rng(7).uniform(0, 255, (30, 36)))


def test_self_score_is_one(noise):
    t = noise.data[5:13, 9:15]
    assert correlation_score(noise, t, (9, 5)) == 1.0


def test_offset_invariance(noise):
    t = noise.data[5:13, 9:15] + 37.5
    assert correlation_score(noise, t, (9, 5)) == pytest.approx(1.0, abs=1e-12)


def test_orthogonal_patterns_score_zero():
    a = np.array([[1.0, -1.0], [1.0, -1.0]])
    b = np.array([[1.0, 1.0], [-1.0, -1.0]])
    # centred, zero cross term, equal energy: c = 2E / sqrt(E E) = 2
    assert (a * b).sum() == 0 and (a * a).sum() == (b * b).sum()
    assert correlation_score(ScalarField(a + 10), b, (0, 0)) == 0.0


def test_score_formula_by_hand():
    rng = np.random.default_rng(2)
    i, t = rng.normal(size=(8, 6)), rng.normal(size=(8, 6))
    ic, tc = i - i.mean(), t - t.mean()
    c = ((ic - tc) ** 2).sum() / np.sqrt((ic ** 2).sum() * (tc ** 2).sum())
    assert correlation_score(ScalarField(i), t, (0, 0)) == pytest.approx(max(0.0, 1 - c), abs=1e-12)


def test_degenerate_template(noise):
    flat = np.full((8, 6), 3.0)
    assert is_degenerate(flat)
    assert not is_degenerate(noise.data[:8, :6])
    assert correlation_score(noise, flat, (0, 0)) == 0.0
    pos, ok, degenerate = locate_template(noise, flat, (0, 0))
    assert pos is None and not ok and degenerate


def test_template_outside_image(noise):
    with pytest.raises(ValueError):
        correlation_score(noise, np.ones((8, 6)), (32, 0))


def test_locate_self(noise):
    for x, y in [(0, 0), (10, 7), (30, 22)]:
        t = noise.data[y:y + 8, x:x + 6]
        pos, ok, deg = locate_template(noise, t, (x, y))
        assert pos == (x, y) and ok and not deg


def test_ties_count_as_failures():
    tile = np.random.default_rng(3).uniform(0, 9, (8, 6))
    img = ScalarField(np.hstack([tile, tile, tile]))
    pos, ok, _ = locate_template(img, tile, (6, 0))
    assert not ok
    rep = correlation_accuracy(img, img, 6, 8)
    assert rep.n_correct < rep.n


def test_anchor_mask_top_left():
    img = ScalarField(np.zeros((12, 10)), margin=1)
    m = anchor_mask(img, 6, 8)
    ys, xs = np.nonzero(m)
    assert (xs.min(), ys.min(), xs.max(), ys.max()) == (1, 1, 3, 3)
    assert list(zip(*np.nonzero(anchor_mask(img, 6, 8, margin=2)))) == [(2, 2)]
    assert not anchor_mask(img, 6, 8, margin=3).any()


def test_self_accuracy_is_100(noise):
    rep = correlation_accuracy(noise, noise, 6, 8)
    assert rep.n == (30 - 8 + 1) * (36 - 6 + 1)
    assert rep.ca == 100.0
    assert np.all(rep.best_score[rep.anchor_mask] == 1.0)


def test_degenerate_excluded_from_n():
    img = np.random.default_rng(4).uniform(0, 255, (24, 24))
    img[:10, :10] = 50.0
    f = ScalarField(img)
    rep = correlation_accuracy(f, f, 6, 8)
    assert rep.n_degenerate == (10 - 8 + 1) * (10 - 6 + 1)
    assert rep.n + rep.n_degenerate == rep.anchor_mask.sum()
    assert rep.ca == 100.0
    assert not rep.cmcp_mask[rep.degenerate_mask].any()


def test_scan_matches_direct_scores(noise):
    target = ScalarField(np.sqrt(noise.data) * 16)
    rep = correlation_accuracy(noise, target, 6, 8, surface_at=(10, 7))
    surf = rep.correlation_surface
    t = noise.data[7:15, 10:16]
    direct = np.array([[correlation_score(target, t, (x, y)) if rep.anchor_mask[y, x] else 0.0
                        for x in range(36)] for y in range(30)])
    assert np.array_equal(surf.data, direct)
    assert np.array_equal(correlation_surface(target, t).data, direct)
    best = np.unravel_index(np.argmax(direct), direct.shape)
    assert (rep.best_y[7, 10], rep.best_x[7, 10]) == best
    assert rep.best_score[7, 10] == direct.max()
    assert np.all((direct >= 0) & (direct <= 1))


def test_thread_count_does_not_change_results(noise, monkeypatch):
    import numba
    target = ScalarField(noise.data[::-1])
    ref = correlation_accuracy(noise, target, 6, 8)
    n0 = numba.get_num_threads()
    try:
        numba.set_num_threads(1)
        one = correlation_accuracy(noise, target, 6, 8)
    finally:
        numba.set_num_threads(n0)
    assert np.array_equal(ref.cmcp_mask, one.cmcp_mask)
    assert np.array_equal(ref.best_score, one.best_score)


def test_size_mismatch(noise):
    with pytest.raises(ValueError):
        correlation_accuracy(noise, ScalarField(np.ones((30, 35))))


def test_rows(noise):
    rep = correlation_accuracy(noise, noise, 6, 8, margin=10)
    rows = list(rep.rows())
    assert len(rows) == rep.n
    assert all(r[0] == r[2] and r[1] == r[3] and r[5] for r in rows)
