import numpy as np
import pytest

from gaminv.synth import KINDS, synth_corpus, synth_image


@pytest.mark.parametrize("kind", KINDS)
def test_deterministic_and_seeded(kind):
    a, b = synth_image(kind, 5, 64, 48), synth_image(kind, 5, 64, 48)
    assert np.array_equal(a.data, b.data)
    assert not np.array_equal(a.data, synth_image(kind, 6, 64, 48).data)
    assert a.shape == (48, 64)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("quantize", [True, False])
def test_range(kind, quantize):
    img = synth_image(kind, 1, quantize=quantize).data
    assert img.min() >= 1.0 and img.max() <= 255.0
    assert np.array_equal(img, np.rint(img)) == quantize


def test_corpus_and_errors():
    c = synth_corpus(32, 32, seed=3)
    assert list(c) == list(KINDS)
    assert np.array_equal(c["ripple"].data, synth_image("ripple", 4, 32, 32).data)
    with pytest.raises(ValueError):
        synth_image("stripes")
    with pytest.raises(ValueError):
        synth_image("ripple", 0, 4, 4)
