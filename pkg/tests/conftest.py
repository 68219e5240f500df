import numpy as np
import pytest

from gaminv.image_ops import ScalarField
from gaminv.synth import KINDS, synth_corpus, synth_image


def analytic_blobs(n, scale=1.0, seed=3, count=25):
    """Sum of Gaussian blobs sampled on an n x n grid with spacing 1/scale.

    Sampling the same continuous function at two rates gives an exact
    rescaled pair for scale-invariance probes.
    """
    rng = np.random.default_rng(seed)
    blobs = [(rng.uniform(0, 64), rng.uniform(0, 64), rng.uniform(5, 9), rng.uniform(-1, 1))
             for _ in range(count)]
    r = np.arange(n) / scale
    x, y = np.meshgrid(r, r, indexing="xy")
    f = np.full_like(x, 2.0)
    for cx, cy, s, a in blobs:
        f += a * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * s * s))
    return 60 * f


@pytest.fixture(scope="session")
def smooth_float_images():
    """Three smooth un-quantized 256 x 256 synthetic images keyed by kind."""
    return {k: synth_image(k, 10 + i, 256, 256, quantize=False) for i, k in enumerate(KINDS)}


@pytest.fixture(scope="session")
def corpus8():
    """The 128 x 128 8-bit synthetic corpus used by the table analogs."""
    return synth_corpus(128, 128, seed=0, quantize=True)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def field():
    return lambda a, margin=0: ScalarField(np.asarray(a, dtype=float), margin)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
