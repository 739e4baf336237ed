import numpy as np
import pytest

from ctxaug.compose import MaskedExample


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def demo_image(rng):
    return rng.integers(0, 256, size=(24, 24, 3)).astype(np.uint8)


@pytest.fixture
def demo_mask():
    mask = np.zeros((24, 24), dtype=np.uint8)
    mask[8:17, 7:16] = 1
    return mask


@pytest.fixture
def demo_example(demo_image, demo_mask):
    return MaskedExample(demo_image, demo_mask, label=2, source_id="demo0")


def masked_example(seed: int, size: int = 20, label: int = 0) -> MaskedExample:
    rng = np.random.default_rng(seed)
    img = rng.integers(0, 256, size=(size, size, 3)).astype(np.uint8)
    mask = np.zeros((size, size), dtype=np.uint8)
    r = max(size // 6, 1)
    lo, hi = 2 * r, size - 2 * r
    cy, cx = (rng.integers(lo, hi, size=2) if hi > lo else (size // 2, size // 2))
    mask[cy - r:cy + r + 1, cx - r:cx + r + 1] = 1
    return MaskedExample(img, mask, label=label, source_id=f"ex{seed}")
