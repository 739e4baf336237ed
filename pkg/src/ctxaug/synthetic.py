"""Procedurally generated toy datasets for trainer sanity checks and the
directional augmentation experiment (shape cues on class-correlated
textured backgrounds, with ground-truth masks)."""

from __future__ import annotations

import numpy as np

from .compose import MaskedExample
from .seeding import generator

BLOB_SIZE = 16
CONTEXT_SIZE = 24
CONTEXT_CLASSES = 5

_TINTS = np.array([
    [1.0, 0.75, 0.75],
    [0.75, 1.0, 0.75],
    [0.75, 0.75, 1.0],
    [1.0, 1.0, 0.7],
    [0.85, 0.7, 1.0],
])
_TINT_STRENGTH = 0.45


def make_blob_dataset(n: int, seed: int, size: int = BLOB_SIZE):
    """Two-class blobs: warm disks vs cool squares on gray noise.

    Returns (images list[(H,W,3) uint8], labels int array).
    """
    rng = generator(seed, "blobs")
    images, labels = [], []
    for i in range(n):
        label = i % 2
        img = rng.normal(128, 12, size=(size, size, 3))
        cy, cx = rng.uniform(5, size - 5, size=2)
        radius = rng.uniform(2.5, 4.0)
        yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
        if label == 0:
            inside = (yy - cy) ** 2 + (xx - cx) ** 2 <= radius ** 2
            color = np.array([200, 80, 60]) + rng.normal(0, 10, 3)
        else:
            inside = (np.abs(yy - cy) <= radius) & (np.abs(xx - cx) <= radius)
            color = np.array([60, 90, 200]) + rng.normal(0, 10, 3)
        img[inside] = color
        images.append(np.clip(img, 0, 255).astype(np.uint8))
        labels.append(label)
    return images, np.asarray(labels)


def _shape_mask(kind: int, size: int, cy: float, cx: float, r: float,
                rot: float = 0.0, stretch: float = 1.0) -> np.ndarray:
    """Class shapes (disk, square, wedge, plus, ring) at an arbitrary pose."""
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    dy, dx = yy - cy, xx - cx
    ct, st = np.cos(rot), np.sin(rot)
    ry = (ct * dy - st * dx) / stretch
    rx = (st * dy + ct * dx) * stretch
    if kind == 0:
        inside = ry ** 2 + rx ** 2 <= r ** 2
    elif kind == 1:
        inside = (np.abs(ry) <= r * 0.9) & (np.abs(rx) <= r * 0.9)
    elif kind == 2:
        inside = (ry >= -r) & (ry <= r) & (np.abs(rx) <= (r - ry) / 2.0)
    elif kind == 3:
        arm = max(r / 2.5, 1.0)
        inside = ((np.abs(ry) <= arm) & (np.abs(rx) <= r)) | \
                 ((np.abs(rx) <= arm) & (np.abs(ry) <= r))
    else:
        rr = ry ** 2 + rx ** 2
        inside = (rr <= r ** 2) & (rr >= (r * 0.45) ** 2)
    return inside.astype(np.uint8)


def _textured_background(label: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Sinusoidal stripes at a random orientation (a nuisance variable, so
    backgrounds vary a lot within a class) with a class-correlated tint."""
    theta = np.deg2rad(rng.uniform(0.0, 180.0))
    freq = rng.uniform(0.4, 0.9)
    phase = rng.uniform(0, 2 * np.pi)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    wave = np.sin((np.cos(theta) * xx + np.sin(theta) * yy) * freq + phase)
    base = 120 + 55 * wave
    tint = _TINT_STRENGTH * _TINTS[label % len(_TINTS)] + (1 - _TINT_STRENGTH) * np.ones(3)
    return base[..., None] * tint[None, None] + rng.normal(0, 8, (size, size, 3))


def make_context_examples(per_class: int, seed: int, size: int = CONTEXT_SIZE,
                          classes: int = CONTEXT_CLASSES) -> list[MaskedExample]:
    """Masked examples: one distinct foreground shape per class, at a random
    pose (rotation, stretch, size, position, color), over that class's
    textured background family."""
    examples = []
    for label in range(classes):
        for i in range(per_class):
            rng = generator(seed, "context", label, i)
            bg = _textured_background(label, size, rng)
            cy, cx = rng.uniform(size * 0.3, size * 0.7, size=2)
            r = rng.uniform(size * 0.12, size * 0.2)
            rot = rng.uniform(0, 2 * np.pi)
            stretch = rng.uniform(0.7, 1.4)
            mask = _shape_mask(label, size, cy, cx, r, rot, stretch)
            if mask.sum() < 6:
                mask = _shape_mask(label, size, cy, cx, max(r, 4.0), rot, 1.0)
            color = rng.uniform(40, 230, size=3)
            img = bg.copy()
            img[mask == 1] = color
            img = img + rng.normal(0, 8, img.shape)
            examples.append(MaskedExample(np.clip(img, 0, 255).astype(np.uint8),
                                          mask, label, f"c{label}i{i:03d}"))
    return examples
