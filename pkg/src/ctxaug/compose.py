"""Foreground/background recombination: the five background setups.

A masked example is split into a foreground layer (original pixels plus
mask) and an infilled background; layers are then recombined by hard binary
compositing under one of five setups, each with its own labeling rule.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyMask, FullMask, MissingCategory
from .imaging import mean_color, validate_image, validate_mask
from .inpaint import InpaintParams, infill

GRAY_VALUE = 128


class BackgroundSetup(enum.Enum):
    ONLY_BG = "only-bg"
    GRAY_BG_WITH_FG = "gray"
    MEAN_BG_WITH_FG = "mean"
    SAME_CATEGORY_BG_WITH_FG = "same-category"
    ALL_CATEGORIES_BG_WITH_FG = "all"

    @classmethod
    def from_name(cls, name: str) -> "BackgroundSetup":
        for setup in cls:
            if setup.value == name:
                return setup
        raise ValueError(f"unknown setup {name!r}; choose from "
                         f"{[s.value for s in cls]}")


@dataclass
class MaskedExample:
    image: np.ndarray  # (H, W, 3) uint8
    mask: np.ndarray   # (H, W) uint8, 1 = foreground
    label: int
    source_id: str

    def __post_init__(self):
        validate_image(self.image)
        validate_mask(self.mask, self.image)


@dataclass
class ForegroundLayer:
    image: np.ndarray  # original pixels
    mask: np.ndarray   # 1 = object
    label: int
    source_id: str

    def __post_init__(self):
        validate_image(self.image)
        validate_mask(self.mask, self.image)
        if not self.mask.any():
            raise EmptyMask(f"foreground layer {self.source_id} has an empty mask")


@dataclass
class BackgroundImage:
    image: np.ndarray  # infilled
    label: int
    source_id: str

    def __post_init__(self):
        validate_image(self.image)


class PlanEntry(NamedTuple):
    fg_id: str | None
    bg_id: str | None
    label: int


@dataclass
class CompositePlan:
    """Lazily enumerable set of (foreground, background, label) pairings."""

    setup: BackgroundSetup
    fg_refs: tuple[tuple[str, int], ...]  # (source_id, label), fg-id order
    bg_refs: tuple[tuple[str, int], ...]

    def __len__(self) -> int:
        if self.setup is BackgroundSetup.ONLY_BG:
            return len(self.bg_refs)
        if self.setup in (BackgroundSetup.GRAY_BG_WITH_FG, BackgroundSetup.MEAN_BG_WITH_FG):
            return len(self.fg_refs)
        if self.setup is BackgroundSetup.ALL_CATEGORIES_BG_WITH_FG:
            return len(self.fg_refs) * len(self.bg_refs)
        per_class_bg: dict[int, int] = {}
        for _, label in self.bg_refs:
            per_class_bg[label] = per_class_bg.get(label, 0) + 1
        return sum(per_class_bg.get(label, 0) for _, label in self.fg_refs)

    def entries(self) -> Iterator[PlanEntry]:
        setup = self.setup
        if setup is BackgroundSetup.ONLY_BG:
            for bg_id, label in self.bg_refs:
                yield PlanEntry(None, bg_id, label)
            return
        if setup in (BackgroundSetup.GRAY_BG_WITH_FG, BackgroundSetup.MEAN_BG_WITH_FG):
            for fg_id, label in self.fg_refs:
                yield PlanEntry(fg_id, None, label)
            return
        if setup is BackgroundSetup.ALL_CATEGORIES_BG_WITH_FG:
            for fg_id, fg_label in self.fg_refs:
                for bg_id, _ in self.bg_refs:
                    yield PlanEntry(fg_id, bg_id, fg_label)
            return
        by_class: dict[int, list[str]] = {}
        for bg_id, label in self.bg_refs:
            by_class.setdefault(label, []).append(bg_id)
        for fg_id, fg_label in self.fg_refs:
            for bg_id in by_class[fg_label]:
                yield PlanEntry(fg_id, bg_id, fg_label)

    def __iter__(self) -> Iterator[PlanEntry]:
        return self.entries()


def extract_layers(example: MaskedExample,
                   params: InpaintParams | None = None) -> tuple[ForegroundLayer, BackgroundImage]:
    """Split a masked example: the background keeps original pixels outside
    the mask and infills underneath it; the foreground keeps everything."""
    if not example.mask.any():
        raise EmptyMask(f"{example.source_id}: mask selects no foreground")
    if example.mask.all():
        raise FullMask(f"{example.source_id}: mask covers the whole image")
    background = infill(example.image, example.mask, params)
    fg = ForegroundLayer(example.image, example.mask, example.label, example.source_id)
    bg = BackgroundImage(background, example.label, example.source_id)
    return fg, bg


def composite(fg: ForegroundLayer, bg: np.ndarray) -> np.ndarray:
    """Hard binary compositing: foreground pixels where mask is 1, else bg."""
    validate_image(bg)
    if bg.shape != fg.image.shape:
        raise DimensionMismatch(f"fg {fg.image.shape} vs bg {bg.shape}")
    out = bg.copy()
    on = fg.mask == 1
    out[on] = fg.image[on]
    return out


def uniform_background(shape: tuple[int, int], color: tuple[int, int, int]) -> np.ndarray:
    img = np.empty((shape[0], shape[1], 3), dtype=np.uint8)
    img[:] = np.asarray(color, dtype=np.uint8)
    return img


def gray_background(fg: ForegroundLayer) -> np.ndarray:
    """Foreground over a uniform mid-gray field."""
    gray = uniform_background(fg.mask.shape, (GRAY_VALUE, GRAY_VALUE, GRAY_VALUE))
    return composite(fg, gray)


def mean_background(fg: ForegroundLayer, original: np.ndarray) -> np.ndarray:
    """Foreground over the mean color of the original's background region."""
    color = mean_color(original, fg.mask, "background")
    return composite(fg, uniform_background(fg.mask.shape, color))


def _refs(items: Iterable) -> tuple[tuple[str, int], ...]:
    return tuple(sorted(((item.source_id, item.label) for item in items), key=lambda p: p[0]))


def enumerate_pairs(setup: BackgroundSetup, fgs: Sequence, bgs: Sequence) -> CompositePlan:
    """Enumerate every pairing the setup allows, fg id major / bg id minor.

    Labeling: SameCategory pairs equal-label items and keeps the shared
    label; AllCategories crosses everything and keeps the foreground label;
    OnlyBg keeps the background's label; Gray/Mean keep the foreground's.
    """
    fg_refs = _refs(fgs)
    bg_refs = _refs(bgs)
    if setup is BackgroundSetup.ONLY_BG:
        if not bg_refs:
            raise ValueError("OnlyBg plan needs at least one background")
        return CompositePlan(setup, (), bg_refs)
    if not fg_refs:
        raise ValueError(f"{setup.value} plan needs at least one foreground")
    if setup in (BackgroundSetup.GRAY_BG_WITH_FG, BackgroundSetup.MEAN_BG_WITH_FG):
        return CompositePlan(setup, fg_refs, ())
    if not bg_refs:
        raise ValueError(f"{setup.value} plan needs at least one background")
    if setup is BackgroundSetup.SAME_CATEGORY_BG_WITH_FG:
        bg_classes = {label for _, label in bg_refs}
        missing = sorted({label for _, label in fg_refs} - bg_classes)
        if missing:
            raise MissingCategory(f"no backgrounds for categories {missing}")
    return CompositePlan(setup, fg_refs, bg_refs)
