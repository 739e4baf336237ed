"""Hole filling by randomized nearest-neighbor-field patch correspondence.

The propagation/search sweep is the hot loop; a compiled Cython kernel is
used when available and a bit-identical pure-Python kernel otherwise.  Set
``CTXAUG_NNF_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from ..errors import NoValidSource
from ..imaging import validate_image, validate_mask
from ..seeding import mix64
from . import _sweep_py
from ._core import (
    NearestNeighborField,
    diffusion_seed,
    downsample,
    patch_distances,
    patch_maps,
    random_init_field,
    search_radii,
    upsample_colors,
    upsample_field,
    vote,
)

try:
    from . import _sweep as _compiled
except ImportError:
    _compiled = None

if os.environ.get("CTXAUG_NNF_BACKEND") == "python" or _compiled is None:
    _kernel = _sweep_py
else:
    _kernel = _compiled

BACKEND = _kernel.BACKEND_NAME

__all__ = [
    "BACKEND",
    "InpaintParams",
    "NearestNeighborField",
    "infill",
    "nnf_init",
    "nnf_iterate",
]


@dataclass(frozen=True)
class InpaintParams:
    patch_size: int = 7
    iterations: int = 5
    search_decay: float = 0.5
    pyramid_levels: int = 3
    rng_seed: int = 0

    def __post_init__(self):
        if self.patch_size < 1 or self.patch_size % 2 == 0:
            raise ValueError(f"patch_size must be odd and >= 1, got {self.patch_size}")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 < self.search_decay < 1.0:
            raise ValueError("search_decay must be in (0, 1)")
        if self.pyramid_levels < 1:
            raise ValueError("pyramid_levels must be >= 1")


def _as_work_image(image: np.ndarray) -> np.ndarray:
    if image.dtype == np.uint8:
        return image.astype(np.float64)
    return np.ascontiguousarray(image, dtype=np.float64)


def nnf_init(image: np.ndarray, hole: np.ndarray, params: InpaintParams,
             seed: int | None = None) -> NearestNeighborField:
    """Random valid source offset for every target patch, exact distances.

    A target is any fully in-bounds patch center whose window overlaps the
    hole.  Raises NoValidSource when targets exist but no fully hole-free
    source patch does.
    """
    work = _as_work_image(image)
    validate_mask(hole)
    if seed is None:
        seed = params.rng_seed
    _, _, targets, sources = patch_maps(hole, params.patch_size)
    if hole.any() and len(sources) == 0:
        raise NoValidSource("hole leaves no fully hole-free source patch")
    if hole.any() and len(targets) == 0:
        # Image smaller than the patch window: nothing can be matched.
        raise NoValidSource("no in-bounds target patch exists")
    return random_init_field(work, hole, params.patch_size, mix64(seed, "init"))


def nnf_iterate(field: NearestNeighborField, image: np.ndarray, hole: np.ndarray,
                params: InpaintParams, iteration_index: int,
                seed: int | None = None) -> NearestNeighborField:
    """One propagation + random-search sweep, in place.  Forward scan on even
    iteration indices, reverse on odd; per-pixel distance never increases."""
    work = _as_work_image(image)
    if seed is None:
        seed = params.rng_seed
    valid_src, _, _, _ = patch_maps(hole, params.patch_size)
    radii = search_radii(hole.shape[0], hole.shape[1], params.search_decay)
    _kernel.sweep(work, valid_src, field.target_mask, field.targets,
                  field.off_y, field.off_x, field.dist, params.patch_size,
                  iteration_index % 2, mix64(seed, "sweep", iteration_index), radii)
    return field


def infill(image: np.ndarray, hole: np.ndarray, params: InpaintParams | None = None) -> np.ndarray:
    """Fill hole pixels by coarse-to-fine patch voting; all other pixels are
    returned bit-exact.  Deterministic given (image, hole, params)."""
    validate_image(image)
    validate_mask(hole, image)
    if params is None:
        params = InpaintParams()
    out = image.copy()
    if not hole.any():
        return out

    # Finest-first pyramid, capped where patches stop fitting or sources
    # vanish.  Level 0 must be workable or the hole is unfillable.
    levels: list[tuple[np.ndarray, np.ndarray]] = [(image.astype(np.float64), hole)]
    _check_level(hole, params.patch_size)
    while len(levels) < params.pyramid_levels:
        img_c, hole_c = downsample(*levels[-1])
        if min(hole_c.shape) < params.patch_size:
            break
        _, _, targets_c, sources_c = patch_maps(hole_c, params.patch_size)
        if len(sources_c) == 0 or len(targets_c) == 0:
            break
        levels.append((img_c, hole_c))

    voted: np.ndarray | None = None
    for level in range(len(levels) - 1, -1, -1):
        img_l, hole_l = levels[level]
        if voted is None:
            working = diffusion_seed(img_l, hole_l)
            field = random_init_field(working, hole_l, params.patch_size,
                                      mix64(params.rng_seed, "init", level))
        else:
            working = upsample_colors(img_l, hole_l, voted)
            field = upsample_field(field, working, hole_l, params.patch_size)
        valid_src, _, _, _ = patch_maps(hole_l, params.patch_size)
        radii = search_radii(hole_l.shape[0], hole_l.shape[1], params.search_decay)
        for it in range(params.iterations):
            _kernel.sweep(working, valid_src, field.target_mask, field.targets,
                          field.off_y, field.off_x, field.dist, params.patch_size,
                          it % 2, mix64(params.rng_seed, "sweep", level, it), radii)
        voted = vote(working, hole_l, field)

    holes = hole == 1
    out[holes] = np.clip(voted[holes], 0, 255).astype(np.uint8)
    return out


def _check_level(hole: np.ndarray, patch_size: int) -> None:
    _, _, targets, sources = patch_maps(hole, patch_size)
    if len(sources) == 0:
        raise NoValidSource("hole leaves no fully hole-free source patch")
    if len(targets) == 0:
        raise NoValidSource("no in-bounds target patch exists")
