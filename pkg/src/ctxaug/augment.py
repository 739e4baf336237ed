"""Whole-image 2D augmentations and their foreground-only counterparts.

Standard ops transform the whole frame; segmented ops transform only the
foreground layer (image + mask) and composite it back over the untouched
background.  Per-item randomness is derived from (master seed, item index,
op index) so items can be generated in any order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .compose import ForegroundLayer, composite
from .errors import AngleOutOfRange, DimensionMismatch, OffsetOutOfRange, ParamOutOfRange
from .imaging import round_half_up, validate_image, validate_mask
from .seeding import generator

STD_TRANSLATE_MAX = 20
SEG_TRANSLATE_OFFSETS = (-20, -15, -10, -5, 5, 10, 15, 20)
STD_ROTATE_MAX = 10.0
SEG_ROTATE_ANGLES = (-10.0, -5.0, 5.0, 10.0)


class Kind(enum.Enum):
    FLIP = "hflip"
    TRANSLATE = "translate"
    ROTATE = "rotate"
    HUE_SHIFT = "hue"
    CONTRAST = "contrast"
    GAUSSIAN_NOISE = "noise"


class Mode(enum.Enum):
    STANDARD = "std"
    SEGMENTED = "seg"


_GEOMETRIC = (Kind.FLIP, Kind.TRANSLATE, Kind.ROTATE)


@dataclass(frozen=True)
class AugmentOpSpec:
    kind: Kind
    mode: Mode = Mode.STANDARD
    params: dict | None = None  # None: sample fresh parameters per item

    def __post_init__(self):
        if self.mode is Mode.SEGMENTED and self.kind not in _GEOMETRIC:
            raise ValueError(f"segmented mode is only valid for {[k.value for k in _GEOMETRIC]}")

    def cli_name(self) -> str:
        return ("seg-" if self.mode is Mode.SEGMENTED else "") + self.kind.value


_CLI_OPS = {("seg-" if mode is Mode.SEGMENTED else "") + kind.value: (kind, mode)
            for kind in Kind for mode in Mode
            if not (mode is Mode.SEGMENTED and kind not in _GEOMETRIC)}


def parse_ops(spec: str) -> tuple[AugmentOpSpec, ...]:
    """Parse the CLI ops selection, e.g. "hflip,translate,seg-hflip"."""
    ops = []
    for name in filter(None, (s.strip() for s in spec.split(","))):
        if name not in _CLI_OPS:
            raise ValueError(f"unknown op {name!r}; choose from {sorted(_CLI_OPS)}")
        kind, mode = _CLI_OPS[name]
        ops.append(AugmentOpSpec(kind, mode))
    return tuple(ops)


@dataclass(frozen=True)
class AugmentPipeline:
    ops: tuple[AugmentOpSpec, ...] = ()
    master_seed: int = 0

    def __post_init__(self):
        # Segmented ops act on separate layers; once a standard op has merged
        # them there is nothing left to transform independently.
        merged = False
        for op in self.ops:
            if op.mode is Mode.STANDARD:
                merged = True
            elif merged:
                raise ValueError("segmented ops must precede standard ops in a pipeline")


# -- standard (whole-image) ops ---------------------------------------------

def hflip(image: np.ndarray) -> np.ndarray:
    validate_image(image)
    return image[:, ::-1].copy()


def translate(image: np.ndarray, dx: int, dy: int) -> np.ndarray:
    """Integer shift (+dx right, +dy down); vacated pixels replicate the edge."""
    validate_image(image)
    _check_std_offset(dx, dy)
    if dx == 0 and dy == 0:
        return image.copy()
    h, w = image.shape[:2]
    ys = np.clip(np.arange(h) - dy, 0, h - 1)
    xs = np.clip(np.arange(w) - dx, 0, w - 1)
    return image[np.ix_(ys, xs)].copy()


def rotate(image: np.ndarray, angle: float) -> np.ndarray:
    """Rotate about the image center, bilinear, edge-replicated sampling."""
    validate_image(image)
    if not -STD_ROTATE_MAX <= angle <= STD_ROTATE_MAX:
        raise AngleOutOfRange(f"standard rotation angle must be in [-10, 10], got {angle}")
    h, w = image.shape[:2]
    sy, sx = _inverse_rotation_grid(h, w, angle, (h - 1) / 2.0, (w - 1) / 2.0)
    sampled = _bilinear_clamped(image.astype(np.float64), sy, sx)
    return np.clip(round_half_up(sampled), 0, 255).astype(np.uint8)


# -- segmented (foreground-only) ops ----------------------------------------

def seg_hflip(fg: ForegroundLayer, bg: np.ndarray) -> np.ndarray:
    img, mask = _seg_hflip_arrays(fg.image, fg.mask)
    return _merge(img, mask, bg)


def seg_translate(fg: ForegroundLayer, bg: np.ndarray, dx: int, dy: int) -> np.ndarray:
    if dx not in SEG_TRANSLATE_OFFSETS or dy not in SEG_TRANSLATE_OFFSETS:
        raise OffsetOutOfRange(f"segmented offsets must come from {SEG_TRANSLATE_OFFSETS}")
    img, mask = _seg_translate_arrays(fg.image, fg.mask, dx, dy)
    return _merge(img, mask, bg)


def seg_rotate(fg: ForegroundLayer, bg: np.ndarray, angle: float) -> np.ndarray:
    if angle not in SEG_ROTATE_ANGLES:
        raise AngleOutOfRange(f"segmented angles must come from {SEG_ROTATE_ANGLES}")
    img, mask = _seg_rotate_arrays(fg.image, fg.mask, angle)
    return _merge(img, mask, bg)


def _seg_hflip_arrays(fg_img, mask):
    return fg_img[:, ::-1].copy(), mask[:, ::-1].copy()


def _seg_translate_arrays(fg_img, mask, dx, dy):
    h, w = mask.shape
    new_img = np.zeros_like(fg_img)
    new_mask = np.zeros_like(mask)
    ys = slice(max(dy, 0), h + min(dy, 0))
    xs = slice(max(dx, 0), w + min(dx, 0))
    ys_src = slice(max(-dy, 0), h + min(-dy, 0))
    xs_src = slice(max(-dx, 0), w + min(-dx, 0))
    new_img[ys, xs] = fg_img[ys_src, xs_src]
    new_mask[ys, xs] = mask[ys_src, xs_src]
    return new_img, new_mask


def _seg_rotate_arrays(fg_img, mask, angle):
    """Rotate the object about its mask centroid: mask coverage is bilinear
    with a >= 0.5 majority rule, colors are nearest-neighbor sampled."""
    ys, xs = np.nonzero(mask == 1)
    cy, cx = float(ys.mean()), float(xs.mean())
    h, w = mask.shape
    sy, sx = _inverse_rotation_grid(h, w, angle, cy, cx)
    coverage = _bilinear_zero(mask.astype(np.float64), sy, sx)
    new_mask = (coverage >= 0.5).astype(np.uint8)
    ny = np.clip(round_half_up(sy), 0, h - 1).astype(np.intp)
    nx = np.clip(round_half_up(sx), 0, w - 1).astype(np.intp)
    new_img = np.zeros_like(fg_img)
    on = new_mask == 1
    new_img[on] = fg_img[ny[on], nx[on]]
    return new_img, new_mask


def _merge(fg_img: np.ndarray, mask: np.ndarray, bg: np.ndarray) -> np.ndarray:
    validate_image(bg)
    if bg.shape != fg_img.shape:
        raise DimensionMismatch(f"fg {fg_img.shape} vs bg {bg.shape}")
    out = bg.copy()
    on = mask == 1
    out[on] = fg_img[on]
    return out


# -- photometric ops ---------------------------------------------------------

def hue_shift(image: np.ndarray, delta: float, region: np.ndarray | None = None) -> np.ndarray:
    """Add `delta` degrees to the HSV hue.  Deltas are normalized mod 360
    into [-180, 180) first, so 360 behaves as 0."""
    validate_image(image)
    delta = math.fmod(delta, 360.0)
    if delta >= 180.0:
        delta -= 360.0
    elif delta < -180.0:
        delta += 360.0
    rgb = image.astype(np.float64) / 255.0
    h, s, v = _rgb_to_hsv(rgb)
    h = np.mod(h + delta, 360.0)
    out = np.clip(round_half_up(_hsv_to_rgb(h, s, v) * 255.0), 0, 255).astype(np.uint8)
    return _apply_region(image, out, region)


def contrast(image: np.ndarray, factor: float, region: np.ndarray | None = None) -> np.ndarray:
    validate_image(image)
    if not 0.0 < factor <= 4.0:
        raise ParamOutOfRange(f"contrast factor must be in (0, 4], got {factor}")
    vals = (image.astype(np.float64) - 128.0) * factor + 128.0
    out = np.clip(round_half_up(vals), 0, 255).astype(np.uint8)
    return _apply_region(image, out, region)


def gaussian_noise(image: np.ndarray, sigma: float, rng: np.random.Generator,
                   region: np.ndarray | None = None) -> np.ndarray:
    validate_image(image)
    if sigma < 0:
        raise ParamOutOfRange(f"noise sigma must be >= 0, got {sigma}")
    vals = image.astype(np.float64) + rng.normal(0.0, sigma, size=image.shape)
    out = np.clip(round_half_up(vals), 0, 255).astype(np.uint8)
    return _apply_region(image, out, region)


def _apply_region(original, transformed, region):
    if region is None:
        return transformed
    validate_mask(region, original)
    out = original.copy()
    on = region == 1
    out[on] = transformed[on]
    return out


# -- parameter sampling and pipeline expansion -------------------------------

def sample_params(kind: Kind, mode: Mode, rng: np.random.Generator) -> dict:
    if kind is Kind.FLIP:
        return {"apply": bool(rng.integers(0, 2))}
    if kind is Kind.TRANSLATE:
        if mode is Mode.STANDARD:
            return {"dx": int(rng.integers(-STD_TRANSLATE_MAX, STD_TRANSLATE_MAX + 1)),
                    "dy": int(rng.integers(-STD_TRANSLATE_MAX, STD_TRANSLATE_MAX + 1))}
        return {"dx": int(rng.choice(SEG_TRANSLATE_OFFSETS)),
                "dy": int(rng.choice(SEG_TRANSLATE_OFFSETS))}
    if kind is Kind.ROTATE:
        if mode is Mode.STANDARD:
            return {"angle": float(rng.uniform(-STD_ROTATE_MAX, STD_ROTATE_MAX))}
        return {"angle": float(rng.choice(SEG_ROTATE_ANGLES))}
    if kind is Kind.HUE_SHIFT:
        return {"delta": float(rng.uniform(-180.0, 180.0))}
    if kind is Kind.CONTRAST:
        return {"factor": float(rng.uniform(0.5, 1.5))}
    return {"sigma": float(rng.uniform(0.0, 10.0))}


def describe_op(spec: AugmentOpSpec, params: dict) -> str:
    body = ";".join(f"{k}={params[k]!r}" for k in sorted(params))
    return f"{spec.kind.value}:{spec.mode.value}:{body}"


def apply_pipeline(pipeline: AugmentPipeline, fg: ForegroundLayer | None,
                   bg: np.ndarray, item_index: int) -> tuple[np.ndarray, list[str]]:
    """Run one plan item through the pipeline.  Returns the final image and
    the resolved op descriptions (for the manifest)."""
    fg_img = fg.image if fg is not None else None
    mask = fg.mask if fg is not None else None
    merged: np.ndarray | None = None
    applied: list[str] = []
    for op_index, spec in enumerate(pipeline.ops):
        rng = generator(pipeline.master_seed, item_index, op_index)
        params = spec.params if spec.params is not None else sample_params(spec.kind, spec.mode, rng)
        applied.append(describe_op(spec, params))
        if spec.mode is Mode.SEGMENTED:
            if fg_img is None:
                raise ValueError("segmented op in a plan without foregrounds")
            if spec.kind is Kind.FLIP:
                if params["apply"]:
                    fg_img, mask = _seg_hflip_arrays(fg_img, mask)
            elif spec.kind is Kind.TRANSLATE:
                if (params["dx"] not in SEG_TRANSLATE_OFFSETS
                        or params["dy"] not in SEG_TRANSLATE_OFFSETS):
                    raise OffsetOutOfRange(f"segmented offsets must come from {SEG_TRANSLATE_OFFSETS}")
                fg_img, mask = _seg_translate_arrays(fg_img, mask, params["dx"], params["dy"])
            else:
                if params["angle"] not in SEG_ROTATE_ANGLES:
                    raise AngleOutOfRange(f"segmented angles must come from {SEG_ROTATE_ANGLES}")
                if mask.any():
                    fg_img, mask = _seg_rotate_arrays(fg_img, mask, params["angle"])
            continue
        if merged is None:
            merged = _merge(fg_img, mask, bg) if fg_img is not None else bg.copy()
        if spec.kind is Kind.FLIP:
            if params["apply"]:
                merged = hflip(merged)
        elif spec.kind is Kind.TRANSLATE:
            merged = translate(merged, params["dx"], params["dy"])
        elif spec.kind is Kind.ROTATE:
            merged = rotate(merged, params["angle"])
        elif spec.kind is Kind.HUE_SHIFT:
            merged = hue_shift(merged, params["delta"])
        elif spec.kind is Kind.CONTRAST:
            merged = contrast(merged, params["factor"])
        else:
            merged = gaussian_noise(merged, params["sigma"], rng)
    if merged is None:
        merged = _merge(fg_img, mask, bg) if fg_img is not None else bg.copy()
    return merged, applied


# -- color space helpers -------------------------------------------------------

def _rgb_to_hsv(rgb: np.ndarray):
    """Vectorized RGB [0,1] -> (hue degrees [0,360), saturation, value)."""
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    delta = maxc - minc
    chromatic = delta > 0
    safe = np.where(chromatic, delta, 1.0)
    h = np.zeros_like(maxc)
    is_r = chromatic & (maxc == r)
    is_g = chromatic & ~is_r & (maxc == g)
    is_b = chromatic & ~is_r & ~is_g
    h = np.where(is_r, np.mod((g - b) / safe, 6.0), h)
    h = np.where(is_g, (b - r) / safe + 2.0, h)
    h = np.where(is_b, (r - g) / safe + 4.0, h)
    h *= 60.0
    s = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)
    return h, s, maxc


def _hsv_to_rgb(h: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
    hp = np.mod(h, 360.0) / 60.0
    i = np.floor(hp).astype(np.int64) % 6
    f = hp - np.floor(hp)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    sectors = np.stack([
        np.stack([v, t, p], axis=-1),
        np.stack([q, v, p], axis=-1),
        np.stack([p, v, t], axis=-1),
        np.stack([p, q, v], axis=-1),
        np.stack([t, p, v], axis=-1),
        np.stack([v, p, q], axis=-1),
    ])
    return np.take_along_axis(sectors, i[None, ..., None], axis=0)[0]


# -- geometry helpers ---------------------------------------------------------

def _check_std_offset(dx: int, dy: int) -> None:
    if not (-STD_TRANSLATE_MAX <= dx <= STD_TRANSLATE_MAX
            and -STD_TRANSLATE_MAX <= dy <= STD_TRANSLATE_MAX):
        raise OffsetOutOfRange(f"standard offsets must be in [-20, 20], got ({dx}, {dy})")
    if not (float(dx).is_integer() and float(dy).is_integer()):
        raise OffsetOutOfRange("standard offsets must be integers")


def _inverse_rotation_grid(h: int, w: int, angle: float, cy: float, cx: float):
    theta = math.radians(angle)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    dx = xx - cx
    dy = yy - cy
    sx = cx + cos_t * dx + sin_t * dy
    sy = cy - sin_t * dx + cos_t * dy
    return sy, sx


def _bilinear_clamped(values: np.ndarray, sy: np.ndarray, sx: np.ndarray) -> np.ndarray:
    h, w = values.shape[:2]
    y0 = np.floor(sy)
    x0 = np.floor(sx)
    fy = (sy - y0)[..., None] if values.ndim == 3 else sy - y0
    fx = (sx - x0)[..., None] if values.ndim == 3 else sx - x0
    y0c = np.clip(y0, 0, h - 1).astype(np.intp)
    y1c = np.clip(y0 + 1, 0, h - 1).astype(np.intp)
    x0c = np.clip(x0, 0, w - 1).astype(np.intp)
    x1c = np.clip(x0 + 1, 0, w - 1).astype(np.intp)
    top = (1 - fx) * values[y0c, x0c] + fx * values[y0c, x1c]
    bot = (1 - fx) * values[y1c, x0c] + fx * values[y1c, x1c]
    return (1 - fy) * top + fy * bot


def _bilinear_zero(values: np.ndarray, sy: np.ndarray, sx: np.ndarray) -> np.ndarray:
    """Bilinear sampling treating everything outside the frame as zero."""
    h, w = values.shape[:2]
    padded = np.zeros((h + 2, w + 2), dtype=np.float64)
    padded[1:h + 1, 1:w + 1] = values
    syp = np.clip(sy + 1.0, 0.0, h + 1.0)
    sxp = np.clip(sx + 1.0, 0.0, w + 1.0)
    y0 = np.floor(syp)
    x0 = np.floor(sxp)
    fy = syp - y0
    fx = sxp - x0
    y0 = y0.astype(np.intp)
    x0 = x0.astype(np.intp)
    y1 = np.minimum(y0 + 1, h + 1)
    x1 = np.minimum(x0 + 1, w + 1)
    top = (1 - fx) * padded[y0, x0] + fx * padded[y0, x1]
    bot = (1 - fx) * padded[y1, x0] + fx * padded[y1, x1]
    return (1 - fy) * top + fy * bot
