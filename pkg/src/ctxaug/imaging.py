"""Pixel containers, color math, and global contrast normalization.

Images are numpy arrays throughout: an image is ``(H, W, 3) uint8``
(row-major, interleaved RGB), a mask is ``(H, W) uint8`` with values in
{0, 1} (1 = foreground), and a normalized image is ``(H, W, C) float64``.
The validators below enforce those invariants at module boundaries.
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DimensionMismatch, EmptyRegion, MalformedStream, WrongColorType

GCN_STD_FLOOR = 1e-8


def validate_image(img: np.ndarray) -> np.ndarray:
    if not isinstance(img, np.ndarray) or img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) image array, got {getattr(img, 'shape', type(img))}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image dimensions must be positive")
    if img.dtype != np.uint8:
        raise ValueError(f"expected uint8 image, got {img.dtype}")
    return img


def validate_mask(mask: np.ndarray, image: np.ndarray | None = None) -> np.ndarray:
    if not isinstance(mask, np.ndarray) or mask.ndim != 2:
        raise ValueError(f"expected (H, W) mask array, got {getattr(mask, 'shape', type(mask))}")
    if mask.dtype != np.uint8:
        raise ValueError(f"expected uint8 mask, got {mask.dtype}")
    if mask.size and mask.max() > 1:
        raise ValueError("mask values must be 0 or 1")
    if image is not None and mask.shape != image.shape[:2]:
        raise DimensionMismatch(f"mask {mask.shape} vs image {image.shape[:2]}")
    return mask


def round_half_up(x: np.ndarray | float) -> np.ndarray | float:
    """Round with ties going toward +inf (numpy's default is half-even)."""
    return np.floor(x + 0.5)


def gcn(img: np.ndarray) -> np.ndarray:
    """Global contrast normalization: scale to [0,1], subtract the per-image
    mean and divide by the population std (all pixels and channels jointly).

    Constant images come out all zero thanks to the std floor.
    """
    validate_image(img)
    x = img.astype(np.float64) / 255.0
    centered = x - x.mean()
    std = np.sqrt(np.mean(centered * centered))
    return centered / max(std, GCN_STD_FLOOR)


def mean_color(img: np.ndarray, region: np.ndarray, select: str = "foreground") -> tuple[int, int, int]:
    """Per-channel mean over the selected side of the mask, rounded half-up.

    `select` is "foreground" (mask == 1) or "background" (mask == 0).
    """
    validate_image(img)
    validate_mask(region, img)
    if select not in ("foreground", "background"):
        raise ValueError(f"select must be 'foreground' or 'background', got {select!r}")
    chosen = region == (1 if select == "foreground" else 0)
    if not chosen.any():
        raise EmptyRegion(f"no {select} pixels selected")
    means = img[chosen].astype(np.float64).mean(axis=0)
    r, g, b = (int(v) for v in round_half_up(means))
    return r, g, b


def decode_image(data: bytes) -> np.ndarray:
    """Decode an 8-bit RGB PNG to an (H, W, 3) uint8 array."""
    pil = _open_png(data)
    if pil.mode != "RGB":
        raise WrongColorType(f"expected RGB PNG, got mode {pil.mode}")
    return _pil_pixels(pil)


def encode_image(img: np.ndarray) -> bytes:
    validate_image(img)
    return _to_png(Image.fromarray(img, mode="RGB"))


def decode_mask(data: bytes) -> np.ndarray:
    """Decode an 8-bit grayscale PNG to a {0,1} mask (nonzero = foreground)."""
    pil = _open_png(data)
    if pil.mode != "L":
        raise WrongColorType(f"expected 8-bit grayscale PNG, got mode {pil.mode}")
    gray = _pil_pixels(pil)
    return (gray != 0).astype(np.uint8)


def encode_mask(mask: np.ndarray) -> bytes:
    validate_mask(mask)
    return _to_png(Image.fromarray(mask * np.uint8(255), mode="L"))


def _open_png(data: bytes) -> Image.Image:
    try:
        pil = Image.open(io.BytesIO(data), formats=["PNG"])
        pil.load()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise MalformedStream(str(exc)) from exc
    return pil


def _pil_pixels(pil: Image.Image) -> np.ndarray:
    arr = np.asarray(pil)
    if arr.dtype != np.uint8:
        raise WrongColorType(f"expected 8-bit samples, got {arr.dtype}")
    return arr.copy()


def _to_png(pil: Image.Image) -> bytes:
    buf = io.BytesIO()
    pil.save(buf, format="PNG")
    return buf.getvalue()
