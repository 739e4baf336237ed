"""Shared machinery for the patch-match infill: validity maps, vectorized
patch distances, pyramid construction, diffusion seeding, and patch voting.

Working images are float64 but always integer-valued (every color-producing
step rounds half-up).  Squared-difference sums over integer values are exact
in float64, so patch distances are identical no matter how the sum is
ordered -- that is what lets the compiled and pure-Python sweep kernels
produce bit-identical fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..imaging import round_half_up
from ..seeding import rand_u64_block

DIFFUSION_TOL = 0.5
DIFFUSION_MAX_ITERS = 4096


@dataclass
class NearestNeighborField:
    """Per-target-pixel best source offset and exact patch distance.

    Entries exist only at `targets` (patch fully in bounds and overlapping
    the hole); `target_mask` marks them in the (H, W) plane.
    """

    patch_size: int
    off_y: np.ndarray      # int32 (H, W)
    off_x: np.ndarray      # int32 (H, W)
    dist: np.ndarray       # float64 (H, W), +inf off-target
    targets: np.ndarray    # int32 (N, 2) row-major (y, x)
    target_mask: np.ndarray  # uint8 (H, W)

    @property
    def num_targets(self) -> int:
        return len(self.targets)

    def copy(self) -> "NearestNeighborField":
        return NearestNeighborField(
            self.patch_size, self.off_y.copy(), self.off_x.copy(),
            self.dist.copy(), self.targets.copy(), self.target_mask.copy())


def patch_maps(hole: np.ndarray, patch_size: int):
    """Classify patch centers.

    Returns (valid_src, target_mask, targets, sources): a center is a valid
    source when its window is fully in bounds and hole-free, and a target
    when the window is fully in bounds and overlaps the hole.
    """
    h, w = hole.shape
    r = patch_size // 2
    valid_src = np.zeros((h, w), dtype=np.uint8)
    target_mask = np.zeros((h, w), dtype=np.uint8)
    if h >= patch_size and w >= patch_size:
        window_holes = sliding_window_view(hole.astype(np.int32), (patch_size, patch_size)).sum(axis=(2, 3))
        inner_src = window_holes == 0
        inner_tgt = window_holes > 0
        valid_src[r:h - r, r:w - r] = inner_src
        target_mask[r:h - r, r:w - r] = inner_tgt
    targets = np.ascontiguousarray(np.argwhere(target_mask == 1), dtype=np.int32)
    sources = np.ascontiguousarray(np.argwhere(valid_src == 1), dtype=np.int32)
    return valid_src, target_mask, targets, sources


def patch_distances(img: np.ndarray, t_yx: np.ndarray, s_yx: np.ndarray, patch_size: int) -> np.ndarray:
    """Exact sum of squared channel differences for target/source center pairs."""
    if len(t_yx) == 0:
        return np.zeros(0, dtype=np.float64)
    r = patch_size // 2
    windows = sliding_window_view(img, (patch_size, patch_size), axis=(0, 1))
    a = windows[t_yx[:, 0] - r, t_yx[:, 1] - r]
    b = windows[s_yx[:, 0] - r, s_yx[:, 1] - r]
    d = a - b
    return np.einsum("ncij,ncij->n", d, d)


def random_init_field(img: np.ndarray, hole: np.ndarray, patch_size: int, seed: int) -> NearestNeighborField:
    """Uniform random valid source per target, with exact distances.

    Callers guarantee at least one valid source exists when targets do.
    """
    h, w = hole.shape
    _, target_mask, targets, sources = patch_maps(hole, patch_size)
    off_y = np.zeros((h, w), dtype=np.int32)
    off_x = np.zeros((h, w), dtype=np.int32)
    dist = np.full((h, w), np.inf, dtype=np.float64)
    n = len(targets)
    if n:
        idx = rand_u64_block(seed, 0, n) % np.uint64(len(sources))
        chosen = sources[idx.astype(np.int64)]
        ty, tx = targets[:, 0], targets[:, 1]
        off_y[ty, tx] = chosen[:, 0] - ty
        off_x[ty, tx] = chosen[:, 1] - tx
        dist[ty, tx] = patch_distances(img, targets, chosen, patch_size)
    return NearestNeighborField(patch_size, off_y, off_x, dist, targets, target_mask)


def search_radii(h: int, w: int, decay: float) -> np.ndarray:
    """Random-search radii: start at the max image dimension, decay per probe."""
    radii = []
    r = float(max(h, w))
    while r >= 1.0:
        radii.append(int(r))
        r *= decay
    return np.asarray(radii, dtype=np.int32)


def diffusion_seed(img: np.ndarray, hole: np.ndarray) -> np.ndarray:
    """Fill hole pixels by iterated 8-neighbor means (Jacobi) until the
    largest per-step change drops below half an intensity level."""
    out = img.astype(np.float64).copy()
    holes = hole == 1
    if not holes.any():
        return out
    known = ~holes
    if known.any():
        out[holes] = out[known].mean(axis=0)
    h, w, c = out.shape
    shifts = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)]
    ones = np.ones((h, w), dtype=np.float64)
    counts = np.zeros((h, w), dtype=np.float64)
    padded_cnt = np.zeros((h + 2, w + 2), dtype=np.float64)
    padded_cnt[1:h + 1, 1:w + 1] = ones
    for dy, dx in shifts:
        counts += padded_cnt[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
    counts = np.maximum(counts, 1.0)[..., None]
    padded = np.zeros((h + 2, w + 2, c), dtype=np.float64)
    for _ in range(DIFFUSION_MAX_ITERS):
        padded[1:h + 1, 1:w + 1] = out
        nbr_sum = np.zeros_like(out)
        for dy, dx in shifts:
            nbr_sum += padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
        new_vals = (nbr_sum / counts)[holes]
        delta = np.abs(new_vals - out[holes]).max()
        out[holes] = new_vals
        if delta < DIFFUSION_TOL:
            break
    out[holes] = round_half_up(out[holes])
    return out


def downsample(img: np.ndarray, hole: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """2x box downsample ignoring hole pixels; a coarse pixel is hole when any
    fine pixel in its block is.  Odd dimensions replicate the last row/col."""
    if img.shape[0] % 2:
        img = np.concatenate([img, img[-1:]], axis=0)
        hole = np.concatenate([hole, hole[-1:]], axis=0)
    if img.shape[1] % 2:
        img = np.concatenate([img, img[:, -1:]], axis=1)
        hole = np.concatenate([hole, hole[:, -1:]], axis=1)
    h, w, c = img.shape
    hc, wc = h // 2, w // 2
    blocks = img.reshape(hc, 2, wc, 2, c)
    keep = (hole == 0).astype(np.float64).reshape(hc, 2, wc, 2)
    val_sum = (blocks * keep[..., None]).sum(axis=(1, 3))
    keep_cnt = keep.sum(axis=(1, 3))
    coarse = np.zeros((hc, wc, c), dtype=np.float64)
    nonzero = keep_cnt > 0
    coarse[nonzero] = round_half_up(val_sum[nonzero] / keep_cnt[nonzero][:, None])
    hole_c = hole.reshape(hc, 2, wc, 2).max(axis=(1, 3)).astype(np.uint8)
    return coarse, hole_c


def upsample_colors(fine_img: np.ndarray, fine_hole: np.ndarray, coarse_img: np.ndarray) -> np.ndarray:
    """Seed fine-level hole pixels with the coarse estimate (pixel doubling)."""
    out = fine_img.astype(np.float64).copy()
    ys, xs = np.nonzero(fine_hole == 1)
    hc, wc = coarse_img.shape[:2]
    out[ys, xs] = coarse_img[np.minimum(ys // 2, hc - 1), np.minimum(xs // 2, wc - 1)]
    return out


def upsample_field(coarse: NearestNeighborField, img: np.ndarray, hole: np.ndarray,
                   patch_size: int) -> NearestNeighborField:
    """Double the coarse offsets onto the fine grid, repairing entries whose
    doubled source is invalid with a deterministic pick from the source list."""
    h, w = hole.shape
    r = patch_size // 2
    valid_src, target_mask, targets, sources = patch_maps(hole, patch_size)
    off_y = np.zeros((h, w), dtype=np.int32)
    off_x = np.zeros((h, w), dtype=np.int32)
    dist = np.full((h, w), np.inf, dtype=np.float64)
    if len(targets):
        ty, tx = targets[:, 0], targets[:, 1]
        qy = np.minimum(ty // 2, coarse.target_mask.shape[0] - 1)
        qx = np.minimum(tx // 2, coarse.target_mask.shape[1] - 1)
        has = coarse.target_mask[qy, qx] == 1
        sy = np.clip(ty + np.where(has, coarse.off_y[qy, qx] * 2, 0), r, h - 1 - r)
        sx = np.clip(tx + np.where(has, coarse.off_x[qy, qx] * 2, 0), r, w - 1 - r)
        ok = has & (valid_src[sy, sx] == 1)
        if not ok.all():
            fallback = (ty.astype(np.int64) * w + tx) % len(sources)
            sy = np.where(ok, sy, sources[fallback, 0])
            sx = np.where(ok, sx, sources[fallback, 1])
        off_y[ty, tx] = sy - ty
        off_x[ty, tx] = sx - tx
        dist[ty, tx] = patch_distances(img, targets, np.stack([sy, sx], axis=1), patch_size)
    return NearestNeighborField(patch_size, off_y, off_x, dist, targets, target_mask)


def vote(img: np.ndarray, hole: np.ndarray, field: NearestNeighborField) -> np.ndarray:
    """Replace hole pixels with the weighted average of all source-patch
    pixels mapped onto them; weight exp(-d / (2 sigma^2)), sigma = mean d."""
    out = img.astype(np.float64).copy()
    if field.num_targets == 0:
        return out
    h, w = hole.shape
    r = field.patch_size // 2
    ty, tx = field.targets[:, 0], field.targets[:, 1]
    d = field.dist[ty, tx]
    sigma = d.mean()
    denom = 2.0 * sigma * sigma
    weights = np.exp(-d / denom) if denom > 0 else np.ones_like(d)
    sy = ty + field.off_y[ty, tx]
    sx = tx + field.off_x[ty, tx]
    wsum = np.zeros((h, w), dtype=np.float64)
    csum = np.zeros(img.shape, dtype=np.float64)
    cnt = np.zeros((h, w), dtype=np.float64)
    usum = np.zeros(img.shape, dtype=np.float64)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            py, px = ty + dy, tx + dx
            keep = hole[py, px] == 1
            if not keep.any():
                continue
            kpy, kpx = py[keep], px[keep]
            src_px = img[sy[keep] + dy, sx[keep] + dx]
            kw = weights[keep]
            np.add.at(wsum, (kpy, kpx), kw)
            np.add.at(csum, (kpy, kpx), kw[:, None] * src_px)
            np.add.at(cnt, (kpy, kpx), 1.0)
            np.add.at(usum, (kpy, kpx), src_px)
    holes = hole == 1
    # Every hole pixel is covered by at least one target patch; the unweighted
    # accumulators only matter if every weight underflowed to zero.
    wsafe = np.where(wsum[holes] > 0, wsum[holes], 1.0)[:, None]
    weighted = np.where(wsum[holes][:, None] > 0,
                        csum[holes] / wsafe,
                        usum[holes] / cnt[holes][:, None])
    out[holes] = round_half_up(weighted)
    return out
