"""Pure-Python propagation + random-search sweep.

Semantics-identical twin of the compiled kernel in ``_sweep.pyx``: same
visit order, same candidate order, same counter-based RNG draws, and exact
integer-valued distances, so the two produce bit-identical fields.
"""

from __future__ import annotations

import numpy as np

from ..seeding import rand_u64

BACKEND_NAME = "python"


def _patch_dist(img: np.ndarray, ty: int, tx: int, sy: int, sx: int, r: int) -> float:
    a = img[ty - r:ty + r + 1, tx - r:tx + r + 1]
    b = img[sy - r:sy + r + 1, sx - r:sx + r + 1]
    d = a - b
    return float((d * d).sum())


def sweep(img: np.ndarray, valid_src: np.ndarray, target_mask: np.ndarray,
          targets: np.ndarray, off_y: np.ndarray, off_x: np.ndarray,
          dist: np.ndarray, patch_size: int, parity: int, seed: int,
          radii: np.ndarray) -> None:
    """One in-place scan: forward row-major when parity is even, reverse when
    odd; propagate from already-visited neighbors, then random-search around
    the current best with decaying radii."""
    h, w = valid_src.shape
    r = patch_size // 2
    n = len(targets)
    nprobes = len(radii)
    order = range(n) if parity % 2 == 0 else range(n - 1, -1, -1)
    for i in order:
        py = int(targets[i, 0])
        px = int(targets[i, 1])
        best_d = dist[py, px]
        boy = int(off_y[py, px])
        box = int(off_x[py, px])
        if parity % 2 == 0:
            nbrs = ((py, px - 1), (py - 1, px))
        else:
            nbrs = ((py, px + 1), (py + 1, px))
        for qy, qx in nbrs:
            if 0 <= qy < h and 0 <= qx < w and target_mask[qy, qx]:
                sy = py + int(off_y[qy, qx])
                sx = px + int(off_x[qy, qx])
                if 0 <= sy < h and 0 <= sx < w and valid_src[sy, sx]:
                    d = _patch_dist(img, py, px, sy, sx, r)
                    if d < best_d:
                        best_d, boy, box = d, sy - py, sx - px
        base = i * nprobes
        for j in range(nprobes):
            rad = int(radii[j])
            bits = rand_u64(seed, base + j)
            span = 2 * rad + 1
            dy = (bits >> 32) % span - rad
            dx = (bits & 0xFFFFFFFF) % span - rad
            sy = py + boy + dy
            sx = px + box + dx
            if 0 <= sy < h and 0 <= sx < w and valid_src[sy, sx]:
                d = _patch_dist(img, py, px, sy, sx, r)
                if d < best_d:
                    best_d, boy, box = d, sy - py, sx - px
        off_y[py, px] = boy
        off_x[py, px] = box
        dist[py, px] = best_d
