# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled propagation + random-search sweep (hot kernel).

Must stay semantics-identical to ``_sweep_py.py``: same visit order, same
candidate order, same splitmix64 draws.  Distances are sums of squared
differences of integer-valued float64 pixels, hence exact, so the early
abort below cannot change any accept/reject decision.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "cython"

ctypedef unsigned long long u64

cdef u64 GOLDEN = 0x9E3779B97F4A7C15ULL


cdef inline u64 _avalanche(u64 z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline u64 _rand_u64(u64 seed, u64 counter) nogil:
    return _avalanche(seed + (counter + 1) * GOLDEN)


cdef inline double _patch_dist(double[:, :, ::1] img, Py_ssize_t ty, Py_ssize_t tx,
                               Py_ssize_t sy, Py_ssize_t sx, Py_ssize_t r,
                               double cutoff) nogil:
    cdef double acc = 0.0
    cdef double diff
    cdef Py_ssize_t dy, dx, c
    cdef Py_ssize_t channels = img.shape[2]
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            for c in range(channels):
                diff = img[ty + dy, tx + dx, c] - img[sy + dy, sx + dx, c]
                acc += diff * diff
        if acc >= cutoff:
            return acc
    return acc


def sweep(double[:, :, ::1] img, unsigned char[:, ::1] valid_src,
          unsigned char[:, ::1] target_mask, int[:, ::1] targets,
          int[:, ::1] off_y, int[:, ::1] off_x, double[:, ::1] dist,
          int patch_size, int parity, u64 seed, int[::1] radii):
    cdef Py_ssize_t h = valid_src.shape[0]
    cdef Py_ssize_t w = valid_src.shape[1]
    cdef Py_ssize_t r = patch_size // 2
    cdef Py_ssize_t n = targets.shape[0]
    cdef Py_ssize_t nprobes = radii.shape[0]
    cdef Py_ssize_t i, k, j, py, px, qy, qx, sy, sx, boy, box, rad
    cdef Py_ssize_t step = 1 if parity % 2 == 0 else -1
    cdef Py_ssize_t start = 0 if parity % 2 == 0 else n - 1
    cdef long long dy, dx, span
    cdef double best_d, d
    cdef u64 bits, base

    with nogil:
        for k in range(n):
            i = start + step * k
            py = targets[i, 0]
            px = targets[i, 1]
            best_d = dist[py, px]
            boy = off_y[py, px]
            box = off_x[py, px]
            for j in range(2):
                if parity % 2 == 0:
                    qy = py if j == 0 else py - 1
                    qx = px - 1 if j == 0 else px
                else:
                    qy = py if j == 0 else py + 1
                    qx = px + 1 if j == 0 else px
                if 0 <= qy < h and 0 <= qx < w and target_mask[qy, qx]:
                    sy = py + off_y[qy, qx]
                    sx = px + off_x[qy, qx]
                    if 0 <= sy < h and 0 <= sx < w and valid_src[sy, sx]:
                        d = _patch_dist(img, py, px, sy, sx, r, best_d)
                        if d < best_d:
                            best_d = d
                            boy = sy - py
                            box = sx - px
            base = (<u64> i) * (<u64> nprobes)
            for j in range(nprobes):
                rad = radii[j]
                bits = _rand_u64(seed, base + (<u64> j))
                span = 2 * rad + 1
                dy = <long long> ((bits >> 32) % (<u64> span)) - rad
                dx = <long long> ((bits & 0xFFFFFFFFULL) % (<u64> span)) - rad
                sy = py + boy + dy
                sx = px + box + dx
                if 0 <= sy < h and 0 <= sx < w and valid_src[sy, sx]:
                    d = _patch_dist(img, py, px, sy, sx, r, best_d)
                    if d < best_d:
                        best_d = d
                        boy = sy - py
                        box = sx - px
            off_y[py, px] = <int> boy
            off_x[py, px] = <int> box
            dist[py, px] = best_d
