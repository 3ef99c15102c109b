# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled compositing kernels.

Arithmetic mirrors the numpy fallback exactly (float64 intermediates,
same operation order) so both backends produce bit-identical buffers.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


def paste(cnp.float32_t[:, :, ::1] img, mask, cnp.float32_t[:, :, ::1] patch,
          cnp.uint8_t[:, ::1] alpha, Py_ssize_t top, Py_ssize_t left):
    cdef Py_ssize_t h = alpha.shape[0]
    cdef Py_ssize_t w = alpha.shape[1]
    cdef Py_ssize_t c = patch.shape[2]
    cdef Py_ssize_t y, x, k
    cdef cnp.uint8_t[:, ::1] mview
    cdef bint has_mask = mask is not None
    if has_mask:
        mview = mask
    with nogil:
        for y in range(h):
            for x in range(w):
                if alpha[y, x]:
                    for k in range(c):
                        img[top + y, left + x, k] = patch[y, x, k]
                    if has_mask:
                        mview[top + y, left + x] = 1


def warp_patch(cnp.float32_t[:, :, ::1] patch, cnp.uint8_t[:, ::1] alpha, coeffs):
    cdef Py_ssize_t h = alpha.shape[0]
    cdef Py_ssize_t w = alpha.shape[1]
    cdef Py_ssize_t c = patch.shape[2]
    cdef Py_ssize_t out_h = coeffs.out_h
    cdef Py_ssize_t out_w = coeffs.out_w
    cdef double m00 = coeffs.m00, m01 = coeffs.m01
    cdef double m10 = coeffs.m10, m11 = coeffs.m11
    cdef double cin_y = coeffs.cin_y, cin_x = coeffs.cin_x
    cdef double cout_y = coeffs.cout_y, cout_x = coeffs.cout_x

    out_patch_arr = np.zeros((out_h, out_w, c), dtype=np.float32)
    out_alpha_arr = np.zeros((out_h, out_w), dtype=np.uint8)
    cdef cnp.float32_t[:, :, ::1] out_patch = out_patch_arr
    cdef cnp.uint8_t[:, ::1] out_alpha = out_alpha_arr

    cdef Py_ssize_t y, x, k, x0, y0, xn, yn
    cdef double dx, dy, sx, sy, fx, fy, p00, p10, p01, p11
    with nogil:
        for y in range(out_h):
            dy = y - cout_y
            for x in range(out_w):
                dx = x - cout_x
                sx = m00 * dx + m01 * dy + cin_x
                sy = m10 * dx + m11 * dy + cin_y
                x0 = <Py_ssize_t>floor(sx)
                y0 = <Py_ssize_t>floor(sy)
                fx = sx - floor(sx)
                fy = sy - floor(sy)
                for k in range(c):
                    p00 = patch[y0, x0, k] if (0 <= y0 < h and 0 <= x0 < w) else 0.0
                    p10 = patch[y0, x0 + 1, k] if (0 <= y0 < h and 0 <= x0 + 1 < w) else 0.0
                    p01 = patch[y0 + 1, x0, k] if (0 <= y0 + 1 < h and 0 <= x0 < w) else 0.0
                    p11 = patch[y0 + 1, x0 + 1, k] if (0 <= y0 + 1 < h and 0 <= x0 + 1 < w) else 0.0
                    out_patch[y, x, k] = <cnp.float32_t>(
                        (1.0 - fy) * ((1.0 - fx) * p00 + fx * p10)
                        + fy * ((1.0 - fx) * p01 + fx * p11)
                    )
                xn = <Py_ssize_t>floor(sx + 0.5)
                yn = <Py_ssize_t>floor(sy + 0.5)
                if 0 <= yn < h and 0 <= xn < w:
                    out_alpha[y, x] = alpha[yn, xn]
    return out_patch_arr, out_alpha_arr


def overlap_counts(cnp.uint8_t[:, ::1] a, cnp.uint8_t[:, ::1] b):
    cdef Py_ssize_t h = a.shape[0]
    cdef Py_ssize_t w = a.shape[1]
    cdef Py_ssize_t y, x
    cdef long long inter = 0, ca = 0, cb = 0
    with nogil:
        for y in range(h):
            for x in range(w):
                if a[y, x]:
                    ca += 1
                    if b[y, x]:
                        inter += 1
                if b[y, x]:
                    cb += 1
    return int(inter), int(ca), int(cb)


def label_components(cnp.uint8_t[:, ::1] mask):
    cdef Py_ssize_t h = mask.shape[0]
    cdef Py_ssize_t w = mask.shape[1]
    labels_arr = np.zeros((h, w), dtype=np.int32)
    stack_arr = np.empty(h * w, dtype=np.int64)
    cdef cnp.int32_t[:, ::1] labels = labels_arr
    cdef cnp.int64_t[::1] stack = stack_arr
    cdef Py_ssize_t y, x, sy, sx, ny, nx, sp
    cdef cnp.int32_t n = 0
    with nogil:
        for y in range(h):
            for x in range(w):
                if mask[y, x] and labels[y, x] == 0:
                    n += 1
                    labels[y, x] = n
                    sp = 0
                    stack[sp] = y * w + x
                    sp += 1
                    while sp > 0:
                        sp -= 1
                        sy = stack[sp] // w
                        sx = stack[sp] % w
                        for ny in range(sy - 1, sy + 2):
                            if ny < 0 or ny >= h:
                                continue
                            for nx in range(sx - 1, sx + 2):
                                if nx < 0 or nx >= w:
                                    continue
                                if mask[ny, nx] and labels[ny, nx] == 0:
                                    labels[ny, nx] = n
                                    stack[sp] = ny * w + nx
                                    sp += 1
    return labels_arr, int(n)
