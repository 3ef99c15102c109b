"""Vectorized numpy fallback for the compositing kernels.

Kept arithmetically identical to the compiled backend: same float64
intermediate math, same operation order, same label-assignment order.
"""

import numpy as np

from .geometry import WarpCoeffs


def paste(img, mask, patch, alpha, top, left):
    """Composite patch into img (and its support into mask) where alpha == 1.

    In-place on img/mask. Caller guarantees the patch fits.
    """
    h, w = alpha.shape
    sel = alpha != 0
    region = img[top : top + h, left : left + w]
    region[sel] = patch[sel]
    if mask is not None:
        mask[top : top + h, left : left + w][sel] = 1


def warp_patch(patch, alpha, coeffs: WarpCoeffs):
    """Inverse-map resample: bilinear for the patch, nearest for alpha.

    Pixels mapping outside the source are zero (patch) / background (alpha).
    """
    h, w = alpha.shape
    ys, xs = np.meshgrid(
        np.arange(coeffs.out_h, dtype=np.float64),
        np.arange(coeffs.out_w, dtype=np.float64),
        indexing="ij",
    )
    dx = xs - coeffs.cout_x
    dy = ys - coeffs.cout_y
    sx = coeffs.m00 * dx + coeffs.m01 * dy + coeffs.cin_x
    sy = coeffs.m10 * dx + coeffs.m11 * dy + coeffs.cin_y

    x0 = np.floor(sx)
    y0 = np.floor(sy)
    fx = (sx - x0)[..., None]
    fy = (sy - y0)[..., None]
    x0i = x0.astype(np.int64)
    y0i = y0.astype(np.int64)

    def gather(yi, xi):
        valid = (yi >= 0) & (yi < h) & (xi >= 0) & (xi < w)
        px = patch[np.clip(yi, 0, h - 1), np.clip(xi, 0, w - 1)].astype(np.float64)
        px[~valid] = 0.0
        return px

    p00 = gather(y0i, x0i)
    p10 = gather(y0i, x0i + 1)
    p01 = gather(y0i + 1, x0i)
    p11 = gather(y0i + 1, x0i + 1)
    out = (1.0 - fy) * ((1.0 - fx) * p00 + fx * p10) + fy * ((1.0 - fx) * p01 + fx * p11)
    out_patch = out.astype(np.float32)

    xn = np.floor(sx + 0.5).astype(np.int64)
    yn = np.floor(sy + 0.5).astype(np.int64)
    inside = (yn >= 0) & (yn < h) & (xn >= 0) & (xn < w)
    out_alpha = np.zeros((coeffs.out_h, coeffs.out_w), dtype=np.uint8)
    out_alpha[inside] = alpha[yn[inside], xn[inside]]
    return out_patch, out_alpha


def overlap_counts(a, b):
    """(intersection, |a|, |b|) pixel counts for two binary masks."""
    inter = int(np.count_nonzero((a != 0) & (b != 0)))
    return inter, int(np.count_nonzero(a)), int(np.count_nonzero(b))


def label_components(mask):
    """8-connected component labels, assigned in raster order of each
    component's first pixel. Returns (int32 label map, component count)."""
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    flat = mask.ravel()
    seeds = np.flatnonzero(flat)
    n = 0
    for seed in seeds:
        sy, sx = divmod(int(seed), w)
        if labels[sy, sx]:
            continue
        n += 1
        labels[sy, sx] = n
        stack = [(sy, sx)]
        while stack:
            y, x = stack.pop()
            for ny in (y - 1, y, y + 1):
                if ny < 0 or ny >= h:
                    continue
                for nx in (x - 1, x, x + 1):
                    if nx < 0 or nx >= w:
                        continue
                    if mask[ny, nx] and not labels[ny, nx]:
                        labels[ny, nx] = n
                        stack.append((ny, nx))
    return labels, n
