"""Scalar geometry for patch warping, shared by both kernel backends.

All transform bookkeeping (output size, inverse-map coefficients) happens
here in plain Python floats so the compiled and fallback backends consume
identical numbers and differ only in how they run the per-pixel loop.
"""

import math
from typing import NamedTuple


class WarpCoeffs(NamedTuple):
    """Inverse affine map from output pixel coords to source pixel coords.

    src_x = m00*(x - cout_x) + m01*(y - cout_y) + cin_x
    src_y = m10*(x - cout_x) + m11*(y - cout_y) + cin_y
    """

    out_h: int
    out_w: int
    m00: float
    m01: float
    m10: float
    m11: float
    cin_y: float
    cin_x: float
    cout_y: float
    cout_x: float


def warp_output_shape(h: int, w: int, scale: float, angle_deg: float) -> tuple[int, int]:
    """Bounding-box size of an h x w patch after scale + rotation."""
    rad = math.radians(angle_deg)
    c, s = abs(math.cos(rad)), abs(math.sin(rad))
    out_w = max(1, math.ceil(scale * (w * c + h * s) - 1e-9))
    out_h = max(1, math.ceil(scale * (w * s + h * c) - 1e-9))
    return out_h, out_w


def warp_coeffs(h: int, w: int, scale: float, angle_deg: float, flip: bool) -> WarpCoeffs:
    """Coefficients for warping a patch by optional horizontal flip, then
    uniform scale, then rotation about the patch center.

    The forward map on centered coordinates is R(angle) @ (scale*I) @ F;
    the returned matrix is its inverse, F @ (I/scale) @ R(-angle).
    """
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    out_h, out_w = warp_output_shape(h, w, scale, angle_deg)
    rad = math.radians(angle_deg)
    c, s = math.cos(rad), math.sin(rad)
    inv = 1.0 / scale
    # R(-angle) / scale
    m00, m01 = c * inv, s * inv
    m10, m11 = -s * inv, c * inv
    if flip:
        m00, m01 = -m00, -m01
    return WarpCoeffs(
        out_h=out_h,
        out_w=out_w,
        m00=m00,
        m01=m01,
        m10=m10,
        m11=m11,
        cin_y=(h - 1) / 2.0,
        cin_x=(w - 1) / 2.0,
        cout_y=(out_h - 1) / 2.0,
        cout_x=(out_w - 1) / 2.0,
    )
