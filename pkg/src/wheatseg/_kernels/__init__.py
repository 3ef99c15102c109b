"""Hot compositing kernels with a compiled core and a numpy fallback.

The compiled extension is preferred when built; set WHEATSEG_KERNELS=python
to force the fallback or WHEATSEG_KERNELS=c to require the extension.
"""

import os

from .geometry import WarpCoeffs, warp_coeffs, warp_output_shape

_requested = os.environ.get("WHEATSEG_KERNELS", "").lower()
if _requested not in ("", "c", "python"):
    raise ImportError(f"WHEATSEG_KERNELS must be 'c' or 'python', got {_requested!r}")

if _requested == "python":
    from . import _numpy as _impl

    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "c"
    except ImportError:
        if _requested == "c":
            raise
        from . import _numpy as _impl  # type: ignore[no-redef]

        BACKEND = "python"

paste = _impl.paste
warp_patch = _impl.warp_patch
overlap_counts = _impl.overlap_counts
label_components = _impl.label_components

__all__ = [
    "BACKEND",
    "WarpCoeffs",
    "warp_coeffs",
    "warp_output_shape",
    "paste",
    "warp_patch",
    "overlap_counts",
    "label_components",
]
