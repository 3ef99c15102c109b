"""Compare the compiled kernel backend against the numpy fallback.

Run as a script:

    python3 benchmarks/bench_kernels.py [--repeats 200] [--size 256]

Each hot kernel is timed on identical inputs under both backends and the
results are printed side by side with the speedup. Both backends are
loaded in subprocesses so WHEATSEG_KERNELS is honored cleanly.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

WORKLOADS = ("paste", "warp_patch", "overlap_counts", "label_components")


def run_workloads(repeats: int, size: int) -> dict[str, float]:
    import numpy as np

    from wheatseg import _kernels

    rng = np.random.default_rng(0)
    img = rng.random((size, size, 3), dtype=np.float32)
    mask = np.zeros((size, size), dtype=np.uint8)
    patch = rng.random((size // 4, size // 4, 3), dtype=np.float32)
    alpha = (rng.random((size // 4, size // 4)) < 0.6).astype(np.uint8)
    mask_a = (rng.random((size, size)) < 0.4).astype(np.uint8)
    mask_b = (rng.random((size, size)) < 0.4).astype(np.uint8)
    blobby = (rng.random((size, size)) < 0.45).astype(np.uint8)
    coeffs = _kernels.warp_coeffs(patch.shape[0], patch.shape[1], 1.3, 37.0, True)

    def timed(fn) -> float:
        fn()  # warm up
        start = time.perf_counter()
        for _ in range(repeats):
            fn()
        return (time.perf_counter() - start) / repeats

    return {
        "backend": _kernels.BACKEND,
        "paste": timed(lambda: _kernels.paste(img.copy(), mask.copy(), patch, alpha, 8, 8)),
        "warp_patch": timed(lambda: _kernels.warp_patch(patch, alpha, coeffs)),
        "overlap_counts": timed(lambda: _kernels.overlap_counts(mask_a, mask_b)),
        "label_components": timed(lambda: _kernels.label_components(blobby)),
    }


def run_backend(backend: str, repeats: int, size: int) -> dict[str, float]:
    env = os.environ.copy()
    env["WHEATSEG_KERNELS"] = backend
    code = (
        "import json, sys\n"
        f"sys.path.insert(0, {os.path.dirname(os.path.abspath(__file__))!r})\n"
        "from bench_kernels import run_workloads\n"
        f"print(json.dumps(run_workloads({repeats}, {size})))\n"
    )
    proc = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=200, help="timed iterations per kernel")
    parser.add_argument("--size", type=int, default=256, help="square image side in pixels")
    args = parser.parse_args()

    results = {}
    for backend in ("c", "python"):
        try:
            results[backend] = run_backend(backend, args.repeats, args.size)
        except subprocess.CalledProcessError as exc:
            print(f"backend {backend!r} unavailable:\n{exc.stderr}", file=sys.stderr)
            if backend == "python":
                return 1

    print(f"{args.repeats} repeats at {args.size}x{args.size}\n")
    header = f"{'kernel':<18}{'compiled':>12}{'numpy':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for kernel in WORKLOADS:
        py = results["python"][kernel]
        if "c" in results:
            c = results["c"][kernel]
            print(f"{kernel:<18}{c * 1e6:>10.1f}us{py * 1e6:>10.1f}us{py / c:>9.1f}x")
        else:
            print(f"{kernel:<18}{'n/a':>12}{py * 1e6:>10.1f}us{'':>10}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
