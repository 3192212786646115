"""Compare the compiled kernel core against the numpy fallback.

    python benchmarks/bench_kernels.py [--size 224] [--repeat 5]

Each kernel runs on identical inputs through both backends; the script
prints best-of-N wall time, the speedup, and whether outputs match bit for bit.
"""

import argparse
import time

import numpy as np

from imdeg import _pykernels

try:
    from imdeg import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def cases(size, rng):
    img = rng.random((size, size, 3))

    # 21x21 dense correlation (a defocus-sized kernel)
    r = 10
    padded = np.pad(img, ((r, r), (r, r), (0, 0)), mode="symmetric")
    dy, dx = np.nonzero(np.ones((2 * r + 1, 2 * r + 1)))
    w = rng.random(dy.size)
    w /= w.sum()
    yield "correlate_taps 21x21", lambda m: m.correlate_taps(padded, dy, dx, w, size, size)

    yy, xx = np.meshgrid(np.arange(size, dtype=float), np.arange(size, dtype=float), indexing="ij")
    ys = yy + rng.uniform(-3, 3, yy.shape)
    xs = xx + rng.uniform(-3, 3, xx.shape)
    yield "warp_bilinear", lambda m: m.warp_bilinear(img, ys, xs)

    d = 2
    rows, cols = np.meshgrid(np.arange(size - d, d, -1), np.arange(size - d, d, -1), indexing="ij")
    rows, cols = rows.ravel(), cols.ravel()
    offs = rng.integers(-d, d, size=(2, rows.size))
    yield "local_shuffle", lambda m: m.local_shuffle(img, rows, cols, offs[1], offs[0])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=224)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _ckernels is None:
        raise SystemExit("compiled core not built; run `pip install -e . --no-build-isolation`")
    rng = np.random.default_rng(0)
    print(f"{'kernel':24s} {'cython':>10s} {'numpy':>10s} {'speedup':>8s}  identical")
    for name, call in cases(args.size, rng):
        tc, oc = best_of(lambda: call(_ckernels), args.repeat)
        tp, op = best_of(lambda: call(_pykernels), args.repeat)
        same = np.array_equal(np.asarray(oc), np.asarray(op))
        print(f"{name:24s} {tc * 1e3:8.2f}ms {tp * 1e3:8.2f}ms {tp / tc:7.1f}x  {same}")


if __name__ == "__main__":
    main()
