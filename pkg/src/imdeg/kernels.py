"""Kernel backend selection plus the filtering helpers built on top of it.

The compiled core (``imdeg._ckernels``) is used when it imports; otherwise the
numpy twins in ``imdeg._pykernels`` take over. Set ``IMDEG_PURE_PYTHON=1`` to
force the fallback. Both backends give identical results, so the choice only
affects speed, never output bytes.
"""

from __future__ import annotations

import os

import numpy as np

from imdeg import _pykernels

if os.environ.get("IMDEG_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from imdeg import _ckernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _pykernels
        BACKEND = "python"

correlate_taps = _impl.correlate_taps
warp_bilinear = _impl.warp_bilinear
local_shuffle = _impl.local_shuffle


def _as_hwc(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2:
        return x[..., None], True
    return x, False


def filter2d(img, kernel, mode="symmetric"):
    """Correlate each channel with a 2-D kernel, same-size output.

    Zero taps are skipped, so sparse kernels (motion lines) stay cheap.
    """
    x, squeeze = _as_hwc(img)
    kernel = np.asarray(kernel, dtype=np.float64)
    kh, kw = kernel.shape
    py, px = kh // 2, kw // 2
    padded = np.pad(x, ((py, kh - 1 - py), (px, kw - 1 - px), (0, 0)), mode=mode)
    dy, dx = np.nonzero(kernel)
    out = correlate_taps(padded, dy, dx, kernel[dy, dx], x.shape[0], x.shape[1])
    return out[..., 0] if squeeze else out


def filter_separable(img, taps, mode="symmetric"):
    """Apply the same odd-length 1-D kernel along rows then columns."""
    x, squeeze = _as_hwc(img)
    taps = np.asarray(taps, dtype=np.float64)
    r = len(taps) // 2
    h, w = x.shape[:2]
    idx = np.arange(len(taps))
    padded = np.pad(x, ((0, 0), (r, r), (0, 0)), mode=mode)
    tmp = correlate_taps(padded, np.zeros_like(idx), idx, taps, h, w)
    padded = np.pad(tmp, ((r, r), (0, 0), (0, 0)), mode=mode)
    out = correlate_taps(padded, idx, np.zeros_like(idx), taps, h, w)
    return out[..., 0] if squeeze else out


def filter_separable_valid(img, taps):
    """Separable correlation keeping only fully-covered windows."""
    x, squeeze = _as_hwc(img)
    taps = np.asarray(taps, dtype=np.float64)
    k = len(taps)
    h, w = x.shape[:2]
    idx = np.arange(k)
    tmp = correlate_taps(x, np.zeros_like(idx), idx, taps, h, w - k + 1)
    out = correlate_taps(tmp, idx, np.zeros_like(idx), taps, h - k + 1, w - k + 1)
    return out[..., 0] if squeeze else out


def gaussian_taps(sigma, truncate=4.0, radius=None):
    """Normalised 1-D Gaussian taps; ``radius`` defaults to ``truncate*sigma``."""
    if radius is None:
        radius = int(truncate * float(sigma) + 0.5)
    if sigma <= 0 or radius == 0:
        return np.ones(1)
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-0.5 * (t / sigma) ** 2)
    return g / g.sum()


def gaussian_blur(img, sigma, truncate=4.0):
    if sigma <= 0:
        return np.array(img, dtype=np.float64, copy=True)
    return filter_separable(img, gaussian_taps(sigma, truncate))
