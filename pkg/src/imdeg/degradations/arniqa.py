"""IQA-style synthetic distortions (24), KADID-10k family.

Strength parameters are expressed in this module's own units (Gaussian
sigma, noise variance on [0, 1] intensities, JPEG quality, ...).
"""

from __future__ import annotations

import warnings

import numpy as np
from skimage import color as skcolor

from imdeg.degradations._common import (
    box_resize,
    clip01,
    convolve,
    disk_kernel,
    luma,
    motion_kernel,
    nearest_resize,
    pil_roundtrip,
    rgb_to_ycbcr,
    ycbcr_to_rgb,
)
from imdeg.degradations.catalog import operator
from imdeg.degradations.hendrycks import salt_and_pepper
from imdeg.kernels import filter2d
from imdeg.kernels import gaussian_blur as _gauss
from imdeg.kernels import warp_bilinear

B = "arniqa"


@operator(B, "gaussian_blur", monotone=True)
def gaussian_blur(x, p, rng):
    (sigma,) = p
    return clip01(_gauss(x, sigma, truncate=3.0))


@operator(B, "lens_blur", tier=2, monotone=True)
def lens_blur(x, p, rng):
    (radius,) = p
    return clip01(convolve(x, disk_kernel(radius)))


@operator(B, "motion_blur", stochastic=True, monotone=True)
def motion_blur(x, p, rng):
    (length,) = p
    angle = rng.uniform(-180, 180)
    return clip01(convolve(x, motion_kernel(length, 0, angle)))


@operator(B, "white_noise", stochastic=True, monotone=True)
def white_noise(x, p, rng):
    (var,) = p
    return clip01(x + rng.standard_normal(x.shape) * np.sqrt(var))


@operator(B, "white_noise_cc", stochastic=True, monotone=True)
def white_noise_cc(x, p, rng):
    (var,) = p
    ycc = rgb_to_ycbcr(x)
    ycc[..., 1:] += rng.standard_normal(x.shape[:2] + (2,)) * np.sqrt(var)
    return clip01(ycbcr_to_rgb(ycc))


@operator(B, "impulse_noise", stochastic=True, monotone=True)
def impulse_noise(x, p, rng):
    (prob,) = p
    return clip01(salt_and_pepper(x, prob, rng))


@operator(B, "multiplicative_noise", stochastic=True, monotone=True)
def multiplicative_noise(x, p, rng):
    (var,) = p
    return clip01(x + x * rng.standard_normal(x.shape) * np.sqrt(var))


def _luma_curve(x, curve):
    ycc = rgb_to_ycbcr(x)
    y = np.clip(ycc[..., 0], 0.0, 1.0)
    ycc[..., 0] = curve(y)
    return clip01(ycbcr_to_rgb(ycc))


@operator(B, "brighten", monotone=True)
def brighten(x, p, rng):
    (amount,) = p
    return _luma_curve(x, lambda y: 1.0 - (1.0 - y) ** (1.0 + amount))


@operator(B, "darken", monotone=True)
def darken(x, p, rng):
    (amount,) = p
    return _luma_curve(x, lambda y: y ** (1.0 + amount))


@operator(B, "mean_shift")
def mean_shift(x, p, rng):
    (shift,) = p
    return clip01(x + shift)


def _lab2rgb(lab):
    # out-of-gamut Lab values are clipped by skimage; the warning is expected
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        return skcolor.lab2rgb(lab)


@operator(B, "color_diffusion", tier=2)
def color_diffusion(x, p, rng):
    (sigma,) = p
    lab = skcolor.rgb2lab(x)
    lab[..., 1:] = _gauss(lab[..., 1:], sigma)
    return clip01(_lab2rgb(lab))


def _shift_cols(a, n):
    """Shift columns right by ``n`` pixels, replicating the left edge."""
    if n <= 0:
        return a.copy()
    n = min(n, a.shape[1])
    return np.concatenate([np.repeat(a[:, :1], n, axis=1), a[:, : a.shape[1] - n]], axis=1)


@operator(B, "color_shift")
def color_shift(x, p, rng):
    (amount,) = p
    y = luma(x)[..., None]
    gy = filter2d(y, np.array([[-1.0], [0.0], [1.0]]))
    gx = filter2d(y, np.array([[-1.0, 0.0, 1.0]]))
    mag = np.hypot(gx, gy)[..., 0]
    peak = mag.max()
    mask = mag / peak if peak > 0 else mag
    out = x.copy()
    g = x[..., 1]
    out[..., 1] = g + mask * (_shift_cols(g, int(amount)) - g)
    return clip01(out)


@operator(B, "color_saturation1")
def color_saturation1(x, p, rng):
    (factor,) = p
    hsv = skcolor.rgb2hsv(x)
    hsv[..., 1] = np.clip(hsv[..., 1] * factor, 0, 1)
    return clip01(skcolor.hsv2rgb(hsv))


@operator(B, "color_saturation2")
def color_saturation2(x, p, rng):
    (factor,) = p
    if factor == 1:
        return x.copy()
    lab = skcolor.rgb2lab(x)
    lab[..., 1:] *= factor
    return clip01(_lab2rgb(lab))


@operator(B, "jpeg", monotone=True)
def jpeg(x, p, rng):
    (quality,) = p
    return pil_roundtrip(x, "JPEG", quality=int(quality))


@operator(B, "jpeg2000", tier=2, requires=("codec:jpg_2000",))
def jpeg2000(x, p, rng):
    (ratio,) = p
    return pil_roundtrip(x, "JPEG2000", quality_mode="rates",
                         quality_layers=[float(ratio)], irreversible=True)


@operator(B, "jitter", stochastic=True)
def jitter(x, p, rng):
    (amount,) = p
    h, w = x.shape[:2]
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    dy = rng.uniform(-amount, amount, (h, w))
    dx = rng.uniform(-amount, amount, (h, w))
    return clip01(warp_bilinear(x, yy + dy, xx + dx))


@operator(B, "non_eccentricity_patch", tier=2, stochastic=True)
def non_eccentricity_patch(x, p, rng):
    (count,) = p
    h, w = x.shape[:2]
    ps = max(2, min(h, w) // 16)
    out = x.copy()
    if ps >= h or ps >= w:
        return out
    for _ in range(int(count)):
        sy = int(rng.integers(0, h - ps + 1))
        sx = int(rng.integers(0, w - ps + 1))
        ty = int(np.clip(sy + rng.integers(-2 * ps, 2 * ps + 1), 0, h - ps))
        tx = int(np.clip(sx + rng.integers(-2 * ps, 2 * ps + 1), 0, w - ps))
        out[ty:ty + ps, tx:tx + ps] = x[sy:sy + ps, sx:sx + ps]
    return out


@operator(B, "pixelate", monotone=True)
def pixelate(x, p, rng):
    (amount,) = p
    h, w = x.shape[:2]
    z = 0.95 - amount**0.6
    small = box_resize(x, max(1, int(h * z)), max(1, int(w * z)))
    return clip01(nearest_resize(small, h, w))


@operator(B, "quantization")
def quantization(x, p, rng):
    (levels,) = p
    n = int(levels) - 1
    return np.round(x * n) / n


@operator(B, "color_block", stochastic=True)
def color_block(x, p, rng):
    (count,) = p
    h, w = x.shape[:2]
    size = max(1, round(min(h, w) * 32 / 512))
    out = x.copy()
    for _ in range(int(count)):
        y0 = int(rng.integers(0, max(h - size, 0) + 1))
        x0 = int(rng.integers(0, max(w - size, 0) + 1))
        out[y0:y0 + size, x0:x0 + size] = rng.random(3)
    return out


@operator(B, "high_sharpen")
def high_sharpen(x, p, rng):
    (amount,) = p
    return clip01(x + amount * (x - _gauss(x, 1.0)))


@operator(B, "linear_contrast_change")
def linear_contrast_change(x, p, rng):
    (amount,) = p
    return clip01((x - 0.5) * (1.0 + amount) + 0.5)


@operator(B, "nonlinear_contrast_change")
def nonlinear_contrast_change(x, p, rng):
    (amount,) = p

    def sig(v):
        return 1.0 / (1.0 + np.exp(-12.0 * (v - 0.5)))

    lo, hi = sig(0.0), sig(1.0)
    s = (sig(x) - lo) / (hi - lo)
    return clip01((1.0 - amount) * x + amount * s)
