"""ImageNet-C style corruption operators (19).

Parameters follow the reference corruption code for images larger than
64 px; see ``data/schedules.json``. Size-dependent quantities (elastic
displacement, fractal map size) scale with the input instead of assuming a
fixed 224 px square.
"""

from __future__ import annotations

import numpy as np
from PIL import Image as PILImage
from skimage import color as skcolor

from imdeg.degradations._common import (
    box_resize,
    clip01,
    convolve,
    disk_kernel,
    motion_kernel,
    next_pow2,
    pil_roundtrip,
    plasma_fractal,
    zoom_about_center,
)
from imdeg.degradations.catalog import asset_files, operator
from imdeg.image import from_uint8
from imdeg.kernels import gaussian_blur as _gauss
from imdeg.kernels import local_shuffle, warp_bilinear

B = "hendrycks"


@operator(B, "gaussian_noise", stochastic=True, monotone=True)
def gaussian_noise(x, p, rng):
    (sigma,) = p
    return clip01(x + rng.standard_normal(x.shape) * sigma)


@operator(B, "shot_noise", stochastic=True, monotone=True)
def shot_noise(x, p, rng):
    (lam,) = p
    return clip01(rng.poisson(x * lam) / float(lam))


def salt_and_pepper(x, amount, rng):
    hit = rng.random(x.shape) < amount
    salt = rng.random(x.shape) < 0.5
    return np.where(hit, salt.astype(np.float64), x)


@operator(B, "impulse_noise", stochastic=True, monotone=True)
def impulse_noise(x, p, rng):
    (amount,) = p
    return clip01(salt_and_pepper(x, amount, rng))


@operator(B, "speckle_noise", stochastic=True, monotone=True)
def speckle_noise(x, p, rng):
    (c,) = p
    return clip01(x + x * rng.standard_normal(x.shape) * c)


@operator(B, "gaussian_blur", monotone=True)
def gaussian_blur(x, p, rng):
    (sigma,) = p
    return clip01(_gauss(x, sigma))


@operator(B, "glass_blur", tier=2, stochastic=True)
def glass_blur(x, p, rng):
    sigma, delta, iterations = p
    delta, iterations = int(delta), int(iterations)
    h, w = x.shape[:2]
    out = _gauss(x, sigma)
    rows = np.arange(h - delta, delta, -1)
    cols = np.arange(w - delta, delta, -1)
    if rows.size and cols.size:
        rr, cc = np.meshgrid(rows, cols, indexing="ij")
        rr, cc = rr.ravel(), cc.ravel()
        for _ in range(iterations):
            d = rng.integers(-delta, delta, size=(2, rr.size))
            out = local_shuffle(out, rr, cc, d[1], d[0])
    return clip01(_gauss(out, sigma))


@operator(B, "defocus_blur", monotone=True)
def defocus_blur(x, p, rng):
    radius, alias = p
    return clip01(convolve(x, disk_kernel(radius, alias)))


@operator(B, "motion_blur", stochastic=True, monotone=True)
def motion_blur(x, p, rng):
    radius, sigma = p
    angle = rng.uniform(-45, 45)
    return clip01(convolve(x, motion_kernel(2 * int(radius) + 1, sigma, angle)))


@operator(B, "zoom_blur", monotone=True)
def zoom_blur(x, p, rng):
    start, stop, step = p
    acc = np.zeros_like(x)
    factors = np.arange(start, stop, step)
    for z in factors:
        acc += zoom_about_center(x, z)
    return clip01((x + acc) / (len(factors) + 1))


@operator(B, "fog", stochastic=True)
def fog(x, p, rng):
    c, decay = p
    h, w = x.shape[:2]
    peak = x.max()
    field = plasma_fractal(rng, next_pow2(max(h, w)), decay)[:h, :w, None]
    return clip01((x + c * field) * peak / (peak + c))


@operator(B, "frost", tier=2, stochastic=True, requires=("asset:frost",))
def frost(x, p, rng):
    c_img, c_frost = p
    files = asset_files("frost")
    path = files[int(rng.integers(len(files)))]
    with PILImage.open(path) as im:
        tex = im.convert("RGB")
        h, w = x.shape[:2]
        scale = max(h / tex.height, w / tex.width, 1.0)
        if scale > 1.0:
            tex = tex.resize((int(np.ceil(tex.width * scale)), int(np.ceil(tex.height * scale))),
                             PILImage.BILINEAR)
        tex = from_uint8(np.asarray(tex))
    y0 = int(rng.integers(0, tex.shape[0] - h + 1))
    x0 = int(rng.integers(0, tex.shape[1] - w + 1))
    return clip01(c_img * x + c_frost * tex[y0:y0 + h, x0:x0 + w])


@operator(B, "snow", tier=2, stochastic=True)
def snow(x, p, rng):
    loc, scale, zoom, thresh, radius, sigma, keep = p
    h, w = x.shape[:2]
    layer = rng.normal(loc, scale, size=(h, w, 1))
    layer = zoom_about_center(layer, zoom)
    layer[layer < thresh] = 0
    layer = np.clip(layer, 0, 1)
    angle = rng.uniform(-135, -45)
    layer = np.clip(convolve(layer, motion_kernel(2 * int(radius) + 1, sigma, angle)), 0, 1)
    gray = (x[..., 0] * 0.299 + x[..., 1] * 0.587 + x[..., 2] * 0.114)[..., None]
    base = keep * x + (1 - keep) * np.maximum(x, gray * 1.5 + 0.5)
    return clip01(base + layer + np.rot90(layer, k=2))


@operator(B, "spatter", tier=2, stochastic=True, requires=("module:cv2",))
def spatter(x, p, rng):
    import cv2

    loc, scale, sigma, thresh, intensity, mode = p
    h, w = x.shape[:2]
    liquid = _gauss(rng.normal(loc, scale, size=(h, w)), sigma)
    liquid[liquid < thresh] = 0
    if mode == 0:
        ll = (liquid * 255).astype(np.uint8)
        dist = 255 - cv2.Canny(ll, 50, 150)
        dist = cv2.distanceTransform(dist, cv2.DIST_L2, 5)
        _, dist = cv2.threshold(dist, 20, 20, cv2.THRESH_TRUNC)
        dist = cv2.blur(dist, (3, 3)).astype(np.uint8)
        dist = cv2.equalizeHist(dist)
        ker = np.array([[-2, -1, 0], [-1, 1, 1], [0, 1, 2]])
        dist = cv2.filter2D(dist, cv2.CV_8U, ker)
        dist = cv2.blur(dist, (3, 3)).astype(np.float64)
        m = liquid * dist
        peak = m.max()
        m = (m / peak if peak > 0 else m) * intensity
        tint = np.array([175, 238, 238], dtype=np.float64) / 255.0
        return clip01(x + m[..., None] * tint)
    mask = _gauss((liquid > thresh).astype(np.float64), intensity)
    mask[mask < 0.8] = 0
    mud = np.array([63, 42, 20], dtype=np.float64) / 255.0
    return clip01(x * (1 - mask[..., None]) + mud * mask[..., None])


@operator(B, "brightness")
def brightness(x, p, rng):
    (c,) = p
    hsv = skcolor.rgb2hsv(x)
    hsv[..., 2] = np.clip(hsv[..., 2] + c, 0, 1)
    return clip01(skcolor.hsv2rgb(hsv))


@operator(B, "contrast")
def contrast(x, p, rng):
    (c,) = p
    means = x.mean(axis=(0, 1), keepdims=True)
    return clip01((x - means) * c + means)


@operator(B, "saturate")
def saturate(x, p, rng):
    gain, offset = p
    hsv = skcolor.rgb2hsv(x)
    hsv[..., 1] = np.clip(hsv[..., 1] * gain + offset, 0, 1)
    return clip01(skcolor.hsv2rgb(hsv))


@operator(B, "jpeg", monotone=True)
def jpeg(x, p, rng):
    (quality,) = p
    return pil_roundtrip(x, "JPEG", quality=int(quality))


@operator(B, "pixelate", monotone=True)
def pixelate(x, p, rng):
    (factor,) = p
    h, w = x.shape[:2]
    small = box_resize(x, max(1, int(h * factor)), max(1, int(w * factor)))
    return clip01(box_resize(small, h, w))


def _affine_from_points(src, dst):
    """2x3 matrix A with dst = A @ [src, 1] for three point pairs (x, y)."""
    a = np.hstack([src, np.ones((3, 1))])
    return np.linalg.solve(a, dst).T


@operator(B, "elastic_transform", stochastic=True)
def elastic_transform(x, p, rng):
    alpha_f, sigma_f, affine_f = p
    h, w = x.shape[:2]
    size = min(h, w)
    alpha, sigma, jitter = alpha_f * size, sigma_f * size, affine_f * size

    cx, cy = w // 2, h // 2
    s = size // 3
    src = np.array([[cx + s, cy + s], [cx + s, cy - s], [cx - s, cy - s]], dtype=np.float64)
    dst = src + rng.uniform(-jitter, jitter, size=src.shape)
    fwd = np.vstack([_affine_from_points(src, dst), [0.0, 0.0, 1.0]])
    inv = np.linalg.inv(fwd)
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    sx = inv[0, 0] * xx + inv[0, 1] * yy + inv[0, 2]
    sy = inv[1, 0] * xx + inv[1, 1] * yy + inv[1, 2]
    warped = warp_bilinear(x, sy, sx)

    dx = _gauss(rng.uniform(-1, 1, size=(h, w)), sigma, truncate=3.0) * alpha
    dy = _gauss(rng.uniform(-1, 1, size=(h, w)), sigma, truncate=3.0) * alpha
    return clip01(warp_bilinear(warped, yy + dy, xx + dx))
