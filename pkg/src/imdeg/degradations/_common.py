"""Building blocks shared by the backend operator modules."""

from __future__ import annotations

import io

import numpy as np
from PIL import Image as PILImage

from imdeg.image import from_uint8, quantize8
from imdeg.kernels import filter2d, gaussian_blur, warp_bilinear


def clip01(x):
    return np.clip(x, 0.0, 1.0)


def disk_kernel(radius, alias_blur=0.0):
    """Normalised disk, optionally antialiased with a small Gaussian."""
    r = float(radius)
    half = max(int(np.ceil(r)), 8 if alias_blur > 0 and r <= 8 else 0)
    t = np.arange(-half, half + 1, dtype=np.float64)
    yy, xx = np.meshgrid(t, t, indexing="ij")
    k = (xx**2 + yy**2 <= r**2).astype(np.float64)
    k /= k.sum()
    if alias_blur > 0:
        k = gaussian_blur(k, alias_blur, truncate=3.0)
        k /= k.sum()
    return k


def motion_kernel(length, sigma, angle_deg):
    """One-sided line kernel with Gaussian fall-off along ``angle_deg``.

    Taps sit at distances 0..length-1 from the origin and are splatted
    bilinearly onto the pixel grid.
    """
    n = max(int(length), 1)
    half = n
    k = np.zeros((2 * half + 1, 2 * half + 1))
    d = np.arange(n, dtype=np.float64)
    w = np.exp(-(d**2) / (2.0 * sigma**2)) if sigma > 0 else np.ones(n)
    theta = np.deg2rad(angle_deg)
    ys = half + d * np.sin(theta)
    xs = half + d * np.cos(theta)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    fy, fx = ys - y0, xs - x0
    for dy, dx, wy, wx in ((0, 0, 1 - fy, 1 - fx), (0, 1, 1 - fy, fx),
                           (1, 0, fy, 1 - fx), (1, 1, fy, fx)):
        np.add.at(k, (np.clip(y0 + dy, 0, 2 * half), np.clip(x0 + dx, 0, 2 * half)), w * wy * wx)
    k[np.abs(k) < 1e-12] = 0.0
    return k / k.sum()


def convolve(img, kernel):
    return filter2d(img, kernel)


def zoom_about_center(img, factor):
    """Magnify by ``factor`` around the image centre, keeping the size."""
    h, w = img.shape[:2]
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    ys = (np.arange(h, dtype=np.float64) - cy) / factor + cy
    xs = (np.arange(w, dtype=np.float64) - cx) / factor + cx
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    return warp_bilinear(img, yy, xx)


def resample_matrix(n_out, n_in):
    """Area-averaging (box) resampling matrix of shape (n_out, n_in)."""
    m = np.zeros((n_out, n_in))
    scale = n_in / n_out
    if n_out >= n_in:
        # upsampling with a box filter is nearest-neighbour
        src = np.minimum(((np.arange(n_out) + 0.5) * scale).astype(int), n_in - 1)
        m[np.arange(n_out), src] = 1.0
        return m
    for i in range(n_out):
        lo, hi = i * scale, (i + 1) * scale
        j0, j1 = int(np.floor(lo)), int(np.ceil(hi))
        for j in range(j0, min(j1, n_in)):
            m[i, j] = min(hi, j + 1) - max(lo, j)
        m[i] /= m[i].sum()
    return m


def box_resize(img, out_h, out_w):
    ah = resample_matrix(out_h, img.shape[0])
    aw = resample_matrix(out_w, img.shape[1])
    # einsum without BLAS keeps results independent of thread count
    tmp = np.einsum("ij,jkc->ikc", ah, img, optimize=False)
    return np.einsum("kj,ijc->ikc", aw, tmp, optimize=False)


def nearest_resize(img, out_h, out_w):
    h, w = img.shape[:2]
    rows = np.minimum(((np.arange(out_h) + 0.5) * h / out_h).astype(int), h - 1)
    cols = np.minimum(((np.arange(out_w) + 0.5) * w / out_w).astype(int), w - 1)
    return img[rows][:, cols]


def pil_roundtrip(img, fmt, **save_kw):
    buf = io.BytesIO()
    PILImage.fromarray(quantize8(img), mode="RGB").save(buf, format=fmt, **save_kw)
    buf.seek(0)
    with PILImage.open(buf) as im:
        return from_uint8(np.asarray(im.convert("RGB")))


def luma(img):
    return img[..., 0] * 0.299 + img[..., 1] * 0.587 + img[..., 2] * 0.114


def rgb_to_ycbcr(img):
    y = luma(img)
    cb = (img[..., 2] - y) * 0.564
    cr = (img[..., 0] - y) * 0.713
    return np.stack([y, cb, cr], axis=-1)


def ycbcr_to_rgb(ycc):
    y, cb, cr = ycc[..., 0], ycc[..., 1], ycc[..., 2]
    r = y + cr / 0.713
    b = y + cb / 0.564
    g = (y - 0.299 * r - 0.114 * b) / 0.587
    return np.stack([r, g, b], axis=-1)


def plasma_fractal(rng, mapsize, wibbledecay):
    """Diamond-square height map in [0, 1], side ``mapsize`` (power of two)."""
    assert mapsize & (mapsize - 1) == 0
    arr = np.zeros((mapsize, mapsize))
    step = mapsize
    wibble = 100.0

    def wibbled(a):
        return a / 4 + wibble * rng.uniform(-wibble, wibble, a.shape)

    while step >= 2:
        half = step // 2
        corner = arr[0:mapsize:step, 0:mapsize:step]
        sq = corner + np.roll(corner, -1, axis=0)
        sq = sq + np.roll(sq, -1, axis=1)
        arr[half:mapsize:step, half:mapsize:step] = wibbled(sq)
        dr = arr[half:mapsize:step, half:mapsize:step]
        ul = arr[0:mapsize:step, 0:mapsize:step]
        lt = dr + np.roll(dr, 1, axis=0) + ul + np.roll(ul, -1, axis=1)
        arr[0:mapsize:step, half:mapsize:step] = wibbled(lt)
        tt = dr + np.roll(dr, 1, axis=1) + ul + np.roll(ul, -1, axis=0)
        arr[half:mapsize:step, 0:mapsize:step] = wibbled(tt)
        step //= 2
        wibble /= wibbledecay
    arr -= arr.min()
    return arr / arr.max()


def next_pow2(n):
    return 1 << max(int(n) - 1, 1).bit_length()


def smooth_field(rng, h, w, scale):
    """Low-frequency random field in [0, 1]: coarse noise, bilinear upsampled."""
    gh, gw = max(2, int(np.ceil(h / scale)) + 1), max(2, int(np.ceil(w / scale)) + 1)
    coarse = rng.uniform(0.0, 1.0, (gh, gw, 1))
    ys = np.linspace(0, gh - 1, h)
    xs = np.linspace(0, gw - 1, w)
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    return warp_bilinear(coarse, yy, xx)[..., 0]
