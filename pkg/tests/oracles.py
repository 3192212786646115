"""Slow, obviously-correct reference implementations used as test oracles."""

import math

import numpy as np


def psnr_oracle(a, b):
    total = math.fsum((float(p) - float(q)) ** 2 for p, q in zip(np.ravel(a), np.ravel(b)))
    mse = total / np.size(a)
    return 50.0 if mse <= 1e-5 else 10.0 * math.log10(1.0 / mse)


def gaussian_window(size=11, sigma=1.5):
    t = np.arange(size) - size // 2
    g = np.exp(-(t**2) / (2 * sigma**2))
    w = np.outer(g, g)
    return w / w.sum()


def ssim_oracle(a, b, size=11, sigma=1.5, c1=0.01**2, c2=0.03**2):
    """Mean SSIM computed window by window, channel by channel."""
    w = gaussian_window(size, sigma)
    h, wd = a.shape[:2]
    per_channel = []
    for c in range(a.shape[2]):
        vals = []
        for y in range(h - size + 1):
            for x in range(wd - size + 1):
                pa = a[y:y + size, x:x + size, c]
                pb = b[y:y + size, x:x + size, c]
                ma, mb = (w * pa).sum(), (w * pb).sum()
                va = (w * (pa - ma) ** 2).sum()
                vb = (w * (pb - mb) ** 2).sum()
                cov = (w * (pa - ma) * (pb - mb)).sum()
                vals.append(((2 * ma * mb + c1) * (2 * cov + c2))
                            / ((ma**2 + mb**2 + c1) * (va + vb + c2)))
        per_channel.append(np.mean(vals))
    return float(np.mean(per_channel))


def correlate_oracle(img, kernel):
    """Same-size correlation with symmetric padding via explicit loops over taps."""
    kh, kw = kernel.shape
    py, px = kh // 2, kw // 2
    pad = np.pad(img, ((py, kh - 1 - py), (px, kw - 1 - px), (0, 0)), mode="symmetric")
    out = np.zeros_like(img)
    for i in range(kh):
        for j in range(kw):
            out += kernel[i, j] * pad[i:i + img.shape[0], j:j + img.shape[1]]
    return out


def bilinear_oracle(img, y, x):
    """Bilinear sample at (y, x) with half-sample symmetric reflection."""
    h, w = img.shape[:2]

    def refl(i, n):
        i = i % (2 * n)
        return i if i < n else 2 * n - 1 - i

    y0, x0 = math.floor(y), math.floor(x)
    fy, fx = y - y0, x - x0
    out = np.zeros(img.shape[2])
    for dy, wy in ((0, 1 - fy), (1, fy)):
        for dx, wx in ((0, 1 - fx), (1, fx)):
            out += wy * wx * img[refl(y0 + dy, h), refl(x0 + dx, w)]
    return out
