"""Camera, ISP and board-level failure operators (16).

These model faults along the imaging pipeline: optics and sensor damage,
mis-tuned ISP stages, and corrupted buffers or links after readout.
"""

from __future__ import annotations

import numpy as np

from imdeg.degradations._common import clip01, convolve, disk_kernel, smooth_field
from imdeg.degradations.catalog import operator

B = "liu"


def _grid(h, w):
    return np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")


@operator(B, "fog", stochastic=True)
def fog(x, p, rng):
    (beta,) = p
    h, w = x.shape[:2]
    yy, _ = _grid(h, w)
    # denser towards the top of the frame, modulated by a soft random field
    depth = 0.5 * (1.0 - yy / max(h - 1, 1)) + 0.5 * smooth_field(rng, h, w, max(h, w) / 4)
    t = np.exp(-2.0 * beta * depth)[..., None]
    return clip01(x * t + 0.9 * (1.0 - t))


@operator(B, "lens_obstruction", stochastic=True)
def lens_obstruction(x, p, rng):
    count, frac, opacity = p
    h, w = x.shape[:2]
    yy, xx = _grid(h, w)
    clear = np.ones((h, w))
    for _ in range(int(count)):
        cy, cx = rng.uniform(0, h), rng.uniform(0, w)
        r = frac * min(h, w) * rng.uniform(0.75, 1.25)
        d2 = ((yy - cy) ** 2 + (xx - cx) ** 2) / (r * r)
        clear *= 1.0 - opacity * np.exp(-(d2**2))
    a = (1.0 - clear)[..., None]
    return clip01(x * (1.0 - a) + 0.05 * a)


@operator(B, "focus_motor_damage", monotone=True)
def focus_motor_damage(x, p, rng):
    (radius,) = p
    return clip01(convolve(x, disk_kernel(radius, 0.5)))


@operator(B, "ccd_sensor_damage", stochastic=True)
def ccd_sensor_damage(x, p, rng):
    sigma, col_frac, strength = p
    h, w = x.shape[:2]
    out = x + rng.standard_normal(x.shape) * sigma
    n = max(1, int(round(col_frac * w)))
    cols = rng.choice(w, size=min(n, w), replace=False)
    # charge overflow bleeds along the readout columns
    out[:, cols] += strength * rng.uniform(0.5, 1.0, size=(1, cols.size, 1))
    return clip01(out)


@operator(B, "cmos_sensor_damage", stochastic=True)
def cmos_sensor_damage(x, p, rng):
    sigma, fpn, row_frac = p
    h, w = x.shape[:2]
    out = x + rng.standard_normal(x.shape) * sigma
    out += rng.standard_normal((h, 1, 1)) * fpn
    n = max(1, int(round(row_frac * h)))
    rows = rng.choice(h, size=min(n, h), replace=False)
    out[rows] += rng.choice([-0.3, 0.3], size=(rows.size, 1, 1))
    return clip01(out)


@operator(B, "insufficient_black_level")
def insufficient_black_level(x, p, rng):
    (b,) = p
    return clip01(x + b)


@operator(B, "excessive_black_level")
def excessive_black_level(x, p, rng):
    (b,) = p
    return clip01(x - b)


@operator(B, "lens_shading_damage")
def lens_shading_damage(x, p, rng):
    (k,) = p
    h, w = x.shape[:2]
    yy, xx = _grid(h, w)
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    r2 = ((yy - cy) ** 2 + (xx - cx) ** 2) / max(cy * cy + cx * cx, 1.0)
    gain = np.clip(1.0 - k * r2, 0.0, None)[..., None]
    return clip01(x * gain)


@operator(B, "awb_damage")
def awb_damage(x, p, rng):
    return clip01(x * np.asarray(p, dtype=np.float64))


@operator(B, "bad_pixel_damage", stochastic=True)
def bad_pixel_damage(x, p, rng):
    density, radius = p
    h, w = x.shape[:2]
    out = x.copy()
    r = int(radius) - 1
    n = int(round(density * h * w))
    ys = rng.integers(0, h, n)
    xs = rng.integers(0, w, n)
    # each cluster is stuck hot or dead per channel
    vals = (rng.random((n, 3)) < 0.5).astype(np.float64)
    for y, xc, v in zip(ys, xs, vals):
        out[max(y - r, 0):y + r + 1, max(xc - r, 0):xc + r + 1] = v
    return out


@operator(B, "cfa_interpolation_damage", tier=2)
def cfa_interpolation_damage(x, p, rng):
    (amount,) = p
    h, w = x.shape[:2]
    hp, wp = h + h % 2, w + w % 2
    pad = np.pad(x, ((0, hp - h), (0, wp - w), (0, 0)), mode="edge")
    # RGGB mosaic, each 2x2 cell rebuilt from its own samples only
    r = pad[0::2, 0::2, 0]
    g = 0.5 * (pad[0::2, 1::2, 1] + pad[1::2, 0::2, 1])
    b = pad[1::2, 1::2, 2]
    cell = np.stack([r, g, b], axis=-1)
    demosaic = np.repeat(np.repeat(cell, 2, axis=0), 2, axis=1)[:h, :w]
    return clip01(x + amount * (demosaic - x))


@operator(B, "gamma_damage")
def gamma_damage(x, p, rng):
    (g,) = p
    return clip01(np.clip(x, 0.0, 1.0) ** g)


@operator(B, "color_space_damage", stochastic=True)
def color_space_damage(x, p, rng):
    (eps,) = p
    m = np.eye(3) + eps * rng.uniform(-1.0, 1.0, (3, 3))
    return clip01(np.einsum("hwc,dc->hwd", x, m, optimize=False))


@operator(B, "sensor_broken", stochastic=True)
def sensor_broken(x, p, rng):
    (frac,) = p
    h = x.shape[0]
    band = max(1, int(round(frac * h)))
    y0 = int(rng.integers(0, h - band + 1))
    out = x.copy()
    out[y0:y0 + band] = rng.random(3)
    return out


@operator(B, "memory_exceptions", stochastic=True)
def memory_exceptions(x, p, rng):
    (frac,) = p
    h, w = x.shape[:2]
    bs = max(4, min(h, w) // 16)
    gy, gx = -(-h // bs), -(-w // bs)
    n = int(round(frac * gy * gx))
    picks = rng.choice(gy * gx, size=n, replace=False)
    out = x.copy()
    for idx in picks:
        by, bx = divmod(int(idx), gx)
        ys, xs = slice(by * bs, min((by + 1) * bs, h)), slice(bx * bs, min((bx + 1) * bs, w))
        if rng.random() < 0.5:
            out[ys, xs] = rng.random(out[ys, xs].shape)
        else:
            sy, sx = divmod(int(rng.integers(gy * gx)), gx)
            src = x[sy * bs:(sy + 1) * bs, sx * bs:(sx + 1) * bs]
            hh, ww = out[ys, xs].shape[:2]
            patch = np.zeros((hh, ww, 3))
            patch[:min(hh, src.shape[0]), :min(ww, src.shape[1])] = src[:hh, :ww]
            out[ys, xs] = patch
    return out


@operator(B, "transfer_harness_exceptions", stochastic=True)
def transfer_harness_exceptions(x, p, rng):
    (frac,) = p
    h, w = x.shape[:2]
    n = max(1, int(round(frac * h)))
    rows = rng.choice(h, size=min(n, h), replace=False)
    shifts = rng.integers(1, max(w // 4, 1) + 1, size=rows.size)
    out = x.copy()
    for r, s in zip(rows, shifts):
        out[r] = np.roll(x[r], int(s), axis=0)
    return out
