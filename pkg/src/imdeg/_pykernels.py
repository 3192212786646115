"""Pure numpy implementations of the hot kernels.

Every routine here has a twin in ``_ckernels.pyx``. The two must agree bit for
bit, so the arithmetic is written in the same order in both places: tap
accumulation starts from zero and adds ``w * x`` one tap at a time, and the
bilinear blend uses the same nesting of products and sums.
"""

import numpy as np

__all__ = ["correlate_taps", "warp_bilinear", "local_shuffle"]


def correlate_taps(src, dy, dx, w, out_h, out_w):
    """Weighted sum of shifted windows of ``src``.

    ``out[i, j, c] = sum_t w[t] * src[i + dy[t], j + dx[t], c]``, accumulated
    in tap order. ``src`` must already carry whatever padding the caller
    wants; no bounds handling happens here.
    """
    src = np.ascontiguousarray(src, dtype=np.float64)
    out = np.zeros((out_h, out_w, src.shape[2]), dtype=np.float64)
    for oy, ox, wt in zip(dy, dx, w):
        out += wt * src[oy:oy + out_h, ox:ox + out_w]
    return out


def _reflect(idx, n):
    period = 2 * n
    m = np.mod(idx, period)
    return np.where(m >= n, period - 1 - m, m)


def warp_bilinear(src, ys, xs):
    """Sample ``src`` at fractional coordinates with symmetric reflection.

    ``ys``/``xs`` are (Ho, Wo) row/column coordinates; the result has shape
    (Ho, Wo, C). Out-of-range coordinates mirror about the half-sample edge
    (``d c b a | a b c d``).
    """
    src = np.ascontiguousarray(src, dtype=np.float64)
    h, w = src.shape[:2]
    ys = np.asarray(ys, dtype=np.float64)
    xs = np.asarray(xs, dtype=np.float64)
    y0f = np.floor(ys)
    x0f = np.floor(xs)
    fy = (ys - y0f)[..., None]
    fx = (xs - x0f)[..., None]
    y0 = y0f.astype(np.intp)
    x0 = x0f.astype(np.intp)
    r0, r1 = _reflect(y0, h), _reflect(y0 + 1, h)
    c0, c1 = _reflect(x0, w), _reflect(x0 + 1, w)
    wx0 = 1.0 - fx
    top = wx0 * src[r0, c0] + fx * src[r0, c1]
    bot = wx0 * src[r1, c0] + fx * src[r1, c1]
    return (1.0 - fy) * top + fy * bot


def local_shuffle(src, rows, cols, dys, dxs):
    """Sequentially swap pixel (rows[t], cols[t]) with its displaced partner.

    Swaps happen in order, so later swaps see the effect of earlier ones.
    Partners must lie inside the image.
    """
    out = np.array(src, dtype=np.float64, order="C", copy=True)
    flat = out.reshape(-1, out.shape[2])
    width = out.shape[1]
    a_idx = (np.asarray(rows, dtype=np.intp) * width + np.asarray(cols, dtype=np.intp)).tolist()
    b_idx = (
        (np.asarray(rows, dtype=np.intp) + np.asarray(dys, dtype=np.intp)) * width
        + np.asarray(cols, dtype=np.intp) + np.asarray(dxs, dtype=np.intp)
    ).tolist()
    for a, b in zip(a_idx, b_idx):
        tmp = flat[a].copy()
        flat[a] = flat[b]
        flat[b] = tmp
    return out
