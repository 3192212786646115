# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the kernels in ``_pykernels``.

Arithmetic order mirrors the numpy versions so both backends produce
identical bytes.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


def correlate_taps(src, dy, dx, w, Py_ssize_t out_h, Py_ssize_t out_w):
    cdef const double[:, :, ::1] s = np.ascontiguousarray(src, dtype=np.float64)
    cdef const Py_ssize_t[::1] ty = np.ascontiguousarray(dy, dtype=np.intp)
    cdef const Py_ssize_t[::1] tx = np.ascontiguousarray(dx, dtype=np.intp)
    cdef const double[::1] tw = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t nch = s.shape[2]
    cdef Py_ssize_t ntaps = tw.shape[0]
    out = np.zeros((out_h, out_w, nch), dtype=np.float64)
    cdef double[:, :, ::1] o = out
    cdef Py_ssize_t i, j, c, t
    cdef double acc
    with nogil:
        for i in range(out_h):
            for j in range(out_w):
                for c in range(nch):
                    acc = 0.0
                    for t in range(ntaps):
                        acc = acc + tw[t] * s[i + ty[t], j + tx[t], c]
                    o[i, j, c] = acc
    return out


cdef inline Py_ssize_t _reflect(Py_ssize_t i, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t period = 2 * n
    cdef Py_ssize_t m = i % period
    if m < 0:
        m += period
    if m >= n:
        m = period - 1 - m
    return m


def warp_bilinear(src, ys, xs):
    cdef const double[:, :, ::1] s = np.ascontiguousarray(src, dtype=np.float64)
    cdef const double[:, ::1] yy = np.ascontiguousarray(ys, dtype=np.float64)
    cdef const double[:, ::1] xx = np.ascontiguousarray(xs, dtype=np.float64)
    cdef Py_ssize_t h = s.shape[0], w = s.shape[1], nch = s.shape[2]
    cdef Py_ssize_t oh = yy.shape[0], ow = yy.shape[1]
    out = np.empty((oh, ow, nch), dtype=np.float64)
    cdef double[:, :, ::1] o = out
    cdef Py_ssize_t i, j, c, r0, r1, c0, c1
    cdef double y, x, y0f, x0f, fy, fx, wx0, top, bot
    with nogil:
        for i in range(oh):
            for j in range(ow):
                y = yy[i, j]
                x = xx[i, j]
                y0f = floor(y)
                x0f = floor(x)
                fy = y - y0f
                fx = x - x0f
                r0 = _reflect(<Py_ssize_t>y0f, h)
                r1 = _reflect(<Py_ssize_t>y0f + 1, h)
                c0 = _reflect(<Py_ssize_t>x0f, w)
                c1 = _reflect(<Py_ssize_t>x0f + 1, w)
                wx0 = 1.0 - fx
                for c in range(nch):
                    top = wx0 * s[r0, c0, c] + fx * s[r0, c1, c]
                    bot = wx0 * s[r1, c0, c] + fx * s[r1, c1, c]
                    o[i, j, c] = (1.0 - fy) * top + fy * bot
    return out


def local_shuffle(src, rows, cols, dys, dxs):
    out = np.array(src, dtype=np.float64, order="C", copy=True)
    cdef double[:, :, ::1] o = out
    cdef const Py_ssize_t[::1] rr = np.ascontiguousarray(rows, dtype=np.intp)
    cdef const Py_ssize_t[::1] cc = np.ascontiguousarray(cols, dtype=np.intp)
    cdef const Py_ssize_t[::1] ddy = np.ascontiguousarray(dys, dtype=np.intp)
    cdef const Py_ssize_t[::1] ddx = np.ascontiguousarray(dxs, dtype=np.intp)
    cdef Py_ssize_t n = rr.shape[0], nch = o.shape[2]
    cdef Py_ssize_t t, c, r, q, r2, q2
    cdef double tmp
    with nogil:
        for t in range(n):
            r = rr[t]
            q = cc[t]
            r2 = r + ddy[t]
            q2 = q + ddx[t]
            for c in range(nch):
                tmp = o[r, q, c]
                o[r, q, c] = o[r2, q2, c]
                o[r2, q2, c] = tmp
    return out
