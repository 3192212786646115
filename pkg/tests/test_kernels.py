import os
import subprocess
import sys
import textwrap

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imdeg import _pykernels, kernels
from oracles import bilinear_oracle, correlate_oracle

try:
    from imdeg import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None

needs_c = pytest.mark.skipif(_ckernels is None, reason="compiled core not built")


def test_compiled_core_is_selected_by_default():
    assert kernels.BACKEND == ("cython" if _ckernels is not None else "python")


def test_env_var_forces_fallback():
    out = subprocess.run(
        [sys.executable, "-c", "import imdeg.kernels as k; print(k.BACKEND)"],
        env={**os.environ, "IMDEG_PURE_PYTHON": "1"}, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@st.composite
def tap_case(draw):
    h, w = draw(st.integers(1, 12)), draw(st.integers(1, 12))
    kh, kw = draw(st.integers(1, 5)), draw(st.integers(1, 5))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    src = rng.random((h + kh - 1, w + kw - 1, 3))
    dy, dx = np.nonzero(rng.random((kh, kw)) > 0.3)
    wts = rng.normal(size=dy.size)
    return src, dy, dx, wts, h, w


@needs_c
@settings(max_examples=60, deadline=None)
@given(tap_case())
def test_correlate_backends_bit_identical(case):
    src, dy, dx, w, h, wd = case
    a = _ckernels.correlate_taps(src, dy, dx, w, h, wd)
    b = _pykernels.correlate_taps(src, dy, dx, w, h, wd)
    assert np.array_equal(np.asarray(a), b)


@needs_c
@settings(max_examples=60, deadline=None)
@given(st.integers(1, 9), st.integers(1, 9), st.integers(0, 2**32 - 1), st.floats(0.1, 30))
def test_warp_backends_bit_identical(h, w, seed, spread):
    rng = np.random.default_rng(seed)
    src = rng.random((h, w, 3))
    ys = rng.uniform(-spread, h + spread, (5, 6))
    xs = rng.uniform(-spread, w + spread, (5, 6))
    assert np.array_equal(np.asarray(_ckernels.warp_bilinear(src, ys, xs)),
                          _pykernels.warp_bilinear(src, ys, xs))


@needs_c
@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_shuffle_backends_bit_identical(seed):
    rng = np.random.default_rng(seed)
    src = rng.random((12, 10, 3))
    rows, cols = np.meshgrid(np.arange(9, 2, -1), np.arange(7, 2, -1), indexing="ij")
    rows, cols = rows.ravel(), cols.ravel()
    d = rng.integers(-2, 2, size=(2, rows.size))
    a = _ckernels.local_shuffle(src, rows, cols, d[1], d[0])
    b = _pykernels.local_shuffle(src, rows, cols, d[1], d[0])
    assert np.array_equal(np.asarray(a), b)


def test_shuffle_swaps_sequentially():
    src = np.arange(12, dtype=float).reshape(2, 2, 3)
    # swap (0,0)<->(0,1) then (0,1)<->(1,1): the second swap moves the first result
    out = _pykernels.local_shuffle(src, np.array([0, 0]), np.array([0, 1]), np.array([0, 1]), np.array([1, 0]))
    assert out[0, 0].tolist() == src[0, 1].tolist()
    assert out[0, 1].tolist() == src[1, 1].tolist()
    assert out[1, 1].tolist() == src[0, 0].tolist()
    assert np.array_equal(src, np.arange(12, dtype=float).reshape(2, 2, 3))


def test_filter2d_matches_loop_oracle():
    rng = np.random.default_rng(3)
    img = rng.random((13, 9, 3))
    k = rng.random((5, 4))
    assert np.allclose(kernels.filter2d(img, k), correlate_oracle(img, k), atol=1e-14)


def test_separable_matches_outer_product():
    rng = np.random.default_rng(4)
    img = rng.random((15, 17, 3))
    t = kernels.gaussian_taps(1.3)
    assert np.allclose(kernels.filter_separable(img, t), kernels.filter2d(img, np.outer(t, t)), atol=1e-13)


def test_separable_valid_shape_and_values():
    rng = np.random.default_rng(5)
    img = rng.random((20, 14, 3))
    t = kernels.gaussian_taps(1.5, radius=5)
    out = kernels.filter_separable_valid(img, t)
    assert out.shape == (10, 4, 3)
    w = np.outer(t, t)
    assert np.isclose(out[3, 2, 1], (w * img[3:14, 2:13, 1]).sum(), atol=1e-14)


def test_warp_matches_oracle_including_reflection():
    rng = np.random.default_rng(6)
    img = rng.random((6, 7, 3))
    ys = np.array([[-2.3, 0.0, 3.5, 6.9]])
    xs = np.array([[1.25, -0.5, 8.75, 13.1]])
    out = kernels.warp_bilinear(img, ys, xs)
    for j in range(4):
        assert np.allclose(out[0, j], bilinear_oracle(img, ys[0, j], xs[0, j]), atol=1e-14)


def test_warp_integer_grid_is_identity():
    img = np.random.default_rng(7).random((5, 8, 3))
    yy, xx = np.meshgrid(np.arange(5.0), np.arange(8.0), indexing="ij")
    assert np.array_equal(kernels.warp_bilinear(img, yy, xx), img)


def test_gaussian_taps_normalised_and_symmetric():
    t = kernels.gaussian_taps(2.0)
    assert abs(t.sum() - 1.0) < 1e-15
    assert np.array_equal(t, t[::-1])
    assert kernels.gaussian_taps(0.0).tolist() == [1.0]


@pytest.mark.slow
def test_every_operator_identical_under_both_backends(tmp_path):
    script = textwrap.dedent("""
        import hashlib, numpy as np
        from imdeg.degradations import list_operators, apply_degradation, DegradationSpec
        rng = np.random.default_rng(0)
        x = rng.random((37, 45, 3))
        h = hashlib.sha256()
        for d in list_operators(available_only=True):
            for s in (1, 5):
                h.update(apply_degradation(x, DegradationSpec(d.backend, d.key, s, 3)).tobytes())
        print(h.hexdigest())
    """)
    digests = []
    for flag in ("0", "1"):
        out = subprocess.run([sys.executable, "-c", script], capture_output=True, text=True, check=True,
                             env={**os.environ, "IMDEG_PURE_PYTHON": flag})
        digests.append(out.stdout.strip())
    assert digests[0] == digests[1]
