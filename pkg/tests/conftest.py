import time
from functools import lru_cache

import numpy as np
import pytest

# criterion number -> (passed | None for skipped, detail)
ACCEPTANCE = {}

NATURAL_SOURCES = (
    "astronaut", "coffee", "chelsea", "rocket", "hubble_deep_field",
    "immunohistochemistry", "retina",
)


@lru_cache(maxsize=None)
def _source(name):
    from skimage import data

    img = getattr(data, name)()
    return np.asarray(img[..., :3], dtype=np.float64) / 255.0


@lru_cache(maxsize=None)
def natural_crops(n, size, seed=0):
    """``n`` deterministic size x size crops cycling over the skimage photos."""
    from skimage.transform import resize

    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        src = _source(NATURAL_SOURCES[i % len(NATURAL_SOURCES)])
        h, w = src.shape[:2]
        # vary the scale a little so crops of one photo are not near-duplicates
        side = int(min(h, w) * rng.uniform(0.45, 0.95))
        y0 = int(rng.integers(0, h - side + 1))
        x0 = int(rng.integers(0, w - side + 1))
        crop = resize(src[y0:y0 + side, x0:x0 + side], (size, size), anti_aliasing=True)
        crop = np.clip(crop, 0.0, 1.0)
        crop.setflags(write=False)
        out.append(crop)
    return tuple(out)


@pytest.fixture(scope="session")
def natural50():
    return natural_crops(50, 224)


@pytest.fixture(scope="session")
def natural10():
    return natural_crops(10, 96)


@pytest.fixture
def photo():
    return natural_crops(1, 64)[0]


@pytest.fixture
def record_criterion():
    """Record a pass/fail line for an acceptance criterion, with runtime."""

    def rec(number, title, budget_s):
        return _Recorder(number, title, budget_s)

    return rec


class _Recorder:
    def __init__(self, number, title, budget):
        self.number, self.title, self.budget = number, title, budget

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def skip(self, reason):
        ACCEPTANCE[self.number] = (None, f"{self.title}: SKIPPED ({reason})")
        pytest.skip(reason)

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None and issubclass(exc_type, pytest.skip.Exception):
            return False
        dt = time.perf_counter() - self.t0
        ok = exc_type is None and dt < self.budget
        note = "" if dt < self.budget else f" over budget {self.budget:g}s"
        ACCEPTANCE[self.number] = (ok, f"{self.title} [{dt:.2f}s]{note}")
        if exc_type is None and not ok:
            pytest.fail(f"criterion {self.number} took {dt:.2f}s, budget {self.budget:g}s")
        return False


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
        tr.write_line(f"criterion {n:2d}: {status}  {detail}")
