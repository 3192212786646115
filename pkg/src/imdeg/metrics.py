"""Full-reference strength measures: capped PSNR, SSIM, 1-SSIM, and an
adapter for externally computed scores (e.g. LPIPS from another process).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from imdeg.kernels import filter_separable_valid, gaussian_taps

__all__ = [
    "PSNR_CAP",
    "ExternalScores",
    "MetricId",
    "ScoreNotFoundError",
    "load_scores",
    "one_minus_ssim",
    "parse_metric",
    "psnr",
    "ssim",
    "strength",
]

PSNR_CAP = 50.0
MSE_FLOOR = 1e-5
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2


class ScoreNotFoundError(KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "score not found"


def _pair(ref, deg):
    a = np.asarray(ref, dtype=np.float64)
    b = np.asarray(deg, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValueError("empty images")
    return a, b


def psnr(ref, deg):
    """10*log10(1/MSE) on [0, 1] samples; exactly 50.0 once MSE <= 1e-5."""
    a, b = _pair(ref, deg)
    d = a - b
    mse = float(np.mean(d * d))
    if mse <= MSE_FLOOR:
        return PSNR_CAP
    return 10.0 * math.log10(1.0 / mse)


def ssim(ref, deg):
    """Mean SSIM (11x11 Gaussian window, sigma 1.5), averaged over channels.

    Only windows fully inside the image contribute. The arithmetic is
    arranged so that ``ssim(x, x) == 1.0`` and ``ssim(a, b) == ssim(b, a)``
    hold exactly.
    """
    a, b = _pair(ref, deg)
    if a.ndim == 2:
        a, b = a[..., None], b[..., None]
    if min(a.shape[:2]) < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW} for SSIM, got {a.shape[1]}x{a.shape[0]}")
    taps = gaussian_taps(SSIM_SIGMA, radius=SSIM_WINDOW // 2)
    mu_a = filter_separable_valid(a, taps)
    mu_b = filter_separable_valid(b, taps)
    e_aa = filter_separable_valid(a * a, taps)
    e_bb = filter_separable_valid(b * b, taps)
    e_ab = filter_separable_valid(a * b, taps)
    mu_ab = mu_a * mu_b
    var_a = e_aa - mu_a * mu_a
    var_b = e_bb - mu_b * mu_b
    cov = e_ab - mu_ab
    num = (2.0 * mu_ab + SSIM_C1) * (2.0 * cov + SSIM_C2)
    den = (mu_a * mu_a + mu_b * mu_b + SSIM_C1) * (var_a + var_b + SSIM_C2)
    smap = num / den
    return float(np.mean([smap[..., c].mean() for c in range(smap.shape[-1])]))


def one_minus_ssim(ref, deg):
    return 1.0 - ssim(ref, deg)


@dataclass(frozen=True)
class MetricId:
    """``psnr``, ``one_minus_ssim`` or ``external`` with a score name."""

    kind: str
    name: str = ""

    @property
    def label(self):
        return {"psnr": "psnr", "one_minus_ssim": "1-ssim"}.get(self.kind, f"external:{self.name}")

    @property
    def higher_is_stronger(self):
        return self.kind != "psnr"

    def stronger(self, a, b):
        """True if strength ``a`` is a stronger degradation than ``b``."""
        return a > b if self.higher_is_stronger else a < b

    def __str__(self):
        return self.label


PSNR = MetricId("psnr")
ONE_MINUS_SSIM = MetricId("one_minus_ssim")


def parse_metric(text):
    if isinstance(text, MetricId):
        return text
    t = str(text).strip().lower()
    if t == "psnr":
        return PSNR
    if t in ("1-ssim", "one_minus_ssim", "1_ssim"):
        return ONE_MINUS_SSIM
    if t.startswith("external:") and t.split(":", 1)[1]:
        return MetricId("external", t.split(":", 1)[1])
    raise ValueError(f"unknown metric {text!r} (use psnr, 1-ssim or external:<name>)")


class ExternalScores:
    """Per-image scores computed outside this package, keyed by image id."""

    def __init__(self, metric, scores, source="<memory>"):
        self.metric = metric
        self.scores = dict(scores)
        self.source = source
        for k, v in self.scores.items():
            if not math.isfinite(v):
                raise ValueError(f"{source}: score for {k!r} is not finite")

    def __getitem__(self, image_id):
        try:
            return self.scores[str(image_id)]
        except KeyError:
            raise ScoreNotFoundError(f"{self.source}: no {self.metric} score for image {image_id!r}") from None

    def __contains__(self, image_id):
        return str(image_id) in self.scores

    def __len__(self):
        return len(self.scores)


def load_scores(path):
    """Read ``image_id,<metric>`` CSV; the header's second column names the metric."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows or len(rows[0]) != 2 or rows[0][0].strip() != "image_id":
        raise ValueError(f"{path}: expected header 'image_id,<metric>'")
    metric = rows[0][1].strip()
    scores = {}
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise ValueError(f"{path}:{i}: expected 2 fields, got {len(row)}")
        key = row[0].strip()
        if key in scores:
            raise ValueError(f"{path}:{i}: duplicate image id {key!r}")
        try:
            scores[key] = float(row[1])
        except ValueError:
            raise ValueError(f"{path}:{i}: score {row[1]!r} is not a number") from None
    return ExternalScores(metric, scores, str(path))


def strength(metric, ref=None, deg=None, *, image_id=None, scores=None):
    """Dispatch to the metric; external metrics look ``image_id`` up in ``scores``."""
    m = parse_metric(metric)
    if m.kind == "psnr":
        return psnr(ref, deg)
    if m.kind == "one_minus_ssim":
        return one_minus_ssim(ref, deg)
    if scores is None:
        raise ScoreNotFoundError(f"metric {m.label} needs a score file")
    return scores[image_id]
