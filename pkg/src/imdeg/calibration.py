"""Severity-strength measurement, canonical axes, extrapolation and the
canonical-to-native mapping.

A :class:`StrengthTable` holds the mean strength of one operator at native
levels 1..5 under one metric. The canonical axis takes those five values as
its levels; extra levels continue the last step (or the mean step) beyond the
strongest one, and canonical indices map back to the native level with the
nearest measured strength.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from imdeg.degradations import (
    DEFAULT_SEED,
    LEVELS,
    DegradationSpec,
    active_schedules,
    apply_degradation,
    get_operator,
)
from imdeg.image import as_image, image_digest
from imdeg.metrics import MetricId, parse_metric, strength

__all__ = [
    "Calibration",
    "CanonicalAxis",
    "DegenerateAxisError",
    "StrengthTable",
    "calibrate_distortion",
    "derive_canonical_levels",
    "extrapolate_levels",
    "load_calibration",
    "map_canonical",
    "map_canonical_to_native",
    "measure_strengths",
    "output_stem",
]

DOC_SCHEMA = 1
STEP_POLICIES = ("last", "mean")


class DegenerateAxisError(ValueError):
    """The axis step is zero or points towards weaker degradation."""


def output_stem(image_id, backend, term, level, position=None):
    stem = f"{image_id}_{backend}_{term}_s{level}"
    return stem if position is None else f"{stem}_c{position}"


@dataclass(frozen=True)
class StrengthTable:
    backend: str
    term: str
    metric: MetricId
    strengths: tuple
    n_images: int
    digest: str = ""
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        s = tuple(float(v) for v in self.strengths)
        if len(s) != LEVELS:
            raise ValueError(f"a strength table needs {LEVELS} values, got {len(s)}")
        if not all(math.isfinite(v) for v in s):
            raise ValueError(f"strengths must be finite, got {s}")
        if self.n_images < 1:
            raise ValueError("a strength table needs at least one image")
        object.__setattr__(self, "strengths", s)
        object.__setattr__(self, "metric", parse_metric(self.metric))

    def is_monotone(self, strict=False):
        """True if strength never weakens (strictly grows with ``strict``) over levels 1..5."""
        m = self.metric
        for a, b in zip(self.strengths, self.strengths[1:]):
            if strict and not m.stronger(b, a):
                return False
            if not strict and m.stronger(a, b):
                return False
        return True

    def as_dict(self):
        return {"backend": self.backend, "term": self.term, "metric": self.metric.label,
                "strengths": list(self.strengths), "n_images": self.n_images,
                "image_set_digest": self.digest, "seed": self.seed}


@dataclass(frozen=True)
class CanonicalAxis:
    levels: tuple
    base: int
    delta: float
    metric: MetricId
    policy: str = "last"

    @property
    def K(self):
        return self.base

    @property
    def extrapolated(self):
        return len(self.levels) - self.base

    def as_dict(self):
        return {"levels": list(self.levels), "K": self.base, "delta": self.delta,
                "metric": self.metric.label, "step_policy": self.policy}


def _coerce_images(images, image_ids):
    imgs = [as_image(x) for x in images]
    if not imgs:
        raise ValueError("need at least one reference image")
    ids = list(image_ids) if image_ids is not None else [f"{i:06d}" for i in range(len(imgs))]
    if len(ids) != len(imgs):
        raise ValueError("image_ids and images differ in length")
    return imgs, ids


def measure_strengths(images, backend, term, metric="psnr", *, seed=DEFAULT_SEED,
                      image_ids=None, scores=None, schedules=None):
    """Mean strength per native level over ``images``.

    Each image gets its own random stream (its id, chain position 0). For
    external metrics the per-image score is looked up under the output stem
    ``<id>_<backend>_<term>_s<level>``.
    """
    imgs, ids = _coerce_images(images, image_ids)
    m = parse_metric(metric)
    desc = get_operator(backend, term)
    sched = schedules or active_schedules()
    means = []
    for level in range(1, LEVELS + 1):
        spec = DegradationSpec(desc.backend, desc.key, level, seed)
        vals = []
        for x, iid in zip(imgs, ids):
            if m.kind == "external":
                vals.append(strength(m, image_id=output_stem(iid, desc.backend, desc.key, level),
                                     scores=scores))
                continue
            y = apply_degradation(x, spec, image_id=iid, schedules=sched)
            vals.append(strength(m, x, y))
        means.append(math.fsum(vals) / len(vals))
    return StrengthTable(desc.backend, desc.key, m, tuple(means), len(imgs),
                         image_digest(imgs), int(seed))


def derive_canonical_levels(table, policy="last"):
    """Canonical levels are the measured strengths; the step follows ``policy``."""
    if policy not in STEP_POLICIES:
        raise ValueError(f"step policy must be one of {STEP_POLICIES}, got {policy!r}")
    L = table.strengths
    k = len(L)
    delta = L[-1] - L[-2] if policy == "last" else (L[-1] - L[0]) / (k - 1)
    return CanonicalAxis(tuple(L), k, delta, table.metric, policy)


def extrapolate_levels(axis, m_max):
    """Append ``L_K + m*delta`` for m = 1..m_max."""
    m_max = int(m_max)
    if m_max < 0:
        raise ValueError("m_max must be non-negative")
    if m_max == 0:
        return axis
    d = axis.delta
    if d == 0 or not axis.metric.stronger(d, 0.0):
        direction = "negative" if not axis.metric.higher_is_stronger else "positive"
        raise DegenerateAxisError(
            f"cannot extrapolate: step {d!r} is not {direction} for {axis.metric.label}; "
            "the backend does not cover stronger levels")
    last = axis.levels[axis.base - 1]
    extra = tuple(last + m * d for m in range(1, m_max + 1))
    return CanonicalAxis(axis.levels[: axis.base] + extra, axis.base, d, axis.metric, axis.policy)


@dataclass(frozen=True)
class Mapping:
    native: int
    target: float | None
    saturated: bool


def map_canonical(axis, table, k):
    """Native level for canonical index ``k`` with the target and a saturation flag."""
    if parse_metric(axis.metric) != table.metric:
        raise ValueError(f"axis metric {axis.metric.label} does not match table metric {table.metric.label}")
    k = int(k)
    if k < 1:
        raise ValueError(f"canonical index must be >= 1, got {k}")
    s = table.strengths
    if k > axis.base:
        # extrapolated targets saturate at the strongest measured native level
        if k > len(axis.levels):
            target = None
        else:
            target = axis.levels[k - 1]
        best = 0
        for i in range(1, len(s)):
            if not table.metric.stronger(s[best], s[i]):
                best = i
        return Mapping(best + 1, target, True)
    target = axis.levels[k - 1]
    dist = [abs(v - target) for v in s]
    native = dist.index(min(dist)) + 1  # first minimum = lower level on ties
    return Mapping(native, target, False)


def map_canonical_to_native(axis, table, k):
    return map_canonical(axis, table, k).native


@dataclass
class Calibration:
    """Strength table plus derived axis; indexable like a mapping for the
    common fields (``cal["canonical_strengths"]``)."""

    table: StrengthTable
    axis: CanonicalAxis
    extra: dict = field(default_factory=dict)

    @property
    def canonical_strengths(self):
        return list(self.axis.levels)

    @property
    def native_strengths(self):
        return list(self.table.strengths)

    def native_for(self, k):
        return map_canonical(self.axis, self.table, k)

    def to_dict(self):
        return {
            "schema": DOC_SCHEMA,
            "backend": self.table.backend,
            "term": self.table.term,
            "metric": self.table.metric.label,
            "n_images": self.table.n_images,
            "image_set_digest": self.table.digest,
            "seed": self.table.seed,
            "native_strengths": list(self.table.strengths),
            "canonical_strengths": list(self.axis.levels),
            "K": self.axis.base,
            "delta": self.axis.delta,
            "step_policy": self.axis.policy,
            **self.extra,
        }

    def __getitem__(self, key):
        return self.to_dict()[key]

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def from_dict(cls, doc):
        if doc.get("schema") != DOC_SCHEMA:
            raise ValueError(f"unsupported calibration schema {doc.get('schema')!r}")
        metric = parse_metric(doc["metric"])
        table = StrengthTable(doc["backend"], doc["term"], metric, tuple(doc["native_strengths"]),
                              int(doc["n_images"]), doc.get("image_set_digest", ""),
                              int(doc.get("seed", DEFAULT_SEED)))
        axis = CanonicalAxis(tuple(float(v) for v in doc["canonical_strengths"]), int(doc["K"]),
                             float(doc["delta"]), metric, doc.get("step_policy", "last"))
        known = {"schema", "backend", "term", "metric", "n_images", "image_set_digest", "seed",
                 "native_strengths", "canonical_strengths", "K", "delta", "step_policy"}
        return cls(table, axis, {k: v for k, v in doc.items() if k not in known})


def load_calibration(path):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValueError(f"{path}: not a calibration document ({e})") from e
    return Calibration.from_dict(doc)


def calibrate_distortion(images, backend=None, term=None, metric="psnr", *, paper=None,
                         seed=DEFAULT_SEED, m_max=0, policy="last", image_ids=None, scores=None):
    """Measure strengths, derive the canonical axis and optionally extend it.

    ``paper`` is accepted as an alias of ``backend`` (citation-style ids
    such as ``Agnolucci_WACV_2024`` resolve to their backend).
    """
    from imdeg.api import to_hwc

    backend = backend or paper
    if backend is None or term is None:
        raise TypeError("calibrate_distortion needs a backend (or paper) and a term")
    imgs = [to_hwc(x)[0] for x in images]
    table = measure_strengths(imgs, backend, term, metric, seed=seed, image_ids=image_ids, scores=scores)
    axis = extrapolate_levels(derive_canonical_levels(table, policy), m_max)
    return Calibration(table, axis)


def strictly_monotone(values, metric):
    m = parse_metric(metric)
    return all(m.stronger(b, a) for a, b in zip(values, values[1:]))
