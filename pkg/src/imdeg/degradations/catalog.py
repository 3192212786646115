"""Operator catalog, schedule file handling and feature gating."""

from __future__ import annotations

import hashlib
import importlib.util
import json
import os
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Callable

SCHEDULE_SCHEMA = 1
LEVELS = 5


class UnavailableOperatorError(RuntimeError):
    """A tier-2 operator whose assets or optional features are missing."""


class ScheduleError(ValueError):
    """Malformed or incomplete schedule file."""


@dataclass(frozen=True)
class OperatorDescriptor:
    backend: str
    key: str
    fn: Callable = field(repr=False, compare=False)
    tier: int = 1
    stochastic: bool = False
    monotone: bool = False
    requires: tuple[str, ...] = ()

    @property
    def schedule(self):
        return active_schedules().levels(self.backend, self.key)

    @property
    def missing(self):
        return [r for r in self.requires if not feature_available(r)]

    @property
    def available(self):
        return not self.missing


_CATALOG: dict[tuple[str, str], OperatorDescriptor] = {}


def operator(backend, key, *, tier=1, stochastic=False, monotone=False, requires=()):
    """Register ``fn(img, params, rng) -> img`` as a backend operator."""

    def deco(fn):
        desc = OperatorDescriptor(backend, key, fn, tier, stochastic, monotone, tuple(requires))
        if desc_key(desc) in _CATALOG:
            raise ValueError(f"operator {backend}/{key} registered twice")
        _CATALOG[desc_key(desc)] = desc
        return fn

    return deco


def desc_key(desc):
    return (desc.backend, desc.key)


def catalog():
    return _CATALOG


def assets_dir():
    env = os.environ.get("IMDEG_ASSETS")
    return Path(env) if env else None


def asset_files(kind):
    root = assets_dir()
    if root is None or not (root / kind).is_dir():
        return []
    return sorted(p for p in (root / kind).iterdir()
                  if p.suffix.lower() in (".png", ".jpg", ".jpeg"))


def feature_available(req):
    kind, _, name = req.partition(":")
    if kind == "asset":
        return bool(asset_files(name))
    if kind == "module":
        return importlib.util.find_spec(name) is not None
    if kind == "codec":
        from PIL import features

        return bool(features.check(name))
    raise ValueError(f"unknown requirement {req!r}")


class Schedules:
    """Parsed schedule document: five parameter tuples per (backend, term)."""

    def __init__(self, doc, raw, source):
        self.doc = doc
        self.source = source
        self.version = doc.get("version", "")
        self.sha256 = hashlib.sha256(raw).hexdigest()

    def levels(self, backend, term):
        try:
            return [tuple(p) for p in self.doc["backends"][backend][term]]
        except KeyError:
            raise ScheduleError(f"{self.source}: no schedule for {backend}/{term}") from None

    def params(self, backend, term, severity):
        if not 1 <= int(severity) <= LEVELS:
            raise ValueError(f"native severity must be in 1..{LEVELS}, got {severity}")
        return self.levels(backend, term)[int(severity) - 1]

    def problems(self, operators=None):
        out = []
        backends = self.doc.get("backends")
        if self.doc.get("schema") != SCHEDULE_SCHEMA:
            out.append(f"{self.source}: unsupported schema {self.doc.get('schema')!r}")
        if not isinstance(backends, dict):
            return out + [f"{self.source}: missing 'backends' table"]
        for backend, terms in backends.items():
            for term, levels in terms.items():
                if not isinstance(levels, list) or len(levels) != LEVELS:
                    n = len(levels) if isinstance(levels, list) else "?"
                    out.append(f"{self.source}: {backend}/{term} has {n} levels, expected {LEVELS}")
                    continue
                for i, lv in enumerate(levels, start=1):
                    if not isinstance(lv, list) or not lv:
                        out.append(f"{self.source}: {backend}/{term} level {i} is not a parameter list")
        for backend, term in operators or ():
            if term not in backends.get(backend, {}):
                out.append(f"{self.source}: operator {backend}/{term} has no schedule")
        return out


def load_schedules(path=None):
    if path is None:
        raw = resources.files("imdeg").joinpath("data/schedules.json").read_bytes()
        source = "imdeg/data/schedules.json"
    else:
        raw = Path(path).read_bytes()
        source = str(path)
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ScheduleError(f"{source}: not valid JSON ({e})") from e
    return Schedules(doc, raw, source)


@lru_cache(maxsize=8)
def _cached(path):
    return load_schedules(path)


def active_schedules():
    """Schedule set in effect: ``IMDEG_SCHEDULES`` if set, else the packaged file."""
    return _cached(os.environ.get("IMDEG_SCHEDULES") or None)
