"""Degradation operators for the three backend families.

Every operator is a pure function ``fn(img, params, rng) -> img`` registered
in the catalog together with its tier, stochasticity and monotonicity flags.
Parameters for native levels 1..5 come from the schedule file.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from imdeg.degradations import arniqa, hendrycks, liu  # noqa: F401  (registration)
from imdeg.degradations.catalog import (
    LEVELS,
    OperatorDescriptor,
    ScheduleError,
    Schedules,
    UnavailableOperatorError,
    active_schedules,
    catalog,
    load_schedules,
)
from imdeg.image import RngStream, as_image, freeze
from imdeg.taxonomy import UnknownOperatorError, resolve_backend, resolve_term

__all__ = [
    "BACKENDS",
    "ChainSpec",
    "DegradationSpec",
    "LEVELS",
    "OperatorDescriptor",
    "ScheduleError",
    "Schedules",
    "UnavailableOperatorError",
    "active_schedules",
    "apply_chain",
    "apply_degradation",
    "apply_params",
    "get_operator",
    "list_operators",
    "load_schedules",
    "operator_keys",
]

BACKENDS = ("hendrycks", "arniqa", "liu")
DEFAULT_SEED = 2024


@dataclass(frozen=True)
class DegradationSpec:
    backend: str
    term: str
    severity: int
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        backend = resolve_backend(self.backend)
        object.__setattr__(self, "backend", backend)
        object.__setattr__(self, "term", resolve_term(backend, self.term))
        sev = self.severity
        if isinstance(sev, bool) or int(sev) != sev or not 1 <= int(sev) <= LEVELS:
            raise ValueError(f"native severity must be an integer in 1..{LEVELS}, got {sev!r}")
        object.__setattr__(self, "severity", int(sev))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def key(self):
        return (self.backend, self.term)

    def as_dict(self):
        return {"backend": self.backend, "term": self.term,
                "severity": self.severity, "seed": self.seed}


@dataclass(frozen=True)
class ChainSpec:
    steps: tuple

    def __post_init__(self):
        steps = tuple(self.steps)
        if not steps:
            raise ValueError("a chain needs at least one degradation")
        if not all(isinstance(s, DegradationSpec) for s in steps):
            raise TypeError("chain elements must be DegradationSpec")
        object.__setattr__(self, "steps", steps)

    def __iter__(self):
        return iter(self.steps)

    def __len__(self):
        return len(self.steps)


def operator_keys():
    """All shipped (backend, term) keys, in registration order."""
    return list(catalog())


def get_operator(backend, term):
    backend = resolve_backend(backend)
    term = resolve_term(backend, term)
    try:
        return catalog()[(backend, term)]
    except KeyError:
        raise UnknownOperatorError(f"unknown operator {backend}/{term}") from None


def list_operators(backend=None, tiers=(1, 2), available_only=False):
    """Descriptors in registry order, optionally filtered by backend and tier."""
    b = resolve_backend(backend) if backend is not None else None
    out = []
    for desc in catalog().values():
        if b is not None and desc.backend != b:
            continue
        if desc.tier not in tiers:
            continue
        if available_only and not desc.available:
            continue
        out.append(desc)
    return out


def apply_params(img, desc, params, *, seed=DEFAULT_SEED, image_id=0, position=0):
    """Run operator ``desc`` with explicit parameters; output is clamped and read-only."""
    if not desc.available:
        raise UnavailableOperatorError(
            f"operator {desc.backend}/{desc.key} needs {', '.join(desc.missing)}"
            " (set IMDEG_ASSETS or install the optional dependency)")
    x = as_image(img)
    rng = RngStream(seed, image_id, position).generator()
    y = desc.fn(x.copy(), tuple(params), rng)
    y = np.clip(np.asarray(y, dtype=np.float64), 0.0, 1.0)
    if y.shape != x.shape:
        raise AssertionError(f"{desc.backend}/{desc.key} changed shape {x.shape} -> {y.shape}")
    return freeze(np.ascontiguousarray(y))


def apply_degradation(img, spec, *, image_id=0, position=0, schedules=None):
    """Apply one native-level degradation.

    The random stream is keyed by ``(spec.seed, image_id, position)``;
    deterministic operators never draw from it.
    """
    desc = get_operator(spec.backend, spec.term)
    params = (schedules or active_schedules()).params(desc.backend, desc.key, spec.severity)
    return apply_params(img, desc, params, seed=spec.seed, image_id=image_id, position=position)


def apply_chain(img, chain, *, image_id=0, schedules=None):
    """Left-to-right fold; the chain position feeds the random stream id."""
    if isinstance(chain, DegradationSpec):
        chain = ChainSpec((chain,))
    elif not isinstance(chain, ChainSpec):
        chain = ChainSpec(tuple(chain))
    out = as_image(img)
    for pos, spec in enumerate(chain):
        out = apply_degradation(out, spec, image_id=image_id, position=pos, schedules=schedules)
    return out
