"""Cause x effect taxonomy: canonical groups G1-G12, TV subtypes, and the
per-backend operator registry.

The registry lives in ``data/taxonomy.csv`` so the mappings can be diffed and
edited without touching code.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

__all__ = [
    "BACKEND_ALIASES",
    "CanonicalGroup",
    "Cause",
    "Effect",
    "GROUPS",
    "Registry",
    "RegistryError",
    "TaxonomyEntry",
    "TV_SUBTYPES",
    "TvSubtype",
    "UnknownOperatorError",
    "default_registry",
    "group_of",
    "load_registry",
    "lookup",
    "parse_cause",
    "resolve_backend",
    "resolve_term",
    "validate_registry",
]


class Cause(str, enum.Enum):
    E = "E"  # Environment
    S = "S"  # Sensor/Optics
    R = "R"  # ISP/Renderer/Codec
    T = "T"  # Transfer/System


class Effect(str, enum.Enum):
    N = "N"
    B = "B"
    WX = "WX"
    CP = "CP"
    CL = "CL"
    IL = "IL"
    GD = "GD"
    RZ = "RZ"
    OC = "OC"
    TX = "TX"
    TV = "TV"


@dataclass(frozen=True)
class CanonicalGroup:
    id: str
    name: str
    primary_cause: Cause | None  # None: variable (G12)
    primary_effect: Effect | None  # None: no effect code (G11)
    description: str


GROUPS: dict[str, CanonicalGroup] = {
    g.id: g
    for g in (
        CanonicalGroup("G1", "Noise", Cause.S, Effect.N,
                       "Stochastic or defective sensor/ISP signals."),
        CanonicalGroup("G2", "Blur", Cause.S, Effect.B,
                       "Per-frame focus, motion, zoom or glass-scattering blur."),
        CanonicalGroup("G3", "Resolution / Sampling", Cause.R, Effect.RZ,
                       "Down/upsampling, scaling and pixelation."),
        CanonicalGroup("G4", "Compression / Quantization", Cause.R, Effect.CP,
                       "Lossy codec artefacts and quantization."),
        CanonicalGroup("G5", "Color / White balance", Cause.R, Effect.CL,
                       "White balance, color space conversion and saturation changes."),
        CanonicalGroup("G6", "Brightness / Exposure", Cause.R, Effect.IL,
                       "Brightness, gamma, black level, vignetting, low light."),
        CanonicalGroup("G7", "Geometry / Spatial", Cause.R, Effect.GD,
                       "Per-frame geometric distortions."),
        CanonicalGroup("G8", "Weather / Medium", Cause.E, Effect.WX,
                       "Fog, snow, frost, spatter and other medium effects."),
        CanonicalGroup("G9", "Occlusion / Obstruction", Cause.E, Effect.OC,
                       "Lens obstruction, dirt, droplets, occluding objects."),
        CanonicalGroup("G10", "Sharpness / Contrast / Texture", Cause.R, Effect.TX,
                       "Sharpening, contrast operators, tone mapping."),
        CanonicalGroup("G11", "System / Transfer / Board", Cause.T, None,
                       "System- and board-level failures in the data path."),
        CanonicalGroup("G12", "Temporal / Video", None, Effect.TV,
                       "Purely temporal artefacts (flicker, wobble, frame drops)."),
    )
}


@dataclass(frozen=True)
class TvSubtype:
    code: str
    default_source: tuple[Cause, ...]
    name: str


TV_SUBTYPES: dict[str, TvSubtype] = {
    t.code: t
    for t in (
        TvSubtype("tv_flicker", (Cause.E, Cause.R), "Temporal flicker"),
        TvSubtype("tv_awb_osc", (Cause.R,), "AWB oscillation"),
        TvSubtype("tv_rs_wobble", (Cause.S,), "Rolling-shutter wobble"),
        TvSubtype("tv_af_hunting", (Cause.S,), "Autofocus hunting"),
        TvSubtype("tv_ois_jitter", (Cause.S,), "OIS jitter"),
        TvSubtype("tv_ghosting", (Cause.R,), "Temporal ghosting"),
        TvSubtype("tv_stab_jitter", (Cause.R,), "Stabilization jitter"),
        TvSubtype("tv_vfr", (Cause.R,), "Variable frame-rate artefacts"),
        TvSubtype("tv_drop_repeat", (Cause.T,), "Frame drop/repeat"),
        TvSubtype("tv_desync", (Cause.T,), "Timing / AV desynchronization"),
        TvSubtype("tv_gop_loss", (Cause.T,), "GOP / slice loss"),
        TvSubtype("tv_seq_transforms", (Cause.R,), "Sequential transforms"),
    )
}

BACKEND_ALIASES = {
    "hendrycks": "hendrycks",
    "hendrycks_iclr_2019": "hendrycks",
    "imagenet-c": "hendrycks",
    "arniqa": "arniqa",
    "agnolucci_wacv_2024": "arniqa",
    "kadid": "arniqa",
    "liu": "liu",
    "liu_ijcv_2024": "liu",
}

# short operator names used by the reference IQA implementation
TERM_ALIASES = {
    "arniqa": {
        "gaublur": "gaussian_blur",
        "lensblur": "lens_blur",
        "motionblur": "motion_blur",
        "whitenoise": "white_noise",
        "whitenoisecc": "white_noise_cc",
        "impulsenoise": "impulse_noise",
        "multnoise": "multiplicative_noise",
        "meanshift": "mean_shift",
        "colordiff": "color_diffusion",
        "colorshift": "color_shift",
        "colorsat1": "color_saturation1",
        "colorsat2": "color_saturation2",
        "jpeg2000": "jpeg2000",
        "noneccpatch": "non_eccentricity_patch",
        "colorblock": "color_block",
        "highsharpen": "high_sharpen",
        "lincontrchange": "linear_contrast_change",
        "nonlincontrchange": "nonlinear_contrast_change",
    },
    "hendrycks": {"jpeg_compression": "jpeg"},
}


class RegistryError(ValueError):
    """Malformed registry file (syntax, not semantics)."""


class UnknownOperatorError(KeyError):
    """No registry entry / operator for a (backend, term) key."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown operator"


def resolve_backend(backend):
    key = str(backend).strip().lower()
    try:
        return BACKEND_ALIASES[key]
    except KeyError:
        raise UnknownOperatorError(f"unknown backend {backend!r}") from None


def resolve_term(backend, term):
    t = str(term).strip().lower().replace("-", "_")
    aliases = TERM_ALIASES.get(backend, {})
    return aliases.get(t, aliases.get(t.replace("_", ""), t))


def parse_cause(text):
    """'S' -> (S,), 'S/R' -> (S, R); dominant cause first."""
    parts = [p.strip() for p in text.split("/") if p.strip()]
    if not parts:
        raise ValueError(f"empty cause {text!r}")
    return tuple(Cause(p) for p in parts)


@dataclass(frozen=True)
class TaxonomyEntry:
    backend: str
    term: str
    original_category: str
    group: CanonicalGroup
    cause: tuple[Cause, ...]
    effect: Effect | None
    tv_subtype: TvSubtype | None = None

    @property
    def key(self):
        return (self.backend, self.term)

    @property
    def cause_label(self):
        return "/".join(c.value for c in self.cause)

    @property
    def effect_label(self):
        return self.effect.value if self.effect else "none"

    def as_dict(self):
        return {
            "cause": self.cause_label,
            "effect": self.effect_label,
            "group": self.group.id,
            **({"tv_subtype": self.tv_subtype.code} if self.tv_subtype else {}),
        }


@dataclass(frozen=True)
class RawRecord:
    """One parsed registry line before semantic checks."""

    line: int
    backend: str
    term: str
    original_category: str
    group: str
    cause: str
    effect: str
    tv_subtype: str | None


class Registry:
    """Immutable collection of registry records with a key index."""

    def __init__(self, records, source="<memory>"):
        self.records = tuple(records)
        self.source = source
        self._entries = {}
        for rec in self.records:
            try:
                entry = _build_entry(rec)
            except (KeyError, ValueError):
                continue
            self._entries.setdefault(entry.key, entry)

    def __iter__(self):
        return iter(self._entries.values())

    def __len__(self):
        return len(self._entries)

    def __contains__(self, key):
        return key in self._entries

    def get(self, backend, term):
        return self._entries.get((backend, term))

    def lookup(self, backend, term):
        b = resolve_backend(backend)
        t = resolve_term(b, term)
        entry = self._entries.get((b, t))
        if entry is None:
            raise UnknownOperatorError(f"no taxonomy entry for ({backend}, {term})")
        return entry

    def entries(self, backend=None):
        return [e for e in self if backend is None or e.backend == backend]


def _build_entry(rec):
    group = GROUPS[rec.group]
    effect = None if rec.effect.lower() in ("none", "--", "") else Effect(rec.effect)
    tv = TV_SUBTYPES[rec.tv_subtype] if rec.tv_subtype else None
    return TaxonomyEntry(rec.backend, rec.term, rec.original_category, group,
                         parse_cause(rec.cause), effect, tv)


def parse_registry(text, source="<memory>"):
    records = []
    reader = csv.reader(io.StringIO(text))
    for lineno, row in enumerate(reader, start=1):
        if not row or row[0].lstrip().startswith("#") or not "".join(row).strip():
            continue
        row = [c.strip() for c in row]
        if len(row) not in (6, 7):
            raise RegistryError(f"{source}:{lineno}: expected 6 or 7 fields, got {len(row)}")
        records.append(RawRecord(lineno, row[0], row[1], row[2], row[3], row[4], row[5],
                                 row[6] or None if len(row) == 7 else None))
    return Registry(records, source)


def load_registry(path=None):
    """Parse a registry file (defaults to the packaged one)."""
    if path is None:
        text = resources.files("imdeg").joinpath("data/taxonomy.csv").read_text(encoding="utf-8")
        return parse_registry(text, "imdeg/data/taxonomy.csv")
    path = Path(path)
    return parse_registry(path.read_text(encoding="utf-8"), str(path))


@lru_cache(maxsize=1)
def default_registry():
    reg = load_registry()
    problems = validate_registry(reg)
    if problems:
        raise RegistryError("packaged registry is invalid:\n" + "\n".join(problems))
    return reg


def lookup(backend, term, registry=None):
    """Taxonomy entry for an operator; raises UnknownOperatorError if absent."""
    return (registry or default_registry()).lookup(backend, term)


def group_of(cause, effect):
    """Canonical group for a (cause, effect) pair, or None if uncovered.

    ``effect=None`` addresses G11; any cause with effect TV lands in G12.
    """
    cause = Cause(cause) if cause is not None else None
    effect = Effect(effect) if effect is not None else None
    for g in GROUPS.values():
        if g.primary_effect != effect:
            continue
        if g.primary_cause is None or g.primary_cause == cause:
            return g
    return None


def validate_registry(registry, operators=None):
    """List of human-readable violations; empty means the registry is sound.

    ``operators`` is an iterable of (backend, term) keys that must each have
    exactly one entry (defaults to every shipped operator).
    """
    problems = []
    seen = {}
    for rec in registry.records:
        where = f"{registry.source}:{rec.line}"
        key = (rec.backend, rec.term)
        if key in seen:
            problems.append(f"{where}: duplicate entry for {rec.backend}/{rec.term} "
                            f"(first at line {seen[key]})")
            continue
        seen[key] = rec.line
        if rec.backend not in set(BACKEND_ALIASES.values()):
            problems.append(f"{where}: unknown backend {rec.backend!r}")
        if rec.group not in GROUPS:
            problems.append(f"{where}: {rec.backend}/{rec.term} references unknown group {rec.group!r}")
            continue
        try:
            parse_cause(rec.cause)
        except ValueError:
            problems.append(f"{where}: {rec.backend}/{rec.term} has invalid cause {rec.cause!r}")
        try:
            effect = None if rec.effect.lower() in ("none", "--", "") else Effect(rec.effect)
        except ValueError:
            problems.append(f"{where}: {rec.backend}/{rec.term} has invalid effect {rec.effect!r}")
            continue
        group = GROUPS[rec.group]
        if effect != group.primary_effect:
            problems.append(f"{where}: {rec.backend}/{rec.term} effect {rec.effect} "
                            f"inconsistent with {group.id}")
        if rec.tv_subtype and rec.tv_subtype not in TV_SUBTYPES:
            problems.append(f"{where}: {rec.backend}/{rec.term} unknown TV subtype {rec.tv_subtype!r}")
        if effect == Effect.TV and not rec.tv_subtype:
            problems.append(f"{where}: {rec.backend}/{rec.term} is a TV entry without a TV subtype")
    if operators is None:
        from imdeg.degradations import operator_keys

        operators = operator_keys()
    for backend, term in operators:
        if (backend, term) not in seen:
            problems.append(f"operator {backend}/{term} has no taxonomy entry")
    return problems
