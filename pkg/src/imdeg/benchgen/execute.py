"""Plan execution and JSON-lines manifests.

Output files are named after the chain; the manifest holds one header line
followed by one record per assignment, sorted by output path, so reruns with
equal inputs produce byte-identical manifests whatever the worker count.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from imdeg import __version__
from imdeg.degradations import active_schedules, apply_chain
from imdeg.image import codec_version, encode_image, load_image
from imdeg.metrics import parse_metric, strength
from imdeg.taxonomy import lookup

MANIFEST_SCHEMA = 1
MANIFEST_NAME = "manifest.jsonl"


def chain_stem(image_id, chain):
    """``<id>_<backend>_<term>_s<level>`` plus ``_c<pos>`` per element for chains."""
    steps = list(chain)
    if len(steps) == 1:
        s = steps[0]
        return f"{image_id}_{s.backend}_{s.term}_s{s.severity}"
    parts = [f"{s.backend}_{s.term}_s{s.severity}_c{i}" for i, s in enumerate(steps)]
    return f"{image_id}_" + "_".join(parts)


@dataclass
class Manifest:
    header: dict
    records: list = field(default_factory=list)

    @property
    def failures(self):
        return [r for r in self.records if r["status"] != "ok"]

    def dumps(self):
        lines = [json.dumps(self.header, sort_keys=True)]
        lines += [json.dumps(r, sort_keys=True) for r in self.records]
        return "\n".join(lines) + "\n"

    def write(self, path):
        Path(path).write_text(self.dumps(), encoding="utf-8")


def load_manifest(path):
    lines = [l for l in Path(path).read_text(encoding="utf-8").splitlines() if l.strip()]
    if not lines:
        raise ValueError(f"{path}: empty manifest")
    header = json.loads(lines[0])
    if header.get("kind") != "header" or header.get("schema") != MANIFEST_SCHEMA:
        raise ValueError(f"{path}: not an imdeg manifest (schema {MANIFEST_SCHEMA})")
    return Manifest(header, [json.loads(l) for l in lines[1:]])


def _taxonomy(spec):
    e = lookup(spec.backend, spec.term)
    return {"group": e.group.id, "cause": e.cause_label, "effect": e.effect_label}


def _run_one(job):
    image_id, source, chain, out_dir, fmt, metrics = job
    name = chain_stem(image_id, chain) + (".png" if fmt == "png" else ".jpg")
    rec = {
        "image_id": image_id,
        "source": source,
        "output": name,
        "chain": [s.as_dict() for s in chain],
        "taxonomy": [_taxonomy(s) for s in chain],
    }
    try:
        x = load_image(source)
        y = apply_chain(x, chain, image_id=image_id)
        data = encode_image(y, fmt=fmt)
        Path(out_dir, name).write_bytes(data)
        if metrics:
            rec["strengths"] = {m: strength(m, x, y) for m in metrics}
        rec["status"] = "ok"
    except Exception as e:  # noqa: BLE001 - failures are data, the run continues
        rec["status"] = "failed"
        rec["error"] = f"{type(e).__name__}: {e}"
    return rec


def default_jobs():
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:  # pragma: no cover - non-Linux
        return os.cpu_count() or 1


def execute_plan(plan, sources, out_dir, *, measure=(), fmt="png", jobs=1):
    """Apply every assignment, write images and ``manifest.jsonl`` into ``out_dir``.

    ``sources`` maps image id to file path. Per-assignment failures become
    ``status: failed`` records; the returned manifest lists them.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt not in ("png", "jpeg"):
        raise ValueError(f"output format must be png or jpeg, got {fmt!r}")
    metrics = []
    for m in measure:
        mid = parse_metric(m)
        if mid.kind == "external":
            raise ValueError(f"{mid.label} cannot be measured here; merge it with the report command")
        metrics.append(mid.label)
    jobs_list = [(a.image_id, str(sources[a.image_id]), a.chain, str(out_dir), fmt, tuple(metrics))
                 for a in plan]
    if int(jobs) <= 1 or len(jobs_list) <= 1:
        records = [_run_one(j) for j in jobs_list]
    else:
        with ProcessPoolExecutor(max_workers=int(jobs)) as ex:
            records = list(ex.map(_run_one, jobs_list, chunksize=max(1, len(jobs_list) // (4 * int(jobs)))))
    names = [r["output"] for r in records]
    if len(set(names)) != len(names):
        raise ValueError("plan produces duplicate output names")
    records.sort(key=lambda r: r["output"])
    sched = active_schedules()
    header = {
        "kind": "header",
        "schema": MANIFEST_SCHEMA,
        "imdeg_version": __version__,
        "protocol": plan.protocol,
        "seed": plan.seed,
        "config_digest": plan.config_digest,
        "schedule_version": sched.version,
        "schedule_sha256": sched.sha256,
        "codec_version": codec_version(),
        "format": fmt,
        "measured": metrics,
        "count": len(records),
        "failed": sum(r["status"] != "ok" for r in records),
    }
    manifest = Manifest(header, records)
    manifest.write(out_dir / MANIFEST_NAME)
    return manifest
