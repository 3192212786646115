"""``imdeg`` command line: calibrate, apply, generate, report, validate.

Exit codes: 0 success, 1 completed with failures or violations, 2 usage or
configuration error. Options may also come from a JSON file given with
``--config``; flags on the command line take precedence.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

DEFAULT_SEED = 2024
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")

# options that hold lists, per command (config files may give a bare value)
LIST_KEYS = {
    "calibrate": ("inputs", "term", "metric", "scores"),
    "generate": ("inputs", "backend", "term", "tiers", "metric"),
    "report": ("inputs", "metric", "scores"),
}

DEFAULTS = {
    "seed": DEFAULT_SEED,
    "mode": "native",
    "m_max": 0,
    "step_policy": "last",
    "protocol": "cartesian",
    "format": "png",
    "k": 2,
    "tiers": [1, 2],
}


class UsageError(Exception):
    pass


def _collect_images(paths):
    files = []
    for p in paths or ():
        p = Path(p)
        if p.is_dir():
            files += sorted(f for f in p.iterdir() if f.suffix.lower() in IMAGE_SUFFIXES)
        elif p.is_file():
            files.append(p)
        else:
            raise UsageError(f"no such file or directory: {p}")
    if not files:
        raise UsageError("no input images found")
    stems = [f.stem for f in files]
    if len(set(stems)) != len(stems):
        raise UsageError("input images must have distinct file names (stems are image ids)")
    return files


def _add_common(p, *, metric=False, seed=True):
    p.add_argument("--config", help="JSON file with option values (flags win)")
    if seed:
        p.add_argument("--seed", type=int, help=f"global seed (default {DEFAULT_SEED})")
    if metric:
        p.add_argument("--metric", action="append",
                       help="psnr | 1-ssim | external:<name>; repeatable")


def build_parser():
    ap = argparse.ArgumentParser(prog="imdeg", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="measure severity-strength tables and derive canonical axes")
    p.add_argument("inputs", nargs="*", help="reference images or directories")
    p.add_argument("--backend")
    p.add_argument("--term", action="append", help="operator key; repeatable (default: all available)")
    p.add_argument("--m-max", dest="m_max", type=int, help="extra extrapolated canonical levels")
    p.add_argument("--step-policy", dest="step_policy", choices=("last", "mean"))
    p.add_argument("--scores", action="append", help="external score CSV (image_id,<metric>)")
    p.add_argument("--out", help="calibration file, or directory for several")
    _add_common(p, metric=True)

    p = sub.add_parser("apply", help="degrade one image")
    p.add_argument("input")
    p.add_argument("--backend")
    p.add_argument("--term")
    p.add_argument("--severity", type=int)
    p.add_argument("--mode", choices=("native", "canonical"))
    p.add_argument("--calibration", help="calibration file (canonical mode)")
    p.add_argument("--format", choices=("png", "jpeg"))
    p.add_argument("--out", help="output file")
    _add_common(p)

    p = sub.add_parser("generate", help="build a degraded dataset with a manifest")
    p.add_argument("inputs", nargs="*")
    p.add_argument("--protocol", choices=("round_robin", "cartesian", "chain_factorial", "random_chains"))
    p.add_argument("--backend", action="append", help="restrict to backend(s); repeatable")
    p.add_argument("--term", action="append",
                   help="operator as <backend>/<term> or <term> with one --backend; repeatable, order kept")
    p.add_argument("--tier", dest="tiers", type=int, action="append", choices=(1, 2))
    p.add_argument("--levels", help="comma-separated native levels (default 1-5)")
    p.add_argument("--k", type=int, help="chain length for random_chains")
    p.add_argument("--jobs", type=int, help="worker processes (default: available CPUs)")
    p.add_argument("--format", choices=("png", "jpeg"))
    p.add_argument("--out", help="output directory")
    _add_common(p, metric=True)

    p = sub.add_parser("report", help="severity tables from manifests or calibration files")
    p.add_argument("inputs", nargs="*", help="manifest.jsonl and/or calibration .json files")
    p.add_argument("--scores", action="append", help="external score CSV to merge (manifest input)")
    p.add_argument("--out", help="directory for severity.csv and severity.txt")
    _add_common(p, metric=True, seed=False)

    p = sub.add_parser("validate", help="check taxonomy registry and schedule file")
    p.add_argument("--registry", help="registry CSV (default: packaged)")
    p.add_argument("--schedules", help="schedule JSON (default: active)")
    _add_common(p, seed=False)
    return ap


def _merge_config(args):
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config {args.config}: {e}") from e
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        for key, val in cfg.items():
            key = key.replace("-", "_")
            if not hasattr(args, key):
                raise UsageError(f"unknown config key {key!r} for {args.command}")
            if getattr(args, key) in (None, []):
                setattr(args, key, val)
    for key, val in DEFAULTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, val)
    for key in LIST_KEYS.get(args.command, ()):
        v = getattr(args, key, None)
        if isinstance(v, (str, int)):
            setattr(args, key, [v])
    return args


def _load_scores(paths):
    from imdeg.metrics import load_scores

    try:
        return [load_scores(p) for p in paths or ()]
    except (OSError, ValueError) as e:
        raise UsageError(str(e)) from e


def cmd_calibrate(args):
    from imdeg.calibration import calibrate_distortion
    from imdeg.degradations import list_operators
    from imdeg.image import load_image
    from imdeg.metrics import parse_metric

    if not args.backend:
        raise UsageError("--backend is required")
    files = _collect_images(args.inputs)
    metrics = [parse_metric(m) for m in args.metric or ["psnr"]]
    if args.term:
        terms = list(args.term)
    else:
        terms = [d.key for d in list_operators(args.backend, available_only=True)]
    scores = {s.metric.lower(): s for s in _load_scores(args.scores)}
    images = [load_image(f) for f in files]
    ids = [f.stem for f in files]
    jobs = [(t, m) for t in terms for m in metrics]
    out = Path(args.out) if args.out else Path(".")
    many = len(jobs) > 1
    if many or not args.out or out.is_dir():
        out.mkdir(parents=True, exist_ok=True)
    for term, m in jobs:
        ext = scores.get(m.name) if m.kind == "external" else None
        if m.kind == "external" and ext is None:
            raise UsageError(f"metric {m.label} needs --scores with a '{m.name}' column")
        cal = calibrate_distortion(images, args.backend, term, m, seed=args.seed, m_max=args.m_max,
                                   policy=args.step_policy, image_ids=ids, scores=ext)
        t = cal.table
        target = out / f"{t.backend}_{t.term}_{m.label.replace(':', '-')}.json" \
            if (many or out.is_dir()) else out
        target.parent.mkdir(parents=True, exist_ok=True)
        cal.save(target)
        vals = ", ".join(f"{v:.6g}" for v in t.strengths)
        print(f"{t.backend}/{t.term} {m.label} N={t.n_images}: ({vals}) -> {target}")
    return 0


def cmd_apply(args):
    from imdeg.api import SaturationWarning, apply_degradation
    from imdeg.calibration import load_calibration
    from imdeg.image import encode_image, load_image

    if not args.backend or not args.term or args.severity is None:
        raise UsageError("--backend, --term and --severity are required")
    cal = None
    if args.mode == "canonical":
        if not args.calibration:
            raise UsageError("canonical mode requires --calibration")
        try:
            cal = load_calibration(args.calibration)
        except (OSError, ValueError, KeyError) as e:
            raise UsageError(f"cannot read calibration: {e}") from e
    elif not 1 <= args.severity <= 5:
        raise UsageError("native severity must be in 1..5")
    src = Path(args.input)
    x = load_image(src)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", SaturationWarning)
        if cal is not None:
            from imdeg.api import resolve_native

            native, _ = resolve_native(args.severity, "canonical", cal)
            print(f"canonical level {args.severity} -> native level {native}")
        y = apply_degradation(x, backend=args.backend, term=args.term, severity=args.severity,
                              mode=args.mode, calibration=cal, seed=args.seed, image_id=src.stem)
    for w in caught:
        if issubclass(w.category, SaturationWarning):
            print(f"warning: {w.message}", file=sys.stderr)
    suffix = ".png" if args.format == "png" else ".jpg"
    out = Path(args.out) if args.out else src.with_name(
        f"{src.stem}_{args.backend}_{args.term}_s{args.severity}{suffix}")
    out.write_bytes(encode_image(y, fmt=args.format))
    print(f"wrote {out}")
    return 0


def _resolve_operators(args):
    from imdeg.degradations import get_operator, list_operators

    if args.term:
        ops = []
        for t in args.term:
            if "/" in t:
                b, _, key = t.partition("/")
            elif args.backend and len(args.backend) == 1:
                b, key = args.backend[0], t
            else:
                raise UsageError(f"--term {t!r} needs a backend: use <backend>/<term> or one --backend")
            ops.append(get_operator(b, key))
        return ops
    backends = args.backend or [None]
    ops = [d for b in backends for d in list_operators(b, tiers=tuple(args.tiers), available_only=True)]
    if not ops:
        raise UsageError("no operators selected")
    return ops


def cmd_generate(args):
    from imdeg.benchgen import default_jobs, execute_plan, make_plan

    files = _collect_images(args.inputs)
    if not args.out:
        raise UsageError("--out is required")
    ops = _resolve_operators(args)
    for d in ops:
        if not d.available:
            raise UsageError(f"operator {d.backend}/{d.key} unavailable: needs {', '.join(d.missing)}")
    levels = None
    if args.levels:
        try:
            levels = [int(v) for v in str(args.levels).split(",")]
        except ValueError:
            raise UsageError(f"bad --levels {args.levels!r}") from None
    ids = [f.stem for f in files]
    try:
        plan = make_plan(args.protocol, ids, ops, seed=args.seed, k=args.k, levels=levels)
    except ValueError as e:
        raise UsageError(str(e)) from e
    jobs = args.jobs if args.jobs is not None else default_jobs()
    measure = args.metric or []
    manifest = execute_plan(plan, dict(zip(ids, files)), args.out, measure=measure,
                            fmt=args.format, jobs=jobs)
    failed = manifest.failures
    for r in failed:
        print(f"failed: {r['output']}: {r['error']}", file=sys.stderr)
    print(f"{args.protocol}: {len(manifest.records)} outputs, {len(failed)} failed -> {args.out}")
    return 1 if failed else 0


def cmd_report(args):
    from imdeg.benchgen import load_manifest, report_severity_table
    from imdeg.benchgen.report import SeverityReport, metric_order
    from imdeg.calibration import load_calibration

    if not args.inputs:
        raise UsageError("give manifest and/or calibration files")
    manifests, cals = [], []
    for p in args.inputs:
        p = Path(p)
        if p.is_dir():
            cand = sorted(p.glob("*.json")) + ([p / "manifest.jsonl"] if (p / "manifest.jsonl").exists() else [])
        else:
            cand = [p]
        for c in cand:
            try:
                if c.suffix == ".jsonl":
                    manifests.append(load_manifest(c))
                else:
                    cals.append(load_calibration(c))
            except (OSError, ValueError, KeyError) as e:
                raise UsageError(f"cannot read {c}: {e}") from e
    ext = _load_scores(args.scores)
    metrics = args.metric or None
    reports = [report_severity_table(m, metrics, ext) for m in manifests]
    if cals:
        reports.append(report_severity_table(cals, metrics))
    if len(reports) == 1:
        rep = reports[0]
    else:
        labels = [m for r in reports for m in r.metrics]
        rep = SeverityReport(metric_order(labels), [row for r in reports for row in r.rows],
                             [w for r in reports for w in r.warnings])
    for w in rep.warnings:
        print(f"warning: {w}", file=sys.stderr)
    text = rep.to_text()
    print(text, end="")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "severity.csv").write_text(rep.to_csv(), encoding="utf-8")
        (out / "severity.txt").write_text(text, encoding="utf-8")
    return 0


def cmd_validate(args):
    from imdeg.degradations import load_schedules, operator_keys
    from imdeg.degradations.catalog import active_schedules
    from imdeg.taxonomy import RegistryError, load_registry, validate_registry

    problems = []
    try:
        reg = load_registry(args.registry)
        problems += validate_registry(reg, operator_keys())
    except (OSError, RegistryError) as e:
        problems.append(str(e))
    try:
        sched = load_schedules(args.schedules) if args.schedules else active_schedules()
        problems += sched.problems(operator_keys())
    except (OSError, ValueError) as e:
        problems.append(str(e))
    for p in problems:
        print(p)
    if not problems:
        print(f"ok: {len(operator_keys())} operators, registry and schedules consistent")
    return 1 if problems else 0


COMMANDS = {
    "calibrate": cmd_calibrate,
    "apply": cmd_apply,
    "generate": cmd_generate,
    "report": cmd_report,
    "validate": cmd_validate,
}


def main(argv=None):
    from imdeg.calibration import DegenerateAxisError
    from imdeg.degradations import UnavailableOperatorError
    from imdeg.taxonomy import UnknownOperatorError

    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _merge_config(args)
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"imdeg {args.command}: {e}", file=sys.stderr)
        return 2
    except (UnknownOperatorError, UnavailableOperatorError, DegenerateAxisError, ValueError) as e:
        print(f"imdeg {args.command}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
