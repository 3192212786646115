"""Severity tables: one row per operator, five level columns per metric.

Metric column groups follow the order (1-SSIM), PSNR, then external scores.
Rows whose values weaken somewhere along levels 1..5 (in the metric's own
orientation) are flagged as non-monotone.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field

from imdeg.degradations import LEVELS, operator_keys
from imdeg.metrics import parse_metric

BUILTIN_ORDER = ("1-ssim", "psnr")
FLAG = "*"


def metric_order(labels):
    labels = list(dict.fromkeys(labels))
    first = [m for m in BUILTIN_ORDER if m in labels]
    return first + sorted(m for m in labels if m not in BUILTIN_ORDER)


def is_non_monotone(values, metric):
    """True if some consecutive pair of known values gets weaker."""
    m = parse_metric(metric)
    vals = [v for v in values if v is not None]
    return any(m.stronger(a, b) for a, b in zip(vals, vals[1:]))


@dataclass
class SeverityRow:
    backend: str
    term: str
    values: dict  # metric label -> list of 5 (float | None)

    def flagged(self, metrics):
        return [m for m in metrics if m in self.values and is_non_monotone(self.values[m], m)]


@dataclass
class SeverityReport:
    metrics: list
    rows: list
    warnings: list = field(default_factory=list)

    @property
    def n_value_columns(self):
        return LEVELS * len(self.metrics)

    def header(self):
        cols = ["backend", "term"]
        for m in self.metrics:
            cols += [f"{m}_{l}" for l in range(1, LEVELS + 1)]
        return cols + ["non_monotone"]

    def _cells(self, row, fmt):
        out = [row.backend, row.term]
        for m in self.metrics:
            vals = row.values.get(m, [None] * LEVELS)
            out += ["" if v is None else fmt(v) for v in vals]
        out.append(";".join(row.flagged(self.metrics)))
        return out

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        for row in self.rows:
            w.writerow(self._cells(row, repr))
        return buf.getvalue()

    def to_text(self):
        head = ["operator"]
        for m in self.metrics:
            head += [f"{m} {l}" for l in range(1, LEVELS + 1)]
        head.append("")
        body = []
        for row in self.rows:
            cells = self._cells(row, lambda v: f"{v:.3f}")
            flags = cells[-1]
            body.append([f"{row.backend}/{row.term}"] + [c or "-" for c in cells[2:-1]]
                        + [f"{FLAG} non-monotone: {flags}" if flags else ""])
        widths = [max(len(r[i]) for r in [head] + body) for i in range(len(head))]
        lines = []
        for r in [head] + body:
            parts = [r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:-1], widths[1:-1])]
            if r[-1]:
                parts.append(r[-1])
            lines.append("  ".join(parts).rstrip())
        return "\n".join(lines) + "\n"


def _mean(vals):
    return math.fsum(vals) / len(vals) if vals else None


def report_from_tables(tables, metrics=None):
    """Build a report from StrengthTable objects (any mix of operators/metrics)."""
    data = defaultdict(dict)
    order = []
    for t in tables:
        key = (t.backend, t.term)
        if key not in data:
            order.append(key)
        data[key][t.metric.label] = list(t.strengths)
    return _assemble(order, data, metrics)


def report_from_manifest(manifest, metrics=None, external=()):
    """Average single-element records per (operator, level).

    ``external`` holds ExternalScores objects keyed by output stem; their
    values are merged as additional metric columns.
    """
    acc = defaultdict(lambda: defaultdict(lambda: defaultdict(list)))
    order = []
    for rec in manifest.records:
        if rec.get("status") != "ok" or len(rec["chain"]) != 1:
            continue
        step = rec["chain"][0]
        key = (step["backend"], step["term"])
        if key not in acc:
            order.append(key)
        lvl = int(step["severity"])
        for m, v in rec.get("strengths", {}).items():
            acc[key][m][lvl].append(v)
        stem = rec["output"].rsplit(".", 1)[0]
        for ext in external:
            if stem in ext:
                acc[key][f"external:{ext.metric.lower()}"][lvl].append(ext[stem])
    # manifest records are sorted by file name; present rows in registry order
    rank = {k: i for i, k in enumerate(operator_keys())}
    order.sort(key=lambda k: rank.get(k, len(rank)))
    data = {key: {m: [_mean(by_lvl.get(l, [])) for l in range(1, LEVELS + 1)]
                  for m, by_lvl in acc[key].items()} for key in order}
    return _assemble(order, data, metrics)


def _assemble(order, data, metrics):
    present = [m for key in order for m in data[key]]
    labels = metric_order(parse_metric(m).label for m in metrics) if metrics else metric_order(present)
    rows, warnings = [], []
    for key in order:
        vals = {}
        for m in labels:
            v = data[key].get(m)
            if v is None:
                warnings.append(f"{key[0]}/{key[1]}: no {m} values")
                continue
            if any(x is None for x in v):
                missing = [str(i + 1) for i, x in enumerate(v) if x is None]
                warnings.append(f"{key[0]}/{key[1]}: {m} missing level(s) {','.join(missing)}")
            vals[m] = v
        rows.append(SeverityRow(key[0], key[1], vals))
    return SeverityReport(labels, rows, warnings)


def report_severity_table(source, metrics=None, external=()):
    """Dispatch on the source: a Manifest, or an iterable of StrengthTables/Calibrations."""
    from imdeg.benchgen.execute import Manifest

    if isinstance(source, Manifest):
        return report_from_manifest(source, metrics, external)
    tables = [getattr(s, "table", s) for s in source]
    return report_from_tables(tables, metrics)
