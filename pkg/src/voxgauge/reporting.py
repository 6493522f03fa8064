"""Comparison arithmetic and report rendering.

A report compares labeled evaluation conditions for one speaker. The labels
"base" and "ref" are anchors; the first other condition is the candidate
(typically an adapted model) whose delta and percent-increase rows are
computed. Metrics absent from a condition are omitted from the arithmetic,
never zero-filled.

Rendering is deterministic: table and CSV output print numbers with three
decimals, JSON keeps full precision and round-trips losslessly through
report_from_json.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import MissingBase
from .scores import AggregateMetrics

BASE_LABEL = "base"
REF_LABEL = "ref"

# attribute on AggregateMetrics -> short metric name used in pct rows
_PCT_METRICS = (("mos", "mos_mean"), ("snr_db", "snr_mean_db"),
                ("similarity", "similarity_mean"))
_PCT_ROLES = ("candidate_vs_base", "candidate_vs_ref", "base_vs_ref")
_METRIC_ROWS = ("n", "mos_mean", "mos_std", "snr_mean_db", "similarity_mean")


@dataclass(frozen=True)
class ConditionAggregates:
    label: str
    metrics: AggregateMetrics


@dataclass
class ComparisonReport:
    speaker_id: str
    conditions: list[ConditionAggregates]
    candidate_label: str | None = None
    delta_mos_vs_base: float | None = None
    pct_rows: dict[str, dict[str, float]] = field(default_factory=dict)

    def condition(self, label: str) -> ConditionAggregates | None:
        for c in self.conditions:
            if c.label == label:
                return c
        return None


def pct_increase(new_value: float, base_value: float) -> float:
    """100 * (new - base) / base."""
    if base_value == 0:
        raise ZeroDivisionError("percent increase undefined for base value 0")
    return 100.0 * (new_value - base_value) / base_value


def comparison_report(speaker_id: str, conditions) -> ComparisonReport:
    """Build deltas and percent rows from labeled condition aggregates."""
    conditions = list(conditions)
    labels = [c.label for c in conditions]
    if len(set(labels)) != len(labels):
        raise ValueError(f"condition labels not unique: {labels}")
    by_label = {c.label: c.metrics for c in conditions}
    if BASE_LABEL not in by_label:
        raise MissingBase(f"no {BASE_LABEL!r} condition among {labels}")

    base = by_label[BASE_LABEL]
    ref = by_label.get(REF_LABEL)
    candidate_label = next(
        (l for l in labels if l not in (BASE_LABEL, REF_LABEL)), None)
    candidate = by_label.get(candidate_label) if candidate_label else None

    delta = None
    if candidate is not None and candidate.mos_mean is not None \
            and base.mos_mean is not None:
        delta = candidate.mos_mean - base.mos_mean

    pct_rows: dict[str, dict[str, float]] = {}
    pairs = (
        ("candidate_vs_base", candidate, base),
        ("candidate_vs_ref", candidate, ref),
        ("base_vs_ref", base, ref),
    )
    for name, attr in _PCT_METRICS:
        row = {}
        for role, new_cond, base_cond in pairs:
            if new_cond is None or base_cond is None:
                continue
            new_v = getattr(new_cond, attr)
            base_v = getattr(base_cond, attr)
            if new_v is None or base_v is None or base_v == 0:
                continue
            row[role] = pct_increase(new_v, base_v)
        if row:
            pct_rows[name] = row

    return ComparisonReport(
        speaker_id=speaker_id,
        conditions=conditions,
        candidate_label=candidate_label,
        delta_mos_vs_base=delta,
        pct_rows=pct_rows,
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    s = f"{value:.3f}"
    return "0.000" if s == "-0.000" else s


def report_to_dict(report: ComparisonReport) -> dict:
    out: dict = {"speaker_id": report.speaker_id}
    if report.candidate_label is not None:
        out["candidate_label"] = report.candidate_label
    conds = []
    for c in report.conditions:
        entry: dict = {"label": c.label, "n": c.metrics.n}
        for attr in ("mos_mean", "mos_std", "snr_mean_db", "similarity_mean"):
            v = getattr(c.metrics, attr)
            if v is not None:
                entry[attr] = v
        conds.append(entry)
    out["conditions"] = conds
    if report.delta_mos_vs_base is not None:
        out["delta_mos_vs_base"] = report.delta_mos_vs_base
    if report.pct_rows:
        out["pct_rows"] = report.pct_rows
    return out


def report_from_json(text: str) -> ComparisonReport:
    data = json.loads(text)
    conditions = []
    for entry in data["conditions"]:
        conditions.append(ConditionAggregates(
            label=entry["label"],
            metrics=AggregateMetrics(
                n=entry["n"],
                mos_mean=entry.get("mos_mean"),
                mos_std=entry.get("mos_std"),
                snr_mean_db=entry.get("snr_mean_db"),
                similarity_mean=entry.get("similarity_mean"),
            ),
        ))
    return ComparisonReport(
        speaker_id=data["speaker_id"],
        conditions=conditions,
        candidate_label=data.get("candidate_label"),
        delta_mos_vs_base=data.get("delta_mos_vs_base"),
        pct_rows=data.get("pct_rows", {}),
    )


def _render_csv(report: ComparisonReport) -> str:
    labels = [c.label for c in report.conditions]
    header = ["metric", *labels, "delta_vs_base", *(f"pct_{r}" for r in _PCT_ROLES)]
    lines = [",".join(header)]
    pct_by_row = {"mos_mean": "mos", "snr_mean_db": "snr_db",
                  "similarity_mean": "similarity"}
    for row_name in _METRIC_ROWS:
        cells = [row_name]
        for c in report.conditions:
            cells.append(_fmt(getattr(c.metrics, row_name)))
        cells.append(_fmt(report.delta_mos_vs_base)
                     if row_name == "mos_mean" else "")
        pct_row = report.pct_rows.get(pct_by_row.get(row_name, ""), {})
        for role in _PCT_ROLES:
            cells.append(_fmt(pct_row.get(role)))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _render_table(report: ComparisonReport) -> str:
    labels = [c.label for c in report.conditions]
    header = f"speaker {report.speaker_id}"
    if report.candidate_label:
        header += f" (candidate: {report.candidate_label})"
    lines = [header]
    col = max(12, *(len(l) + 2 for l in labels)) if labels else 12
    lines.append("  " + "metric".ljust(16)
                 + "".join(l.rjust(col) for l in labels))
    for row_name in _METRIC_ROWS:
        cells = [_fmt(getattr(c.metrics, row_name)) for c in report.conditions]
        lines.append("  " + row_name.ljust(16)
                     + "".join(v.rjust(col) for v in cells))
    if report.delta_mos_vs_base is not None:
        lines.append(f"  delta mos vs base: {_fmt(report.delta_mos_vs_base)}")
    for name, _ in _PCT_METRICS:
        row = report.pct_rows.get(name)
        if not row:
            continue
        parts = ", ".join(f"{role} {_fmt(v)}%" for role, v in row.items())
        lines.append(f"  pct {name}: {parts}")
    return "\n".join(lines) + "\n"


def render(report: ComparisonReport, format: str = "json") -> str:
    """Render a report as 'json', 'csv' or 'table-text'. Deterministic."""
    if format == "json":
        return json.dumps(report_to_dict(report), indent=2) + "\n"
    if format == "csv":
        return _render_csv(report)
    if format == "table-text":
        return _render_table(report)
    raise ValueError(f"unknown format {format!r}")
