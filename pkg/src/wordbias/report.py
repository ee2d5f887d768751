"""Audit report model and its json / csv / markdown renderings.

JSON is the canonical format: it round-trips the report losslessly,
keeping undefined scores as ``null`` and coverage as exact rationals.
CSV and markdown are presentation formats where undefined cells render
as ``n/a``. In markdown grids the differential-association column
follows the reporting convention of the battery: the effect size is
printed, with a ``*`` suffix marking cells whose permutation test did
NOT reach significance.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

EXPLICIT_METRICS = ("W", "ECT", "BAT")
ALL_METRICS = ("W", "ECT", "BAT", "KM")


@dataclass(frozen=True)
class ReportRow:
    """One (space, test, metric) cell of an audit.

    ``value`` is the metric score (for W the effect size), None when
    undefined. ``significant`` is only meaningful for metrics backed by
    a hypothesis test; it stays None elsewhere. ``coverage`` maps set
    labels to the exact fraction of terms resolved.
    """

    space: str
    test: str
    metric: str
    value: float | None
    p_value: float | None = None
    significant: bool | None = None
    coverage: dict[str, Fraction] = field(default_factory=dict)
    flags: tuple[str, ...] = ()
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "space": self.space, "test": self.test, "metric": self.metric,
            "value": self.value, "p_value": self.p_value,
            "significant": self.significant,
            "coverage": {k: f"{v.numerator}/{v.denominator}"
                         for k, v in self.coverage.items()},
            "flags": list(self.flags), "note": self.note,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReportRow":
        return cls(
            space=d["space"], test=d["test"], metric=d["metric"],
            value=d["value"], p_value=d["p_value"], significant=d["significant"],
            coverage={k: Fraction(v) for k, v in d["coverage"].items()},
            flags=tuple(d["flags"]), note=d["note"],
        )


@dataclass(frozen=True)
class AuditReport:
    rows: tuple[ReportRow, ...]
    created_at: str
    config_echo: dict

    def select(self, space: str | None = None, test: str | None = None,
               metric: str | None = None) -> tuple[ReportRow, ...]:
        return tuple(r for r in self.rows
                     if (space is None or r.space == space)
                     and (test is None or r.test == test)
                     and (metric is None or r.metric == metric))

    def spaces(self) -> tuple[str, ...]:
        seen: list[str] = []
        for r in self.rows:
            if r.space not in seen:
                seen.append(r.space)
        return tuple(seen)

    def tests(self) -> tuple[str, ...]:
        seen = []
        for r in self.rows:
            if r.test != "sts" and r.test not in seen:
                seen.append(r.test)
        return tuple(seen)


def to_json(report: AuditReport) -> str:
    payload = {
        "created_at": report.created_at,
        "config": report.config_echo,
        "rows": [r.to_dict() for r in report.rows],
    }
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


def from_json(text: str) -> AuditReport:
    payload = json.loads(text)
    return AuditReport(
        rows=tuple(ReportRow.from_dict(d) for d in payload["rows"]),
        created_at=payload["created_at"],
        config_echo=payload["config"],
    )


def _cell(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.2f}"


def _coverage_cell(coverage: dict[str, Fraction]) -> str:
    return ";".join(f"{k}={v.numerator}/{v.denominator}" for k, v in coverage.items())


def to_csv(report: AuditReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["space", "test", "metric", "value", "p_value",
                     "significant", "coverage", "flags", "note"])
    for r in report.rows:
        writer.writerow([
            r.space, r.test, r.metric,
            "n/a" if r.value is None else repr(r.value),
            "n/a" if r.p_value is None else repr(r.p_value),
            "n/a" if r.significant is None else str(r.significant).lower(),
            _coverage_cell(r.coverage), ";".join(r.flags), r.note,
        ])
    return buf.getvalue()


def to_markdown(report: AuditReport) -> str:
    """Per-space grids with metrics as rows and tests as columns."""
    lines = [f"# Bias audit ({report.created_at})", ""]
    tests = list(report.tests())
    for space in report.spaces():
        lines.append(f"## {space}")
        lines.append("")
        grid_rows = []
        for metric in ALL_METRICS:
            cells = []
            for test in tests:
                hits = report.select(space=space, test=test, metric=metric)
                if not hits:
                    cells.append("")
                    continue
                row = hits[0]
                text = _cell(row.value)
                if metric == "W" and row.value is not None and row.significant is False:
                    text += "*"
                if "below_coverage" in row.flags and text != "n/a":
                    text += " (low cov)"
                cells.append(text)
            if any(cells):
                grid_rows.append((metric, cells))
        if grid_rows:
            lines.append("| metric | " + " | ".join(tests) + " |")
            lines.append("|" + " --- |" * (len(tests) + 1))
            for metric, cells in grid_rows:
                lines.append(f"| {metric} | " + " | ".join(cells) + " |")
            lines.append("")
        sts_rows = report.select(space=space, test="sts")
        for row in sts_rows:
            lines.append(f"STS Pearson: {_cell(row.value)}")
            lines.append("")
        issues = [r for r in report.select(space=space) if r.flags or r.note]
        if issues:
            lines.append("Notes:")
            for r in issues:
                parts = [p for p in (",".join(r.flags), r.note) if p]
                lines.append(f"- {r.test}/{r.metric}: " + "; ".join(parts))
            lines.append("")
    lines.append("`*` marks a differential-association score whose permutation "
                 "test did not reach significance.")
    return "\n".join(lines) + "\n"


def emit_report(report: AuditReport, fmt: str,
                path: "str | None" = None) -> str:
    """Render the report, optionally writing it to ``path`` as UTF-8."""
    if fmt == "json":
        text = to_json(report)
    elif fmt == "csv":
        text = to_csv(report)
    elif fmt == "markdown":
        text = to_markdown(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
