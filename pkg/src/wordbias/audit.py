"""Multi-space audit runner and cross-report comparison.

An audit takes a set of embedding spaces and a battery of bias test
specifications, evaluates the configured metrics for every (space, test)
cell, and collects the outcomes into one report. Failures degrade per
cell, not per run: a space that cannot be loaded or a test that cannot
be resolved contributes error rows while the rest of the audit proceeds.

Seeds for the stochastic metrics are derived from the audit seed plus
the space and test names through a checksum, so results are reproducible
and adding a space never perturbs another space's numbers.
"""
from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from .metrics import bat_score, ect_score, km_accuracy, weat
from .report import EXPLICIT_METRICS, AuditReport, ReportRow
from .specs import (BiasSpecification, ResolutionError, SpecError, load_bundled,
                    parse_spec_file, resolve)
from .store import (EmbeddingLoadError, EmbeddingSpace, NormalizationPolicy,
                    load_binary_format, load_text_format)
from .sts import StsError, StsPair, load_sts_tsv, sts_pearson

BUNDLED_PREFIX = "bundled:"
VALID_METRICS = ("W", "ECT", "BAT", "KM", "STS")


class AuditError(Exception):
    """Configuration or input problem that prevents the audit from starting."""


@dataclass(frozen=True)
class SpaceConfig:
    """One embedding space to audit.

    ``format`` is ``text``, ``binary``, or ``auto`` (binary for a
    ``.bin`` path, text otherwise).
    """

    name: str
    path: str
    format: str = "auto"
    limit: int | None = None

    def __post_init__(self) -> None:
        if self.format not in ("auto", "text", "binary"):
            raise AuditError(f"{self.name}: format must be auto, text, or binary")


@dataclass(frozen=True)
class AuditConfig:
    spaces: tuple[SpaceConfig, ...]
    spec_files: tuple[str, ...] = (BUNDLED_PREFIX + "araweat_msa",)
    metrics: tuple[str, ...] = VALID_METRICS
    min_coverage: float = 0.2
    alpha: float = 0.05
    seed: int = 0
    permutations: int = 100_000
    km_runs: int = 20
    sts_path: str | None = None
    policy: NormalizationPolicy = field(default_factory=NormalizationPolicy)

    def __post_init__(self) -> None:
        if not self.spaces:
            raise AuditError("need at least one space")
        names = [s.name for s in self.spaces]
        if len(set(names)) != len(names):
            raise AuditError(f"space names must be unique, got {names}")
        for m in self.metrics:
            if m not in VALID_METRICS:
                raise AuditError(f"unknown metric {m!r}; available: {VALID_METRICS}")
        if not 0.0 < self.alpha < 1.0:
            raise AuditError(f"alpha must be in (0, 1), got {self.alpha}")

    @classmethod
    def from_file(cls, path: str | Path) -> "AuditConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise AuditError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise AuditError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(raw, dict) or "spaces" not in raw:
            raise AuditError(f"{path}: expected an object with a 'spaces' list")
        try:
            spaces = tuple(SpaceConfig(
                name=e["name"], path=e["path"],
                format=e.get("format", "auto"), limit=e.get("limit"),
            ) for e in raw["spaces"])
        except (KeyError, TypeError) as exc:
            raise AuditError(f"{path}: bad space entry: {exc}") from exc
        policy = (NormalizationPolicy.from_dict(raw["policy"])
                  if "policy" in raw else NormalizationPolicy())
        sources = raw.get("spec_files", raw.get("specs",
                                                (BUNDLED_PREFIX + "araweat_msa",)))
        return cls(
            spaces=spaces,
            spec_files=tuple(sources),
            metrics=tuple(raw.get("metrics", VALID_METRICS)),
            min_coverage=raw.get("min_coverage", 0.2),
            alpha=raw.get("alpha", 0.05),
            seed=raw.get("seed", raw.get("seeds", 0)),
            permutations=raw.get("permutations", 100_000),
            km_runs=raw.get("km_runs", 20),
            sts_path=raw.get("sts_path"),
            policy=policy,
        )


def stable_seed(*parts: object) -> int:
    """Deterministic seed derived from identifying strings via a checksum."""
    key = "|".join(str(p) for p in parts)
    return zlib.crc32(key.encode("utf-8"))


def load_space(cfg: SpaceConfig, policy: NormalizationPolicy) -> EmbeddingSpace:
    fmt = cfg.format
    if fmt == "auto":
        fmt = "binary" if cfg.path.endswith(".bin") else "text"
    if fmt == "binary":
        return load_binary_format(cfg.path, policy=policy, limit=cfg.limit, name=cfg.name)
    return load_text_format(cfg.path, limit=cfg.limit, policy=policy,
                            strict=False, name=cfg.name)


def load_specs(sources: tuple[str, ...]) -> tuple[BiasSpecification, ...]:
    """Gather specs from bundled batteries and spec files, in order."""
    specs: list[BiasSpecification] = []
    seen: set[str] = set()
    for src in sources:
        try:
            if src.startswith(BUNDLED_PREFIX):
                sf = load_bundled(src[len(BUNDLED_PREFIX):])
            else:
                sf = parse_spec_file(src)
        except SpecError as exc:
            raise AuditError(str(exc)) from exc
        for spec in sf.specs:
            if spec.id in seen:
                raise AuditError(f"duplicate spec id {spec.id!r} across sources")
            seen.add(spec.id)
            specs.append(spec)
    if not specs:
        raise AuditError("no specs to evaluate")
    return tuple(specs)


def _error_row(space: str, test: str, metric: str, flag: str, note: str,
               coverage: dict[str, Fraction] | None = None) -> ReportRow:
    return ReportRow(space=space, test=test, metric=metric, value=None,
                     coverage=dict(coverage or {}), flags=(flag,), note=note)


def _metric_row(cfg: AuditConfig, space: str, spec, rs, metric: str,
                base_flags: tuple[str, ...]) -> ReportRow:
    if metric == "W":
        wr = weat(rs, max_permutations=cfg.permutations,
                  seed=stable_seed(cfg.seed, space, spec.id, "perm"))
        flags = base_flags
        if not wr.p_exact:
            flags += ("sampled_p",)
        if wr.effect_size is None:
            flags += ("undefined",)
        return ReportRow(
            space=space, test=spec.id, metric="W", value=wr.effect_size,
            p_value=wr.p_value, significant=wr.p_value < cfg.alpha,
            coverage=dict(rs.coverage), flags=flags,
            note=f"statistic={wr.statistic!r};splits={wr.permutations_used}",
        )
    if metric == "ECT":
        ms = ect_score(rs)
    elif metric == "BAT":
        ms = bat_score(rs)
    elif metric == "KM":
        ms = km_accuracy(rs, runs=cfg.km_runs,
                         base_seed=stable_seed(cfg.seed, space, spec.id, "km"))
    else:
        raise AuditError(f"unknown metric {metric!r}")
    flags = base_flags
    note = ""
    if ms.value is None:
        flags += ("undefined",)
        note = ms.detail.get("note", "")
    return ReportRow(space=space, test=spec.id, metric=metric, value=ms.value,
                     coverage=dict(rs.coverage), flags=flags, note=note)


def run_audit(config: AuditConfig) -> AuditReport:
    """Evaluate every configured metric for every (space, test) pair.

    Row order is deterministic: spaces in config order, tests in source
    order, metrics in config order, one semantic-quality row per space
    last (when a pairs file is configured and STS is among the metrics).
    Spaces that fail to load and tests that fail to resolve yield error
    rows in place of scores.
    """
    specs = load_specs(config.spec_files)
    set_metrics = tuple(m for m in config.metrics if m != "STS")
    sts_pairs: tuple[StsPair, ...] | None = None
    if config.sts_path is not None and "STS" in config.metrics:
        try:
            sts_pairs = load_sts_tsv(config.sts_path)
        except StsError as exc:
            raise AuditError(str(exc)) from exc

    rows: list[ReportRow] = []
    load_failures: list[str] = []
    for sc in config.spaces:
        try:
            space = load_space(sc, config.policy)
        except (EmbeddingLoadError, OSError) as exc:
            load_failures.append(sc.name)
            note = f"load failed: {exc}"
            for spec in specs:
                for metric in set_metrics:
                    rows.append(_error_row(sc.name, spec.id, metric, "load_error", note))
            if sts_pairs is not None:
                rows.append(_error_row(sc.name, "sts", "STS", "load_error", note))
            continue

        for spec in specs:
            try:
                rs = resolve(spec, space, config.policy, config.min_coverage)
            except ResolutionError as exc:
                for metric in set_metrics:
                    rows.append(_error_row(sc.name, spec.id, metric,
                                           "resolution_error", str(exc)))
                continue
            base_flags: tuple[str, ...] = ()
            if rs.below_coverage:
                base_flags += ("below_coverage",)
            if rs.truncation:
                base_flags += ("truncated",)
            for metric in set_metrics:
                if metric in EXPLICIT_METRICS and not spec.explicit:
                    rows.append(ReportRow(
                        space=sc.name, test=spec.id, metric=metric, value=None,
                        coverage=dict(rs.coverage),
                        flags=(*base_flags, "not_applicable"),
                        note="implicit spec has no attribute sets"))
                    continue
                try:
                    rows.append(_metric_row(config, sc.name, spec, rs, metric, base_flags))
                except ValueError as exc:
                    rows.append(_error_row(sc.name, spec.id, metric, "metric_error",
                                           str(exc), rs.coverage))

        if sts_pairs is not None:
            try:
                res = sts_pearson(space, sts_pairs, config.policy)
                rows.append(ReportRow(
                    space=sc.name, test="sts", metric="STS", value=res.pearson,
                    flags=() if res.pearson is not None else ("undefined",),
                    note=f"n_pairs={res.n_pairs};n_empty={res.n_empty}"))
            except StsError as exc:
                rows.append(_error_row(sc.name, "sts", "STS", "metric_error", str(exc)))

    echo = {
        "spaces": [{"name": s.name, "path": s.path, "format": s.format,
                    "limit": s.limit} for s in config.spaces],
        "spec_files": list(config.spec_files),
        "metrics": list(config.metrics),
        "min_coverage": config.min_coverage,
        "alpha": config.alpha,
        "seed": config.seed,
        "permutations": config.permutations,
        "km_runs": config.km_runs,
        "sts_path": config.sts_path,
        "policy": config.policy.to_dict(),
        "load_failures": load_failures,
    }
    created = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return AuditReport(rows=tuple(rows), created_at=created, config_echo=echo)


@dataclass(frozen=True)
class ScoreSeries:
    """A labeled, keyed sequence of scores, None where undefined."""

    label: str
    values: tuple[tuple[str, float | None], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        keys = [k for k, _ in self.values]
        if len(set(keys)) != len(keys):
            raise ValueError(f"{self.label}: series keys must be unique")

    def defined(self) -> dict[str, float]:
        return {k: v for k, v in self.values if v is not None}


def series_correlation(a: ScoreSeries, b: ScoreSeries) -> float:
    """Pearson correlation over keys where both series are defined.

    Alignment is by key (in ``a``'s order); cells undefined on either
    side drop out pairwise. Needs at least 3 aligned values.
    """
    b_def = b.defined()
    pairs = [(v, b_def[k]) for k, v in a.values
             if v is not None and k in b_def]
    if len(pairs) < 3:
        raise ValueError(f"need at least 3 aligned defined values, got {len(pairs)}")
    xs = np.array([p[0] for p in pairs], dtype=np.float64)
    ys = np.array([p[1] for p in pairs], dtype=np.float64)
    if np.ptp(xs) == 0.0 or np.ptp(ys) == 0.0:
        raise ValueError("correlation undefined for a constant series")
    return float(np.corrcoef(xs, ys)[0, 1])


def _cell_mean(report: AuditReport, test: str, metric: str) -> float | None:
    vals = [r.value for r in report.select(test=test, metric=metric)
            if r.value is not None]
    if not vals:
        return None
    return float(np.mean(vals))


def avg_vs_conc(sub_reports: list[AuditReport] | tuple[AuditReport, ...],
                conc_report: AuditReport,
                metrics: tuple[str, ...] = ("W", "KM"),
                magnitude_metrics: tuple[str, ...] = (),
                ) -> tuple[ScoreSeries, ScoreSeries, float]:
    """Average per-cell scores across sub-audits and correlate with one audit.

    Cells are (test, metric) pairs taken from the concatenated-corpus
    report; each sub-report contributes its cell mean (across spaces,
    skipping undefined values) and the sub-side value is the mean of
    those contributions. Metrics listed in ``magnitude_metrics`` enter
    as absolute values, asking whether the two sides agree on effect
    strength rather than direction. Returns (avg, conc, correlation).
    """
    if not sub_reports:
        raise ValueError("need at least one sub-report")
    avg_cells: list[tuple[str, float | None]] = []
    conc_cells: list[tuple[str, float | None]] = []
    for test in conc_report.tests():
        for metric in metrics:
            if not conc_report.select(test=test, metric=metric):
                continue
            key = f"{test}/{metric}"
            c = _cell_mean(conc_report, test, metric)
            per_sub = [_cell_mean(s, test, metric) for s in sub_reports]
            defined = [v for v in per_sub if v is not None]
            s = float(np.mean(defined)) if defined else None
            if metric in magnitude_metrics:
                c = abs(c) if c is not None else None
                s = abs(s) if s is not None else None
            avg_cells.append((key, s))
            conc_cells.append((key, c))
    if not avg_cells:
        raise ValueError("reports share no (test, metric) cells")
    avg_series = ScoreSeries("avg", tuple(avg_cells))
    conc_series = ScoreSeries("conc", tuple(conc_cells))
    return avg_series, conc_series, series_correlation(avg_series, conc_series)


def compare_reports(conc: AuditReport, subs: list[AuditReport] | tuple[AuditReport, ...],
                    metrics: tuple[str, ...] = ("W", "KM"),
                    magnitude_metrics: tuple[str, ...] = ()) -> dict:
    """Dict-shaped wrapper around avg_vs_conc for CLI output."""
    avg_series, conc_series, r = avg_vs_conc(subs, conc, metrics=metrics,
                                             magnitude_metrics=magnitude_metrics)
    return {
        "pearson": r,
        "cells": [k for k, _ in avg_series.values],
        "avg": [v for _, v in avg_series.values],
        "conc": [v for _, v in conc_series.values],
        "n_defined": sum(1 for (_, x), (_, y) in zip(avg_series.values,
                                                     conc_series.values)
                         if x is not None and y is not None),
    }
