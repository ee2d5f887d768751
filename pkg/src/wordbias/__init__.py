"""Explicit and implicit social-bias audits for word vector spaces."""
from __future__ import annotations

from .audit import (AuditConfig, AuditError, ScoreSeries, SpaceConfig,
                    avg_vs_conc, compare_reports, load_space, load_specs,
                    run_audit, series_correlation, stable_seed)
from .kmeans import ClusteringResult, kmeans_pp
from .metrics import (MetricScore, WeatResult, association, associations,
                      bat_score, ect_score, km_accuracy, weat,
                      weat_effect_size, weat_p_value, weat_statistic)
from .report import (AuditReport, ReportRow, emit_report, from_json, to_csv,
                     to_json, to_markdown)
from .specs import (BiasSpecification, ResolutionError, ResolvedSpec, SpecError,
                    SpecFile, load_bundled, parse_spec_file, resolve,
                    to_implicit, write_spec_file)
from .store import (EmbeddingLoadError, EmbeddingSpace, LookupResult,
                    NormalizationPolicy, cosine, load_binary_format,
                    load_text_format, lookup, unit_normalize,
                    write_binary_format, write_text_format)
from .sts import (StsError, StsPair, StsResult, load_sts_tsv, sentence_embed,
                  sts_pearson)

__version__ = "0.1.0"

__all__ = [
    "AuditConfig", "AuditError", "AuditReport", "BiasSpecification",
    "ClusteringResult", "EmbeddingLoadError", "EmbeddingSpace", "LookupResult",
    "MetricScore", "NormalizationPolicy", "ReportRow", "ResolutionError",
    "ResolvedSpec", "ScoreSeries", "SpaceConfig", "SpecError", "SpecFile",
    "StsError", "StsPair", "StsResult", "WeatResult", "association",
    "associations", "avg_vs_conc", "bat_score", "compare_reports", "cosine",
    "ect_score", "emit_report", "from_json", "km_accuracy", "kmeans_pp",
    "load_binary_format", "load_bundled", "load_space", "load_specs",
    "load_sts_tsv", "load_text_format", "lookup",
    "parse_spec_file", "resolve", "run_audit", "sentence_embed",
    "series_correlation", "stable_seed", "sts_pearson", "to_csv", "to_implicit",
    "to_json", "to_markdown", "unit_normalize", "weat", "weat_effect_size",
    "weat_p_value", "weat_statistic", "write_binary_format", "write_spec_file",
    "write_text_format",
]
