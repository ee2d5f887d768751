"""Command line front end.

Subcommands: ``audit`` runs a configured multi-space bias audit,
``sts`` scores one space on a semantic-similarity pairs file,
``compare`` correlates a concatenated-corpus report against sub-corpus
reports, and ``inspect`` summarizes an embedding file. Exit codes:
0 success, 1 configuration or input error, 2 audit ran but every space
failed to load.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .audit import (AuditConfig, AuditError, SpaceConfig, compare_reports,
                    load_space, run_audit)
from .report import emit_report, from_json
from .specs import SpecError
from .store import EmbeddingLoadError, NormalizationPolicy
from .sts import StsError, load_sts_tsv, sts_pearson

_INPUT_ERRORS = (AuditError, SpecError, StsError, EmbeddingLoadError, OSError,
                 ValueError, json.JSONDecodeError)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wordbias",
        description="Explicit and implicit social-bias audits for word vector spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_audit = sub.add_parser("audit", help="run a configured multi-space audit")
    p_audit.add_argument("--config", required=True, help="audit config JSON")
    p_audit.add_argument("--out", default="-", help="output path, '-' for stdout")
    p_audit.add_argument("--format", default="json",
                         choices=("json", "csv", "markdown"))

    p_sts = sub.add_parser("sts", help="score one space on a similarity pairs file")
    p_sts.add_argument("--space", required=True, help="embedding file")
    p_sts.add_argument("--pairs", required=True,
                       help="TSV of gold<TAB>sentence_a<TAB>sentence_b")
    p_sts.add_argument("--space-format", default="auto",
                       choices=("auto", "text", "binary"))
    p_sts.add_argument("--limit", type=int, default=None,
                       help="load at most this many vectors")

    p_cmp = sub.add_parser("compare",
                           help="correlate a concatenated-corpus report with sub-reports")
    p_cmp.add_argument("--conc", required=True, help="concatenated-corpus report JSON")
    p_cmp.add_argument("--sub", required=True, action="append",
                       help="sub-corpus report JSON (repeatable)")
    p_cmp.add_argument("--metrics", default="W,KM",
                       help="comma-separated metrics to compare")
    p_cmp.add_argument("--magnitude", default="",
                       help="comma-separated metrics compared by absolute value")

    p_ins = sub.add_parser("inspect", help="summarize an embedding file")
    p_ins.add_argument("--space", required=True, help="embedding file")
    p_ins.add_argument("--space-format", default="auto",
                       choices=("auto", "text", "binary"))
    p_ins.add_argument("--limit", type=int, default=None)
    return parser


def _cmd_audit(args: argparse.Namespace) -> int:
    config = AuditConfig.from_file(args.config)
    report = run_audit(config)
    text = emit_report(report, args.format)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    if len(report.config_echo["load_failures"]) == len(config.spaces):
        print("error: every configured space failed to load", file=sys.stderr)
        return 2
    return 0


def _cmd_sts(args: argparse.Namespace) -> int:
    cfg = SpaceConfig(name=Path(args.space).stem, path=args.space,
                      format=args.space_format, limit=args.limit)
    space = load_space(cfg, NormalizationPolicy())
    pairs = load_sts_tsv(args.pairs)
    res = sts_pearson(space, pairs)
    print(json.dumps({"space": space.name, "pearson": res.pearson,
                      "n_pairs": res.n_pairs, "n_empty": res.n_empty},
                     ensure_ascii=False))
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    conc = from_json(Path(args.conc).read_text(encoding="utf-8"))
    subs = [from_json(Path(p).read_text(encoding="utf-8")) for p in args.sub]
    metrics = tuple(m.strip() for m in args.metrics.split(",") if m.strip())
    magnitude = tuple(m.strip() for m in args.magnitude.split(",") if m.strip())
    result = compare_reports(conc, subs, metrics=metrics,
                             magnitude_metrics=magnitude)
    print(json.dumps(result, ensure_ascii=False, indent=2))
    return 0


def _cmd_inspect(args: argparse.Namespace) -> int:
    cfg = SpaceConfig(name=Path(args.space).stem, path=args.space,
                      format=args.space_format, limit=args.limit)
    space = load_space(cfg, NormalizationPolicy())
    sample = list(space.tokens())[:10]
    print(json.dumps({
        "name": space.name, "dim": space.dim, "vocab_size": len(space),
        "sample_tokens": sample, "source": space.source_meta,
    }, ensure_ascii=False, indent=2))
    return 0


_COMMANDS = {
    "audit": _cmd_audit,
    "sts": _cmd_sts,
    "compare": _cmd_compare,
    "inspect": _cmd_inspect,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
