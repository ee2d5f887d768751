#!/usr/bin/env python3
"""End-to-end demo on synthetic vectors with a planted gender direction.

Builds a small embedding space where career terms lean toward male terms
and family terms toward female terms, audits it with every metric, and
prints the markdown report. Run:

    python3 scripts/demo_audit.py [--seed N] [--strength S] [--format FMT]
"""
from __future__ import annotations

import argparse
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from wordbias import (AuditConfig, BiasSpecification, SpaceConfig, SpecFile,
                      emit_report, run_audit, write_spec_file,
                      write_text_format)
from wordbias.store import EmbeddingSpace

CAREER = ["executive", "management", "professional", "corporation",
          "salary", "office", "business", "career"]
FAMILY = ["home", "parents", "children", "family",
          "cousins", "marriage", "wedding", "relatives"]
MALE = ["male", "man", "boy", "brother", "he", "him", "his", "son"]
FEMALE = ["female", "woman", "girl", "sister", "she", "her", "hers",
          "daughter"]


@dataclass(frozen=True)
class DemoSettings:
    seed: int = 7
    dim: int = 50
    strength: float = 3.0  # how far each group leans along the planted axis
    out_format: str = "markdown"


def build_space(settings: DemoSettings) -> EmbeddingSpace:
    rng = np.random.default_rng(settings.seed)
    tokens, rows = [], []
    lean = {tuple(CAREER): +1.0, tuple(MALE): +1.0,
            tuple(FAMILY): -1.0, tuple(FEMALE): -1.0}
    for group, sign in lean.items():
        for token in group:
            vec = rng.normal(size=settings.dim)
            vec[0] += sign * settings.strength
            tokens.append(token)
            rows.append(vec)
    matrix = np.array(rows, dtype=np.float32)
    return EmbeddingSpace.from_arrays("demo", tokens, matrix, {})


def build_battery() -> SpecFile:
    spec = BiasSpecification(
        id="career_family", kind="explicit", bias_type="gender", lang="en",
        t1=tuple(CAREER), t2=tuple(FAMILY),
        a1=tuple(MALE), a2=tuple(FEMALE))
    return SpecFile(version=1, specs=(spec,))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--strength", type=float, default=3.0)
    parser.add_argument("--format", default="markdown",
                        choices=("markdown", "json", "csv"))
    args = parser.parse_args()
    settings = DemoSettings(seed=args.seed, strength=args.strength,
                            out_format=args.format)

    with tempfile.TemporaryDirectory() as tmp:
        tmp_path = Path(tmp)
        vec_path = tmp_path / "demo.vec"
        spec_path = tmp_path / "battery.json"
        write_text_format(build_space(settings), vec_path)
        write_spec_file(build_battery(), spec_path)

        config = AuditConfig(
            spaces=(SpaceConfig(name="demo", path=str(vec_path)),),
            spec_files=(str(spec_path),),
            metrics=("W", "ECT", "BAT", "KM"),
            seed=settings.seed)
        report = run_audit(config)

    print(emit_report(report, settings.out_format))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
