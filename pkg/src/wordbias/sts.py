"""Semantic textual similarity scoring for embedding spaces.

A space is scored by embedding each sentence of a gold-rated pair as
the mean of its in-vocabulary token vectors, predicting similarity with
cosine, and correlating predictions with the gold ratings (Pearson).
This gives a semantic-quality axis to read bias scores against: a
debiasing step that tanks STS bought its fairness with meaning.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .store import EmbeddingSpace, NormalizationPolicy, cosine


class StsError(ValueError):
    """A pairs file or pair set violates the expected shape."""


@dataclass(frozen=True)
class StsPair:
    gold: float
    sent_a: str
    sent_b: str

    def __post_init__(self) -> None:
        if not 0.0 <= self.gold <= 5.0:
            raise StsError(f"gold rating must be in [0, 5], got {self.gold}")
        if not self.sent_a.strip() or not self.sent_b.strip():
            raise StsError("sentences must be non-empty")


@dataclass(frozen=True)
class StsResult:
    """``pearson`` is None when predictions have zero spread."""

    pearson: float | None
    n_pairs: int
    n_empty: int


def load_sts_tsv(path: str | Path) -> tuple[StsPair, ...]:
    """Read tab-separated ``gold<TAB>sentence_a<TAB>sentence_b`` lines.

    Blank lines and lines starting with ``#`` are skipped.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise StsError(f"cannot read {path}: {exc}") from exc
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise StsError(f"{path}:{lineno}: expected 3 tab-separated fields, "
                           f"got {len(fields)}")
        try:
            gold = float(fields[0])
        except ValueError as exc:
            raise StsError(f"{path}:{lineno}: bad gold rating {fields[0]!r}") from exc
        pairs.append(StsPair(gold=gold, sent_a=fields[1].strip(), sent_b=fields[2].strip()))
    return tuple(pairs)


def sentence_embed(space: EmbeddingSpace, sentence: str,
                   policy: NormalizationPolicy | None = None) -> np.ndarray:
    """Mean of in-vocabulary token vectors, zero vector when all are oov.

    The sentence is normalized as a whole (the policies are per-character
    and keep whitespace intact), then split on whitespace.
    """
    policy = policy if policy is not None else NormalizationPolicy()
    tokens = policy.apply(sentence).split()
    found = [space.vector(tok) for tok in tokens if tok in space]
    if not found:
        return np.zeros(space.dim, dtype=np.float64)
    return np.mean(np.array(found, dtype=np.float64), axis=0)


def sts_pearson(space: EmbeddingSpace, pairs: tuple[StsPair, ...] | list[StsPair],
                policy: NormalizationPolicy | None = None) -> StsResult:
    """Pearson correlation of cosine predictions against gold ratings.

    Pairs where a side embeds to the zero vector (all tokens oov) predict
    similarity 0 and are counted in ``n_empty``. Needs at least 3 pairs;
    constant predictions leave the correlation undefined (None).
    """
    pairs = tuple(pairs)
    if len(pairs) < 3:
        raise StsError(f"correlation needs at least 3 pairs, got {len(pairs)}")
    golds = np.array([p.gold for p in pairs], dtype=np.float64)
    preds = np.empty(len(pairs), dtype=np.float64)
    n_empty = 0
    for i, pair in enumerate(pairs):
        va = sentence_embed(space, pair.sent_a, policy)
        vb = sentence_embed(space, pair.sent_b, policy)
        if not va.any() or not vb.any():
            n_empty += 1
        preds[i] = cosine(va, vb)
    if np.ptp(preds) == 0.0 or np.ptp(golds) == 0.0:
        return StsResult(pearson=None, n_pairs=len(pairs), n_empty=n_empty)
    r = float(np.corrcoef(golds, preds)[0, 1])
    return StsResult(pearson=r, n_pairs=len(pairs), n_empty=n_empty)
