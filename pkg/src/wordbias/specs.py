"""Bias test specifications and their vocabulary resolution.

An explicit specification pairs two target term sets (t1, t2) with two
attribute term sets (a1, a2); an implicit specification carries targets
only. Resolution maps every term to a vector through the embedding store's
lookup, records what dropped out, and tail-truncates the larger target set
so the two sides stay equally sized (the WEAT permutation test needs
equally sized splits, and deterministic truncation keeps audits
reproducible). Attribute sets are left unbalanced; the association term
normalizes by each attribute set's own size.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np

from .store import EmbeddingSpace, NormalizationPolicy, lookup

SET_LABELS = ("t1", "t2", "a1", "a2")
BUNDLED_SPEC_FILES = ("araweat_msa", "weat_en")


class SpecError(ValueError):
    """A specification or spec file violates its invariants."""


class ResolutionError(ValueError):
    """A term set resolved to nothing against the given space."""


@dataclass(frozen=True)
class BiasSpecification:
    """Two target sets plus, for explicit specs, two attribute sets."""

    id: str
    kind: str
    bias_type: str
    lang: str
    t1: tuple[str, ...]
    t2: tuple[str, ...]
    a1: tuple[str, ...] = ()
    a2: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "t1", tuple(self.t1))
        object.__setattr__(self, "t2", tuple(self.t2))
        object.__setattr__(self, "a1", tuple(self.a1))
        object.__setattr__(self, "a2", tuple(self.a2))
        if self.kind not in ("explicit", "implicit"):
            raise SpecError(f"{self.id}: kind must be explicit or implicit, got {self.kind!r}")
        if not self.t1 or not self.t2:
            raise SpecError(f"{self.id}: target sets must be non-empty")
        if self.kind == "explicit" and (not self.a1 or not self.a2):
            raise SpecError(f"{self.id}: explicit spec with an empty attribute set")
        if self.kind == "implicit" and (self.a1 or self.a2):
            raise SpecError(f"{self.id}: implicit spec must not carry attribute sets")
        if set(self.t1) & set(self.t2):
            raise SpecError(f"{self.id}: overlapping term sets t1/t2")
        if set(self.a1) & set(self.a2):
            raise SpecError(f"{self.id}: overlapping term sets a1/a2")

    @property
    def explicit(self) -> bool:
        return self.kind == "explicit"

    def terms(self, label: str) -> tuple[str, ...]:
        if label not in SET_LABELS:
            raise KeyError(label)
        return getattr(self, label)

    def to_dict(self) -> dict:
        return {
            "id": self.id, "kind": self.kind, "bias_type": self.bias_type,
            "lang": self.lang, "t1": list(self.t1), "t2": list(self.t2),
            "a1": list(self.a1), "a2": list(self.a2),
        }


@dataclass(frozen=True)
class ResolvedSpec:
    """A specification after vocabulary resolution against one space.

    Each ``*v`` entry is a (term, vector) pair. ``dropped`` lists oov terms
    as (term, set label); ``truncation`` lists terms removed from the tail
    of the larger target set for balancing. Coverage is the exact rational
    resolved/|original| per set.
    """

    spec: BiasSpecification
    t1v: tuple[tuple[str, np.ndarray], ...]
    t2v: tuple[tuple[str, np.ndarray], ...]
    a1v: tuple[tuple[str, np.ndarray], ...]
    a2v: tuple[tuple[str, np.ndarray], ...]
    dropped: tuple[tuple[str, str], ...]
    coverage: Mapping[str, Fraction]
    truncation: tuple[tuple[str, str], ...]
    below_coverage: bool

    def pairs(self, label: str) -> tuple[tuple[str, np.ndarray], ...]:
        if label not in SET_LABELS:
            raise KeyError(label)
        return getattr(self, f"{label}v")

    def matrix(self, label: str) -> np.ndarray:
        """Stacked float64 vectors of one resolved set, in resolution order."""
        pairs = self.pairs(label)
        if not pairs:
            return np.zeros((0, 0))
        return np.array([vec for _, vec in pairs], dtype=np.float64)


@dataclass(frozen=True)
class SpecFile:
    version: int
    specs: tuple[BiasSpecification, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "specs", tuple(self.specs))
        ids = [s.id for s in self.specs]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise SpecError(f"duplicate spec ids: {dupes}")

    def get(self, spec_id: str) -> BiasSpecification:
        for s in self.specs:
            if s.id == spec_id:
                return s
        raise KeyError(spec_id)


def parse_spec_file(path: str | Path) -> SpecFile:
    """Parse and validate a UTF-8 JSON spec file.

    Schema: ``{"version": int, "specs": [{"id", "kind", "bias_type",
    "lang", "t1": [...], "t2": [...], "a1": [...], "a2": [...]}]}``.
    Invariant violations (duplicate ids, overlapping sets, explicit specs
    with empty attribute sets) are errors, not warnings.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict) or "specs" not in raw:
        raise SpecError(f"{path}: expected an object with a 'specs' list")
    version = raw.get("version", 1)
    if not isinstance(version, int):
        raise SpecError(f"{path}: version must be an integer")
    specs = []
    for entry in raw["specs"]:
        try:
            specs.append(BiasSpecification(
                id=entry["id"], kind=entry["kind"],
                bias_type=entry.get("bias_type", ""), lang=entry.get("lang", ""),
                t1=tuple(entry["t1"]), t2=tuple(entry["t2"]),
                a1=tuple(entry.get("a1", ())), a2=tuple(entry.get("a2", ())),
            ))
        except KeyError as exc:
            raise SpecError(f"{path}: spec missing field {exc}") from exc
    return SpecFile(version=version, specs=tuple(specs))


def write_spec_file(spec_file: SpecFile, path: str | Path) -> None:
    payload = {"version": spec_file.version, "specs": [s.to_dict() for s in spec_file.specs]}
    Path(path).write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n",
                          encoding="utf-8")


def load_bundled(name: str) -> SpecFile:
    """Load one of the spec files shipped with the package.

    Available names: ``araweat_msa`` (the MSA battery; weat7 carries the
    published translation, the remaining tests carry provisional
    translations meant to be replaced by released battery data) and
    ``weat_en`` (the original English stimuli for tests 1, 2, 7, 8, 9).
    """
    if name not in BUNDLED_SPEC_FILES:
        raise SpecError(f"unknown bundled spec file {name!r}; have {BUNDLED_SPEC_FILES}")
    ref = resources.files("wordbias").joinpath("data", f"{name}.json")
    with resources.as_file(ref) as path:
        return parse_spec_file(path)


def resolve(spec: BiasSpecification, space: EmbeddingSpace,
            policy: NormalizationPolicy | None = None,
            min_coverage: float = 0.2) -> ResolvedSpec:
    """Resolve every term of a specification against a space.

    OOV terms are recorded in ``dropped``; resolved target sets are
    balanced by tail-truncating the larger one. The result is flagged
    below-coverage when any resolved set covers less than ``min_coverage``
    of its original terms (strict comparison on exact rationals).
    """
    if not 0.0 <= min_coverage <= 1.0:
        raise ValueError(f"min_coverage must be in [0, 1], got {min_coverage}")
    policy = policy if policy is not None else NormalizationPolicy()
    labels = SET_LABELS if spec.explicit else ("t1", "t2")

    resolved: dict[str, list[tuple[str, np.ndarray]]] = {lbl: [] for lbl in SET_LABELS}
    dropped: list[tuple[str, str]] = []
    coverage: dict[str, Fraction] = {}
    for label in labels:
        terms = spec.terms(label)
        for term in terms:
            hit = lookup(space, term, policy)
            if hit.found:
                resolved[label].append((term, np.asarray(hit.vector, dtype=np.float64)))
            else:
                dropped.append((term, label))
        coverage[label] = Fraction(len(resolved[label]), len(terms))
        if not resolved[label]:
            raise ResolutionError(
                f"{spec.id}: no term of set {label} found in space {space.name!r}")

    truncation: list[tuple[str, str]] = []
    n1, n2 = len(resolved["t1"]), len(resolved["t2"])
    if n1 != n2:
        label = "t1" if n1 > n2 else "t2"
        keep = min(n1, n2)
        for term, _ in resolved[label][keep:]:
            truncation.append((term, label))
        resolved[label] = resolved[label][:keep]

    below = any(coverage[label] < min_coverage for label in labels)
    return ResolvedSpec(
        spec=spec,
        t1v=tuple(resolved["t1"]), t2v=tuple(resolved["t2"]),
        a1v=tuple(resolved["a1"]), a2v=tuple(resolved["a2"]),
        dropped=tuple(dropped), coverage=dict(coverage),
        truncation=tuple(truncation), below_coverage=below,
    )


def to_implicit(spec: BiasSpecification) -> BiasSpecification:
    """Drop the attribute sets, keeping targets as-is. Idempotent."""
    if not spec.explicit:
        return spec
    return replace(spec, kind="implicit", a1=(), a2=())
