"""Shared fixture builders for the test suite."""
from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from wordbias import BiasSpecification, EmbeddingSpace, ResolvedSpec


def build_resolved(t1, t2, a1=None, a2=None, spec_id="fix") -> ResolvedSpec:
    """Wrap raw vector lists into a ResolvedSpec with synthetic term names."""
    explicit = a1 is not None and a2 is not None

    def pairs(label, vectors):
        return tuple((f"{label}_{i}", np.asarray(v, dtype=np.float64))
                     for i, v in enumerate(vectors))

    t1p, t2p = pairs("t1", t1), pairs("t2", t2)
    a1p = pairs("a1", a1) if explicit else ()
    a2p = pairs("a2", a2) if explicit else ()
    spec = BiasSpecification(
        id=spec_id, kind="explicit" if explicit else "implicit",
        bias_type="test", lang="en",
        t1=tuple(t for t, _ in t1p), t2=tuple(t for t, _ in t2p),
        a1=tuple(t for t, _ in a1p), a2=tuple(t for t, _ in a2p),
    )
    coverage = {"t1": Fraction(1), "t2": Fraction(1)}
    if explicit:
        coverage.update({"a1": Fraction(1), "a2": Fraction(1)})
    return ResolvedSpec(spec=spec, t1v=t1p, t2v=t2p, a1v=a1p, a2v=a2p,
                        dropped=(), coverage=coverage, truncation=(),
                        below_coverage=False)


def random_resolved(rng: np.random.Generator, dim: int,
                    n1: int, n2: int, m1: int, m2: int,
                    offset: float = 0.0) -> ResolvedSpec:
    """Random explicit fixture; offset > 0 plants t1/a1 vs t2/a2 structure."""
    def block(n, sign):
        base = rng.normal(size=(n, dim))
        base[:, 0] += sign * offset
        return base

    return build_resolved(block(n1, +1), block(n2, -1),
                          block(m1, +1), block(m2, -1))


def space_of(tokens, vectors, name="fix") -> EmbeddingSpace:
    return EmbeddingSpace.from_arrays(
        name, list(tokens), np.asarray(vectors, dtype=np.float32), {})


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
