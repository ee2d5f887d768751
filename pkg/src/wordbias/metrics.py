"""Explicit and implicit bias metrics over resolved term sets.

Explicit metrics (WEAT statistic with permutation test and effect size,
ECT, BAT) need both target and attribute sets; the implicit metric (KM)
clusters targets only. Everything is computed in float64 regardless of
the stored vector dtype, and every stochastic step takes an explicit
seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy import stats

from .kmeans import kmeans_pp
from .specs import ResolvedSpec

_P_VALUE_METHODS = ("auto", "exhaustive", "montecarlo")


@dataclass(frozen=True)
class WeatResult:
    """Differential-association test outcome.

    ``effect_size`` is None when the pooled associations have zero
    spread (the normalizer vanishes). ``p_exact`` tells whether the
    p-value enumerates every equally sized split or samples them.
    """

    statistic: float
    effect_size: float | None
    p_value: float
    p_exact: bool
    permutations_used: int


@dataclass(frozen=True)
class MetricScore:
    """A scalar score plus metric-specific detail.

    ``value`` is None when the score is undefined on the given inputs
    (degenerate rank correlation, zero-spread similarities).
    """

    value: float | None
    detail: dict


def _rows(rs: ResolvedSpec, label: str) -> np.ndarray:
    m = rs.matrix(label)
    if m.size == 0:
        raise ValueError(f"{rs.spec.id}: resolved set {label} is empty; "
                         "explicit metrics need attribute sets")
    return m


def _cosine_rows(targets: np.ndarray, attrs: np.ndarray) -> np.ndarray:
    """Pairwise cosine matrix with zero vectors mapped to similarity 0."""
    tn = np.linalg.norm(targets, axis=1)
    an = np.linalg.norm(attrs, axis=1)
    dots = targets @ attrs.T
    denom = tn[:, None] * an[None, :]
    out = np.zeros_like(dots)
    np.divide(dots, denom, out=out, where=denom > 0.0)
    return out


def association(target: np.ndarray, a1: np.ndarray, a2: np.ndarray) -> float:
    """Mean cosine of one target to a1 minus its mean cosine to a2."""
    return float(associations(np.asarray(target, dtype=np.float64)[None, :], a1, a2)[0])


def associations(targets: np.ndarray, a1: np.ndarray, a2: np.ndarray) -> np.ndarray:
    targets = np.asarray(targets, dtype=np.float64)
    a1 = np.asarray(a1, dtype=np.float64)
    a2 = np.asarray(a2, dtype=np.float64)
    if a1.shape[0] == 0 or a2.shape[0] == 0:
        raise ValueError("attribute sets must be non-empty")
    return _cosine_rows(targets, a1).mean(axis=1) - _cosine_rows(targets, a2).mean(axis=1)


def weat_statistic(rs: ResolvedSpec) -> float:
    """Sum of t1 associations minus sum of t2 associations."""
    a1, a2 = _rows(rs, "a1"), _rows(rs, "a2")
    s1 = associations(_rows(rs, "t1"), a1, a2)
    s2 = associations(_rows(rs, "t2"), a1, a2)
    return float(s1.sum() - s2.sum())


def weat_effect_size(rs: ResolvedSpec) -> float | None:
    """Mean association gap normalized by the pooled population std.

    Returns None when every pooled association is identical, which
    leaves the normalizer at zero. The pooled moments are assembled
    from per-set partial sums; addition commutes, so swapping the
    target sets flips the sign bit-exactly.
    """
    a1, a2 = _rows(rs, "a1"), _rows(rs, "a2")
    s1 = associations(_rows(rs, "t1"), a1, a2)
    s2 = associations(_rows(rs, "t2"), a1, a2)
    n = s1.shape[0] + s2.shape[0]
    mean_all = (float(s1.sum()) + float(s2.sum())) / n
    var = (float(((s1 - mean_all) ** 2).sum())
           + float(((s2 - mean_all) ** 2).sum())) / n
    spread = math.sqrt(var)
    if spread == 0.0:
        return None
    return float((s1.mean() - s2.mean()) / spread)


def weat_p_value(rs: ResolvedSpec, max_permutations: int = 100_000,
                 seed: int = 0, method: str = "auto") -> tuple[float, bool, int]:
    """One-sided permutation p-value of the differential-association test.

    Partitions the pooled targets into splits of sizes (|t1|, |t2|) and
    reports the fraction with a strictly greater statistic than the
    observed split. All splits are enumerated when their count fits in
    ``max_permutations`` (or ``method="exhaustive"``); otherwise that
    many are sampled with the given seed. Returns (p, exact, splits_used).
    """
    if method not in _P_VALUE_METHODS:
        raise ValueError(f"method must be one of {_P_VALUE_METHODS}, got {method!r}")
    a1, a2 = _rows(rs, "a1"), _rows(rs, "a2")
    t1, t2 = _rows(rs, "t1"), _rows(rs, "t2")
    n1 = t1.shape[0]
    pool = associations(np.concatenate([t1, t2]), a1, a2)
    total = pool.shape[0]
    s_all = float(pool.sum())

    def split_stat(indices: np.ndarray) -> float:
        # s(X1, X2) = sum(X1) - sum(X2) = 2 sum(X1) - sum(all)
        return 2.0 * float(pool[indices].sum()) - s_all

    s_obs = split_stat(np.arange(n1))
    n_splits = math.comb(total, n1)
    exhaustive = method == "exhaustive" or (method == "auto" and n_splits <= max_permutations)

    if exhaustive:
        count = sum(1 for idx in combinations(range(total), n1)
                    if split_stat(np.array(idx)) > s_obs)
        return count / n_splits, True, n_splits

    rng = np.random.default_rng(seed)
    count = 0
    remaining = max_permutations
    while remaining > 0:
        batch = min(remaining, 20_000)
        draws = rng.random((batch, total)).argsort(axis=1)[:, :n1]
        # Sum each subset in ascending index order so a split that ties the
        # observed statistic reproduces its value bit-for-bit; otherwise the
        # strict comparison below is decided by rounding order, not by data.
        draws.sort(axis=1)
        sums = np.take_along_axis(np.broadcast_to(pool, (batch, total)), draws, axis=1).sum(axis=1)
        count += int(np.sum(2.0 * sums - s_all > s_obs))
        remaining -= batch
    return count / max_permutations, False, max_permutations


def weat(rs: ResolvedSpec, max_permutations: int = 100_000, seed: int = 0,
         method: str = "auto") -> WeatResult:
    """Statistic, effect size, and permutation p-value in one pass."""
    p, exact, used = weat_p_value(rs, max_permutations=max_permutations,
                                  seed=seed, method=method)
    return WeatResult(
        statistic=weat_statistic(rs),
        effect_size=weat_effect_size(rs),
        p_value=p, p_exact=exact, permutations_used=used,
    )


def ect_score(rs: ResolvedSpec) -> MetricScore:
    """Rank correlation of attribute similarities to the two mean targets.

    Both target sets are averaged into one vector each; every attribute
    is scored by cosine against both means, and the two similarity
    profiles are compared with Spearman correlation (average ranks).
    Higher agreement means attributes relate to both target concepts
    alike, i.e. less bias. Needs at least 3 distinct attributes; a
    constant profile has no defined rank correlation, giving value None.
    """
    t1_mean = _rows(rs, "t1").mean(axis=0)
    t2_mean = _rows(rs, "t2").mean(axis=0)
    seen: set[str] = set()
    attrs = []
    for term, vec in (*rs.pairs("a1"), *rs.pairs("a2")):
        if term not in seen:
            seen.add(term)
            attrs.append(vec)
    if len(attrs) < 3:
        raise ValueError(f"{rs.spec.id}: rank correlation needs at least 3 attributes, "
                         f"got {len(attrs)}")
    attr_matrix = np.array(attrs, dtype=np.float64)
    sims1 = _cosine_rows(attr_matrix, t1_mean[None, :])[:, 0]
    sims2 = _cosine_rows(attr_matrix, t2_mean[None, :])[:, 0]
    if np.ptp(sims1) == 0.0 or np.ptp(sims2) == 0.0:
        return MetricScore(value=None, detail={"n_attributes": len(attrs),
                                               "note": "constant similarity profile"})
    rho = stats.spearmanr(sims1, sims2).statistic
    value = None if np.isnan(rho) else float(rho)
    return MetricScore(value=value, detail={"n_attributes": len(attrs)})


def bat_score(rs: ResolvedSpec) -> MetricScore:
    """Fraction of analogy queries completed by the stereotype-consistent term.

    Two query families are scored. Target-pair queries t1 - t2 + a2
    should land near a2's own set; they count as biased against each
    attribute a1 and each alternative a2' when a1 sits strictly closer
    than a2'. Attribute-seeded queries a1 - t1 + t2 count as biased when
    some a2 sits strictly closer than an alternative a1'. Distances are
    squared Euclidean in float64, and exact ties never count as biased.
    """
    t1 = _rows(rs, "t1")
    t2 = _rows(rs, "t2")
    a1 = _rows(rs, "a1")
    a2 = _rows(rs, "a2")
    m1, m2 = a1.shape[0], a2.shape[0]
    if m1 < 2 or m2 < 2:
        raise ValueError(f"{rs.spec.id}: analogy test needs at least 2 terms "
                         "in each attribute set")

    def sq_dists(queries: np.ndarray, points: np.ndarray) -> np.ndarray:
        return ((queries[:, None, :] - points[None, :, :]) ** 2).sum(axis=-1)

    biased = 0
    for i in range(t1.shape[0]):
        for j in range(t2.shape[0]):
            q1 = t1[i] - t2[j] + a2           # one query per a2 term
            d_own = sq_dists(q1, a1)          # (m2, m1)
            d_alt = sq_dists(q1, a2)          # (m2, m2)
            hits = d_own[:, :, None] < d_alt[:, None, :]
            # drop comparisons of a query against its own seed term
            self_hits = d_own < d_alt[np.arange(m2), np.arange(m2)][:, None]
            biased += int(hits.sum()) - int(self_hits.sum())

            q2 = a1 - t1[i] + t2[j]           # one query per a1 term
            d_own = sq_dists(q2, a2)          # (m1, m2)
            d_alt = sq_dists(q2, a1)          # (m1, m1)
            hits = d_own[:, :, None] < d_alt[:, None, :]
            self_hits = d_own < d_alt[np.arange(m1), np.arange(m1)][:, None]
            biased += int(hits.sum()) - int(self_hits.sum())

    n1, n2 = t1.shape[0], t2.shape[0]
    total = n1 * n2 * m1 * m2 * ((m1 - 1) + (m2 - 1))
    return MetricScore(value=biased / total, detail={"biased": biased, "total": total})


def km_accuracy(rs: ResolvedSpec, runs: int = 20, base_seed: int = 0) -> MetricScore:
    """Mean accuracy of recovering the two target sets by clustering.

    The pooled target vectors are clustered into two groups ``runs``
    times (seeds ``base_seed .. base_seed + runs - 1``); each run scores
    the better of the two cluster-to-set alignments. 1.0 means the sets
    separate perfectly, 0.5 means chance on balanced sets.
    """
    if runs < 1:
        raise ValueError(f"runs must be positive, got {runs}")
    t1 = rs.matrix("t1")
    t2 = rs.matrix("t2")
    if t1.size == 0 or t2.size == 0:
        raise ValueError(f"{rs.spec.id}: both target sets must be non-empty")
    points = np.concatenate([t1, t2])
    truth = np.concatenate([np.zeros(t1.shape[0], dtype=np.int64),
                            np.ones(t2.shape[0], dtype=np.int64)])
    n = points.shape[0]
    per_run = []
    for r in range(runs):
        result = kmeans_pp(points, k=2, seed=base_seed + r)
        matches = int(np.sum(result.labels == truth))
        per_run.append(max(matches, n - matches) / n)
    return MetricScore(value=float(np.mean(per_run)),
                       detail={"runs": runs, "per_run": per_run})
