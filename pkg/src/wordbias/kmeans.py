"""A small KMeans++ kernel for clustering target term vectors.

Seeding follows the D^2-weighted scheme: the first center is drawn
uniformly, each further center with probability proportional to the
squared distance to the nearest center chosen so far. Lloyd iterations
then alternate nearest-center assignment and mean updates until the
assignment stabilizes. All randomness flows through one Generator so a
seed fixes the outcome.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ClusteringResult:
    labels: np.ndarray
    centers: np.ndarray
    inertia: float
    iterations: int
    converged: bool


def _sq_dist_to_nearest(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # (n, c) squared distances, reduced to the per-point minimum
    diffs = points[:, None, :] - centers[None, :, :]
    return np.min(np.einsum("ncd,ncd->nc", diffs, diffs), axis=1)


def _seed_centers(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    first = int(rng.integers(n))
    chosen = [first]
    for _ in range(1, k):
        d2 = _sq_dist_to_nearest(points, points[chosen])
        total = float(d2.sum())
        if total > 0.0:
            probs = d2 / total
            idx = int(rng.choice(n, p=probs))
        else:
            # all points coincide with a chosen center; fall back to uniform
            idx = int(rng.integers(n))
        chosen.append(idx)
    return points[chosen].copy()


def kmeans_pp(points: np.ndarray, k: int, seed: int,
              max_iters: int = 300) -> ClusteringResult:
    """Cluster rows of ``points`` into ``k`` groups.

    Ties in assignment go to the lower center index. A center losing all
    its points is reseeded at the point farthest from its assigned center,
    which keeps exactly k non-degenerate clusters whenever the data has at
    least k distinct rows.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError(f"points must be 2-d, got shape {points.shape}")
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k={k}")
    if not np.all(np.isfinite(points)):
        raise ValueError("points must be finite")

    rng = np.random.default_rng(seed)
    centers = _seed_centers(points, k, rng)
    labels = np.full(n, -1, dtype=np.int64)
    converged = False
    iterations = 0
    for iterations in range(1, max_iters + 1):
        diffs = points[:, None, :] - centers[None, :, :]
        d2 = np.einsum("ncd,ncd->nc", diffs, diffs)
        new_labels = np.argmin(d2, axis=1)

        for c in range(k):
            mask = new_labels == c
            if mask.any():
                centers[c] = points[mask].mean(axis=0)
            else:
                per_point = d2[np.arange(n), new_labels]
                farthest = int(np.argmax(per_point))
                centers[c] = points[farthest]
                new_labels[farthest] = c

        if np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels

    diffs = points[:, None, :] - centers[None, :, :]
    d2 = np.einsum("ncd,ncd->nc", diffs, diffs)
    inertia = float(d2[np.arange(n), labels].sum())
    return ClusteringResult(labels=labels, centers=centers, inertia=inertia,
                            iterations=iterations, converged=converged)
