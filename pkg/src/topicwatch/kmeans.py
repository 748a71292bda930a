"""Seeded k-means (k-means++ init, Lloyd iterations) with an elbow helper.

Rows are internally reordered by a content-derived key and all randomness
is keyed per row, so results are invariant (up to relabeling) under row
permutation. Cluster labels are canonicalized by descending size, then
lexicographic centroid order, so reports are stable across reruns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lda._rng import MASK64, fnv1a64, mix64

MAX_LLOYD_ITERATIONS = 300


@dataclass(frozen=True)
class KMeansResult:
    k: int
    assignments: np.ndarray  # cluster label per input row
    centroids: np.ndarray  # canonical order: by size desc, centroid lex
    wcss: float
    wcss_trace: tuple[float, ...]  # per Lloyd iteration of the winning run
    seeds: tuple[int, ...]
    best_seed: int | None  # None when the warm-start candidate won

    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k)


@dataclass(frozen=True)
class ElbowResult:
    suggested_k: int
    curve: dict[int, float]  # k -> best WCSS
    results: dict[int, KMeansResult]


def _row_keys(matrix: np.ndarray) -> np.ndarray:
    return np.array(
        [fnv1a64(matrix[i].tobytes().hex()) for i in range(matrix.shape[0])],
        dtype=np.uint64,
    )


def _row_uniform(seed: int, row_key: int, round_idx: int) -> float:
    state = mix64((seed + 0x9E3779B97F4A7C15) & MASK64)
    state = mix64(state ^ row_key)
    state = mix64(state ^ round_idx)
    return (state >> 11) * 1.1102230246251565e-16


def _sq_distances(matrix: np.ndarray, centroid: np.ndarray) -> np.ndarray:
    diff = matrix - centroid
    return np.einsum("ij,ij->i", diff, diff)


def _kmeanspp_init(matrix: np.ndarray, k: int, keys: np.ndarray, seed: int) -> np.ndarray:
    """k-means++ seeding via per-row exponential races (permutation safe)."""
    n = matrix.shape[0]
    chosen: list[int] = []
    best_sq = np.full(n, np.inf)
    for round_idx in range(k):
        if round_idx == 0:
            weights = np.ones(n)
        else:
            best_sq = np.minimum(best_sq, _sq_distances(matrix, matrix[chosen[-1]]))
            weights = best_sq
        scores = np.full(n, np.inf)
        for r in range(n):
            if r in chosen or weights[r] <= 0.0:
                continue
            u = _row_uniform(seed, int(keys[r]), round_idx)
            scores[r] = -math.log(1.0 - u) / weights[r]
        if np.isinf(scores).all():
            # all remaining rows coincide with chosen centroids; WCSS is
            # already attained, take the first unchosen row deterministically
            remaining = [r for r in range(n) if r not in chosen]
            pick = remaining[0]
        else:
            minimum = scores.min()
            pick = int(min(r for r in range(n) if scores[r] == minimum))
        chosen.append(pick)
    return matrix[chosen].copy()


def _lloyd(matrix: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Iterate assign/update until the assignment stops changing."""
    n, k = matrix.shape[0], centroids.shape[0]
    assignments = np.full(n, -1, dtype=np.int64)
    trace: list[float] = []
    for _ in range(MAX_LLOYD_ITERATIONS):
        sq = np.stack([_sq_distances(matrix, centroids[c]) for c in range(k)], axis=1)
        new_assignments = np.argmin(sq, axis=1)
        trace.append(float(sq[np.arange(n), new_assignments].sum()))
        if np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments
        for c in range(k):
            members = matrix[assignments == c]
            if members.shape[0] > 0:
                centroids[c] = members.mean(axis=0)
    return assignments, centroids, trace


def _canonicalize(
    assignments: np.ndarray, centroids: np.ndarray, k: int
) -> tuple[np.ndarray, np.ndarray]:
    sizes = np.bincount(assignments, minlength=k)
    order = sorted(range(k), key=lambda c: (-sizes[c], tuple(centroids[c])))
    relabel = np.empty(k, dtype=np.int64)
    for new, old in enumerate(order):
        relabel[old] = new
    return relabel[assignments], centroids[order].copy()


def kmeans(matrix: np.ndarray, k: int, seeds: tuple[int, ...] | list[int] = (0,)) -> KMeansResult:
    """Best-of-seeds k-means on the rows of ``matrix``."""
    return _kmeans_with_candidates(matrix, k, seeds, extra_inits=[])


def _kmeans_with_candidates(
    matrix: np.ndarray,
    k: int,
    seeds,
    extra_inits: list[np.ndarray],
) -> KMeansResult:
    matrix = np.asarray(matrix, dtype=np.float64)
    n = matrix.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of rows ({n})")
    keys = _row_keys(matrix)
    canonical = sorted(range(n), key=lambda i: (int(keys[i]), i))
    inverse = np.argsort(canonical)
    work = matrix[canonical]
    work_keys = keys[canonical]

    best: tuple[float, int | None, np.ndarray, np.ndarray, list[float]] | None = None
    for seed in seeds:
        init = _kmeanspp_init(work, k, work_keys, seed)
        assignments, centroids, trace = _lloyd(work, init)
        if best is None or trace[-1] < best[0]:
            best = (trace[-1], seed, assignments, centroids, trace)
    for init in extra_inits:
        assignments, centroids, trace = _lloyd(work, init.copy())
        if best is None or trace[-1] < best[0]:
            best = (trace[-1], None, assignments, centroids, trace)

    wcss, best_seed, assignments, centroids, trace = best
    assignments, centroids = _canonicalize(assignments, centroids, k)
    return KMeansResult(
        k=k,
        assignments=assignments[inverse],
        centroids=centroids,
        wcss=wcss,
        wcss_trace=tuple(trace),
        seeds=tuple(seeds),
        best_seed=best_seed,
    )


def elbow(
    matrix: np.ndarray,
    k_range: tuple[int, int] = (2, 15),
    seeds: tuple[int, ...] | list[int] = tuple(range(9)),
) -> ElbowResult:
    """WCSS curve over k with the second-difference elbow suggestion.

    Each k is additionally warm-started from the previous best solution
    (plus the farthest point as the extra centroid), which makes the curve
    non-increasing in k by construction. The suggestion is advisory; the
    operator confirms or overrides it.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    k_lo, k_hi = k_range
    k_hi = min(k_hi, matrix.shape[0])
    if k_lo > k_hi:
        raise ValueError(f"empty k range after capping at row count: ({k_lo}, {k_hi})")

    keys = _row_keys(matrix)
    results: dict[int, KMeansResult] = {}
    curve: dict[int, float] = {}
    previous: KMeansResult | None = None
    for k in range(k_lo, k_hi + 1):
        extra: list[np.ndarray] = []
        if previous is not None:
            sq = np.stack(
                [_sq_distances(matrix, c) for c in previous.centroids], axis=1
            ).min(axis=1)
            largest = sq.max()
            farthest = min(
                (i for i in range(matrix.shape[0]) if sq[i] == largest),
                key=lambda i: int(keys[i]),
            )
            extra.append(np.vstack([previous.centroids, matrix[farthest]]))
        result = _kmeans_with_candidates(matrix, k, seeds, extra_inits=extra)
        results[k] = result
        curve[k] = result.wcss
        previous = result

    ks = sorted(curve)
    if len(ks) < 3:
        suggested = ks[0]
    else:
        second_diff = {
            ks[i]: curve[ks[i - 1]] - 2.0 * curve[ks[i]] + curve[ks[i + 1]]
            for i in range(1, len(ks) - 1)
        }
        best_value = max(second_diff.values())
        suggested = min(k for k, v in second_diff.items() if v == best_value)
    return ElbowResult(suggested_k=suggested, curve=curve, results=results)
