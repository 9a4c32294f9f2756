"""Shared independent oracles: brute-force recomputations the fast paths
are checked against. These stay deliberately naive."""

from __future__ import annotations

import itertools
import math

import numpy as np

from topocloud.distance import augmented_cost
from topocloud.persistence import PersistenceDiagram


def brute_distance_matrix(points: np.ndarray) -> np.ndarray:
    """Double-loop Euclidean distances."""
    n = points.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = math.sqrt(float(np.sum((points[i] - points[j]) ** 2)))
    return out


def gf2_rank(columns: list[int]) -> int:
    """Rank of a set of Z/2 column bitsets by Gaussian elimination."""
    pivots: dict[int, int] = {}
    rank = 0
    for col in columns:
        while col:
            low = col.bit_length() - 1
            if low in pivots:
                col ^= pivots[low]
            else:
                pivots[low] = col
                rank += 1
                break
    return rank


def betti_by_rank(f, bm, eps: float, k: int) -> int:
    """Betti number of the sub-filtration at eps: dim C_k - rank d_k - rank d_{k+1}."""
    alive = f.values <= eps

    def boundary_rank(kk: int) -> int:
        if kk == 0 or kk > f.max_dim:
            return 0
        pos = {
            g: i
            for i, g in enumerate(j for j in f.by_dim[kk - 1].tolist() if alive[j])
        }
        cols = []
        for j in f.by_dim[kk].tolist():
            if not alive[j]:
                continue
            c = 0
            for r in bm.column(j).tolist():
                c |= 1 << pos[r]
            cols.append(c)
        return gf2_rank(cols)

    n_k = int(np.sum(alive[f.by_dim[k]])) if k <= f.max_dim else 0
    return n_k - boundary_rank(k) - boundary_rank(k + 1)


def brute_wasserstein(d1: PersistenceDiagram, d2: PersistenceDiagram) -> float:
    """Minimum over all augmented perfect matchings of the total cost."""
    ac = augmented_cost(d1, d2)
    n = ac.size
    if n == 0:
        return 0.0
    best = math.inf
    for perm in itertools.permutations(range(n)):
        best = min(best, sum(ac.matrix[i, perm[i]] for i in range(n)))
    return best


def brute_bottleneck(d1: PersistenceDiagram, d2: PersistenceDiagram) -> float:
    """Minimum over all augmented perfect matchings of the max edge cost."""
    ac = augmented_cost(d1, d2)
    n = ac.size
    if n == 0:
        return 0.0
    best = math.inf
    for perm in itertools.permutations(range(n)):
        best = min(best, max(ac.matrix[i, perm[i]] for i in range(n)))
    return best


def random_diagram(rng: np.random.Generator, max_points: int, dim: int = 1) -> PersistenceDiagram:
    """Random finite diagram with births in [0, 1) and positive persistence."""
    m = int(rng.integers(0, max_points + 1))
    births = rng.random(m)
    deaths = births + rng.random(m) + 1e-3
    pts = tuple(sorted((float(b), float(d)) for b, d in zip(births, deaths)))
    return PersistenceDiagram(dim, pts)
