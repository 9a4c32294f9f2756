"""Persistent homology over Z/2Z via boundary-matrix column reduction.

The reduction is the standard left-to-right algorithm with the
twist/clearing optimization: dimensions are processed in decreasing order
and columns of simplices already known to be creators are skipped. Columns
are represented as arbitrary-precision integer bitsets over the local row
index space of the next-lower dimension, so a column addition is a single
XOR and the pivot is `bit_length() - 1`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .filtration import Filtration
from .pointcloud import DistanceMatrix

__all__ = [
    "BoundaryMatrix",
    "PersistencePair",
    "PersistenceDiagram",
    "LifetimeStats",
    "boundary_matrix",
    "reduce",
    "diagram",
    "betti_curve",
    "lifetime_stats",
    "h0_unionfind",
    "save_diagram",
    "load_diagram",
]


class PersistencePair(NamedTuple):
    """One homology class: (dim, birth, death, creator, destroyer).

    death is math.inf and destroyer is None for essential classes. creator
    and destroyer are filtration indices.
    """

    dim: int
    birth: float
    death: float
    creator: int
    destroyer: Optional[int]


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of (birth, death) points for one homology dimension."""

    dim: int
    points: tuple[tuple[float, float], ...]

    def __len__(self) -> int:
        return len(self.points)

    def as_array(self) -> np.ndarray:
        if not self.points:
            return np.empty((0, 2), dtype=np.float64)
        return np.array(self.points, dtype=np.float64)

    def lifetimes(self) -> np.ndarray:
        """Finite lifetimes (death - birth); essential points are skipped."""
        arr = self.as_array()
        fin = arr[np.isfinite(arr[:, 1])]
        return fin[:, 1] - fin[:, 0]


@dataclass(frozen=True)
class LifetimeStats:
    """Lifetime summary of one diagram: finite pairs only, fixed-width bins."""

    dim: int
    count: int
    essential_count: int
    mean_lifetime: float
    max_lifetime: float
    histogram: tuple[int, ...]
    bin_width: float


class BoundaryMatrix:
    """Z/2 boundary matrix in column-sparse form.

    Column j lists the filtration indices of the codimension-1 faces of
    simplex j, sorted ascending. Vertex columns are empty.
    """

    def __init__(self, col_ptr: np.ndarray, rows: np.ndarray):
        self.col_ptr = col_ptr  # (m+1,) int64
        self.rows = rows  # (nnz,) int64
        self.col_ptr.flags.writeable = False
        self.rows.flags.writeable = False

    @property
    def m(self) -> int:
        return self.col_ptr.shape[0] - 1

    def column(self, j: int) -> np.ndarray:
        return self.rows[self.col_ptr[j] : self.col_ptr[j + 1]]


def _encode(verts: np.ndarray, base: int) -> np.ndarray:
    """Injective integer key for sorted vertex tuples of equal length."""
    keys = np.zeros(verts.shape[0], dtype=np.int64)
    for c in range(verts.shape[1]):
        keys = keys * base + verts[:, c]
    return keys


def boundary_matrix(f: Filtration) -> BoundaryMatrix:
    """Boundary matrix of a canonical filtration (faces precede cofaces)."""
    m = len(f)
    n = f.n_points
    counts = np.where(f.dims >= 1, f.dims.astype(np.int64) + 1, 0)
    col_ptr = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(counts, out=col_ptr[1:])
    rows = np.empty(int(col_ptr[-1]), dtype=np.int64)

    # Per dimension: sorted key table of the (d-1)-simplices for face lookup.
    for d in range(1, f.max_dim + 1):
        globals_d = f.by_dim[d]
        if globals_d.size == 0:
            continue
        verts_d = f.vertex_array(d)
        face_keys_table = _encode(f.vertex_array(d - 1), n)
        table_order = np.argsort(face_keys_table, kind="stable")
        table_sorted = face_keys_table[table_order]
        faces = np.empty((globals_d.size, d + 1), dtype=np.int64)
        for drop in range(d + 1):
            fac = np.delete(verts_d, drop, axis=1)
            pos = np.searchsorted(table_sorted, _encode(fac, n))
            faces[:, drop] = f.by_dim[d - 1][table_order[pos]]
        faces.sort(axis=1)
        targets = col_ptr[globals_d][:, None] + np.arange(d + 1)[None, :]
        rows[targets.ravel()] = faces.ravel()
    return BoundaryMatrix(col_ptr, rows)


def reduce(bm: BoundaryMatrix, f: Filtration) -> list[PersistencePair]:
    """Standard persistence pairing of a filtration.

    Left-to-right column reduction over Z/2 with the twist optimization:
    for each dimension from max_dim down to 1, columns are reduced in
    filtration order; a column that empties marks its simplex as a creator,
    a column with final pivot i pairs simplex i (creator) with simplex j
    (destroyer), and column i is cleared before the next dimension is
    processed. Unpaired creators become essential pairs with death +inf.

    The returned list is sorted by (dim, creator index) and is identical
    across runs for identical input.
    """
    m = len(f)
    dims = f.dims
    values = f.values

    # Local row index of each simplex among the simplices of its dimension.
    local = np.empty(m, dtype=np.int64)
    for d in range(f.max_dim + 1):
        local[f.by_dim[d]] = np.arange(f.by_dim[d].size, dtype=np.int64)
    rows_local = local[bm.rows].tolist()
    col_ptr = bm.col_ptr.tolist()

    cleared = bytearray(m)
    pairs: list[tuple[int, int]] = []  # (creator, destroyer) filtration indices
    essential: list[int] = []

    for d in range(f.max_dim, 0, -1):
        prev_globals = f.by_dim[d - 1]
        registered: dict[int, int] = {}  # pivot (local row) -> reduced column bitset
        for j in f.by_dim[d].tolist():
            if cleared[j]:
                continue
            start = col_ptr[j]
            col = 0
            for t in range(start, start + d + 1):
                col |= 1 << rows_local[t]
            while col:
                low = col.bit_length() - 1
                other = registered.get(low)
                if other is None:
                    registered[low] = col
                    creator = int(prev_globals[low])
                    pairs.append((creator, j))
                    cleared[creator] = 1
                    break
                col ^= other
            else:
                essential.append(j)

    for v in f.by_dim[0].tolist():
        if not cleared[v]:
            essential.append(v)

    out = [
        PersistencePair(int(dims[i]), float(values[i]), float(values[j]), i, j)
        for i, j in pairs
    ]
    out.extend(
        PersistencePair(int(dims[i]), float(values[i]), math.inf, i, None)
        for i in essential
    )
    out.sort(key=lambda p: (p.dim, p.creator))
    return out


def diagram(
    pairs: Sequence[PersistencePair],
    dim: int,
    include_zero: bool = False,
    include_essential: bool = False,
) -> PersistenceDiagram:
    """Extract the dim-k diagram from a pair list.

    Zero-persistence pairs (death == birth) and essential pairs are dropped
    unless the corresponding flag is set.
    """
    pts = []
    for p in pairs:
        if p.dim != dim:
            continue
        if math.isinf(p.death):
            if not include_essential:
                continue
        elif p.death == p.birth and not include_zero:
            continue
        pts.append((p.birth, p.death))
    pts.sort()
    return PersistenceDiagram(dim, tuple(pts))


def betti_curve(pairs: Sequence[PersistencePair], dim: int, eps: float) -> int:
    """Number of dim-k classes alive at scale eps (birth <= eps < death)."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return sum(1 for p in pairs if p.dim == dim and p.birth <= eps < p.death)


def lifetime_stats(d: PersistenceDiagram, bins: int, bin_width: float) -> LifetimeStats:
    """Mean/max/histogram of finite lifetimes.

    Bins are left-closed [i*w, (i+1)*w); lifetimes past the last edge clamp
    into the last bin. Empty diagrams report count 0 and mean = max = 0.
    """
    if bins < 1:
        raise ValueError("bins must be at least 1")
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    arr = d.as_array()
    essential = int(np.sum(~np.isfinite(arr[:, 1]))) if len(arr) else 0
    lifetimes = d.lifetimes()
    hist = [0] * bins
    for lt in lifetimes:
        hist[min(int(lt / bin_width), bins - 1)] += 1
    if lifetimes.size:
        mean = float(np.mean(lifetimes))
        mx = float(np.max(lifetimes))
    else:
        mean = mx = 0.0
    return LifetimeStats(
        dim=d.dim,
        count=int(lifetimes.size),
        essential_count=essential,
        mean_lifetime=mean,
        max_lifetime=mx,
        histogram=tuple(hist),
        bin_width=float(bin_width),
    )


class _UnionFind:
    """Disjoint sets with path compression and union by rank."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def h0_unionfind(
    dm: DistanceMatrix,
    include_zero: bool = False,
    include_essential: bool = False,
) -> PersistenceDiagram:
    """Dim-0 diagram by Kruskal-style union-find over ascending edges.

    Sweeps all edges of the distance matrix, so the result matches
    reduce() restricted to dim 0 (as a multiset) whenever the filtration
    radius is at least the enclosing radius.
    """
    n = dm.n
    iu, ju = np.triu_indices(n, k=1)
    vals = dm.entries[iu, ju]
    order = np.lexsort((ju, iu, vals))
    uf = _UnionFind(n)
    deaths: list[float] = []
    for k in order.tolist():
        if uf.union(int(iu[k]), int(ju[k])):
            deaths.append(float(vals[k]))
    pts = [(0.0, dth) for dth in deaths if include_zero or dth > 0.0]
    if include_essential:
        components = n - len(deaths)
        pts.extend((0.0, math.inf) for _ in range(components))
    pts.sort()
    return PersistenceDiagram(0, tuple(pts))


def save_diagram(d: PersistenceDiagram, path: str, extra: dict | None = None) -> None:
    """Write a diagram as JSON: {"dim": k, "points": [[b, d], ...]}.

    Essential deaths are written as the string "inf"; points are sorted by
    (birth, death) so files diff cleanly.
    """
    pts = sorted(d.points)
    payload: dict = {
        "dim": d.dim,
        "points": [[b, ("inf" if math.isinf(dd) else dd)] for b, dd in pts],
    }
    if extra:
        payload.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_diagram(path: str) -> PersistenceDiagram:
    """Read a diagram JSON file written by save_diagram."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict) or "dim" not in payload or "points" not in payload:
        raise ValueError(f"{path}: not a persistence-diagram file")
    pts = []
    for item in payload["points"]:
        b, dd = item
        pts.append((float(b), math.inf if dd == "inf" else float(dd)))
    pts.sort()
    return PersistenceDiagram(int(payload["dim"]), tuple(pts))
