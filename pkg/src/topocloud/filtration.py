"""Vietoris-Rips filtrations of distance matrices.

A filtration stores every simplex up to a maximum dimension and radius in
the canonical order (appearance value, dimension, lexicographic vertices).
The order is total and deterministic, so the downstream boundary-matrix
reduction produces identical pairings on every platform.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import IO, Iterator

import numpy as np

from .pointcloud import DistanceMatrix

__all__ = ["Simplex", "Filtration", "build_rips", "enclosing_radius"]

# Guard against accidental combinatorial blow-up; callers may raise it.
DEFAULT_DIM_LIMIT = 3


@dataclass(frozen=True)
class Simplex:
    """An abstract simplex: strictly increasing tuple of point indices."""

    vertices: tuple[int, ...]

    def __post_init__(self) -> None:
        v = self.vertices
        if len(v) < 1 or any(v[i] >= v[i + 1] for i in range(len(v) - 1)):
            raise ValueError("vertices must be strictly increasing and non-empty")

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


class Filtration:
    """Ordered list of (simplex, appearance value) pairs for a Rips sweep.

    Internally the simplices live in flat numpy arrays; `simplex(i)` builds
    the object view on demand. Instances are immutable after construction.
    """

    def __init__(
        self,
        verts: np.ndarray,
        dims: np.ndarray,
        values: np.ndarray,
        n_points: int,
        max_dim: int,
        max_radius: float,
    ):
        self._verts = verts  # (m, max_dim+1) int32, padded with -1
        self.dims = dims  # (m,) int8
        self.values = values  # (m,) float64
        self.n_points = n_points
        self.max_dim = max_dim
        self.max_radius = max_radius
        # Global indices of the dim-d simplices, in filtration order.
        self.by_dim = tuple(
            np.flatnonzero(dims == d).astype(np.int64) for d in range(max_dim + 1)
        )
        for arr in (self._verts, self.dims, self.values):
            arr.flags.writeable = False

    def __len__(self) -> int:
        return self.values.shape[0]

    def vertices_of(self, i: int) -> tuple[int, ...]:
        row = self._verts[i]
        return tuple(int(v) for v in row[row >= 0])

    def simplex(self, i: int) -> Simplex:
        return Simplex(self.vertices_of(i))

    def value(self, i: int) -> float:
        return float(self.values[i])

    def items(self) -> Iterator[tuple[Simplex, float]]:
        for i in range(len(self)):
            yield self.simplex(i), self.value(i)

    def vertex_array(self, dim: int) -> np.ndarray:
        """(m_d, dim+1) int32 array of the dim-d simplices in filtration order."""
        return self._verts[self.by_dim[dim]][:, : dim + 1]

    def dump(self, fh: IO[str]) -> None:
        """Debug dump, one simplex per line: `value <TAB> v0,v1,...,vk`."""
        for i in range(len(self)):
            verts = ",".join(str(v) for v in self.vertices_of(i))
            fh.write(f"{self.value(i)!r}\t{verts}\n")


def enclosing_radius(dm: DistanceMatrix) -> float:
    """min over i of (max over j of d(i, j)).

    Beyond this radius the Rips complex is a cone over the minimizing
    vertex, so truncating there removes no finite persistence pair.
    """
    return float(np.min(np.max(dm.entries, axis=1)))


def _combinations(n: int, k: int) -> np.ndarray:
    """All k-subsets of range(n) as an (C, k) int32 array, lexicographic."""
    if k == 1:
        return np.arange(n, dtype=np.int32).reshape(-1, 1)
    if k == 2:
        iu = np.triu_indices(n, k=1)
        return np.stack([iu[0], iu[1]], axis=1).astype(np.int32)
    count = 1
    for i in range(k):
        count = count * (n - i) // (i + 1)
    if count == 0:
        return np.empty((0, k), dtype=np.int32)
    flat = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(n), k)),
        dtype=np.int32,
        count=count * k,
    )
    return flat.reshape(count, k)


def _simplex_values(dm: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Rips appearance value: max pairwise distance among the vertices."""
    k = verts.shape[1]
    if k == 1:
        return np.zeros(verts.shape[0], dtype=np.float64)
    vals = np.zeros(verts.shape[0], dtype=np.float64)
    for a in range(k):
        for b in range(a + 1, k):
            np.maximum(vals, dm[verts[:, a], verts[:, b]], out=vals)
    return vals


def build_rips(
    dm: DistanceMatrix,
    max_dim: int = 2,
    max_radius: float | None = None,
    dim_limit: int = DEFAULT_DIM_LIMIT,
) -> Filtration:
    """Build the Vietoris-Rips filtration of a distance matrix.

    Contains every vertex at value 0 and every simplex of dimension
    <= max_dim whose max pairwise distance is <= max_radius (closed
    threshold), at that value. max_radius=None resolves to
    enclosing_radius(dm).

    Args:
        dm: pairwise distances.
        max_dim: largest simplex dimension to include.
        max_radius: inclusion threshold, or None for the enclosing radius.
        dim_limit: guard against combinatorial blow-up; raise to go past 3.
    """
    if max_dim < 0:
        raise ValueError("max_dim must be nonnegative")
    if max_dim > dim_limit:
        raise ValueError(
            f"max_dim={max_dim} exceeds the dimension guard ({dim_limit}); "
            "pass a larger dim_limit explicitly if you mean it"
        )
    radius = enclosing_radius(dm) if max_radius is None else float(max_radius)
    if max_radius is not None and radius <= 0:
        raise ValueError("max_radius must be positive (or None for auto)")

    n = dm.n
    d = dm.entries
    width = max_dim + 1
    verts_parts: list[np.ndarray] = []
    vals_parts: list[np.ndarray] = []
    dims_parts: list[np.ndarray] = []
    for k in range(max_dim + 1):
        combos = _combinations(n, k + 1)
        vals = _simplex_values(d, combos)
        if k > 0:
            keep = vals <= radius
            combos, vals = combos[keep], vals[keep]
        m_k = combos.shape[0]
        padded = np.full((m_k, width), -1, dtype=np.int32)
        padded[:, : k + 1] = combos
        verts_parts.append(padded)
        vals_parts.append(vals)
        dims_parts.append(np.full(m_k, k, dtype=np.int8))

    verts = np.concatenate(verts_parts, axis=0)
    values = np.concatenate(vals_parts)
    dims = np.concatenate(dims_parts)

    # Canonical total order: value, then dimension, then vertex lex.
    # np.lexsort sorts by the last key first.
    keys = tuple(verts[:, c] for c in range(width - 1, -1, -1)) + (dims, values)
    order = np.lexsort(keys)
    return Filtration(
        np.ascontiguousarray(verts[order]),
        np.ascontiguousarray(dims[order]),
        np.ascontiguousarray(values[order]),
        n_points=n,
        max_dim=max_dim,
        max_radius=radius,
    )
