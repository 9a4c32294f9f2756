"""Differentiable persistence and gradient-based topology optimization.

Every birth/death value of a Rips persistence pair is the length of one
edge: the pair's creator or destroyer simplex appears when its longest
edge does. Attributing each pair to those governing edges makes any
functional of the diagram differentiable with respect to the point
coordinates by a three-stage chain rule: functional -> diagram values ->
governing-edge lengths -> coordinates. The pairing is locally constant
between combinatorial changes of the filtration order, so plain gradient
descent with full recomputation each step is exact almost everywhere.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .distance import sinkhorn, wasserstein_exact
from .filtration import Filtration, build_rips
from .persistence import (
    PersistenceDiagram,
    PersistencePair,
    boundary_matrix,
    reduce as reduce_pairs,
)
from .pointcloud import DistanceMatrix, PointCloud, pairwise_distances

__all__ = [
    "PairAttribution",
    "TotalPersistence",
    "WassersteinToTarget",
    "DiagramFunctional",
    "TrajectoryPoint",
    "Trajectory",
    "attribute",
    "eval_functional",
    "grad",
    "optimize",
]

_DIRECTIONS = ("minimize", "maximize")


@dataclass(frozen=True)
class PairAttribution:
    """Governing edges of one persistence pair.

    birth_edge is None for dim-0 pairs (a vertex has constant value 0);
    death_edge is None for essential pairs.
    """

    pair: PersistencePair
    birth_edge: Optional[tuple[int, int]]
    death_edge: Optional[tuple[int, int]]


@dataclass(frozen=True)
class TotalPersistence:
    """Sum over diagram points of |d-b|^p * ((d+b)/2)^q.

    Points are ordered by descending lifetime and the i0 most persistent
    ones are skipped, so i0 > 0 preserves dominant features while the rest
    are pushed around.
    """

    dim: int
    p: float = 1.0
    q: float = 0.0
    i0: int = 0
    direction: str = "minimize"

    def __post_init__(self) -> None:
        if self.p < 0 or self.q < 0 or self.i0 < 0 or self.dim < 0:
            raise ValueError("p, q, i0, dim must be nonnegative")
        if self.direction not in _DIRECTIONS:
            raise ValueError(f"direction must be one of {_DIRECTIONS}")


@dataclass(frozen=True)
class WassersteinToTarget:
    """Wasserstein distance from the current diagram to a fixed target.

    alpha=None uses the exact matching solver; a positive alpha uses the
    Sinkhorn approximation with that regularization.
    """

    target: PersistenceDiagram
    dim: int
    alpha: Optional[float] = None
    ground: str = "linf"
    direction: str = "minimize"

    def __post_init__(self) -> None:
        if self.dim < 0:
            raise ValueError("dim must be nonnegative")
        if self.alpha is not None and self.alpha <= 0:
            raise ValueError("alpha must be positive (or None for exact)")
        if self.direction not in _DIRECTIONS:
            raise ValueError(f"direction must be one of {_DIRECTIONS}")
        if any(math.isinf(d) for _, d in self.target.points):
            raise ValueError("target diagram must be finite")


DiagramFunctional = Union[TotalPersistence, WassersteinToTarget]


@dataclass(frozen=True)
class TrajectoryPoint:
    step: int
    value: float
    cloud: PointCloud


@dataclass
class Trajectory:
    """Recorded optimization run. diverged=True means the run aborted on a
    non-finite value or gradient; the records hold the last valid state."""

    records: list[TrajectoryPoint]
    diverged: bool = False

    def __iter__(self):
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)


def _governing_edge(verts: tuple[int, ...], dm: DistanceMatrix) -> Optional[tuple[int, int]]:
    """Vertex pair realizing the simplex's max pairwise distance.

    Ties break to the lexicographically smallest pair; the loop visits
    pairs in lex order, so keeping strict improvements does exactly that.
    """
    if len(verts) < 2:
        return None
    entries = dm.entries
    best = None
    best_d = -1.0
    for a in range(len(verts)):
        for b in range(a + 1, len(verts)):
            d = entries[verts[a], verts[b]]
            if d > best_d:
                best_d = d
                best = (verts[a], verts[b])
    return best


def attribute(
    pairs: Sequence[PersistencePair], f: Filtration, dm: DistanceMatrix
) -> list[PairAttribution]:
    """Map each pair back to the governing edges of its creator/destroyer."""
    out = []
    for p in pairs:
        birth_edge = _governing_edge(f.vertices_of(p.creator), dm)
        death_edge = (
            _governing_edge(f.vertices_of(p.destroyer), dm)
            if p.destroyer is not None
            else None
        )
        out.append(PairAttribution(p, birth_edge, death_edge))
    return out


def _persistence_order(points: np.ndarray) -> np.ndarray:
    """Indices sorted by descending lifetime, ties by ascending (b, d)."""
    lifetimes = points[:, 1] - points[:, 0]
    return np.lexsort((points[:, 1], points[:, 0], -lifetimes))


def _dpow(x: float, e: float) -> float:
    """d/dx of x**e with the convention that an e=0 factor is the constant 1."""
    if e == 0.0:
        return 0.0
    return e * x ** (e - 1.0)


def eval_functional(d: PersistenceDiagram, spec: DiagramFunctional) -> float:
    """Evaluate a diagram functional. Essential points are ignored for
    TotalPersistence; the Wasserstein variant requires finite diagrams."""
    if isinstance(spec, TotalPersistence):
        arr = d.as_array()
        arr = arr[np.isfinite(arr[:, 1])] if len(arr) else arr
        if len(arr) == 0:
            return 0.0
        order = _persistence_order(arr)
        total = 0.0
        for k in order[spec.i0 :]:
            b, dd = arr[k]
            total += abs(dd - b) ** spec.p * ((dd + b) / 2.0) ** spec.q
        return float(total)
    if spec.alpha is None:
        dist, _ = wasserstein_exact(d, spec.target, ground=spec.ground)
    else:
        dist, _ = sinkhorn(d, spec.target, alpha=spec.alpha, ground=spec.ground)
    return dist


def _ground_grad(p: np.ndarray, q: np.ndarray, ground: str) -> tuple[float, float]:
    """(d/db, d/dd) of the ground cost between diagram points p and q."""
    db, dd = p[0] - q[0], p[1] - q[1]
    if ground == "linf":
        # Subgradient at the argmax coordinate; exact ties go to death.
        if abs(dd) >= abs(db):
            return 0.0, float(np.sign(dd))
        return float(np.sign(db)), 0.0
    norm = math.hypot(db, dd)
    if norm == 0.0:
        return 0.0, 0.0
    return db / norm, dd / norm


def _diag_grad(ground: str) -> tuple[float, float]:
    """(d/db, d/dd) of the diagonal-projection cost of a diagram point."""
    if ground == "linf":
        return -0.5, 0.5
    inv = 1.0 / math.sqrt(2.0)
    return -inv, inv


def _point_derivatives(
    diag: PersistenceDiagram, spec: DiagramFunctional
) -> tuple[float, list[tuple[float, float]]]:
    """Functional value and per-point (dE/db, dE/dd).

    For WassersteinToTarget the derivative treats the optimal plan as
    fixed (envelope rule): the plan is piecewise constant in the diagram,
    so this is the correct derivative almost everywhere.
    """
    pts = diag.as_array()
    m = len(pts)
    derivs = [(0.0, 0.0)] * m
    if isinstance(spec, TotalPersistence):
        value = 0.0
        if m:
            order = _persistence_order(pts)
            for k in order[spec.i0 :]:
                b, d = pts[k]
                lt, mid = d - b, (d + b) / 2.0
                a_pow = lt**spec.p
                b_pow = mid**spec.q
                da = _dpow(lt, spec.p)
                db_ = _dpow(mid, spec.q)
                value += float(a_pow * b_pow)
                derivs[int(k)] = (
                    -da * b_pow + a_pow * db_ * 0.5,
                    da * b_pow + a_pow * db_ * 0.5,
                )
        return value, derivs

    tgt = spec.target.as_array()
    m2 = len(tgt)
    if spec.alpha is None:
        value, plan = wasserstein_exact(diag, spec.target, ground=spec.ground)
        if plan.matching is not None:
            for i in range(m):
                j = int(plan.matching[i])
                if j < m2:
                    derivs[i] = _ground_grad(pts[i], tgt[j], spec.ground)
                else:
                    derivs[i] = _diag_grad(spec.ground)
        return value, derivs

    value, plan = sinkhorn(diag, spec.target, alpha=spec.alpha, ground=spec.ground)
    if plan.coupling is not None and m:
        diag_db, diag_dd = _diag_grad(spec.ground)
        for i in range(m):
            db_acc = dd_acc = 0.0
            row = plan.coupling[i]
            for j in range(m2):
                w = row[j]
                if w > 0.0:
                    gb, gd = _ground_grad(pts[i], tgt[j], spec.ground)
                    db_acc += w * gb
                    dd_acc += w * gd
            off = float(row[m2:].sum())
            derivs[i] = (db_acc + off * diag_db, dd_acc + off * diag_dd)
    return value, derivs


def _select_pairs(pairs: Sequence[PersistencePair], dim: int) -> list[PersistencePair]:
    """Finite, positive-persistence pairs of one dimension, in the same
    (birth, death) order as the default diagram() output."""
    sel = [
        p
        for p in pairs
        if p.dim == dim and math.isfinite(p.death) and p.death > p.birth
    ]
    sel.sort(key=lambda p: (p.birth, p.death, p.creator))
    return sel


def _normalize_specs(
    spec: DiagramFunctional | Sequence[tuple[DiagramFunctional, float]],
) -> list[tuple[DiagramFunctional, float]]:
    if isinstance(spec, (TotalPersistence, WassersteinToTarget)):
        return [(spec, 1.0)]
    weighted = [(s, float(w)) for s, w in spec]
    if not weighted:
        raise ValueError("at least one functional is required")
    directions = {s.direction for s, _ in weighted}
    if len(directions) != 1:
        raise ValueError("all functionals in a sum must share a direction")
    return weighted


def _value_and_grad(
    cloud: PointCloud,
    weighted: list[tuple[DiagramFunctional, float]],
    max_dim: Optional[int],
    max_radius: Optional[float],
) -> tuple[float, np.ndarray]:
    needed = max(s.dim for s, _ in weighted) + 1
    md = needed if max_dim is None else max_dim
    if md < needed:
        raise ValueError(
            f"max_dim={md} cannot pair dim-{needed - 1} classes; need at least {needed}"
        )
    dm = pairwise_distances(cloud)
    f = build_rips(dm, max_dim=md, max_radius=max_radius)
    pairs = reduce_pairs(boundary_matrix(f), f)

    x = cloud.points
    g = np.zeros_like(x)
    total = 0.0
    degenerate = 0
    for spec, weight in weighted:
        sel = _select_pairs(pairs, spec.dim)
        diag = PersistenceDiagram(spec.dim, tuple((p.birth, p.death) for p in sel))
        value, derivs = _point_derivatives(diag, spec)
        total += weight * value
        attributions = attribute(sel, f, dm)
        for (db, dd), att in zip(derivs, attributions):
            for coeff, edge in ((db, att.birth_edge), (dd, att.death_edge)):
                if coeff == 0.0 or edge is None:
                    continue
                u, v = edge
                disp = x[u] - x[v]
                norm = float(np.linalg.norm(disp))
                if norm == 0.0:
                    degenerate += 1
                    continue
                gvec = (weight * coeff / norm) * disp
                g[u] += gvec
                g[v] -= gvec
    if degenerate:
        warnings.warn(
            f"{degenerate} zero-length governing edge(s); their gradient terms "
            "were dropped",
            RuntimeWarning,
        )
    return float(total), g


def grad(
    cloud: PointCloud,
    spec: DiagramFunctional,
    max_dim: Optional[int] = None,
    max_radius: Optional[float] = None,
) -> tuple[float, np.ndarray]:
    """Value of a diagram functional and its gradient w.r.t. coordinates.

    Recomputes the full pipeline (distances, filtration, reduction,
    attribution) and applies the chain rule through the governing edges.
    max_dim defaults to spec.dim + 1, the smallest value that can pair
    classes of the requested dimension.
    """
    return _value_and_grad(cloud, _normalize_specs(spec), max_dim, max_radius)


def optimize(
    cloud: PointCloud,
    spec: DiagramFunctional | Sequence[tuple[DiagramFunctional, float]],
    lr: float,
    steps: int,
    record_every: int = 1,
    max_dim: Optional[int] = None,
    max_radius: Optional[float] = None,
) -> Trajectory:
    """Plain gradient descent (or ascent) on a diagram functional.

    The filtration, persistence, and attribution are recomputed every
    step; the pairing is locally constant between combinatorial changes
    and the recomputation handles crossings. Step 0 (initial state) and
    every record_every-th step are recorded, plus the final step. A
    non-finite value or gradient aborts the run with the trajectory up to
    the last valid state and diverged=True.
    """
    if lr <= 0:
        raise ValueError("lr must be positive")
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if record_every < 1:
        raise ValueError("record_every must be at least 1")
    weighted = _normalize_specs(spec)
    sign = -lr if weighted[0][0].direction == "minimize" else lr

    value, g = _value_and_grad(cloud, weighted, max_dim, max_radius)
    records = [TrajectoryPoint(0, value, cloud)]
    if not (math.isfinite(value) and np.all(np.isfinite(g))):
        return Trajectory(records, diverged=True)

    x = cloud.points
    for step in range(1, steps + 1):
        x = x + sign * g
        if not np.all(np.isfinite(x)):
            return Trajectory(records, diverged=True)
        current = PointCloud(x)
        try:
            # Parameters were validated by the initial call above, so a
            # ValueError here means the coordinates grew until distances
            # overflowed: numerical divergence, not misuse.
            value, g = _value_and_grad(current, weighted, max_dim, max_radius)
        except (ValueError, FloatingPointError):
            return Trajectory(records, diverged=True)
        if not (math.isfinite(value) and np.all(np.isfinite(g))):
            return Trajectory(records, diverged=True)
        if step % record_every == 0 or step == steps:
            records.append(TrajectoryPoint(step, value, current))
    return Trajectory(records, diverged=False)
