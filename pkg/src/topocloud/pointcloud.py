"""Point clouds, pairwise Euclidean distances, and synthetic generators.

Coordinates are 64-bit floats throughout. All generators take an explicit
seed and are driven by numpy's PCG64 generator, so runs are bitwise
reproducible for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "PointCloud",
    "DistanceMatrix",
    "pairwise_distances",
    "gen_circle",
    "gen_gaussian_blob",
    "perturb",
    "gen_disk_with_holes",
    "load_cloud_csv",
    "save_cloud_csv",
]


@dataclass(frozen=True)
class PointCloud:
    """n points in R^D, stored row-wise. Immutable after construction."""

    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=np.float64, copy=True, order="C")
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError("points must be a non-empty (n, D) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point cloud contains non-finite coordinates")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric n x n matrix of pairwise distances with zero diagonal."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.entries, dtype=np.float64, copy=True, order="C")
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValueError("entries must be a square matrix")
        if not np.all(np.isfinite(m)):
            raise ValueError("distance matrix contains non-finite entries")
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def pairwise_distances(cloud: PointCloud) -> DistanceMatrix:
    """Euclidean distance matrix of a point cloud.

    The computation is the plain sum-of-squared-differences formula (no
    Gram-matrix shortcut), so it agrees with a double loop to machine
    precision and is exactly symmetric.
    """
    x = cloud.points
    diff = x[:, None, :] - x[None, :, :]
    d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(d)


def gen_circle(n: int, radius: float, noise_sd: float, seed: int) -> PointCloud:
    """n points at angles 2*pi*k/n on a circle, plus optional Gaussian jitter.

    Args:
        n: number of points, at least 3.
        radius: circle radius, positive.
        noise_sd: standard deviation of the per-coordinate Gaussian noise.
        seed: PRNG seed.
    """
    if n < 3:
        raise ValueError("gen_circle requires n >= 3")
    if radius <= 0:
        raise ValueError("radius must be positive")
    if noise_sd < 0:
        raise ValueError("noise_sd must be nonnegative")
    angles = 2.0 * np.pi * np.arange(n) / n
    pts = radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    if noise_sd > 0:
        rng = np.random.default_rng(seed)
        pts = pts + noise_sd * rng.standard_normal((n, 2))
    return PointCloud(pts)


def gen_gaussian_blob(n: int, dim: int, sd: float, seed: int) -> PointCloud:
    """n i.i.d. centered Gaussian points in R^dim."""
    if n < 1 or dim < 1:
        raise ValueError("n and dim must be at least 1")
    if sd <= 0:
        raise ValueError("sd must be positive")
    rng = np.random.default_rng(seed)
    return PointCloud(sd * rng.standard_normal((n, dim)))


def perturb(cloud: PointCloud, delta: float, seed: int) -> PointCloud:
    """Displace every point by a random vector of Euclidean norm <= delta.

    Displacements are uniform in the delta-ball: random direction, radius
    delta * U^(1/D).
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if delta == 0:
        return cloud
    rng = np.random.default_rng(seed)
    n, d = cloud.n, cloud.dim
    dirs = rng.standard_normal((n, d))
    norms = np.linalg.norm(dirs, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    radii = delta * rng.random((n, 1)) ** (1.0 / d)
    return PointCloud(cloud.points + dirs / norms * radii)


def gen_disk_with_holes(
    n: int,
    holes: Sequence[tuple[tuple[float, float], float]],
    seed: int,
) -> PointCloud:
    """Rejection-sample n points uniformly from the unit disk minus holes.

    Each hole is ((cx, cy), r) and must lie entirely inside the unit disk.
    Raises RuntimeError if the sampler cannot place n points within a
    bounded number of attempts (holes cover too much of the disk).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    centers = np.array([c for c, _ in holes], dtype=np.float64).reshape(-1, 2)
    radii = np.array([r for _, r in holes], dtype=np.float64)
    if np.any(radii <= 0):
        raise ValueError("hole radii must be positive")
    if len(holes) and np.any(np.linalg.norm(centers, axis=1) + radii > 1.0 + 1e-12):
        raise ValueError("holes must lie inside the unit disk")

    rng = np.random.default_rng(seed)
    accepted: list[np.ndarray] = []
    attempts = 0
    max_attempts = 10_000 + 2_000 * n
    while len(accepted) < n:
        if attempts >= max_attempts:
            raise RuntimeError(
                "disk sampling failed after %d attempts; holes cover too much "
                "of the disk" % attempts
            )
        batch = min(max(n, 256), max_attempts - attempts)
        attempts += batch
        r = np.sqrt(rng.random(batch))
        theta = 2.0 * np.pi * rng.random(batch)
        pts = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
        if len(holes):
            inside_hole = np.zeros(batch, dtype=bool)
            for c, hr in zip(centers, radii):
                inside_hole |= np.linalg.norm(pts - c, axis=1) < hr
            pts = pts[~inside_hole]
        accepted.extend(pts)
    return PointCloud(np.array(accepted[:n]))


def save_cloud_csv(cloud: PointCloud, path: str, header_lines: Sequence[str] = ()) -> None:
    """Write a cloud as CSV: one point per line, comma-separated coordinates.

    Optional header lines are emitted as '#'-prefixed comments.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for line in header_lines:
            fh.write("# " + line + "\n")
        for row in cloud.points:
            fh.write(",".join(repr(float(c)) for c in row) + "\n")


def load_cloud_csv(path: str) -> PointCloud:
    """Read a point-cloud CSV. Rejects ragged rows; '#' lines are comments."""
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                row = [float(tok) for tok in line.split(",")]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed coordinate") from exc
            if rows and len(row) != len(rows[0]):
                raise ValueError(
                    f"{path}:{lineno}: ragged row ({len(row)} fields, expected {len(rows[0])})"
                )
            rows.append(row)
    if not rows:
        raise ValueError(f"{path}: no points found")
    return PointCloud(np.array(rows))
