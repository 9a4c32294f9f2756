"""Persistent homology of Euclidean point clouds: Vietoris-Rips filtrations,
diagram distances (exact Wasserstein-1, bottleneck, Sinkhorn), and
gradient-based topology optimization."""

from .pointcloud import (
    PointCloud,
    DistanceMatrix,
    pairwise_distances,
    gen_circle,
    gen_gaussian_blob,
    perturb,
    gen_disk_with_holes,
)
from .filtration import Simplex, Filtration, build_rips, enclosing_radius
from .persistence import (
    BoundaryMatrix,
    PersistencePair,
    PersistenceDiagram,
    LifetimeStats,
    boundary_matrix,
    reduce,
    diagram,
    betti_curve,
    lifetime_stats,
    h0_unionfind,
)

__all__ = [
    "PointCloud",
    "DistanceMatrix",
    "pairwise_distances",
    "gen_circle",
    "gen_gaussian_blob",
    "perturb",
    "gen_disk_with_holes",
    "Simplex",
    "Filtration",
    "build_rips",
    "enclosing_radius",
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
]

__version__ = "0.1.0"
