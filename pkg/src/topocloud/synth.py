"""Synthetic structured-center images.

Each image carries a bright Gaussian spot whose position traces a circle
inside the central block, parameterized by a per-image random angle, while
the rest of the image is low-amplitude noise. Center crops of such a set
therefore form a loop in pixel space (strong, long-lived dim-1 structure)
and corner crops form a featureless noise blob, which is exactly the
contrast the image experiments need without downloading any dataset.
"""

from __future__ import annotations

import numpy as np

from .ingest import ImageSet

__all__ = ["structured_center_images"]


def structured_center_images(
    count: int,
    height: int = 28,
    width: int = 28,
    seed: int = 0,
    ring_radius: float = 3.0,
    spot_sigma: float = 1.3,
    background_amp: float = 0.12,
) -> ImageSet:
    """Generate count images with a loop-structured center and noisy corners.

    Args:
        count: number of images.
        height, width: image size in pixels (at least 10 each).
        seed: PRNG seed.
        ring_radius: radius (pixels) of the circle the spot center follows.
        spot_sigma: Gaussian spot width in pixels.
        background_amp: uniform-noise amplitude of the background, as a
            fraction of full intensity.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if height < 10 or width < 10:
        raise ValueError("images must be at least 10x10 for the crop pipeline")
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    cy, cx = (height - 1) / 2.0, (width - 1) / 2.0
    out = np.empty((count, height, width), dtype=np.uint8)
    angles = 2.0 * np.pi * rng.random(count)
    noise = background_amp * rng.random((count, height, width))
    for i in range(count):
        sy = cy + ring_radius * np.sin(angles[i])
        sx = cx + ring_radius * np.cos(angles[i])
        spot = np.exp(-((yy - sy) ** 2 + (xx - sx) ** 2) / (2.0 * spot_sigma**2))
        img = np.clip(noise[i] + spot, 0.0, 1.0)
        out[i] = np.round(img * 255.0).astype(np.uint8)
    return ImageSet(out)
