"""IDX image ingestion and the crop/shuffle/noise transforms.

Only the unsigned-byte 3-dimensional IDX layout is supported (big-endian;
magic 0x00000803; count/rows/cols header; row-major payload). Pixel
intensities are scaled to [0, 1] before noise is added, so the noise
standard deviation is comparable across datasets. This module handles
single-channel data only; color inputs must be grayscaled externally.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

import numpy as np

from .pointcloud import PointCloud

__all__ = [
    "IdxFormatError",
    "ImageSet",
    "CropRegion",
    "CropSpec",
    "read_idx",
    "write_idx",
    "crop_to_cloud",
    "shuffle_pixels",
]

_IDX_MAGIC_UBYTE = 0x08
_IDX_NDIM = 3


class IdxFormatError(ValueError):
    """Raised for malformed IDX files, with a distinct message per defect."""


@dataclass(frozen=True)
class ImageSet:
    """A stack of single-channel byte images, shape (count, height, width)."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.array(self.pixels, dtype=np.uint8, copy=True, order="C")
        if px.ndim != 3:
            raise ValueError("pixels must be a (count, height, width) array")
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def count(self) -> int:
        return self.pixels.shape[0]

    @property
    def height(self) -> int:
        return self.pixels.shape[1]

    @property
    def width(self) -> int:
        return self.pixels.shape[2]


class CropRegion(enum.Enum):
    CENTER = "center"
    CORNER_TOP_LEFT = "corner"


@dataclass(frozen=True)
class CropSpec:
    """Which size x size block to cut out of each image."""

    region: CropRegion
    size: int = 10

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError("crop size must be at least 1")

    def origin(self, height: int, width: int) -> tuple[int, int]:
        if self.size > min(height, width):
            raise ValueError(
                f"crop size {self.size} exceeds image bounds {height}x{width}"
            )
        if self.region is CropRegion.CENTER:
            return (height - self.size) // 2, (width - self.size) // 2
        return 0, 0


def read_idx(path: str) -> ImageSet:
    """Read an IDX unsigned-byte 3-d tensor file.

    Raises IdxFormatError with a distinct message for a bad magic number,
    a dimension count other than 3, a truncated header, or a payload that
    does not match the declared shape.
    """
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) < 4:
            raise IdxFormatError(f"{path}: truncated header (missing magic number)")
        if header[0] != 0 or header[1] != 0 or header[2] != _IDX_MAGIC_UBYTE:
            raise IdxFormatError(
                f"{path}: magic number mismatch (got {header[:4].hex()}, "
                "expected 000008xx for unsigned-byte data)"
            )
        if header[3] != _IDX_NDIM:
            raise IdxFormatError(
                f"{path}: dimension count is {header[3]}, expected 3"
            )
        if len(header) < 16:
            raise IdxFormatError(f"{path}: truncated header (missing dimensions)")
        count, rows, cols = struct.unpack(">III", header[4:16])
        payload = fh.read()
    expected = count * rows * cols
    if len(payload) != expected:
        raise IdxFormatError(
            f"{path}: truncated payload ({len(payload)} bytes for "
            f"{count}x{rows}x{cols} = {expected})"
        )
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(count, rows, cols)
    return ImageSet(pixels)


def write_idx(images: ImageSet, path: str) -> None:
    """Write an ImageSet in the IDX unsigned-byte 3-d layout."""
    with open(path, "wb") as fh:
        fh.write(struct.pack(">BBBB", 0, 0, _IDX_MAGIC_UBYTE, _IDX_NDIM))
        fh.write(struct.pack(">III", images.count, images.height, images.width))
        fh.write(images.pixels.tobytes())


def crop_to_cloud(
    images: ImageSet,
    spec: CropSpec,
    sample_n: int,
    noise_sd: float,
    seed: int,
) -> PointCloud:
    """Sample images, add pixel noise, crop, and flatten into a point cloud.

    Selects sample_n images uniformly without replacement, scales pixel
    intensities to [0, 1], adds centered Gaussian noise of sd noise_sd to
    the full images, then crops the spec's block and flattens it row-major
    into a size^2-dimensional point per image.
    """
    if sample_n < 1 or sample_n > images.count:
        raise ValueError(
            f"sample_n={sample_n} must be between 1 and the image count "
            f"({images.count})"
        )
    if noise_sd < 0:
        raise ValueError("noise_sd must be nonnegative")
    r0, c0 = spec.origin(images.height, images.width)
    rng = np.random.default_rng(seed)
    chosen = rng.choice(images.count, size=sample_n, replace=False)
    imgs = images.pixels[chosen].astype(np.float64) / 255.0
    if noise_sd > 0:
        imgs = imgs + noise_sd * rng.standard_normal(imgs.shape)
    block = imgs[:, r0 : r0 + spec.size, c0 : c0 + spec.size]
    return PointCloud(block.reshape(sample_n, spec.size * spec.size))


def shuffle_pixels(cloud: PointCloud, seed: int) -> PointCloud:
    """Permute each point's coordinates by an independent seeded permutation."""
    rng = np.random.default_rng(seed)
    perms = np.argsort(rng.random((cloud.n, cloud.dim)), axis=1)
    return PointCloud(np.take_along_axis(cloud.points, perms, axis=1))
