"""IDX parsing and the crop/shuffle transforms."""

import struct

import numpy as np
import pytest

from topocloud.ingest import (
    CropRegion,
    CropSpec,
    IdxFormatError,
    ImageSet,
    crop_to_cloud,
    read_idx,
    shuffle_pixels,
    write_idx,
)


def _write_raw(path, magic: bytes, dims: tuple[int, ...], payload: bytes) -> str:
    with open(path, "wb") as fh:
        fh.write(magic)
        for d in dims:
            fh.write(struct.pack(">I", d))
        fh.write(payload)
    return str(path)


def test_idx_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    images = ImageSet(rng.integers(0, 256, size=(2, 3, 3)).astype(np.uint8))
    path = str(tmp_path / "two.idx")
    write_idx(images, path)
    back = read_idx(path)
    assert back.count == 2 and back.height == 3 and back.width == 3
    assert np.array_equal(back.pixels, images.pixels)


def test_idx_round_trip_is_identity_repeatedly(tmp_path):
    rng = np.random.default_rng(4)
    images = ImageSet(rng.integers(0, 256, size=(5, 12, 7)).astype(np.uint8))
    p1, p2 = str(tmp_path / "a.idx"), str(tmp_path / "b.idx")
    write_idx(images, p1)
    write_idx(read_idx(p1), p2)
    assert open(p1, "rb").read() == open(p2, "rb").read()


def test_idx_empty_file_is_truncated_header(tmp_path):
    path = tmp_path / "empty.idx"
    path.write_bytes(b"")
    with pytest.raises(IdxFormatError, match="truncated header"):
        read_idx(str(path))


def test_idx_bad_magic(tmp_path):
    path = _write_raw(tmp_path / "bad.idx", b"\x00\x00\x07\x03", (1, 2, 2), b"\x00" * 4)
    with pytest.raises(IdxFormatError, match="magic number"):
        read_idx(path)


def test_idx_wrong_dimension_count(tmp_path):
    path = _write_raw(tmp_path / "dims.idx", b"\x00\x00\x08\x02", (2, 2, 1), b"\x00" * 4)
    with pytest.raises(IdxFormatError, match="dimension count"):
        read_idx(path)


def test_idx_truncated_payload(tmp_path):
    # Declares 5 images of 2x2 but carries bytes for 4.
    path = _write_raw(tmp_path / "short.idx", b"\x00\x00\x08\x03", (5, 2, 2), b"\x00" * 16)
    with pytest.raises(IdxFormatError, match="truncated payload"):
        read_idx(path)


def test_crop_center_dimensions():
    images = ImageSet(np.zeros((200, 28, 28), dtype=np.uint8))
    cloud = crop_to_cloud(images, CropSpec(CropRegion.CENTER, 10), 200, 0.0, seed=0)
    assert cloud.n == 200 and cloud.dim == 100


def test_crop_zero_images_zero_noise_gives_zero_vectors():
    images = ImageSet(np.zeros((20, 12, 12), dtype=np.uint8))
    cloud = crop_to_cloud(images, CropSpec(CropRegion.CENTER, 10), 20, 0.0, seed=0)
    assert np.all(cloud.points == 0.0)


def test_corner_crop_reads_exact_pixels():
    # Image whose pixel (r, c) is r * 28 + c mod 256; the corner crop must
    # pick up rows 0..9 and columns 0..9 scaled by 1/255.
    img = (np.arange(28 * 28, dtype=np.int64).reshape(28, 28) % 256).astype(np.uint8)
    images = ImageSet(img[None])
    cloud = crop_to_cloud(images, CropSpec(CropRegion.CORNER_TOP_LEFT, 10), 1, 0.0, seed=0)
    expected = np.array(
        [img[r, c] / 255.0 for r in range(10) for c in range(10)]
    )
    assert np.allclose(cloud.points[0], expected, atol=0)


def test_center_crop_origin_formula():
    spec = CropSpec(CropRegion.CENTER, 10)
    assert spec.origin(28, 28) == (9, 9)
    assert spec.origin(11, 10) == (0, 0)


def test_crop_rejects_oversampling():
    images = ImageSet(np.zeros((3, 10, 10), dtype=np.uint8))
    with pytest.raises(ValueError, match="sample_n"):
        crop_to_cloud(images, CropSpec(CropRegion.CENTER, 10), 4, 0.0, seed=0)


def test_crop_rejects_out_of_bounds():
    images = ImageSet(np.zeros((3, 8, 8), dtype=np.uint8))
    with pytest.raises(ValueError, match="crop size"):
        crop_to_cloud(images, CropSpec(CropRegion.CENTER, 10), 3, 0.0, seed=0)


def test_crop_deterministic_per_seed():
    rng = np.random.default_rng(2)
    images = ImageSet(rng.integers(0, 256, size=(50, 14, 14)).astype(np.uint8))
    spec = CropSpec(CropRegion.CENTER, 10)
    a = crop_to_cloud(images, spec, 20, 0.1, seed=3)
    b = crop_to_cloud(images, spec, 20, 0.1, seed=3)
    assert np.array_equal(a.points, b.points)


def test_shuffle_preserves_multiset_and_shape():
    rng = np.random.default_rng(1)
    from topocloud.pointcloud import PointCloud

    cloud = PointCloud(rng.random((200, 100)))
    shuffled = shuffle_pixels(cloud, seed=0)
    assert shuffled.n == cloud.n and shuffled.dim == cloud.dim
    assert np.array_equal(np.sort(shuffled.points, axis=1), np.sort(cloud.points, axis=1))


def test_shuffle_one_dimensional_cloud_is_identity():
    from topocloud.pointcloud import PointCloud

    cloud = PointCloud(np.array([[1.0], [2.0], [3.0]]))
    assert np.array_equal(shuffle_pixels(cloud, seed=5).points, cloud.points)


def test_shuffle_uses_distinct_permutations():
    # With dim=100, the chance two of 200 permutations coincide is
    # astronomically small; require at least one differing pair.
    from topocloud.pointcloud import PointCloud

    base = np.tile(np.arange(100, dtype=np.float64), (200, 1))
    shuffled = shuffle_pixels(PointCloud(base), seed=7)
    distinct = {tuple(row) for row in shuffled.points}
    assert len(distinct) > 1
