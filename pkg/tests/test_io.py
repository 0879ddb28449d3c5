import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import brute_morton_sort
from ragft import morton
from ragft.errors import EmptyCloudError, MissingColorError, PlyFormatError
from ragft.io import RawCloud, read_ply, rgb_to_yuv, to_raw, voxelize, write_ply, yuv_to_rgb


def _write(path, text):
    path.write_bytes(text.encode("ascii"))
    return path


ASCII_ONE = """ply
format ascii 1.0
comment single red point
element vertex 1
property float x
property float y
property float z
property uchar red
property uchar green
property uchar blue
end_header
0 0 0 255 0 0
"""


def test_read_ascii_single_vertex(tmp_path):
    cloud = read_ply(_write(tmp_path / "one.ply", ASCII_ONE))
    assert cloud.count == 1
    np.testing.assert_array_equal(cloud.positions, [[0, 0, 0]])
    np.testing.assert_array_equal(cloud.colors, [[255, 0, 0]])


def test_missing_red_is_reported(tmp_path):
    text = ASCII_ONE.replace("property uchar red\n", "").replace("0 0 0 255 0 0", "0 0 0 0 0")
    with pytest.raises(MissingColorError):
        read_ply(_write(tmp_path / "nored.ply", text))


def test_big_endian_rejected(tmp_path):
    text = ASCII_ONE.replace("format ascii", "format binary_big_endian")
    with pytest.raises(PlyFormatError, match="big_endian"):
        read_ply(_write(tmp_path / "be.ply", text))


@pytest.mark.parametrize("text", [
    ASCII_ONE.replace("ply\n", "plx\n", 1),
    ASCII_ONE.replace("element vertex 1", "element vertex 2"),
    ASCII_ONE.replace("end_header\n", ""),
    ASCII_ONE.replace("property float x", "property float"),
])
def test_malformed_files(tmp_path, text):
    with pytest.raises(PlyFormatError):
        read_ply(_write(tmp_path / "bad.ply", text))


def test_binary_short_file(tmp_path):
    cloud = RawCloud([[0, 0, 0], [1, 2, 3]], [[1, 2, 3], [4, 5, 6]])
    path = tmp_path / "c.ply"
    write_ply(cloud, path, "binary")
    path.write_bytes(path.read_bytes()[:-5])
    with pytest.raises(PlyFormatError, match="count mismatch"):
        read_ply(path)


def test_binary_with_extra_properties_and_faces(tmp_path):
    header = (
        "ply\nformat binary_little_endian 1.0\nelement vertex 2\n"
        "property float x\nproperty float y\nproperty float z\nproperty float nx\n"
        "property uchar red\nproperty uchar green\nproperty uchar blue\nproperty uchar alpha\n"
        "element face 1\nproperty list uchar int vertex_indices\nend_header\n"
    )
    dt = np.dtype([("x", "<f4"), ("y", "<f4"), ("z", "<f4"), ("nx", "<f4"),
                   ("red", "u1"), ("green", "u1"), ("blue", "u1"), ("alpha", "u1")])
    rows = np.array([(1.5, 2, 3, 0, 10, 20, 30, 255), (4, 5, 6.25, 0, 40, 50, 60, 255)], dtype=dt)
    path = tmp_path / "x.ply"
    path.write_bytes(header.encode() + rows.tobytes() + bytes([3, 0, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0]))
    cloud = read_ply(path)
    np.testing.assert_array_equal(cloud.positions, [[1.5, 2, 3], [4, 5, 6.25]])
    np.testing.assert_array_equal(cloud.colors, [[10, 20, 30], [40, 50, 60]])


@pytest.mark.parametrize("fmt", ["ascii", "binary"])
def test_write_read_roundtrip(tmp_path, rng, fmt):
    cloud = RawCloud(rng.normal(size=(57, 3)) * 1e3, rng.integers(0, 256, size=(57, 3)))
    path = tmp_path / f"c_{fmt}.ply"
    write_ply(cloud, path, fmt)
    back = read_ply(path)
    np.testing.assert_array_equal(back.positions, cloud.positions)
    np.testing.assert_array_equal(back.colors, cloud.colors)


def test_ascii_and_binary_decode_identically(tmp_path, rng):
    cloud = RawCloud(rng.uniform(-5, 5, size=(20, 3)), rng.integers(0, 256, size=(20, 3)))
    write_ply(cloud, tmp_path / "a.ply", "ascii")
    write_ply(cloud, tmp_path / "b.ply", "binary")
    a, b = read_ply(tmp_path / "a.ply"), read_ply(tmp_path / "b.ply")
    np.testing.assert_array_equal(a.positions, b.positions)
    np.testing.assert_array_equal(a.colors, b.colors)


def test_write_empty_cloud(tmp_path):
    with pytest.raises(EmptyCloudError):
        write_ply(RawCloud(np.zeros((0, 3)), np.zeros((0, 3))), tmp_path / "e.ply")


def test_voxelize_identity_on_grid_data(rng):
    coords = np.unique(rng.integers(0, 1024, size=(300, 3)), axis=0)
    cloud = RawCloud(coords, rng.integers(0, 256, size=(len(coords), 3)))
    vox = voxelize(cloud, 10)
    assert sorted(map(tuple, vox.coords.tolist())) == sorted(map(tuple, coords.tolist()))
    np.testing.assert_array_equal(vox.weights, 1.0)


def test_voxelize_merges_duplicates():
    cloud = RawCloud([[3, 3, 3], [3.4, 3.2, 3.9]], [[0, 0, 0], [2, 2, 2]])
    vox = voxelize(cloud, 4, to_yuv=False)
    assert vox.count == 1
    np.testing.assert_allclose(vox.attributes, [[1, 1, 1]])
    np.testing.assert_array_equal(vox.weights, [2])


def test_voxelize_merge_uses_incoming_weights():
    cloud = RawCloud([[1, 1, 1], [1, 1, 1]], [[0, 0, 0], [90, 90, 90]], weights=[2, 1])
    vox = voxelize(cloud, 2, to_yuv=False)
    np.testing.assert_allclose(vox.attributes, [[30, 30, 30]])
    np.testing.assert_array_equal(vox.weights, [3])


def test_voxelize_depth1_is_morton_sorted(rng):
    cloud = RawCloud(rng.uniform(-1, 1, size=(8, 3)), rng.integers(0, 256, size=(8, 3)))
    vox = voxelize(cloud, 1)
    assert vox.coords.min() >= 0 and vox.coords.max() <= 1
    np.testing.assert_array_equal(vox.coords, brute_morton_sort(vox.coords))


def test_voxelize_single_point():
    vox = voxelize(RawCloud([[123.4, -7, 2]], [[5, 6, 7]]), 3)
    assert vox.count == 1


def test_voxelize_rescales_out_of_range_positions(rng):
    vox = voxelize(RawCloud(rng.uniform(-100, 300, size=(500, 3)), rng.integers(0, 256, (500, 3))), 6)
    assert vox.coords.min() >= 0 and vox.coords.max() <= 63


@given(arrays(np.float64, (30, 3), elements=st.floats(-1e3, 1e3)), st.integers(1, 8))
def test_voxelize_idempotent(positions, depth):
    colors = np.arange(90).reshape(30, 3) % 256
    first = voxelize(RawCloud(positions, colors), depth)
    second = voxelize(to_raw(first), depth)
    np.testing.assert_array_equal(second.coords, first.coords)
    np.testing.assert_array_equal(second.weights, first.weights)
    assert np.abs(second.attributes - first.attributes).max() <= 1.0
    codes = morton.encode(first.coords)
    assert np.all(np.diff(codes.astype(np.float64)) > 0)


def test_yuv_black_and_white():
    np.testing.assert_allclose(rgb_to_yuv([[0, 0, 0]]), [[0, 128, 128]], atol=1e-12)
    np.testing.assert_allclose(rgb_to_yuv([[255, 255, 255]]), [[255, 128, 128]], atol=1e-9)


def test_yuv_roundtrip_random(rng):
    rgb = rng.integers(0, 256, size=(1000, 3))
    back = yuv_to_rgb(rgb_to_yuv(rgb)).astype(int)
    assert np.abs(back - rgb).max() <= 1


def test_yuv_constant_signal_stays_constant():
    yuv = rgb_to_yuv(np.tile([[17, 200, 91]], (10, 1)))
    assert np.ptp(yuv, axis=0).max() == 0
