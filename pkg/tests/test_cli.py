import numpy as np
import pytest

from ragft import harness
from ragft.cli import main
from ragft.io import RawCloud, read_ply, write_ply
from ragft.synthetic import smooth_surface_cloud


@pytest.fixture
def ply(tmp_path):
    cloud = smooth_surface_cloud(depth=5)
    from ragft.io import to_raw
    path = tmp_path / "in.ply"
    write_ply(to_raw(cloud, yuv=True), path)
    return path


def test_voxelize(ply, tmp_path, capsys):
    out = tmp_path / "v.ply"
    assert main(["voxelize", str(ply), "--depth", "5", "--out", str(out), "--ascii"]) == 0
    assert read_ply(out).count == read_ply(ply).count
    assert "voxels" in capsys.readouterr().out


@pytest.mark.parametrize("backend,blocks", [("ragft", "4"), ("raht", None), ("blockgft", "8")])
def test_encode_decode(ply, tmp_path, backend, blocks):
    bits = tmp_path / "c.bin"
    args = ["encode", str(ply), "--depth", "5", "--step", "0.001", "--out", str(bits), "--backend", backend]
    if blocks:
        args += ["--blocks", blocks]
    assert main(args) == 0
    out = tmp_path / "d.ply"
    assert main(["decode", str(bits), "--geometry", str(ply), "--out", str(out)]) == 0
    src, dec = read_ply(ply), read_ply(out)
    order_s = np.lexsort(src.positions.T)
    order_d = np.lexsort(dec.positions.T)
    np.testing.assert_array_equal(src.positions[order_s], dec.positions[order_d])
    assert np.abs(src.colors[order_s].astype(int) - dec.colors[order_d].astype(int)).max() <= 1


def test_sweep(ply, tmp_path):
    out = tmp_path / "rd.csv"
    assert main(["sweep", str(ply), "--depth", "5", "--steps", "16,4", "--out", str(out)]) == 0
    assert len(harness.read_csv(out)) == 2


def test_complexity(ply, capsys):
    assert main(["complexity", str(ply), "--depth", "5", "--blocks", "8"]) == 0
    assert "C = " in capsys.readouterr().out
    assert main(["complexity", str(ply), "--depth", "5", "--table"]) == 0
    assert capsys.readouterr().out.count("C = ") == 6


def test_errors_exit_nonzero(tmp_path, ply, capsys):
    bad = tmp_path / "bad.ply"
    bad.write_text("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nend_header\n0\n")
    assert main(["encode", str(bad), "--step", "1", "--out", str(tmp_path / "x")]) == 2
    assert "error[" in capsys.readouterr().err
    assert main(["encode", str(ply), "--depth", "5", "--blocks", "64", "--step", "1",
                 "--out", str(tmp_path / "x")]) == 2
    assert main(["decode", str(tmp_path / "missing.bin"), "--geometry", str(ply),
                 "--out", str(tmp_path / "y.ply")]) == 1
    empty = RawCloud(np.zeros((0, 3)), np.zeros((0, 3)))
    with pytest.raises(Exception):
        write_ply(empty, tmp_path / "e.ply")
