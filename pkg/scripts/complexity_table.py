"""Complexity proxy (sum of cubed block sizes per point) for every configuration.

Pass a folder of PLY frames to reproduce the published table; with no folder the
bundled synthetic frame is used.
"""
import argparse
import os

from ragft.cli import TABLE_CONFIGS, _complexity
from ragft.hierarchy import BlockSchedule
from ragft.io import read_ply, voxelize
from ragft.synthetic import smooth_surface_cloud
from ragft.transforms import Backend


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("folder", nargs="?")
    parser.add_argument("--depth", type=int, default=10)
    args = parser.parse_args()

    if args.folder:
        paths = sorted(os.path.join(args.folder, f) for f in os.listdir(args.folder) if f.lower().endswith(".ply"))
        frames = [voxelize(read_ply(p), args.depth) for p in paths]
    else:
        frames = [smooth_surface_cloud(depth=8, seed=7, radius_fraction=0.3)]
    print(f"{len(frames)} frame(s), {sum(f.count for f in frames)} points")
    for label, backend, size in TABLE_CONFIGS:
        sched = BlockSchedule.with_leaf_block(frames[0].depth, size) if backend is Backend.RAGFT else None
        rep = _complexity(frames, backend, sched, size)
        per_level = [sum(col) for col in zip(*rep.per_level)]
        print(f"{label:14s} C = {rep.aggregate:12.2f}   per-level K = {per_level}")


if __name__ == "__main__":
    main()
