"""Regenerate the golden 50-point cloud and its reference bitstream.

Run from the repository root; writes into tests/data/.
"""
import argparse
import os

import numpy as np

from ragft import coding
from ragft.io import RawCloud, read_ply, voxelize, write_ply

DEPTH = 5
STEP = 10.0


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default=os.path.join("tests", "data"))
    parser.add_argument("--seed", type=int, default=50)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    flat = rng.choice((1 << DEPTH) ** 3, size=50, replace=False)
    coords = np.column_stack(np.unravel_index(flat, (1 << DEPTH,) * 3)).astype(np.float64)
    colors = rng.integers(0, 256, size=(50, 3))
    ply = os.path.join(args.out_dir, "golden_50pt.ply")
    write_ply(RawCloud(coords, colors), ply, "ascii")

    cloud = voxelize(read_ply(ply), DEPTH)
    data = coding.encode(cloud, "ragft", step=STEP).to_bytes()
    with open(os.path.join(args.out_dir, "golden_50pt_step10.bin"), "wb") as fh:
        fh.write(data)
    print(f"{len(data)} bytes")


if __name__ == "__main__":
    main()
