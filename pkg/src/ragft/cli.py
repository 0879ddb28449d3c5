"""Command line interface: ``ragft {voxelize,encode,decode,sweep,complexity}``."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import coding, harness
from .errors import RagftError
from .hierarchy import BlockSchedule, build_tree
from .io import RawCloud, read_ply, to_raw, voxelize, write_ply, yuv_to_rgb
from .spectral import DEFAULT_THRESHOLD
from .transforms import Backend

# Complexity configurations reported for the 8iVFBv2 subset: (label, backend, block)
TABLE_CONFIGS = (
    ("ragft-bL2", Backend.RAGFT, 2),
    ("ragft-bL4", Backend.RAGFT, 4),
    ("ragft-bL8", Backend.RAGFT, 8),
    ("ragft-bL16", Backend.RAGFT, 16),
    ("blockgft-b8", Backend.BLOCKGFT, 8),
    ("blockgft-b16", Backend.BLOCKGFT, 16),
)


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _transform_args(args, depth: int):
    backend = Backend(args.backend)
    schedule = block = None
    if backend is Backend.RAGFT:
        schedule = BlockSchedule.parse(args.blocks, depth) if args.blocks else BlockSchedule.dyadic(depth)
    elif backend is Backend.BLOCKGFT:
        sizes = [int(t) for t in (args.blocks or "8").split(",") if t.strip()]
        if len(sizes) != 1:
            raise RagftError("block-GFT takes a single --blocks value")
        block = sizes[0]
    return backend, schedule, block


def _load(path, depth: int):
    return voxelize(read_ply(path), depth)


def cmd_voxelize(args) -> int:
    cloud = _load(args.input, args.depth)
    write_ply(to_raw(cloud), args.out, "ascii" if args.ascii else "binary")
    print(f"{cloud.count} voxels at depth {cloud.depth} -> {args.out}")
    return 0


def cmd_encode(args) -> int:
    cloud = _load(args.input, args.depth)
    backend, schedule, block = _transform_args(args, args.depth)
    stream = coding.encode(cloud, backend, schedule, args.step, args.threshold, block)
    data = stream.to_bytes()
    with open(args.out, "wb") as fh:
        fh.write(data)
    print(f"{cloud.count} points, {8 * len(data)} bits, {8 * len(data) / cloud.count:.4f} bpv -> {args.out}")
    return 0


def cmd_decode(args) -> int:
    with open(args.input, "rb") as fh:
        data = fh.read()
    header, _ = coding.Header.parse(data)
    geometry = voxelize(read_ply(args.geometry), header.depth)
    attrs = coding.decode(data, geometry.coords, geometry.weights)
    write_ply(RawCloud(geometry.coords.astype(np.float64), yuv_to_rgb(attrs)), args.out,
              "ascii" if args.ascii else "binary")
    print(f"decoded {len(attrs)} points -> {args.out}")
    return 0


def cmd_sweep(args) -> int:
    frames = [_load(p, args.depth) for p in args.inputs]
    backend, schedule, block = _transform_args(args, args.depth)
    points = harness.rd_sweep(frames, backend, _floats(args.steps), schedule, block, args.threshold)
    harness.write_csv(points, args.out)
    for p in points:
        print(f"step={p.step:g} rate={p.rate:.4f} bpv psnr_y={p.psnr_y:.3f} dB")
    return 0


def _complexity(frames, backend: Backend, schedule, block) -> harness.ComplexityReport:
    trees = []
    for f in frames:
        if backend is Backend.BLOCKGFT:
            trees.append(build_tree(f, BlockSchedule.with_leaf_block(f.depth, block), levels=1))
        elif backend is Backend.RAHT:
            trees.append(build_tree(f, BlockSchedule.dyadic(f.depth)))
        else:
            trees.append(build_tree(f, schedule))
    return harness.complexity_proxy(trees)


def cmd_complexity(args) -> int:
    frames = [_load(p, args.depth) for p in args.inputs]
    if args.table:
        for label, backend, size in TABLE_CONFIGS:
            schedule = BlockSchedule.with_leaf_block(args.depth, size) if backend is Backend.RAGFT else None
            rep = _complexity(frames, backend, schedule, size)
            print(f"{label:14s} C = {rep.aggregate:.4f}")
        return 0
    backend, schedule, block = _transform_args(args, args.depth)
    rep = _complexity(frames, backend, schedule, block)
    for path, k, n, levels in zip(args.inputs, rep.per_cloud, rep.counts, rep.per_level):
        print(f"{path}: N={n} K={k} per-level={levels}")
    print(f"C = {rep.aggregate:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ragft", description="Point cloud attribute codec")
    sub = parser.add_subparsers(dest="command", required=True)

    def transform_opts(p):
        p.add_argument("--backend", choices=[b.value for b in Backend], default="ragft")
        p.add_argument("--blocks", default=None,
                       help="b_L,b_{L-1},... (coarser levels default to 2); block size for blockgft")
        p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD,
                       help="graph edge threshold in child grid units")

    p = sub.add_parser("voxelize", help="voxelize a PLY file")
    p.add_argument("input")
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--out", required=True)
    p.add_argument("--ascii", action="store_true")
    p.set_defaults(func=cmd_voxelize)

    p = sub.add_parser("encode", help="encode the colors of a PLY file")
    p.add_argument("input")
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--out", required=True)
    transform_opts(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode colors onto geometry from a PLY file")
    p.add_argument("input")
    p.add_argument("--geometry", required=True, help="PLY with the coordinates used at encode time")
    p.add_argument("--out", required=True)
    p.add_argument("--ascii", action="store_true")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("sweep", help="rate-distortion sweep, CSV output")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--steps", default="64,32,16,8,4")
    p.add_argument("--out", required=True)
    transform_opts(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("complexity", help="sum-of-cubed-block-sizes complexity proxy")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--table", action="store_true", help="report every RA-GFT/block-GFT configuration")
    transform_opts(p)
    p.set_defaults(func=cmd_complexity)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RagftError as exc:
        print(f"error[{exc.category}]: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
