"""Nested octree-style partitions of a voxelized cloud.

Levels run from the coarsest (0) to the leaves (L). Every level is kept in Morton
order, so the children of a node always form a contiguous run of the next level.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import morton
from .errors import ScheduleError
from .io import VoxelizedCloud


def _log2_exact(b: int) -> int:
    if b < 2 or b & (b - 1):
        raise ScheduleError(f"block size {b} is not a power of two >= 2")
    return b.bit_length() - 1


@dataclass(frozen=True)
class BlockSchedule:
    """Block sizes ``b_1, ..., b_L`` from the coarsest split to the leaf split."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(b) for b in self.sizes))
        if not self.sizes:
            raise ScheduleError("a schedule needs at least one level")
        for b in self.sizes:
            _log2_exact(b)

    @property
    def levels(self) -> int:
        return len(self.sizes)

    @property
    def log2_sizes(self) -> tuple[int, ...]:
        return tuple(_log2_exact(b) for b in self.sizes)

    @property
    def total_bits(self) -> int:
        return sum(self.log2_sizes)

    def check_depth(self, depth: int) -> None:
        if self.total_bits != depth:
            raise ScheduleError(
                f"product of block sizes {self.sizes} is 2^{self.total_bits}, expected 2^{depth}"
            )

    @classmethod
    def dyadic(cls, depth: int) -> "BlockSchedule":
        return cls((2,) * depth)

    @classmethod
    def with_leaf_block(cls, depth: int, leaf_block: int) -> "BlockSchedule":
        """``b_L = leaf_block`` and 2 everywhere else."""
        return cls.from_leaf_first([leaf_block], depth)

    @classmethod
    def from_leaf_first(cls, sizes, depth: int) -> "BlockSchedule":
        """Build from ``b_L, b_{L-1}, ...``; missing coarse levels default to 2."""
        sizes = [int(b) for b in sizes]
        used = sum(_log2_exact(b) for b in sizes)
        if used > depth:
            raise ScheduleError(f"block sizes {sizes} exceed a 2^{depth} grid")
        full = sizes + [2] * (depth - used)
        return cls(tuple(reversed(full)))

    @classmethod
    def parse(cls, text: str, depth: int) -> "BlockSchedule":
        try:
            sizes = [int(t) for t in text.split(",") if t.strip()]
        except ValueError:
            raise ScheduleError(f"cannot parse block list {text!r}") from None
        return cls.from_leaf_first(sizes, depth)


@dataclass(frozen=True)
class PartitionTree:
    """Per-level node data for a nested partition.

    ``steps[l]`` is the number of Morton bits dropped between level ``l + 1`` and
    level ``l`` (3 log2 b for cubic blocks, 1 for the axis-by-axis RAHT tree).
    ``child_start[l]`` has ``M_l + 1`` offsets into level ``l + 1``.
    """

    depth: int
    steps: tuple[int, ...]
    keys: tuple[np.ndarray, ...]
    coords: tuple[np.ndarray, ...]
    node_weight: tuple[np.ndarray, ...]
    descendant_count: tuple[np.ndarray, ...]
    child_start: tuple[np.ndarray, ...]

    @property
    def levels(self) -> int:
        return len(self.steps)

    @property
    def sizes(self) -> list[int]:
        return [len(k) for k in self.keys]

    @property
    def n_points(self) -> int:
        return len(self.keys[-1])

    def children(self, level: int, i: int) -> range:
        s = self.child_start[level]
        return range(int(s[i]), int(s[i + 1]))

    def block_sizes(self, level: int) -> np.ndarray:
        return np.diff(self.child_start[level])

    def shift(self, level: int) -> int:
        """Morton bits dropped from the leaves to reach ``level``."""
        return sum(self.steps[level:])

    def spacing(self, level: int) -> float:
        """Grid spacing of ``level`` in leaf voxel units, for cubic levels."""
        return float(1 << (self.shift(level) // 3))


def _build(cloud: VoxelizedCloud, steps: list[int]) -> PartitionTree:
    codes = cloud.morton_codes()
    if len(codes) > 1 and not np.all(codes[1:] > codes[:-1]):
        raise ValueError("cloud must be Morton-sorted with unique coordinates")
    keys = [codes]
    coords = [cloud.coords]
    weights = [cloud.weights.astype(np.float64)]
    counts = [np.ones(len(codes), dtype=np.int64)]
    starts = []
    rep = np.arange(len(codes))  # first leaf under each node
    total = 0
    for step in reversed(steps):
        total += step
        child_keys = keys[0] >> np.uint64(step)
        boundary = np.flatnonzero(child_keys[1:] != child_keys[:-1]) + 1
        first = np.concatenate(([0], boundary))
        start = np.concatenate((first, [len(child_keys)]))
        keys.insert(0, child_keys[first])
        rep = rep[first]
        leaf = cloud.coords[rep]
        sx, sy, sz = morton.axis_shifts(total)
        coords.insert(0, np.column_stack((leaf[:, 0] >> sx, leaf[:, 1] >> sy, leaf[:, 2] >> sz)))
        weights.insert(0, np.add.reduceat(weights[0], first))
        counts.insert(0, np.add.reduceat(counts[0], first))
        starts.insert(0, start)
    return PartitionTree(
        depth=cloud.depth,
        steps=tuple(steps),
        keys=tuple(keys),
        coords=tuple(coords),
        node_weight=tuple(weights),
        descendant_count=tuple(counts),
        child_start=tuple(starts),
    )


def build_tree(cloud: VoxelizedCloud, schedule: BlockSchedule, levels: int | None = None) -> PartitionTree:
    """Nested partition for ``schedule``; ``levels`` keeps only the finest levels.

    A truncated tree stops before the root, leaving several level-0 nodes, each
    with its own DC coefficient.
    """
    schedule.check_depth(cloud.depth)
    bits = [3 * k for k in schedule.log2_sizes]
    if levels is not None:
        if not 1 <= levels <= len(bits):
            raise ScheduleError(f"levels must be in [1, {len(bits)}]")
        bits = bits[len(bits) - levels:]
    return _build(cloud, bits)


def build_binary_tree(cloud: VoxelizedCloud) -> PartitionTree:
    """Tree that halves one axis per level (x, then y, then z): the RAHT tree."""
    return _build(cloud, [1] * (3 * cloud.depth))


def level_blocks(tree: PartitionTree, level: int) -> list[tuple[int, range]]:
    """Blocks at ``level`` as ``(parent index, child index run)``, in Morton order."""
    if not 0 <= level < tree.levels:
        raise IndexError(f"level {level} outside [0, {tree.levels})")
    s = tree.child_start[level]
    return [(i, range(int(s[i]), int(s[i + 1]))) for i in range(len(s) - 1)]
