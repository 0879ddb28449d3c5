"""Multilevel block transforms: RA-GFT, RAHT and block-GFT.

All three backends share one engine. A :class:`TransformPlan` holds, for every
level of a :class:`~ragft.hierarchy.PartitionTree`, the block bases grouped by
block size. The forward pass walks from the leaves to level 0: each block gathers
its children's current DC values, applies its basis, writes its AC coefficients
to their canonical slots and promotes its DC to the parent. The inverse walks
back down.

Canonical coefficient order (shared with the bitstream): level-0 DCs first, then
the ACs of levels 0, 1, ..., L-1; within a level, blocks in Morton order of the
parent; within a block, ACs by ascending eigenvalue. Level ``l`` ACs therefore
start at slot ``M_l`` and block ``i`` at slot ``M_l + start_i - i``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import CountMismatchError
from .hierarchy import BlockSchedule, PartitionTree, build_binary_tree, build_tree
from .io import VoxelizedCloud
from .spectral import DEFAULT_THRESHOLD, batch_block_bases


class Backend(str, Enum):
    RAGFT = "ragft"
    RAHT = "raht"
    BLOCKGFT = "blockgft"


@dataclass(frozen=True)
class SpectralConfig:
    threshold: float = DEFAULT_THRESHOLD


@dataclass
class BlockGroup:
    """Blocks of one level sharing a size ``n``."""

    parents: np.ndarray  # (B,)
    children: np.ndarray  # (B, n) indices into level l + 1
    ac_slots: np.ndarray  # (B, n - 1) canonical positions
    bases: np.ndarray  # (B, n, n)
    eigenvalues: np.ndarray  # (B, n)


@dataclass
class TransformPlan:
    tree: PartitionTree
    backend: Backend
    groups: list[list[BlockGroup]]
    bridged_blocks: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def n_points(self) -> int:
        return self.tree.n_points


@dataclass
class CoefficientSet:
    """Coefficients in canonical order with per-coefficient metadata.

    ``weight`` is the node weight of the block's parent for ACs and of the root
    itself for DCs.
    """

    values: np.ndarray  # (N, C)
    level: np.ndarray
    block: np.ndarray
    index: np.ndarray
    weight: np.ndarray
    is_dc: np.ndarray
    backend: Backend

    def __len__(self) -> int:
        return len(self.values)


def _haar_bases(weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form 2-point butterflies ``[[a, b], [-b, a]]``."""
    q1, q2 = weights[:, 0], weights[:, 1]
    s = np.sqrt(q1 + q2)
    a, b = np.sqrt(q1) / s, np.sqrt(q2) / s
    bases = np.empty((len(q1), 2, 2))
    bases[:, 0, 0], bases[:, 0, 1] = a, b
    bases[:, 1, 0], bases[:, 1, 1] = -b, a
    vals = np.zeros((len(q1), 2))
    vals[:, 1] = 1.0 / q1 + 1.0 / q2
    return bases, vals


def make_plan(
    tree: PartitionTree,
    backend: Backend = Backend.RAGFT,
    config: SpectralConfig = SpectralConfig(),
    closed_form_pairs: bool = False,
) -> TransformPlan:
    """Compute every block basis of ``tree``.

    With ``closed_form_pairs`` 2-node blocks use the butterfly formula instead of
    the eigensolver (this is how the RAHT backend is evaluated).
    """
    sizes = tree.sizes
    groups: list[list[BlockGroup]] = []
    bridged = 0
    for level in range(tree.levels):
        start = tree.child_start[level]
        nblk = np.diff(start)
        ccoords = tree.coords[level + 1]
        cweights = tree.node_weight[level + 1]
        level_groups = []
        for n in np.unique(nblk):
            n = int(n)
            parents = np.flatnonzero(nblk == n)
            children = start[parents][:, None] + np.arange(n)
            base = sizes[level] + start[parents] - parents
            ac_slots = base[:, None] + np.arange(n - 1)
            w = cweights[children]
            if n == 2 and closed_form_pairs:
                bases, vals = _haar_bases(w)
            else:
                bases, vals, nb = batch_block_bases(ccoords[children], w, config.threshold)
                bridged += nb
            level_groups.append(BlockGroup(parents, children, ac_slots, bases, vals))
        groups.append(level_groups)
    return TransformPlan(tree, backend, groups, bridged)


def forward(plan: TransformPlan, attributes: np.ndarray) -> CoefficientSet:
    tree = plan.tree
    a = np.asarray(attributes, dtype=np.float64)
    squeeze = a.ndim == 1
    if squeeze:
        a = a[:, None]
    if len(a) != tree.n_points:
        raise CountMismatchError(f"{len(a)} attributes for a {tree.n_points}-point tree")
    N, C = a.shape
    out = np.empty((N, C))
    level_of = np.zeros(N, dtype=np.int64)
    block_of = np.zeros(N, dtype=np.int64)
    index_of = np.zeros(N, dtype=np.int64)
    weight_of = np.zeros(N)
    dc = a
    for level in range(tree.levels - 1, -1, -1):
        parent_dc = np.empty((tree.sizes[level], C))
        qparent = tree.node_weight[level]
        for g in plan.groups[level]:
            y = np.matmul(g.bases, dc[g.children])
            parent_dc[g.parents] = y[:, 0]
            if g.ac_slots.shape[1]:
                slots = g.ac_slots
                out[slots] = y[:, 1:]
                level_of[slots] = level
                block_of[slots] = g.parents[:, None]
                index_of[slots] = np.arange(1, slots.shape[1] + 1)
                weight_of[slots] = qparent[g.parents][:, None]
        dc = parent_dc
    M0 = tree.sizes[0]
    out[:M0] = dc
    block_of[:M0] = np.arange(M0)
    weight_of[:M0] = tree.node_weight[0]
    is_dc = np.zeros(N, dtype=bool)
    is_dc[:M0] = True
    values = out[:, 0] if squeeze else out
    return CoefficientSet(values, level_of, block_of, index_of, weight_of, is_dc, plan.backend)


def inverse(plan: TransformPlan, coeffs) -> np.ndarray:
    tree = plan.tree
    values = coeffs.values if isinstance(coeffs, CoefficientSet) else np.asarray(coeffs, dtype=np.float64)
    squeeze = values.ndim == 1
    if squeeze:
        values = values[:, None]
    if len(values) != tree.n_points:
        raise CountMismatchError(f"{len(values)} coefficients for a {tree.n_points}-point tree")
    C = values.shape[1]
    dc = values[: tree.sizes[0]]
    for level in range(tree.levels):
        child = np.empty((tree.sizes[level + 1], C))
        for g in plan.groups[level]:
            n = g.children.shape[1]
            y = np.empty((len(g.parents), n, C))
            y[:, 0] = dc[g.parents]
            y[:, 1:] = values[g.ac_slots]
            child[g.children] = np.matmul(np.swapaxes(g.bases, 1, 2), y)
        dc = child
    return dc[:, 0] if squeeze else dc


def canonical_order(tree: PartitionTree) -> list[tuple[int, int, int]]:
    """``(level, block, within-block index)`` for every canonical slot.

    Level-0 DCs are reported as ``(0, i, 0)``. Depends on geometry only.
    """
    order = [(0, i, 0) for i in range(tree.sizes[0])]
    for level in range(tree.levels):
        s = tree.child_start[level]
        for i in range(len(s) - 1):
            order.extend((level, i, k) for k in range(1, int(s[i + 1] - s[i])))
    return order


# Backend entry points


def ragft_plan(cloud: VoxelizedCloud, schedule: BlockSchedule, config: SpectralConfig = SpectralConfig(),
               levels: int | None = None) -> TransformPlan:
    return make_plan(build_tree(cloud, schedule, levels), Backend.RAGFT, config)


def ragft_forward(cloud: VoxelizedCloud, tree: PartitionTree, config: SpectralConfig = SpectralConfig()):
    return forward(make_plan(tree, Backend.RAGFT, config), cloud.attributes)


def ragft_inverse(coeffs: CoefficientSet, tree: PartitionTree, config: SpectralConfig = SpectralConfig()):
    return inverse(make_plan(tree, Backend.RAGFT, config), coeffs)


def raht_plan(cloud: VoxelizedCloud) -> TransformPlan:
    return make_plan(build_binary_tree(cloud), Backend.RAHT, closed_form_pairs=True)


def raht_forward(cloud: VoxelizedCloud) -> CoefficientSet:
    """Separable RAHT: butterflies along x, then y, then z at every dyadic level."""
    return forward(raht_plan(cloud), cloud.attributes)


def raht_inverse(coeffs: CoefficientSet, cloud: VoxelizedCloud) -> np.ndarray:
    return inverse(raht_plan(cloud), coeffs)


def blockgft_plan(cloud: VoxelizedCloud, block: int, config: SpectralConfig = SpectralConfig()) -> TransformPlan:
    """One level of ``block``-sized cubes with ``Q = I``; every block keeps its DC."""
    unit = VoxelizedCloud(cloud.depth, cloud.coords, cloud.attributes, np.ones(cloud.count))
    schedule = BlockSchedule.with_leaf_block(cloud.depth, block)
    return make_plan(build_tree(unit, schedule, levels=1), Backend.BLOCKGFT, config)


def blockgft_forward(cloud: VoxelizedCloud, block: int, config: SpectralConfig = SpectralConfig()):
    return forward(blockgft_plan(cloud, block, config), cloud.attributes)


def blockgft_inverse(coeffs: CoefficientSet, cloud: VoxelizedCloud, block: int,
                     config: SpectralConfig = SpectralConfig()):
    return inverse(blockgft_plan(cloud, block, config), coeffs)


def plan_for(cloud: VoxelizedCloud, backend: Backend | str, schedule: BlockSchedule | None = None,
             block: int | None = None, config: SpectralConfig = SpectralConfig()) -> TransformPlan:
    """Plan for any backend; ``schedule`` for RA-GFT, ``block`` for block-GFT."""
    backend = Backend(backend)
    if backend is Backend.RAHT:
        return raht_plan(cloud)
    if backend is Backend.BLOCKGFT:
        if block is None:
            raise ValueError("block-GFT needs a block size")
        return blockgft_plan(cloud, block, config)
    if schedule is None:
        schedule = BlockSchedule.dyadic(cloud.depth)
    return make_plan(build_tree(cloud, schedule), Backend.RAGFT, config)
