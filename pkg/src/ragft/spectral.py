"""Block graphs and their Q-normalized Laplacian transforms.

A block transform is the matrix whose rows are the eigenvectors of
``Q^{-1/2} (D - W) Q^{-1/2}``, eigenvalues ascending. Row 0 is the DC basis
vector ``sqrt(q) / ||sqrt(q)||``, set exactly rather than taken from the solver.
Remaining rows follow a fixed sign and tie-ordering canon so that encoder and
decoder derive bit-identical bases from geometry alone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import BlockTransformError

DEFAULT_THRESHOLD = math.sqrt(3.0)
TIE_TOL = 1e-9
SIGN_TOL = 1e-9
EIG_FLOOR = 1e-12
_DENSE_LIMIT = 64


@dataclass(frozen=True)
class BlockGraph:
    coords: np.ndarray
    node_weights: np.ndarray
    edges: np.ndarray  # (E, 2), j < k
    edge_weights: np.ndarray
    bridges: int = 0

    @property
    def n(self) -> int:
        return len(self.node_weights)

    def adjacency(self) -> np.ndarray:
        W = np.zeros((self.n, self.n))
        j, k = self.edges[:, 0], self.edges[:, 1]
        W[j, k] = self.edge_weights
        W[k, j] = self.edge_weights
        return W


@dataclass(frozen=True)
class BlockTransform:
    basis: np.ndarray  # rows are eigenvectors
    eigenvalues: np.ndarray

    @property
    def n(self) -> int:
        return len(self.eigenvalues)


def _pairs_within(coords: np.ndarray, threshold: float) -> np.ndarray:
    n = len(coords)
    r2 = threshold * threshold * (1 + 1e-12)
    if n <= _DENSE_LIMIT:
        d2 = ((coords[:, None, :] - coords[None, :, :]) ** 2).sum(-1)
        j, k = np.nonzero(np.triu((d2 > 0) & (d2 <= r2), 1))
        return np.column_stack((j, k))
    pairs = cKDTree(coords).query_pairs(math.sqrt(r2), output_type="ndarray")
    if len(pairs) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    pairs = np.sort(pairs, axis=1)
    return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]


def _nearest_between(coords: np.ndarray, inside: np.ndarray) -> tuple[int, int, float]:
    """Closest pair (j in ``inside``, k outside); ties go to the lowest (j, k)."""
    a = np.flatnonzero(inside)
    b = np.flatnonzero(~inside)
    dist, idx = cKDTree(coords[b]).query(coords[a])
    best = dist.min()
    cands = [(int(a[i]), int(b[idx[i]])) for i in np.flatnonzero(dist <= best * (1 + 1e-12))]
    j, k = min(cands)
    return j, k, float(np.linalg.norm(coords[j] - coords[k]))


def build_block_graph(
    coords,
    node_weights,
    threshold: float = DEFAULT_THRESHOLD,
    spacing: float = 1.0,
) -> BlockGraph:
    """Distance-threshold graph over the children of one block.

    ``coords`` are integer coordinates on the child grid and ``threshold`` is in
    child grid units; ``spacing`` converts to the units used for the reciprocal
    distance weights. A disconnected graph gets bridge edges: the component of
    node 0 is joined to its nearest outside node until one component remains.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    coords = np.asarray(coords, dtype=np.float64).reshape(-1, 3)
    q = np.asarray(node_weights, dtype=np.float64).reshape(-1)
    n = len(q)
    if n < 1 or len(coords) != n:
        raise ValueError("need one coordinate per node and at least one node")
    pairs = _pairs_within(coords, threshold)
    dist = np.linalg.norm(coords[pairs[:, 0]] - coords[pairs[:, 1]], axis=1) if len(pairs) else np.zeros(0)
    edges = [pairs]
    lengths = [dist]
    bridges = 0
    if n > 1:
        while True:
            allp = np.concatenate(edges)
            graph = coo_matrix((np.ones(len(allp)), (allp[:, 0], allp[:, 1])), shape=(n, n))
            ncomp, labels = connected_components(graph, directed=False)
            if ncomp == 1:
                break
            j, k, d = _nearest_between(coords, labels == labels[0])
            edges.append(np.array([[min(j, k), max(j, k)]]))
            lengths.append(np.array([d]))
            bridges += 1
    pairs = np.concatenate(edges).astype(np.int64)
    dist = np.concatenate(lengths)
    return BlockGraph(coords, q, pairs, 1.0 / (spacing * dist), bridges)


def laplacian(g: BlockGraph) -> np.ndarray:
    W = g.adjacency()
    return np.diag(W.sum(axis=1)) - W


def q_normalized_laplacian(g: BlockGraph) -> np.ndarray:
    """``Q^{-1/2} L Q^{-1/2}`` with ``L = D - W``."""
    if np.any(g.node_weights <= 0):
        raise ValueError("node weights must be strictly positive")
    s = 1.0 / np.sqrt(g.node_weights)
    return s[:, None] * laplacian(g) * s[None, :]


def canonicalize(vals: np.ndarray, vecs: np.ndarray, sqrt_q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched canon for ``eigh`` output of shape ``(B, n)``, ``(B, n, n)``.

    Returns bases with eigenvectors as rows. Sign: the last entry whose magnitude
    exceeds ``SIGN_TOL * max`` is positive. Rows whose eigenvalues agree within
    ``TIE_TOL`` are ordered lexicographically.
    """
    vals = np.where((vals < 0) & (vals >= -EIG_FLOOR), 0.0, vals)
    basis = np.swapaxes(vecs, -1, -2).copy()
    n = basis.shape[-1]
    basis[:, 0, :] = sqrt_q / np.linalg.norm(sqrt_q, axis=-1, keepdims=True)
    vals[:, 0] = 0.0
    if n == 1:
        return basis, vals
    mag = np.abs(basis)
    significant = mag > SIGN_TOL * mag.max(axis=-1, keepdims=True)
    last = n - 1 - np.argmax(significant[..., ::-1], axis=-1)
    pick = np.take_along_axis(basis, last[..., None], axis=-1)[..., 0]
    flip = pick < 0
    flip[:, 0] = False
    basis[flip] *= -1.0

    tied = np.abs(np.diff(vals[:, 1:], axis=-1)) <= TIE_TOL
    for b in np.flatnonzero(tied.any(axis=-1)):
        row = 1
        while row < n:
            end = row + 1
            while end < n and abs(vals[b, end] - vals[b, end - 1]) <= TIE_TOL:
                end += 1
            if end - row > 1:
                group = basis[b, row:end]
                order = sorted(range(end - row), key=lambda r: tuple(group[r]))
                basis[b, row:end] = group[order]
            row = end
    return basis, vals


def block_transform(g: BlockGraph) -> BlockTransform:
    """Canonical eigendecomposition of the Q-normalized Laplacian of ``g``."""
    n = g.n
    if n == 1:
        return BlockTransform(np.ones((1, 1)), np.zeros(1))
    LQ = q_normalized_laplacian(g)
    try:
        vals, vecs = np.linalg.eigh(LQ)
    except np.linalg.LinAlgError as exc:
        raise BlockTransformError(f"eigensolver failed on a {n}-node block: {exc}") from exc
    basis, vals = canonicalize(vals[None], vecs[None], np.sqrt(g.node_weights)[None])
    return BlockTransform(basis[0], vals[0])


def apply_block(t: BlockTransform, signal) -> np.ndarray:
    """Coefficients ``basis @ signal``; entry 0 is the DC. Accepts ``(n,)`` or ``(n, C)``."""
    signal = np.asarray(signal, dtype=np.float64)
    if signal.shape[0] != t.n:
        raise ValueError(f"signal length {signal.shape[0]} does not match block size {t.n}")
    return t.basis @ signal


def invert_block(t: BlockTransform, coeffs) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape[0] != t.n:
        raise ValueError(f"coefficient length {coeffs.shape[0]} does not match block size {t.n}")
    return t.basis.T @ coeffs


def batch_block_bases(
    coords: np.ndarray,
    weights: np.ndarray,
    threshold: float = DEFAULT_THRESHOLD,
    spacing: float = 1.0,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Bases for ``B`` same-size blocks at once.

    ``coords`` is ``(B, n, 3)`` and ``weights`` is ``(B, n)``. Returns
    ``(bases, eigenvalues, bridged_block_count)``; equals calling
    :func:`block_transform` on each block.
    """
    B, n = weights.shape
    if n == 1:
        return np.ones((B, 1, 1)), np.zeros((B, 1)), 0
    if n > _DENSE_LIMIT:
        out_b = np.empty((B, n, n))
        out_v = np.empty((B, n))
        bridged = 0
        for b in range(B):
            g = build_block_graph(coords[b], weights[b], threshold, spacing)
            t = block_transform(g)
            out_b[b], out_v[b] = t.basis, t.eigenvalues
            bridged += g.bridges > 0
        return out_b, out_v, bridged

    c = coords.astype(np.float64)
    d2 = ((c[:, :, None, :] - c[:, None, :, :]) ** 2).sum(-1)
    adj = (d2 > 0) & (d2 <= threshold * threshold * (1 + 1e-12))
    with np.errstate(divide="ignore"):
        W = np.where(adj, 1.0 / (spacing * np.sqrt(d2)), 0.0)

    reach = adj | np.eye(n, dtype=bool)
    for _ in range(max(1, math.ceil(math.log2(n)))):
        reach = np.matmul(reach.astype(np.uint8), reach.astype(np.uint8)) > 0
    disconnected = np.flatnonzero(~reach[:, 0, :].all(axis=-1))
    for b in disconnected:
        W[b] = build_block_graph(coords[b], weights[b], threshold, spacing).adjacency()

    L = np.einsum("bij->bi", W)[:, :, None] * np.eye(n) - W
    s = 1.0 / np.sqrt(weights)
    LQ = s[:, :, None] * L * s[:, None, :]
    try:
        vals, vecs = np.linalg.eigh(LQ)
    except np.linalg.LinAlgError as exc:
        raise BlockTransformError(f"eigensolver failed on a batch of {n}-node blocks: {exc}") from exc
    bases, vals = canonicalize(vals, vecs, np.sqrt(weights))
    return bases, vals, len(disconnected)
