"""Deterministic synthetic clouds for tests and desk-scale experiments."""
from __future__ import annotations

import numpy as np

from . import morton
from .io import VoxelizedCloud, rgb_to_yuv


def _sorted_cloud(depth, coords, attributes, weights=None) -> VoxelizedCloud:
    order = np.argsort(morton.encode(coords))
    w = None if weights is None else np.asarray(weights)[order]
    return VoxelizedCloud(depth, coords[order], np.asarray(attributes)[order], w)


def random_cloud(rng: np.random.Generator, n: int, depth: int, channels: int = 3,
                 random_weights: bool = False) -> VoxelizedCloud:
    """Up to ``n`` unique uniformly random voxels with Gaussian attributes."""
    side = 1 << depth
    n = min(n, side**3)
    flat = rng.choice(side**3, size=n, replace=False)
    coords = np.column_stack(np.unravel_index(flat, (side, side, side))).astype(np.int64)
    attrs = rng.normal(0.0, 50.0, size=(n, channels))
    weights = rng.uniform(0.5, 4.0, size=n) if random_weights else None
    return _sorted_cloud(depth, coords, attrs, weights)


def surface_coords(depth: int, radius_fraction: float = 0.4, bumps: float = 0.15) -> np.ndarray:
    """Voxels of a closed bumpy sphere, one voxel thick, Morton-sorted."""
    side = 1 << depth
    radius = radius_fraction * side
    centre = side / 2.0
    # ~3 samples per voxel of surface along each parametric direction
    n_theta = int(np.ceil(3 * np.pi * radius * (1 + bumps)))
    n_phi = 2 * n_theta
    theta = (np.arange(n_theta) + 0.5) * np.pi / n_theta
    phi = np.arange(n_phi) * 2 * np.pi / n_phi
    t, p = np.meshgrid(theta, phi, indexing="ij")
    r = radius * (1 + bumps * np.sin(3 * t) * np.cos(2 * p))
    pts = np.stack(
        (centre + r * np.sin(t) * np.cos(p), centre + r * np.sin(t) * np.sin(p), centre + r * np.cos(t)),
        axis=-1,
    ).reshape(-1, 3)
    grid = np.clip(np.floor(pts), 0, side - 1).astype(np.int64)
    codes = np.unique(morton.encode(grid))
    return morton.decode(codes)


def smooth_colors(coords: np.ndarray, depth: int, rng: np.random.Generator | None = None,
                  noise: float = 2.0) -> np.ndarray:
    """Low-frequency RGB field over the grid plus small Gaussian noise, clipped to [0, 255]."""
    x = coords.astype(np.float64) / (1 << depth)
    r = 128 + 70 * np.sin(2 * np.pi * 1.5 * x[:, 0] + 0.3) * np.cos(2 * np.pi * x[:, 1])
    g = 120 + 60 * np.cos(2 * np.pi * 2.0 * x[:, 2]) + 30 * np.sin(2 * np.pi * 3.0 * x[:, 0] * x[:, 1])
    b = 100 + 50 * np.sin(2 * np.pi * (x[:, 0] + x[:, 1] + x[:, 2]))
    rgb = np.column_stack((r, g, b))
    if rng is not None and noise > 0:
        rgb = rgb + rng.normal(0.0, noise, size=rgb.shape)
    return np.clip(rgb, 0, 255)


def smooth_surface_cloud(depth: int = 9, seed: int = 0, noise: float = 2.0, **shape) -> VoxelizedCloud:
    """Bumpy-sphere surface with a smooth YUV colour field."""
    coords = surface_coords(depth, **shape)
    rgb = np.rint(smooth_colors(coords, depth, np.random.default_rng(seed), noise))
    return VoxelizedCloud(depth, coords, rgb_to_yuv(rgb))


def constant_cloud(depth: int = 8, color=(200, 120, 40), **shape) -> VoxelizedCloud:
    coords = surface_coords(depth, **shape)
    yuv = np.repeat(rgb_to_yuv(np.asarray([color], dtype=np.float64)), len(coords), axis=0)
    return VoxelizedCloud(depth, coords, yuv)
