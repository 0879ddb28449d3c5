"""Point cloud I/O: PLY files, voxelization and RGB/YUV conversion."""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import morton
from .errors import EmptyCloudError, MissingColorError, PlyFormatError

# Full-range BT.601, U and V offset by 128.
RGB_TO_YUV = np.array(
    [
        [0.299, 0.587, 0.114],
        [-0.168736, -0.331264, 0.5],
        [0.5, -0.418688, -0.081312],
    ]
)
YUV_TO_RGB = np.linalg.inv(RGB_TO_YUV)
_CHROMA_OFFSET = np.array([0.0, 128.0, 128.0])


@dataclass
class RawCloud:
    """Unvoxelized points with 8-bit RGB colors.

    ``weights`` is optional and defaults to all ones when the cloud is voxelized.
    """

    positions: np.ndarray
    colors: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 3)
        self.colors = np.asarray(self.colors).reshape(-1, 3)
        if len(self.positions) != len(self.colors):
            raise ValueError("positions and colors must have the same length")
        if self.colors.size and (self.colors.min() < 0 or self.colors.max() > 255):
            raise ValueError("color channels must lie in [0, 255]")
        self.colors = self.colors.astype(np.uint8)
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
            if len(self.weights) != len(self.positions) or np.any(self.weights <= 0):
                raise ValueError("weights must be positive, one per point")

    @property
    def count(self) -> int:
        return len(self.positions)


@dataclass
class VoxelizedCloud:
    """Unique integer coordinates on a ``2^depth`` grid, sorted in Morton order."""

    depth: int
    coords: np.ndarray
    attributes: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=np.int64).reshape(-1, 3)
        self.attributes = np.asarray(self.attributes, dtype=np.float64)
        if self.attributes.ndim == 1:
            self.attributes = self.attributes[:, None]
        if self.weights is None:
            self.weights = np.ones(len(self.coords))
        self.weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        n = len(self.coords)
        if len(self.attributes) != n or len(self.weights) != n:
            raise ValueError("coords, attributes and weights must have equal length")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be strictly positive")
        if n and (self.coords.min() < 0 or self.coords.max() >= 1 << self.depth):
            raise ValueError(f"coordinates outside the 2^{self.depth} grid")

    @property
    def count(self) -> int:
        return len(self.coords)

    def morton_codes(self) -> np.ndarray:
        return morton.encode(self.coords)


def rgb_to_yuv(colors) -> np.ndarray:
    rgb = np.asarray(colors, dtype=np.float64)
    return rgb @ RGB_TO_YUV.T + _CHROMA_OFFSET


def yuv_to_rgb(yuv) -> np.ndarray:
    """Inverse of :func:`rgb_to_yuv`, rounded and clamped to 8-bit integers."""
    rgb = (np.asarray(yuv, dtype=np.float64) - _CHROMA_OFFSET) @ YUV_TO_RGB.T
    return np.clip(np.rint(rgb), 0, 255).astype(np.uint8)


def voxelize(cloud: RawCloud, depth: int, to_yuv: bool = True) -> VoxelizedCloud:
    """Map positions onto the ``2^depth`` integer grid and merge duplicates.

    Positions that already fit in ``[0, 2^depth)`` are only floored; anything else
    is shifted to the origin and scaled uniformly so the longest extent spans the
    grid. Points sharing a voxel are merged: attributes are averaged with the
    incoming weights, weights are summed. Output is in Morton order.
    """
    if depth < 1 or depth > morton.MAX_BITS:
        raise ValueError(f"depth must be in [1, {morton.MAX_BITS}]")
    if cloud.count == 0:
        raise EmptyCloudError("cannot voxelize an empty cloud")
    side = 1 << depth
    pos = cloud.positions
    lo, hi = pos.min(axis=0), pos.max(axis=0)
    if lo.min() < 0 or hi.max() >= side:
        extent = float((hi - lo).max())
        scale = (side - 1) / extent if extent > 0 else 0.0
        pos = (pos - lo) * scale
    grid = np.clip(np.floor(pos), 0, side - 1).astype(np.int64)

    attrs = rgb_to_yuv(cloud.colors) if to_yuv else cloud.colors.astype(np.float64)
    w = np.ones(cloud.count) if cloud.weights is None else cloud.weights

    codes = morton.encode(grid)
    uniq, first, inverse = np.unique(codes, return_index=True, return_inverse=True)
    wsum = np.bincount(inverse, weights=w, minlength=len(uniq))
    merged = np.empty((len(uniq), attrs.shape[1]))
    for c in range(attrs.shape[1]):
        merged[:, c] = np.bincount(inverse, weights=w * attrs[:, c], minlength=len(uniq)) / wsum
    return VoxelizedCloud(depth=depth, coords=grid[first], attributes=merged, weights=wsum)


# PLY

_PLY_TYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}


@dataclass
class _Element:
    name: str
    count: int
    props: list = field(default_factory=list)  # (name, dtype) or (name, count_t, item_t)

    @property
    def has_lists(self) -> bool:
        return any(len(p) == 3 for p in self.props)


def _parse_header(fh) -> tuple[str, list[_Element]]:
    first = fh.readline()
    if first.strip() != b"ply":
        raise PlyFormatError("missing 'ply' magic line")
    fmt = None
    elements: list[_Element] = []
    while True:
        line = fh.readline()
        if not line:
            raise PlyFormatError("header not terminated by end_header")
        tokens = line.decode("ascii", errors="replace").split()
        if not tokens or tokens[0] in ("comment", "obj_info"):
            continue
        key = tokens[0]
        if key == "end_header":
            break
        if key == "format":
            if len(tokens) < 2:
                raise PlyFormatError("malformed format line")
            fmt = tokens[1]
        elif key == "element":
            if len(tokens) != 3 or not tokens[2].isdigit():
                raise PlyFormatError(f"malformed element line: {line!r}")
            elements.append(_Element(tokens[1], int(tokens[2])))
        elif key == "property":
            if not elements:
                raise PlyFormatError("property before any element")
            if tokens[1] == "list":
                if len(tokens) != 5 or tokens[2] not in _PLY_TYPES or tokens[3] not in _PLY_TYPES:
                    raise PlyFormatError(f"malformed list property: {line!r}")
                elements[-1].props.append((tokens[4], _PLY_TYPES[tokens[2]], _PLY_TYPES[tokens[3]]))
            else:
                if len(tokens) != 3 or tokens[1] not in _PLY_TYPES:
                    raise PlyFormatError(f"malformed property: {line!r}")
                elements[-1].props.append((tokens[2], _PLY_TYPES[tokens[1]]))
        else:
            raise PlyFormatError(f"unknown header keyword {key!r}")
    if fmt is None:
        raise PlyFormatError("missing format line")
    if fmt == "binary_big_endian":
        raise PlyFormatError("binary_big_endian PLY is not supported")
    if fmt not in ("ascii", "binary_little_endian"):
        raise PlyFormatError(f"unknown PLY format {fmt!r}")
    return fmt, elements


def read_ply(path) -> RawCloud:
    """Read x, y, z and red, green, blue vertex properties from an ascii or
    binary little-endian PLY file."""
    with open(path, "rb") as fh:
        fmt, elements = _parse_header(fh)
        vertex_pos = next((i for i, e in enumerate(elements) if e.name == "vertex"), None)
        if vertex_pos is None:
            raise PlyFormatError("no vertex element")
        vertex = elements[vertex_pos]
        names = [p[0] for p in vertex.props]
        for axis in "xyz":
            if axis not in names:
                raise PlyFormatError(f"vertex element lacks property {axis!r}")
        for channel in ("red", "green", "blue"):
            if channel not in names:
                raise MissingColorError(f"vertex element lacks color property {channel!r}")
        if vertex.has_lists:
            raise PlyFormatError("list properties on vertex are not supported")

        if fmt == "ascii":
            table = _read_ascii(fh, elements[:vertex_pos], vertex)
            cols = {name: table[:, j] for j, name in enumerate(names)}
        else:
            for e in elements[:vertex_pos]:
                if e.has_lists:
                    raise PlyFormatError("cannot skip list-valued elements preceding vertex")
                fh.seek(e.count * np.dtype([(p[0], "<" + p[1]) for p in e.props]).itemsize, os.SEEK_CUR)
            dtype = np.dtype([(p[0], "<" + p[1]) for p in vertex.props])
            buf = fh.read(vertex.count * dtype.itemsize)
            if len(buf) != vertex.count * dtype.itemsize:
                raise PlyFormatError(
                    f"element count mismatch: header declares {vertex.count} vertices, file is short"
                )
            table = np.frombuffer(buf, dtype=dtype)
            cols = {name: table[name] for name in names}

    positions = np.column_stack([cols[a].astype(np.float64) for a in "xyz"])
    colors = np.column_stack([cols[c] for c in ("red", "green", "blue")])
    return RawCloud(positions, colors)


def _read_ascii(fh, before: list[_Element], vertex: _Element) -> np.ndarray:
    for e in before:
        for _ in range(e.count):
            if not fh.readline():
                raise PlyFormatError(f"element count mismatch in {e.name!r}")
    rows = []
    for _ in range(vertex.count):
        line = fh.readline()
        if not line:
            raise PlyFormatError(
                f"element count mismatch: header declares {vertex.count} vertices, found {len(rows)}"
            )
        vals = line.split()
        if len(vals) != len(vertex.props):
            raise PlyFormatError(f"vertex row {len(rows)} has {len(vals)} values")
        rows.append([float(v) for v in vals])
    return np.array(rows, dtype=np.float64).reshape(vertex.count, len(vertex.props))


def write_ply(cloud: RawCloud, path, format: str = "binary") -> None:
    """Write positions as doubles and colors as uchar."""
    if cloud.count == 0:
        raise EmptyCloudError("refusing to write an empty cloud")
    if format not in ("ascii", "binary"):
        raise ValueError("format must be 'ascii' or 'binary'")
    tag = "ascii" if format == "ascii" else "binary_little_endian"
    header = (
        f"ply\nformat {tag} 1.0\nelement vertex {cloud.count}\n"
        "property double x\nproperty double y\nproperty double z\n"
        "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        if format == "ascii":
            lines = [
                f"{p[0]!r} {p[1]!r} {p[2]!r} {c[0]} {c[1]} {c[2]}\n"
                for p, c in zip(cloud.positions.tolist(), cloud.colors.tolist())
            ]
            fh.write("".join(lines).encode("ascii"))
        else:
            dtype = np.dtype(
                [("x", "<f8"), ("y", "<f8"), ("z", "<f8"), ("red", "u1"), ("green", "u1"), ("blue", "u1")]
            )
            table = np.empty(cloud.count, dtype=dtype)
            for j, a in enumerate("xyz"):
                table[a] = cloud.positions[:, j]
            for j, c in enumerate(("red", "green", "blue")):
                table[c] = cloud.colors[:, j]
            fh.write(table.tobytes())


def to_raw(cloud: VoxelizedCloud, yuv: bool = True) -> RawCloud:
    """Voxelized cloud back to integer positions and 8-bit RGB."""
    colors = yuv_to_rgb(cloud.attributes) if yuv else np.clip(np.rint(cloud.attributes), 0, 255)
    return RawCloud(cloud.coords.astype(np.float64), colors, cloud.weights.copy())

