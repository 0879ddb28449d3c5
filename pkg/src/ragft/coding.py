"""Uniform quantization and the attribute bitstream.

Bitstream layout, all multi-byte fields little-endian::

    offset  size  field
    0       2     magic b"RG"
    2       1     format version (high nibble, 1) | backend (low nibble:
                  0 RA-GFT, 1 RAHT, 2 block-GFT)
    3       1     voxel depth J (low 5 bits) | channel count C minus one (high 3 bits)
    4       1     schedule length L
    5       L     log2 block sizes, coarsest level first (block-GFT: one entry, RAHT: none)
    5+L     4     graph threshold, float32, in child grid units
    9+L     8     quantization step, float64
    17+L    var   point count N, unsigned LEB128
    ...     var   byte lengths of the first C - 1 payloads, unsigned LEB128 each
    ...           C RLGR payloads in channel order (Y, U, V); the last one runs to
                  the end of the stream

The encoder rounds the threshold to float32 before building any graph so that
both sides see the same value. Geometry is not stored: the decoder is given the
voxel coordinates (and weights, if not all ones).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import rlgr
from .errors import BitstreamError, CountMismatchError
from .hierarchy import BlockSchedule
from .io import VoxelizedCloud
from .spectral import DEFAULT_THRESHOLD
from .transforms import Backend, SpectralConfig, TransformPlan, forward, inverse, plan_for

MAGIC = b"RG"
VERSION = 1
_BACKEND_CODES = {Backend.RAGFT: 0, Backend.RAHT: 1, Backend.BLOCKGFT: 2}
_BACKEND_FROM_CODE = {v: k for k, v in _BACKEND_CODES.items()}


def quantize(values, step: float) -> np.ndarray:
    """Round ``values / step`` to the nearest integer, halves away from zero."""
    if step <= 0:
        raise ValueError("quantization step must be positive")
    v = np.asarray(values, dtype=np.float64)
    return (np.sign(v) * np.floor(np.abs(v) / step + 0.5)).astype(np.int64)


def dequantize(q, step: float) -> np.ndarray:
    return step * np.asarray(q, dtype=np.float64)


def _put_uvarint(out: bytearray, value: int) -> None:
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return


def _get_uvarint(data: bytes, pos: int) -> tuple[int, int]:
    value = shift = 0
    while True:
        if pos >= len(data):
            raise BitstreamError("header truncated inside a varint")
        byte = data[pos]
        pos += 1
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value, pos
        shift += 7


def round_threshold(threshold: float) -> float:
    return float(np.float32(threshold))


@dataclass
class Header:
    backend: Backend
    depth: int
    log2_sizes: tuple[int, ...]
    threshold: float
    step: float
    n_points: int
    channel_lengths: tuple[int, ...]
    version: int = VERSION

    def to_bytes(self) -> bytes:
        channels = len(self.channel_lengths)
        if not 1 <= channels <= 8 or not 1 <= self.depth <= 31:
            raise BitstreamError("channel count or depth out of range for the header")
        out = bytearray(MAGIC)
        out += struct.pack(
            "<BBB",
            (self.version << 4) | _BACKEND_CODES[self.backend],
            self.depth | ((channels - 1) << 5),
            len(self.log2_sizes),
        )
        out += bytes(self.log2_sizes)
        out += struct.pack("<fd", self.threshold, self.step)
        _put_uvarint(out, self.n_points)
        for length in self.channel_lengths[:-1]:
            _put_uvarint(out, length)
        return bytes(out)

    @classmethod
    def parse(cls, data: bytes) -> tuple["Header", int]:
        """Header fields and the payload offset. The last channel length is
        inferred from the total size."""
        if len(data) < 5 or data[:2] != MAGIC:
            raise BitstreamError("not an attribute bitstream (bad magic)")
        vb, dc, nsched = struct.unpack_from("<BBB", data, 2)
        version, code = vb >> 4, vb & 0x0F
        depth, channels = dc & 0x1F, (dc >> 5) + 1
        if version != VERSION:
            raise BitstreamError(f"unsupported bitstream version {version}")
        if code not in _BACKEND_FROM_CODE:
            raise BitstreamError(f"unknown backend code {code}")
        pos = 5
        if len(data) < pos + nsched + 12:
            raise BitstreamError("header truncated")
        log2_sizes = tuple(data[pos:pos + nsched])
        pos += nsched
        threshold, step = struct.unpack_from("<fd", data, pos)
        pos += 12
        n_points, pos = _get_uvarint(data, pos)
        lengths = []
        for _ in range(channels - 1):
            length, pos = _get_uvarint(data, pos)
            lengths.append(length)
        last = len(data) - pos - sum(lengths)
        if last < 0:
            raise BitstreamError("payload shorter than the lengths declared in the header")
        lengths.append(last)
        header = cls(_BACKEND_FROM_CODE[code], depth, log2_sizes, float(threshold), step, n_points,
                     tuple(lengths), version)
        return header, pos

    def schedule(self) -> BlockSchedule | None:
        if self.backend is Backend.RAGFT:
            return BlockSchedule(tuple(1 << k for k in self.log2_sizes))
        return None

    def block(self) -> int | None:
        if self.backend is Backend.BLOCKGFT:
            return 1 << self.log2_sizes[0]
        return None


@dataclass
class Bitstream:
    header: Header
    payloads: list[bytes]

    def to_bytes(self) -> bytes:
        return self.header.to_bytes() + b"".join(self.payloads)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Bitstream":
        header, pos = Header.parse(data)
        payloads = []
        for length in header.channel_lengths:
            if pos + length > len(data):
                raise BitstreamError("payload shorter than the lengths declared in the header")
            payloads.append(data[pos:pos + length])
            pos += length
        return cls(header, payloads)

    @property
    def n_bits(self) -> int:
        return 8 * len(self.to_bytes())


def morton_sorted(cloud: VoxelizedCloud) -> tuple[VoxelizedCloud, np.ndarray]:
    """Cloud in Morton order plus the permutation that produced it."""
    order = np.argsort(cloud.morton_codes(), kind="stable")
    codes = cloud.morton_codes()[order]
    if len(codes) > 1 and np.any(codes[1:] == codes[:-1]):
        raise ValueError("duplicate voxel coordinates")
    return VoxelizedCloud(cloud.depth, cloud.coords[order], cloud.attributes[order], cloud.weights[order]), order


def _schedule_fields(backend: Backend, depth: int, schedule: BlockSchedule | None, block: int | None):
    if backend is Backend.RAGFT:
        schedule = schedule or BlockSchedule.dyadic(depth)
        schedule.check_depth(depth)
        return schedule.log2_sizes, schedule, None
    if backend is Backend.BLOCKGFT:
        if block is None:
            raise ValueError("block-GFT needs a block size")
        log2b = BlockSchedule((block,)).log2_sizes
        if log2b[0] > depth:
            raise ValueError("block larger than the voxel grid")
        return log2b, None, block
    return (), None, None


def encode(
    cloud: VoxelizedCloud,
    backend: Backend | str = Backend.RAGFT,
    schedule: BlockSchedule | None = None,
    step: float = 1.0,
    threshold: float = DEFAULT_THRESHOLD,
    block: int | None = None,
    plan: TransformPlan | None = None,
) -> Bitstream:
    """Transform, quantize and entropy-code the attributes of ``cloud``.

    ``plan`` may be passed to reuse block bases across calls; it must have been
    built from the Morton-sorted cloud with the rounded threshold.
    """
    backend = Backend(backend)
    if step <= 0:
        raise ValueError("quantization step must be positive")
    log2_sizes, schedule, block = _schedule_fields(backend, cloud.depth, schedule, block)
    threshold = round_threshold(threshold)
    ordered, _ = morton_sorted(cloud)
    if plan is None:
        plan = plan_for(ordered, backend, schedule, block, SpectralConfig(threshold))
    coeffs = forward(plan, ordered.attributes)
    q = quantize(coeffs.values, step)
    payloads = [rlgr.encode(q[:, c]) for c in range(q.shape[1])]
    header = Header(backend, cloud.depth, log2_sizes, threshold, float(step), cloud.count,
                    tuple(len(p) for p in payloads))
    return Bitstream(header, payloads)


def decode_coefficients(stream: Bitstream | bytes) -> tuple[Header, np.ndarray]:
    """Header and integer coefficients in canonical order, ``(N, C)``."""
    if not isinstance(stream, Bitstream):
        stream = Bitstream.from_bytes(bytes(stream))
    h = stream.header
    q = np.column_stack([rlgr.decode(p, h.n_points) for p in stream.payloads]) if stream.payloads \
        else np.zeros((h.n_points, 0), dtype=np.int64)
    return h, q


def plan_from_header(h: Header, geometry: VoxelizedCloud) -> TransformPlan:
    return plan_for(geometry, h.backend, h.schedule(), h.block(), SpectralConfig(h.threshold))


def decode(
    stream: Bitstream | bytes,
    coords,
    weights=None,
    plan: TransformPlan | None = None,
) -> np.ndarray:
    """Reconstruct attributes for ``coords`` (any order; output follows it)."""
    h, q = decode_coefficients(stream)
    coords = np.asarray(coords, dtype=np.int64).reshape(-1, 3)
    if len(coords) != h.n_points:
        raise CountMismatchError(f"bitstream codes {h.n_points} points, geometry has {len(coords)}")
    geometry = VoxelizedCloud(h.depth, coords, np.zeros((len(coords), 1)), weights)
    geometry, order = morton_sorted(geometry)
    if plan is None:
        plan = plan_from_header(h, geometry)
    rec = inverse(plan, dequantize(q, h.step))
    out = np.empty_like(rec)
    out[order] = rec
    return out
