"""Morton (z-order) codes for integer 3D coordinates.

Bit layout: for coordinate bit ``j``, x goes to code bit ``3j``, y to ``3j + 1``
and z to ``3j + 2``. Dropping the lowest code bit therefore halves x first,
then y, then z.
"""
import numpy as np

MAX_BITS = 21

_MASKS = (
    (32, 0x1F00000000FFFF),
    (16, 0x1F0000FF0000FF),
    (8, 0x100F00F00F00F00F),
    (4, 0x10C30C30C30C30C3),
    (2, 0x1249249249249249),
)


def _spread(v: np.ndarray) -> np.ndarray:
    v = v.astype(np.uint64) & np.uint64(0x1FFFFF)
    for shift, mask in _MASKS:
        v = (v | (v << np.uint64(shift))) & np.uint64(mask)
    return v


def _compact(v: np.ndarray) -> np.ndarray:
    v = v.astype(np.uint64) & np.uint64(0x1249249249249249)
    v = (v ^ (v >> np.uint64(2))) & np.uint64(0x10C30C30C30C30C3)
    v = (v ^ (v >> np.uint64(4))) & np.uint64(0x100F00F00F00F00F)
    v = (v ^ (v >> np.uint64(8))) & np.uint64(0x1F0000FF0000FF)
    v = (v ^ (v >> np.uint64(16))) & np.uint64(0x1F00000000FFFF)
    v = (v ^ (v >> np.uint64(32))) & np.uint64(0x1FFFFF)
    return v


def encode(coords: np.ndarray) -> np.ndarray:
    """Morton codes of an ``(N, 3)`` array of non-negative integer coordinates."""
    coords = np.asarray(coords)
    if coords.size and (coords.min() < 0 or coords.max() >= 1 << MAX_BITS):
        raise ValueError(f"coordinates must lie in [0, 2^{MAX_BITS})")
    return (
        _spread(coords[:, 0])
        | (_spread(coords[:, 1]) << np.uint64(1))
        | (_spread(coords[:, 2]) << np.uint64(2))
    )


def decode(codes: np.ndarray) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.uint64)
    out = np.empty((codes.shape[0], 3), dtype=np.int64)
    for axis in range(3):
        out[:, axis] = _compact(codes >> np.uint64(axis))
    return out


def axis_shifts(bits: int) -> tuple[int, int, int]:
    """Per-axis coordinate shifts equivalent to dropping ``bits`` low Morton bits."""
    return ((bits + 2) // 3, (bits + 1) // 3, bits // 3)
