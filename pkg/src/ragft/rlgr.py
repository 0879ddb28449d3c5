"""Adaptive run-length / Golomb-Rice (RLGR) coding of integer sequences.

Signed symbols are interleaved onto the naturals (0, -1, 1, -2, 2, ... ->
0, 1, 2, 3, 4, ...). The coder switches between two modes driven by a scaled
parameter ``kp`` (``k = kp >> LSGR``):

* ``k > 0``, run mode: a ``0`` bit stands for a run of ``2^k`` zeros. A ``1`` bit
  is followed by the length of a shorter zero run in ``k`` bits and then the
  interrupting symbol minus one, Golomb-Rice coded. A stream that ends inside a
  run closes it with a single ``0`` bit; the decoder clips to the known count.
* ``k = 0``, Golomb-Rice mode: each symbol is Golomb-Rice coded directly.

The Golomb-Rice parameter ``kr`` adapts through its own scaled counter ``krp``.
Unary prefixes are capped at ``ESCAPE`` ones; after the cap come 6 bits giving the
bit length of the symbol and then the symbol itself. Bits are packed MSB first
and the last byte is zero-padded.
"""
from __future__ import annotations

import numpy as np

from .errors import TruncatedStreamError

LSGR = 3
KPMAX = 80
UP_GR = 4  # kp increase after a full zero run
DN_GR = 6  # kp decrease after a run is interrupted
UQ_GR = 3  # kp increase after a zero in GR mode
DQ_GR = 3  # kp decrease after a nonzero in GR mode
K_INIT = 1
KR_INIT = 1
ESCAPE = 16
_LEN_BITS = 6


def zigzag(values) -> np.ndarray:
    v = np.asarray(values, dtype=np.int64)
    return np.where(v >= 0, 2 * v, -2 * v - 1)


def unzigzag(codes) -> np.ndarray:
    u = np.asarray(codes, dtype=np.int64)
    return np.where(u & 1, -((u + 1) >> 1), u >> 1)


class _Writer:
    __slots__ = ("buf", "acc", "n")

    def __init__(self):
        self.buf = bytearray()
        self.acc = 0
        self.n = 0

    def put(self, value: int, nbits: int) -> None:
        if nbits == 0:
            return
        self.acc = (self.acc << nbits) | value
        self.n += nbits
        if self.n >= 8:
            keep = self.n & 7
            nbytes = self.n >> 3
            self.buf += (self.acc >> keep).to_bytes(nbytes, "big")
            self.acc &= (1 << keep) - 1
            self.n = keep

    def getvalue(self) -> bytes:
        if self.n:
            return bytes(self.buf) + bytes([(self.acc << (8 - self.n)) & 0xFF])
        return bytes(self.buf)


class _Reader:
    __slots__ = ("data", "pos", "acc", "n")

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0
        self.acc = 0
        self.n = 0

    def _fill(self, nbits: int) -> None:
        need = (nbits - self.n + 7) >> 3
        end = self.pos + need
        if end > len(self.data):
            raise TruncatedStreamError("bitstream ended before all symbols were decoded")
        self.acc = (self.acc << (8 * need)) | int.from_bytes(self.data[self.pos:end], "big")
        self.pos = end
        self.n += 8 * need

    def get(self, nbits: int) -> int:
        if nbits == 0:
            return 0
        if self.n < nbits:
            self._fill(nbits)
        self.n -= nbits
        v = self.acc >> self.n
        self.acc &= (1 << self.n) - 1
        return v

    def unary(self, cap: int) -> int:
        """Count leading ones up to ``cap``; consumes the terminating zero if seen."""
        q = 0
        while q < cap:
            if self.n == 0:
                self._fill(1)
            self.n -= 1
            bit = (self.acc >> self.n) & 1
            self.acc &= (1 << self.n) - 1
            if not bit:
                return q
            q += 1
        return q


def _put_gr(w: _Writer, val: int, kr: int) -> int:
    q = val >> kr
    if q < ESCAPE:
        w.put((1 << (q + 1)) - 2, q + 1)
        w.put(val & ((1 << kr) - 1), kr)
    else:
        nb = val.bit_length()
        w.put((1 << ESCAPE) - 1, ESCAPE)
        w.put(nb, _LEN_BITS)
        w.put(val, nb)
    return q


def _get_gr(r: _Reader, kr: int) -> tuple[int, int]:
    q = r.unary(ESCAPE)
    if q < ESCAPE:
        val = (q << kr) | r.get(kr)
    else:
        val = r.get(r.get(_LEN_BITS))
        q = val >> kr
    return val, q


def _adapt_kr(krp: int, q: int) -> int:
    if q == 0:
        return max(krp - 2, 0)
    if q > 1:
        return min(krp + q, KPMAX)
    return krp


def encode(symbols) -> bytes:
    """Encode a sequence of signed integers."""
    u = zigzag(symbols)
    n = len(u)
    nonzero = np.flatnonzero(u).tolist()
    u = u.tolist()
    w = _Writer()
    kp, krp = K_INIT << LSGR, KR_INIT << LSGR
    i = 0
    nz = 0  # index into ``nonzero`` of the next nonzero at or after i
    while i < n:
        k = kp >> LSGR
        if k:
            while nz < len(nonzero) and nonzero[nz] < i:
                nz += 1
            stop = nonzero[nz] if nz < len(nonzero) else n
            run = stop - i
            while run >= (1 << k):
                w.put(0, 1)
                run -= 1 << k
                kp = min(kp + UP_GR, KPMAX)
                k = kp >> LSGR
            if stop == n:
                if run:
                    w.put(0, 1)
                break
            w.put(1, 1)
            w.put(run, k)
            q = _put_gr(w, u[stop] - 1, krp >> LSGR)
            krp = _adapt_kr(krp, q)
            kp = max(kp - DN_GR, 0)
            i = stop + 1
        else:
            val = u[i]
            q = _put_gr(w, val, krp >> LSGR)
            krp = _adapt_kr(krp, q)
            kp = min(kp + UQ_GR, KPMAX) if val == 0 else max(kp - DQ_GR, 0)
            i += 1
    return w.getvalue()


def decode(data: bytes, count: int) -> np.ndarray:
    """Decode exactly ``count`` signed integers."""
    if count < 0:
        raise ValueError("count must be non-negative")
    out = np.zeros(count, dtype=np.int64)
    r = _Reader(bytes(data))
    kp, krp = K_INIT << LSGR, KR_INIT << LSGR
    i = 0
    while i < count:
        k = kp >> LSGR
        if k:
            if r.get(1) == 0:
                i = min(i + (1 << k), count)
                kp = min(kp + UP_GR, KPMAX)
                continue
            i += r.get(k)
            val, q = _get_gr(r, krp >> LSGR)
            krp = _adapt_kr(krp, q)
            kp = max(kp - DN_GR, 0)
            if i >= count:
                raise TruncatedStreamError("zero run overflows the declared symbol count")
            out[i] = val + 1
            i += 1
        else:
            val, q = _get_gr(r, krp >> LSGR)
            krp = _adapt_kr(krp, q)
            kp = min(kp + UQ_GR, KPMAX) if val == 0 else max(kp - DQ_GR, 0)
            out[i] = val
            i += 1
    return unzigzag(out)
