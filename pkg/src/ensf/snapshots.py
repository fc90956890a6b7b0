"""Self-describing binary field snapshots.

Layout, all little-endian:

    bytes 0-4   magic "ENSF1"
    byte  5     variant code (0 scalar, 1 ns, 2 ac)
    byte  6     number of arrays
    byte  7     reserved, zero
    bytes 8-15  simulation time, f64
    per array:  u8 rank, rank x u32 dims, then f64 payload row-major

The format stores raw float64 bit patterns, so a write/read cycle is
exact, not just close.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

_VARIANTS = ("scalar", "ns", "ac")
_MAGIC = b"ENSF1"
_MAX_RANK = 4


@dataclass(frozen=True)
class Snapshot:
    variant: str
    time: float
    arrays: tuple

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValueError(
                "variant must be one of %s, got %r" % (", ".join(_VARIANTS), self.variant)
            )
        arrays = tuple(np.ascontiguousarray(a, dtype=np.float64) for a in self.arrays)
        if not arrays:
            raise ValueError("a snapshot needs at least one array")
        if len(arrays) > 255:
            raise ValueError("too many arrays (max 255)")
        for a in arrays:
            if a.ndim == 0 or a.ndim > _MAX_RANK:
                raise ValueError("array rank must be 1..%d, got %d" % (_MAX_RANK, a.ndim))
        object.__setattr__(self, "arrays", arrays)


def write_snapshot(path, snap: Snapshot) -> None:
    parts = [
        _MAGIC,
        bytes([_VARIANTS.index(snap.variant), len(snap.arrays), 0]),
        struct.pack("<d", float(snap.time)),
    ]
    for a in snap.arrays:
        parts.append(bytes([a.ndim]))
        parts.append(np.asarray(a.shape, dtype="<u4").tobytes())
        parts.append(a.astype("<f8", copy=False).tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


def read_snapshot(path) -> Snapshot:
    with open(path, "rb") as fh:
        data = fh.read()

    def fail(off, why):
        raise ValueError("%s: %s at byte offset %d" % (path, why, off))

    if len(data) < 16:
        fail(len(data), "file shorter than header")
    if data[:5] != _MAGIC:
        fail(0, "bad magic %r" % data[:5])
    code, count, reserved = data[5], data[6], data[7]
    if code >= len(_VARIANTS):
        fail(5, "unknown variant code %d" % code)
    if count == 0:
        fail(6, "zero arrays")
    if reserved != 0:
        fail(7, "reserved byte is %d" % reserved)
    (time,) = struct.unpack_from("<d", data, 8)
    off = 16
    arrays = []
    for _ in range(count):
        if off + 1 > len(data):
            fail(off, "truncated before array rank")
        rank = data[off]
        off += 1
        if not (1 <= rank <= _MAX_RANK):
            fail(off - 1, "bad rank %d" % rank)
        if off + 4 * rank > len(data):
            fail(off, "truncated inside dims")
        dims = np.frombuffer(data, dtype="<u4", count=rank, offset=off)
        off += 4 * rank
        n = int(np.prod(dims.astype(np.int64)))
        if off + 8 * n > len(data):
            fail(off, "truncated payload, want %d floats" % n)
        arr = np.frombuffer(data, dtype="<f8", count=n, offset=off).reshape(dims)
        off += 8 * n
        arrays.append(arr.copy())
    if off != len(data):
        fail(off, "%d trailing bytes" % (len(data) - off))
    return Snapshot(variant=_VARIANTS[code], time=time, arrays=tuple(arrays))
