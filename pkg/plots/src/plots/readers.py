"""Readers for the assimilation package's on-disk formats.

Deliberately self-contained: both parsers are written from the format
documentation, not imported from the producer, so they check the
producer's output instead of agreeing with it by construction.

ENSF1 layout, little-endian throughout:

    bytes 0-4   magic "ENSF1"
    byte  5     variant code (0 scalar, 1 ns, 2 ac)
    byte  6     number of arrays (1-255)
    byte  7     reserved, must be zero
    bytes 8-15  simulation time, f64
    per array:  u8 rank (1-4), rank x u32 dims, f64 payload row-major

Diagnostics CSV: header `step,time,...`, one row per filter step,
floats as printed by Python's repr.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"ENSF1"
VARIANTS = ("scalar", "ns", "ac")
_MAX_RANK = 4


class ParseError(ValueError):
    """Malformed input; says which file and at what byte offset."""

    def __init__(self, path, offset, why):
        self.path = str(path)
        self.offset = int(offset)
        super().__init__("%s: %s at byte offset %d" % (path, why, offset))


@dataclass(frozen=True)
class FieldSnapshot:
    variant: str
    time: float
    arrays: tuple


def read_ensf1(path) -> FieldSnapshot:
    data = Path(path).read_bytes()

    def fail(off, why):
        raise ParseError(path, off, why)

    if len(data) < 16:
        fail(len(data), "file shorter than the 16-byte header")
    if data[:5] != MAGIC:
        fail(0, "bad magic %r" % data[:5])
    code, count, reserved = data[5], data[6], data[7]
    if code >= len(VARIANTS):
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
        arrays.append(
            np.frombuffer(data, dtype="<f8", count=n, offset=off)
            .reshape(dims.astype(np.int64))
            .copy()
        )
        off += 8 * n
    if off != len(data):
        fail(off, "%d trailing bytes" % (len(data) - off))
    return FieldSnapshot(variant=VARIANTS[code], time=time, arrays=tuple(arrays))


def read_series_csv(path):
    """Diagnostics table as {column name: float array}.

    Offsets in errors point at the start of the offending line; the
    files are plain comma-separated with no quoting, so lines are the
    natural unit of blame.
    """
    data = Path(path).read_bytes()
    lines = data.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    if not lines:
        raise ParseError(path, 0, "empty file")

    offsets = []
    pos = 0
    for ln in lines:
        offsets.append(pos)
        pos += len(ln) + 1

    try:
        header = lines[0].decode("ascii").split(",")
    except UnicodeDecodeError:
        raise ParseError(path, 0, "header is not ASCII") from None
    if header[:2] != ["step", "time"] or len(set(header)) != len(header):
        raise ParseError(path, 0, "header must be step,time,... with unique names")

    columns = [[] for _ in header]
    for i, ln in enumerate(lines[1:], start=1):
        cells = ln.split(b",")
        if len(cells) != len(header):
            raise ParseError(
                path, offsets[i], "row has %d cells, header has %d" % (len(cells), len(header))
            )
        for col, cell in zip(columns, cells):
            try:
                col.append(float(cell))
            except ValueError:
                raise ParseError(
                    path, offsets[i], "cell %r is not a number" % cell.decode("ascii", "replace")
                ) from None
    if not columns[0]:
        raise ParseError(path, offsets[0], "no data rows")
    return {name: np.array(col) for name, col in zip(header, columns)}
