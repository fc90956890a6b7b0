import struct

import numpy as np
import pytest

from ensf.rng import stream
from ensf.snapshots import Snapshot, read_snapshot, write_snapshot


def test_golden_bytes(tmp_path):
    # hand-assembled file: magic, variant, count, pad, time, then one
    # rank-2 array with u32 dims and little-endian f64 payload
    arr = np.array([[1.5, -2.0], [0.25, 3e-300]])
    p = tmp_path / "x.ensf1"
    write_snapshot(p, Snapshot(variant="scalar", time=0.5, arrays=(arr,)))
    expect = (
        b"ENSF1"
        + bytes([0, 1, 0])
        + struct.pack("<d", 0.5)
        + bytes([2])
        + struct.pack("<II", 2, 2)
        + struct.pack("<4d", 1.5, -2.0, 0.25, 3e-300)
    )
    assert p.read_bytes() == expect


def test_roundtrip_bits(tmp_path):
    rng = stream(11)
    arr = rng.standard_normal((7, 5))
    arr[0, 0] = -0.0
    arr[1, 1] = 5e-324  # smallest subnormal
    p = tmp_path / "r.ensf1"
    write_snapshot(p, Snapshot(variant="scalar", time=1.25, arrays=(arr,)))
    back = read_snapshot(p)
    assert back.variant == "scalar"
    assert back.time == 1.25
    assert len(back.arrays) == 1
    assert back.arrays[0].tobytes() == arr.tobytes()


def test_ns_three_arrays(tmp_path):
    rng = stream(12)
    u = rng.standard_normal((8, 8))
    v = rng.standard_normal((8, 9))
    q = np.array([0.997])
    p = tmp_path / "ns.ensf1"
    write_snapshot(p, Snapshot(variant="ns", time=0.1, arrays=(u, v, q)))
    back = read_snapshot(p)
    assert back.variant == "ns"
    assert [a.shape for a in back.arrays] == [(8, 8), (8, 9), (1,)]
    for a, b in zip(back.arrays, (u, v, q)):
        assert np.array_equal(a, b)


def test_bad_magic(tmp_path):
    p = tmp_path / "bad.ensf1"
    p.write_bytes(b"JUNK!" + bytes(32))
    with pytest.raises(ValueError, match="magic"):
        read_snapshot(p)


def test_truncated_payload(tmp_path):
    arr = np.ones((4, 4))
    p = tmp_path / "t.ensf1"
    write_snapshot(p, Snapshot(variant="ac", time=0.0, arrays=(arr,)))
    data = p.read_bytes()
    p.write_bytes(data[:-8])
    with pytest.raises(ValueError, match="offset"):
        read_snapshot(p)


def test_trailing_garbage(tmp_path):
    arr = np.ones(3)
    p = tmp_path / "g.ensf1"
    write_snapshot(p, Snapshot(variant="scalar", time=0.0, arrays=(arr,)))
    p.write_bytes(p.read_bytes() + b"\x00")
    with pytest.raises(ValueError, match="trailing"):
        read_snapshot(p)


def test_unknown_variant_write():
    with pytest.raises(ValueError, match="variant"):
        Snapshot(variant="tensor", time=0.0, arrays=(np.ones(2),))


def test_unknown_variant_code(tmp_path):
    arr = np.ones(2)
    p = tmp_path / "v.ensf1"
    write_snapshot(p, Snapshot(variant="scalar", time=0.0, arrays=(arr,)))
    data = bytearray(p.read_bytes())
    data[5] = 9
    p.write_bytes(bytes(data))
    with pytest.raises(ValueError, match="variant"):
        read_snapshot(p)


def test_no_arrays_rejected():
    with pytest.raises(ValueError, match="array"):
        Snapshot(variant="scalar", time=0.0, arrays=())


def test_preserves_1d_and_3d(tmp_path):
    a = np.arange(6, dtype=np.float64)
    b = stream(4).standard_normal((2, 3, 4))
    p = tmp_path / "m.ensf1"
    write_snapshot(p, Snapshot(variant="ac", time=2.0, arrays=(a, b)))
    back = read_snapshot(p)
    assert back.arrays[0].shape == (6,)
    assert back.arrays[1].shape == (2, 3, 4)
    assert np.array_equal(back.arrays[1], b)
