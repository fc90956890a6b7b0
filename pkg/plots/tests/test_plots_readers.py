"""Reader tests, including the bit-exact round trip on producer output.

The encoder used here is written from the format documentation inside
the test file, so agreement with the bundled runner-written fixture is
evidence about the documented layout, not about one implementation
matching itself.
"""

import math
import struct
from importlib import resources

import numpy as np
import pytest

from plots.readers import ParseError, read_ensf1, read_series_csv

MINI = resources.files("plots") / "fixtures" / "mini"


def encode(variant_code, time, arrays):
    out = [b"ENSF1", bytes([variant_code, len(arrays), 0]), struct.pack("<d", time)]
    for a in arrays:
        a = np.asarray(a, dtype="<f8")
        out.append(bytes([a.ndim]))
        out.append(np.asarray(a.shape, dtype="<u4").tobytes())
        out.append(a.tobytes())
    return b"".join(out)


class TestRoundTrip:
    def test_bit_exact_payload(self, tmp_path):
        arrays = [
            np.array([[math.pi, 1.0 / 3.0, 5e-324], [1e308, -0.0, 2.0**-1022]]),
            np.linspace(-1, 1, 5) * 0.1,
        ]
        p = tmp_path / "x.ensf1"
        p.write_bytes(encode(1, 0.1 + 0.2, arrays))
        snap = read_ensf1(p)
        assert snap.variant == "ns"
        assert struct.pack("<d", snap.time) == struct.pack("<d", 0.1 + 0.2)
        for a, b in zip(arrays, snap.arrays):
            assert a.shape == b.shape
            assert a.tobytes() == b.tobytes()

    @pytest.mark.parametrize("name", ["truth_00006.ensf1", "mean_00006.ensf1"])
    def test_runner_written_fixture_reencodes_identically(self, name):
        raw = (MINI / name).read_bytes()
        snap = read_ensf1(MINI / name)
        code = {"scalar": 0, "ns": 1, "ac": 2}[snap.variant]
        assert encode(code, snap.time, list(snap.arrays)) == raw

    def test_negative_zero_survives(self, tmp_path):
        p = tmp_path / "z.ensf1"
        p.write_bytes(encode(0, 0.0, [np.array([-0.0])]))
        val = read_ensf1(p).arrays[0][0]
        assert math.copysign(1.0, val) == -1.0


def valid_buffer():
    return encode(2, 1.5, [np.arange(6.0).reshape(2, 3)])


class TestSnapshotErrors:
    @pytest.mark.parametrize(
        "mangle,offset,phrase",
        [
            (lambda b: b"XNSF1" + b[5:], 0, "magic"),
            (lambda b: b[:5] + bytes([9]) + b[6:], 5, "variant"),
            (lambda b: b[:6] + bytes([0]) + b[7:], 6, "zero arrays"),
            (lambda b: b[:7] + bytes([3]) + b[8:], 7, "reserved"),
            (lambda b: b[:16] + bytes([0]) + b[17:], 16, "rank"),
            (lambda b: b[:12], 12, "header"),
            (lambda b: b[:20], 17, "dims"),
            (lambda b: b[:-8], 25, "payload"),
            (lambda b: b + b"!", 73, "trailing"),
        ],
    )
    def test_offset_and_message(self, tmp_path, mangle, offset, phrase):
        p = tmp_path / "bad.ensf1"
        p.write_bytes(mangle(valid_buffer()))
        with pytest.raises(ParseError) as err:
            read_ensf1(p)
        assert err.value.offset == offset
        assert phrase in str(err.value)
        assert str(p) in str(err.value)

    def test_dims_overflow_is_truncation_not_crash(self, tmp_path):
        buf = bytearray(valid_buffer())
        buf[17:21] = struct.pack("<I", 2**31)  # absurd first dim
        p = tmp_path / "huge.ensf1"
        p.write_bytes(bytes(buf))
        with pytest.raises(ParseError, match="payload"):
            read_ensf1(p)


class TestSeriesCsv:
    def test_reads_fixture_columns(self):
        table = read_series_csv(MINI / "ensf.csv")
        assert list(table) == ["step", "time", "rmse", "mass"]
        assert len(table["time"]) == 7  # initial row plus six steps
        assert table["step"][0] == 0.0
        assert np.all(np.isfinite(table["rmse"]))

    def test_repr_floats_survive(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("step,time,rmse\n0,0.0,%r\n1,0.1,%r\n" % (0.1 + 0.2, 1e-17))
        t = read_series_csv(p)
        assert t["rmse"][0].hex() == (0.1 + 0.2).hex()
        assert t["rmse"][1] == 1e-17

    def test_bad_cell_names_line_offset(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_bytes(b"step,time,rmse\n0,0.0,1.0\n1,0.1,oops\n")
        with pytest.raises(ParseError) as err:
            read_series_csv(p)
        assert err.value.offset == 25
        assert "oops" in str(err.value)

    def test_ragged_row_rejected(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_bytes(b"step,time,rmse\n0,0.0\n")
        with pytest.raises(ParseError) as err:
            read_series_csv(p)
        assert err.value.offset == 15

    def test_header_must_lead_with_step_time(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_bytes(b"time,step,rmse\n0,0.0,1.0\n")
        with pytest.raises(ParseError, match="step,time"):
            read_series_csv(p)

    def test_no_rows_rejected(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_bytes(b"step,time,rmse\n")
        with pytest.raises(ParseError, match="no data rows"):
            read_series_csv(p)
