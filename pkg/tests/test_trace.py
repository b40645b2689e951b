import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from erlsmc.harness.trace import FIELDS, Trace, TraceIOError, export_csv, read_csv


def make_trace(n, seed=0):
    rng = np.random.default_rng(seed)
    data = {f: rng.normal(scale=100.0, size=n) for f in FIELDS}
    data["t"] = np.arange(n) * 2e-4
    return Trace(data, {"mode": "speed"})


def test_header_and_column_count(tmp_path):
    path = export_csv(make_trace(5), tmp_path / "a.csv")
    lines = path.read_text().splitlines()
    assert lines[0].split(",") == list(FIELDS)
    assert len(lines) == 6
    assert all(len(line.split(",")) == len(FIELDS) for line in lines)


def test_empty_trace_gives_header_only(tmp_path):
    path = export_csv(Trace.from_rows([]), tmp_path / "e.csv")
    assert path.read_text() == ",".join(FIELDS) + "\n"
    assert len(read_csv(path)) == 0


def test_round_trip_is_stable_at_nine_digits(tmp_path):
    tr = make_trace(50)
    first = export_csv(tr, tmp_path / "a.csv")
    back = read_csv(first)
    for f in FIELDS:
        np.testing.assert_allclose(back[f], tr[f], rtol=1e-8, atol=0)
    second = export_csv(back, tmp_path / "b.csv")
    assert first.read_bytes() == second.read_bytes()
    again = read_csv(second)
    for f in FIELDS:
        assert np.array_equal(again[f], back[f])


def test_io_errors_carry_path(tmp_path):
    with pytest.raises(TraceIOError, match="nope"):
        export_csv(make_trace(2), tmp_path / "nope" / "x.csv")
    with pytest.raises(TraceIOError, match="missing"):
        read_csv(tmp_path / "missing.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(TraceIOError):
        read_csv(bad)


def test_trace_validation():
    with pytest.raises(ValueError):
        Trace({"t": np.zeros(2)})
    data = {f: np.zeros(3) for f in FIELDS}
    data["Te"] = np.zeros(2)
    with pytest.raises(ValueError):
        Trace(data)


@given(st.lists(st.floats(-1e12, 1e12, allow_nan=False), min_size=1, max_size=20))
def test_nine_digit_round_trip_is_idempotent(values):
    from erlsmc.harness.trace import FLOAT_FORMAT
    once = float(FLOAT_FORMAT.format(values[0]))
    assert float(FLOAT_FORMAT.format(once)) == once
