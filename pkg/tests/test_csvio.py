import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from musclesim.csvio import Table, read_csv, write_csv
from musclesim.errors import MuscleSimError

finite = st.floats(allow_nan=False, allow_infinity=False)


@given(st.lists(st.tuples(finite, finite), min_size=1, max_size=20))
def test_round_trip_is_lossless(tmp_path_factory, rows):
    path = tmp_path_factory.mktemp("csv") / "t.csv"
    write_csv(path, Table(["time", "x"], [list(r) for r in rows]))
    back = read_csv(path)
    assert back.header == ["time", "x"]
    for a, b in zip(rows, back.rows):
        assert all(math.copysign(1, x) == math.copysign(1, y) and x == y for x, y in zip(a, b))


def test_strings_pass_through(tmp_path):
    write_csv(tmp_path / "c.csv", Table(["curve", "x"], [["fv", 0.1]]))
    assert read_csv(tmp_path / "c.csv").rows == [["fv", 0.1]]


def test_header_required(tmp_path):
    (tmp_path / "e.csv").write_text("")
    with pytest.raises(MuscleSimError):
        read_csv(tmp_path / "e.csv")


def test_ragged_rows_rejected():
    with pytest.raises(MuscleSimError):
        Table(["a", "b"], [[1.0]])
