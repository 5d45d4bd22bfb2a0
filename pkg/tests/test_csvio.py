import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entlab import csvio
from entlab.metricspace import CoverKind


def test_header_and_hash(tmp_path):
    text = csvio.write_csv(tmp_path / "a.csv", ["x", "y"], [(1, 2.5)], {"k": 1})
    lines = (tmp_path / "a.csv").read_text().splitlines()
    assert lines[0] == f"# config-hash: {csvio.config_hash({'k': 1})}"
    assert lines[1:] == ["x,y", "1,2.5"]
    assert text == (tmp_path / "a.csv").read_text()


def test_hash_ignores_key_order():
    assert csvio.config_hash({"a": 1, "b": [1, 2]}) == csvio.config_hash({"b": [1, 2], "a": 1})
    assert csvio.config_hash({"a": 1}) != csvio.config_hash({"a": 2})


@pytest.mark.parametrize("v,s", [(True, "true"), (np.bool_(False), "false"), (math.inf, "inf"),
                                 (-math.inf, "-inf"), (math.nan, "nan"), (np.int64(3), "3"),
                                 (CoverKind.EXACT, "EXACT"), (0.35, "0.35")])
def test_fmt(v, s):
    assert csvio.fmt(v) == s


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_round_trip(x):
    assert float(csvio.fmt(x)) == x


def test_read_points_with_header(tmp_path):
    p = tmp_path / "p.csv"
    p.write_text("# note\nx1,x2\n0,1\n2,3\n")
    assert csvio.read_points(p).tolist() == [[0, 1], [2, 3]]


def test_read_sequence_indexed(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("n,value\n1,0.5\n2,0.25\n")
    assert csvio.read_sequence(p).values.tolist() == [0.5, 0.25]
    p.write_text("n,value\n2,0.5\n3,0.25\n")
    with pytest.raises(ValueError, match="column n"):
        csvio.read_sequence(p)


def test_read_table_square(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("0,1,2\n1,0,1\n")
    with pytest.raises(ValueError, match="square"):
        csvio.read_table(p)


def test_ragged_rows(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("1,2\n3\n")
    with pytest.raises(ValueError, match="fields"):
        csvio.read_points(p)


def test_non_numeric(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("x\n1\nabc\n")
    with pytest.raises(ValueError):
        csvio.read_points(p)


def test_profile(tmp_path):
    p = tmp_path / "pr.csv"
    p.write_text("epsilon,count\n0.5,1\n0.25,2\n")
    assert csvio.read_profile(p).counts.tolist() == [1, 2]
