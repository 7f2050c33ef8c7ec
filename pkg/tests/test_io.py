import json
import math
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudospec import serialization as io_
from pseudospec.svg import Figure, _nice_ticks, padded_limits

finite = st.floats(allow_nan=False, allow_infinity=False)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(finite, finite, st.integers(-(10**12), 10**12)), min_size=1, max_size=20))
def test_csv_round_trip_is_lossless(tmp_path_factory, rows):
    path = tmp_path_factory.mktemp("csv") / "t.csv"
    cfg = {"c": 1 + 5j, "levels": [0.1, 1e-12], "seed": 3}
    io_.write_csv(path, "demo", cfg, ["a", "b", "k"], rows)
    table = io_.read_csv(path)
    assert table.schema == "demo" and table.version == 1
    assert table.config == {"c": [1.0, 5.0], "levels": [0.1, 1e-12], "seed": 3}
    assert table.columns == ["a", "b", "k"] and len(table) == len(rows)
    for k, col in enumerate("abk"):
        np.testing.assert_array_equal(table[col], [float(r[k]) for r in rows])


def test_csv_header_lines(tmp_path):
    path = io_.write_csv(tmp_path / "x.csv", "spectrum", {"N": 200}, ["re", "im"], [(0.1, True)], version=2)
    lines = path.read_text().splitlines()
    assert lines[0] == "# schema: pseudospec.spectrum/2"
    assert lines[1] == '# config: {"N": 200}'
    assert lines[2:] == ["re,im", "0.1,1"]


def test_read_csv_rejects_missing_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        io_.read_csv(p)


@given(st.dictionaries(st.text(min_size=1, max_size=5), st.one_of(finite, st.integers(), st.booleans()), max_size=6))
def test_json_round_trip(doc):
    text = io_.dumps_json(doc)
    assert json.loads(text) == {str(k): v for k, v in doc.items()}


def test_json_special_values(tmp_path):
    doc = {"z": np.complex128(1 - 2j), "inf": math.inf, "nan": float("nan"), "arr": np.arange(3), "b": np.bool_(True)}
    path = io_.write_json(tmp_path / "s.json", "demo", doc, version=3)
    back = io_.read_json(path)
    assert back == {"z": [1.0, -2.0], "inf": "inf", "nan": "nan", "arr": [0, 1, 2], "b": True,
                    "schema": "pseudospec.demo", "schema_version": 3}  # fmt: skip
    assert list(back) == sorted(back)


def test_atomic_write_leaves_no_temp_files(tmp_path):
    target = tmp_path / "sub" / "f.txt"
    io_.atomic_write(target, "one")
    io_.atomic_write(target, "two")
    assert target.read_text() == "two"
    assert os.listdir(target.parent) == ["f.txt"]


def test_atomic_write_failure_keeps_old_file(tmp_path, monkeypatch):
    target = tmp_path / "f.txt"
    io_.atomic_write(target, "old")

    def boom(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(OSError):
        io_.atomic_write(target, "new")
    assert target.read_text() == "old"
    assert os.listdir(tmp_path) == ["f.txt"]


def test_svg_is_self_contained_and_deterministic():
    def make():
        fig = Figure((0, 10), (-1, 1), "t<1>", "x", "y")
        fig.polyline([0, 5, 10], [0, 1, -1], "#123456", dash="2 2")
        fig.scatter([1, 2], [0.5, -0.5], marker="cross")
        fig.scatter([3], [0.0])
        fig.legend([("a&b", "#000")])
        return fig.render({"config": {"seed": 1}})

    a, b = make(), make()
    assert a == b
    assert a.startswith('<?xml version="1.0"')
    assert "<metadata>" in a and "href" not in a
    assert "t&lt;1&gt;" in a and "a&amp;b" in a


def test_ticks_and_limits():
    assert _nice_ticks(0, 10) == [0, 2, 4, 6, 8, 10]
    assert padded_limits([1.0, 1.0]) == (0.45, 1.55)
    assert padded_limits([math.nan]) == (0.0, 1.0)
