"""Number formatting and deterministic file output."""

import math

from errwlab import __version__
from errwlab.reporting import (config_header, format_number, json_object,
                               write_csv, write_jsonl)


def test_format_integers():
    assert format_number(0) == "0"
    assert format_number(-12) == "-12"
    assert format_number(10 ** 15) == "1000000000000000"


def test_format_floats_shortest_roundtrip():
    assert format_number(0.1) == "0.1"
    assert format_number(1.5) == "1.5"
    assert format_number(2.0) == "2"
    assert format_number(-0.25) == "-0.25"


def test_format_floats_capped_at_12_digits():
    assert format_number(1 / 3) == "0.333333333333"
    assert format_number(2 / 3) == "0.666666666667"
    assert format_number(0.6825694503308578) == "0.682569450331"


def test_format_handles_non_finite():
    assert format_number(math.nan) == "nan"
    assert format_number(math.inf) == "inf"
    assert format_number(-math.inf) == "-inf"


def test_format_booleans():
    assert format_number(True) == "true"
    assert format_number(False) == "false"


def test_json_object_order_and_types():
    s = json_object([("b", 1), ("a", 0.5), ("s", 'x"y'), ("n", None),
                     ("t", True), ("seq", (1, 2.5))])
    assert s == '{"b": 1, "a": 0.5, "s": "x\\"y", "n": null, ' \
                '"t": true, "seq": [1, 2.5]}'


def test_config_header_contains_version():
    line = config_header({"seed": 3})
    assert line.startswith(f"# errwlab {__version__} | ")
    assert '"seed": 3' in line


def test_write_csv_bytes(tmp_path):
    p = tmp_path / "out.csv"
    write_csv(p, ("a", "b"), [(1, 0.5), (2, 1 / 3)], {"seed": 1})
    text = p.read_text()
    lines = text.splitlines()
    assert lines[0].startswith("# errwlab")
    assert lines[1] == "a,b"
    assert lines[2] == "1,0.5"
    assert lines[3] == "2,0.333333333333"
    # repeat writes are byte-identical
    write_csv(tmp_path / "out2.csv", ("a", "b"), [(1, 0.5), (2, 1 / 3)],
              {"seed": 1})
    assert (tmp_path / "out2.csv").read_bytes() == p.read_bytes()


def test_write_jsonl_parses_back(tmp_path):
    import json
    p = tmp_path / "out.jsonl"
    write_jsonl(p, [[("x", 1), ("y", 0.25)], [("x", 2), ("y", None)]],
                {"seed": 2})
    lines = p.read_text().splitlines()
    assert lines[0].startswith("# errwlab")
    assert json.loads(lines[1]) == {"x": 1, "y": 0.25}
    assert json.loads(lines[2]) == {"x": 2, "y": None}
