import json

import pytest

from uie.utils import (
    parse_pair, parse_grid, parse_floats, write_csv, write_json, read_json, load_yaml, ConfigurationError
)
from tests.utils import get_input, get_output


def test_parsers():
    assert parse_pair("160,160") == (160, 160)
    assert parse_grid("40x30") == (40, 30)
    assert parse_floats("0.5:3.0:0.1")[:3] == [0.5, 0.6, 0.7]
    assert len(parse_floats("0.5:3.0:0.1")) == 26
    assert parse_floats("0.05:0.3:0.05")[-1] == 0.3
    assert parse_floats([1, 2]) == [1.0, 2.0]
    with pytest.raises(ValueError):
        parse_pair("1,2,3")
    with pytest.raises(ValueError):
        parse_grid("40")
    with pytest.raises(ValueError):
        parse_floats("1:2:0")


def test_write_csv_creates_directories():
    target = get_output("tables/out.csv")
    write_csv(target, ["a", "b"], [[1, 0.5], ["x", float("nan")]])
    with open(target) as handle:
        assert handle.read() == "a,b\n1,0.500000\nx,nan\n"


def test_write_json_is_versioned(capsys):
    write_json(None, {"b": 1, "a": [1, 2]})
    document = json.loads(capsys.readouterr().out)
    assert document == {"version": 1, "a": [1, 2], "b": 1}
    target = get_output("doc.json")
    write_json(target, {"a": 1})
    assert read_json(target) == {"version": 1, "a": 1}


def test_load_yaml(tmp_path):
    assert load_yaml(get_input("experiment.yaml")[0])["alpha"] == 0.3
    empty = tmp_path / "empty.yaml"
    empty.write_text("")
    assert load_yaml(str(empty)) == {}
    listing = tmp_path / "list.yaml"
    listing.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigurationError):
        load_yaml(str(listing))
