import json

import numpy as np
import pandas as pd
import pytest

from core_groups import BigOrder
from utils import (
    dataframe_to_markdown, dumps, is_sidon, load_schema, mian_chowla, powers_of_two, schema_errors, sidon_collision,
    stopwatch,
)


class TestSidon:
    def test_mian_chowla_prefix(self):
        assert mian_chowla(8) == [1, 2, 4, 8, 13, 21, 31, 45]

    def test_powers_of_two(self):
        assert powers_of_two(4) == [2, 4, 8, 16]
        assert is_sidon(powers_of_two(10))

    @pytest.mark.parametrize("values, modulus, expected", [
        ([1, 2, 4, 8, 13, 21], None, True),
        ([1, 2, 4, 8, 13, 21], 41, True),
        ([1, 2, 4, 8, 13, 21], 37, False),
        ([1, 2, 3], None, False),
        ([1, 1], None, False),
        ([0, 5], 5, False),
    ])
    def test_is_sidon(self, values, modulus, expected):
        assert is_sidon(values, modulus) is expected

    def test_collision_witness(self):
        (a, b), (c, d) = sidon_collision([1, 2, 3])
        assert a - b == c - d


class TestSerialization:
    def test_big_integers_become_strings(self):
        data = json.loads(dumps({"order": 60 ** 82 * 82, "small": 12}))
        assert data["order"] == str(60 ** 82 * 82)
        assert data["small"] == 12

    def test_numpy_and_frames(self):
        frame = pd.DataFrame([{"a": np.int64(3), "b": True}])
        data = json.loads(dumps({"x": np.float64(0.5), "flag": np.bool_(True), "table": frame}))
        assert data == {"x": 0.5, "flag": True, "table": [{"a": 3, "b": True}]}

    def test_to_json_objects(self):
        assert json.loads(dumps({"order": BigOrder()})) == {"order": "infinite/unknown"}

    def test_sorted_keys(self):
        assert dumps({"b": 1, "a": 2}).index('"a"') < dumps({"b": 1, "a": 2}).index('"b"')


def test_markdown_table():
    text = dataframe_to_markdown(pd.DataFrame([{"p": 2, "gap": 0.5}]))
    header, separator = text.splitlines()[:2]
    assert header.startswith("|") and "p" in header and "gap" in header
    assert set(separator) <= set("|-:")
    assert dataframe_to_markdown(pd.DataFrame()) == "_(vide)_"


def test_stopwatch():
    with stopwatch() as timer:
        sum(range(1000))
    assert timer["ms"] >= 0.0


@pytest.mark.parametrize("name", ["config", "report"])
def test_shipped_schemas_load(name):
    assert load_schema(name).schema["additionalProperties"] is False


def test_schema_errors_are_sorted_paths():
    errors = schema_errors({"jobs": 0, "caps": {"ball": -1}}, "config")
    assert [error.split(" : ")[0] for error in errors] == ["caps.ball", "jobs"]
