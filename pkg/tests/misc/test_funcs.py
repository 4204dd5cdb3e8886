from pathlib import Path

import numpy as np
import pytest

from fxy.misc.funcs import (
    canonical_json,
    get_incremental_path,
    get_path,
    set_path,
    stable_hash,
)


def test_canonical_json_and_hash():
    assert canonical_json({"b": 1, "a": [1.5, 2]}) == b'{"a":[1.5,2],"b":1}'
    assert stable_hash({"b": 1, "a": 2}) == stable_hash({"a": 2, "b": 1})
    assert stable_hash({"a": 1}) != stable_hash({"a": 2})
    assert canonical_json({"x": np.array([1.0, 2.0])}) == b'{"x":[1.0,2.0]}'


def test_paths():
    record = {"couplings": [{"phi_blue": 0.0}, {"phi_blue": 1.0}]}
    assert get_path(record, "couplings.1.phi_blue") == 1.0
    set_path(record, "couplings.0.phi_blue", 2.5)
    assert record["couplings"][0]["phi_blue"] == 2.5
    with pytest.raises(KeyError):
        set_path(record, "couplings.0.phi_green", 1.0)
    with pytest.raises(IndexError):
        get_path(record, "couplings.2.phi_blue")


def test_incremental_path(tmp_path: Path):
    assert get_incremental_path(tmp_path / "fig2b") == tmp_path / "fig2b_01"
    assert get_incremental_path(tmp_path / "fig2b") == tmp_path / "fig2b_02"
    assert (tmp_path / "fig2b_02").is_dir()
    assert get_incremental_path(tmp_path / "other", create_if_missing=False) == tmp_path / "other_01"
    assert not (tmp_path / "other_01").exists()
