import json

import numpy as np
import pytest

from conftest import crandn
from xdecomp import fixtures
from xdecomp.decompose import DecompositionResult
from xdecomp.io import (
    FormatError,
    decomposition_to_json,
    load_tensor,
    load_variety,
    multiway_from_json,
    multiway_to_json,
    save_json,
    tensor_from_json,
    tensor_to_json,
    variety_from_json,
    variety_to_json,
)
from xdecomp.tensor import Decomposition, SymTensor


def test_tensor_round_trip(rng, tmp_path):
    A = SymTensor(2, 3, crandn(rng, 10))
    save_json(tensor_to_json(A), tmp_path / "a.json")
    assert np.array_equal(load_tensor(tmp_path / "a.json").data, A.data)


def test_missing_entries_are_zero():
    A = tensor_from_json({"n": 1, "d": 2, "entries": [{"alpha": [1], "re": 2}]})
    assert list(A.data) == [0, 2, 0]


@pytest.mark.parametrize("obj", [
    {"n": 1, "d": 2},
    {"n": 1, "d": 2, "entries": [{"alpha": [3], "re": 1}]},
    {"n": 1, "d": 2, "entries": [{"alpha": [1, 0], "re": 1}]},
    {"n": 1, "d": 2, "entries": [{"alpha": [1], "re": 1}, {"alpha": [1], "re": 2}]},
])
def test_bad_tensor_json(obj):
    with pytest.raises(FormatError):
        tensor_from_json(obj)


def test_invalid_json_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(FormatError):
        load_tensor(p)


def test_variety_round_trip(tmp_path):
    X = fixtures.load_variety("monkey_saddle")
    save_json(variety_to_json(X), tmp_path / "x.json")
    Y = load_variety(tmp_path / "x.json")
    assert Y.generators_h == X.generators_h and Y.dimX == X.dimX


def test_variety_missing_n():
    with pytest.raises(FormatError):
        variety_from_json({"generators": []})


def test_multiway_round_trip(rng):
    T = crandn(rng, 3, 3, 3)
    assert np.array_equal(multiway_from_json(json.loads(json.dumps(multiway_to_json(T)))), T)


def test_multiway_size_checked():
    with pytest.raises(FormatError):
        multiway_from_json({"k": 2, "d": 2, "entries": [[1, 0]] * 8})


def test_decomposition_json_fields():
    D = Decomposition(3, [2.0, -1.0], [[1, 2], [0, 1]])
    res = DecompositionResult(D, 2, 0.0, 1e-15, 1e-16, 0.0, True)
    out = decomposition_to_json(res, seed=7)
    assert set(out) == {"rank", "lambdas", "points", "abs_error", "rel_error", "variety_violation", "seed"}
    assert out["rank"] == 2 and out["seed"] == 7
    assert out["lambdas"][0] == [2.0, 0.0]
    assert out["points"][0] == [[1.0, 0.0], [2.0, 0.0]]


def test_decomposition_json_marks_infinity():
    D = Decomposition(3, [1.0], [[1.0]], [0.0])
    out = decomposition_to_json(DecompositionResult(D, 1, 0, 0, 0, 0, True))
    assert out["leads"] == [[0.0, 0.0]]


def test_fixture_listing():
    names = fixtures.names()
    assert "parabola" in names and "segre_small" in names
    with pytest.raises(KeyError):
        fixtures.load("no_such_fixture")
