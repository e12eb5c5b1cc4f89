import json

import numpy as np
import pytest

from reference import brute_contract, brute_polyval, dense_of
from qtensor import (
    DimensionMismatch,
    Tensor,
    TensorFormatError,
    contract,
    diagonal,
    is_nonnegative,
    is_symmetric,
    load_tensor,
    polyval,
    principal_subtensor,
    save_tensor,
    symmetrize,
)
from qtensor.generators import all_ones, example_2_2, example_2_3

ENTRIES = {(1, 1, 1): 1.0, (1, 2, 2): -1.0, (2, 1, 1): -2.0, (2, 2, 2): 1.0}


def test_from_entries_sorts_and_drops_zeros():
    A = Tensor.from_entries(3, 2, [((2, 2, 2), 1.0), ((1, 1, 1), 2.0), ((1, 2, 1), 0.0)])
    assert A.nnz == 2
    assert A.idx.tolist() == [[0, 0, 0], [1, 1, 1]]
    assert A[(0, 0, 0)] == 2.0 and A[(0, 1, 0)] == 0.0


@pytest.mark.parametrize(
    "entries, message",
    [
        ([((1, 1, 1), 1.0), ((1, 1, 1), 2.0)], "duplicate"),
        ([((1, 3, 1), 1.0)], "out of range"),
        ([((1, 1), 1.0)], "length 2"),
        ([((1, 1, 1), float("nan"))], "not finite"),
    ],
)
def test_from_entries_rejects(entries, message):
    with pytest.raises(TensorFormatError, match=message):
        Tensor.from_entries(3, 2, entries)


def test_bad_order_and_dim():
    with pytest.raises(TensorFormatError):
        Tensor.from_entries(1, 2, [])
    with pytest.raises(TensorFormatError):
        Tensor.from_entries(3, 0, [])


def test_contract_example_values():
    A = example_2_2()
    x = np.array([1.0, np.sqrt(6) / 2])
    # (x1^2 - x2^2, -2 x1^2 + x2^2)
    assert np.allclose(A.contract(x), [1 - 1.5, -2 + 1.5])
    assert A.polyval(x) == pytest.approx(x @ A.contract(x))


def test_contract_matches_brute_force():
    rng = np.random.default_rng(3)
    for m, n in [(2, 3), (3, 3), (4, 2), (5, 2)]:
        a = rng.normal(size=(n,) * m)
        a[rng.random(a.shape) < 0.4] = 0.0
        A = Tensor.from_dense(a)
        x = rng.normal(size=n)
        assert np.allclose(A.contract(x), brute_contract(a, x))
        assert np.allclose(A.contract(x, storage="dense"), brute_contract(a, x))
        assert polyval(A, x) == pytest.approx(brute_polyval(a, x))


def test_dense_round_trip():
    a = dense_of(ENTRIES, 3, 2)
    assert Tensor.from_dense(a) == example_2_2()
    assert np.array_equal(example_2_2().dense(), a)
    with pytest.raises(MemoryError):
        all_ones(3, 4).dense(cap=10)


def test_contract_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        example_2_2().contract([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        example_2_2().contract([1.0, 2.0], storage="csr")


def test_principal_subtensor():
    A = all_ones(3, 4)
    sub = principal_subtensor(A, (1, 3))
    assert sub.dim == 2 and sub.nnz == 8
    B = example_2_3()
    assert principal_subtensor(B, (1,)).idx.tolist() == [[0, 0, 0]]
    assert principal_subtensor(B, (1,)).vals.tolist() == [1.0]
    for bad in [(), (1, 0), (0, 0), (2,)]:
        with pytest.raises(ValueError):
            principal_subtensor(B, bad)


def test_diagonal_and_sign_predicates():
    assert diagonal(example_2_3()).tolist() == [-1.0, 1.0]
    assert not is_nonnegative(example_2_2())
    assert is_nonnegative(all_ones(3, 2))


def test_symmetry():
    assert is_symmetric(all_ones(4, 3))
    assert not is_symmetric(example_2_2())
    S = symmetrize(example_2_2())
    assert is_symmetric(S)
    # a_{122} = -1 spreads over three arrangements
    assert S[(0, 1, 1)] == pytest.approx(-1 / 3)
    assert S[(1, 0, 0)] == pytest.approx(-2 / 3)
    # polyval is invariant under symmetrisation
    x = np.array([0.3, -1.7])
    assert S.polyval(x) == pytest.approx(example_2_2().polyval(x))


def test_json_round_trip(tmp_path):
    A = example_2_3()
    text = A.to_json()
    assert json.loads(text)["entries"][0] == {"idx": [1, 1, 1], "val": -1.0}
    assert Tensor.from_json(text) == A
    path = tmp_path / "a.json"
    save_tensor(A, path)
    assert load_tensor(path) == A
    assert path.read_text() == text


def test_json_errors_carry_positions():
    with pytest.raises(TensorFormatError, match=r"line 2 column"):
        Tensor.from_json('{"order": 3,\n "dim": }')
    with pytest.raises(TensorFormatError, match=r"missing key 'entries'"):
        Tensor.from_json('{"order": 3, "dim": 2}')
    dup = '{"order": 2, "dim": 2, "entries": [{"idx": [1, 1], "val": 1}, {"idx": [1, 1], "val": 2}]}'
    with pytest.raises(TensorFormatError, match=r"entries\[1\]: duplicate"):
        Tensor.from_json(dup)
    with pytest.raises(TensorFormatError, match=r"entries\[0\].idx"):
        Tensor.from_json('{"order": 2, "dim": 2, "entries": [{"idx": [1, true], "val": 1}]}')


def test_immutable_storage():
    A = example_2_2()
    with pytest.raises(ValueError):
        A.vals[0] = 5.0
