import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from symbreak.tensor_core import (
    InvalidOrderError,
    SizeGuardError,
    SymTensor,
    frob_inner,
    gaussian_moment_tensor,
    moment_inner,
    rank_one_power,
    read_matrix_csv,
    read_tensor_csv,
    tau,
    write_matrix_csv,
    write_tensor_csv,
)

small = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


def test_rank_one_power_entries():
    T = rank_one_power(np.array([1.0, 2.0]), 3)
    assert T.data.shape == (2, 2, 2)
    assert T.data[1, 1, 0] == 4.0
    assert T.data[1, 1, 1] == 8.0
    assert T.is_symmetric()


def test_tau_rejects_even_orders():
    with pytest.raises(InvalidOrderError):
        tau(np.eye(2), 2)
    with pytest.raises(InvalidOrderError):
        tau(np.eye(2), 0)


def test_size_guard():
    with pytest.raises(SizeGuardError):
        rank_one_power(np.ones(40), 5)


@given(arrays(float, (3, 3), elements=small), st.sampled_from([1, 3, 5]))
def test_tau_inner_product_is_kernel_sum(W, n):
    V = W[::-1] + 0.5
    lhs = frob_inner(tau(W, n), tau(V, n))
    rhs = float(np.sum((W @ V.T) ** n))
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


@given(arrays(float, (2, 3), elements=small))
def test_tau_is_symmetric_and_row_order_free(W):
    T = tau(W, 3)
    assert T.is_symmetric(atol=1e-12)
    assert np.allclose(tau(W[::-1], 3).data, T.data, atol=1e-12)


def test_gaussian_moment_known_entries():
    M = gaussian_moment_tensor(2, 4)
    assert M.data[0, 0, 0, 0] == 3.0
    assert M.data[0, 0, 1, 1] == 1.0
    assert M.data[0, 1, 0, 1] == 1.0
    assert M.data[0, 0, 0, 1] == 0.0
    M6 = gaussian_moment_tensor(3, 6)
    assert M6.data[0, 0, 0, 0, 0, 0] == 15.0
    assert M6.data[0, 0, 1, 1, 2, 2] == 1.0
    assert M6.data[0, 0, 0, 0, 1, 1] == 3.0
    with pytest.raises(InvalidOrderError):
        gaussian_moment_tensor(2, 3)


def test_moment_inner_matches_isserlis():
    # E[<w,x>^3 <v,x>^3] = 6 s^3 + 9 |w|^2 |v|^2 s
    w = np.array([0.3, -1.2, 0.7])
    v = np.array([1.1, 0.4, -0.5])
    M = gaussian_moment_tensor(3, 6)
    got = moment_inner(rank_one_power(w, 3), rank_one_power(v, 3), M)
    s, a, b = w @ v, w @ w, v @ v
    assert got == pytest.approx(6 * s**3 + 9 * a * b * s, rel=1e-12)


def test_sym_tensor_ops():
    a = rank_one_power(np.array([1.0, 0.0]), 3)
    b = rank_one_power(np.array([0.0, 1.0]), 3)
    assert (a + b) - b == a
    assert a != b


def test_csv_round_trip(tmp_path, rng):
    T = tau(rng.normal(size=(3, 3)), 3)
    write_tensor_csv(T, tmp_path / "t.csv")
    assert read_tensor_csv(tmp_path / "t.csv") == T
    W = rng.normal(size=(4, 3))
    write_matrix_csv(W, tmp_path / "w.csv")
    assert np.array_equal(read_matrix_csv(tmp_path / "w.csv"), W)
    assert (tmp_path / "t.csv").read_text().splitlines()[0] == "3,3"


def test_read_tensor_csv_rejects_wrong_count(tmp_path):
    (tmp_path / "bad.csv").write_text("3,2\n1\n2\n")
    with pytest.raises(ValueError):
        read_tensor_csv(tmp_path / "bad.csv")
