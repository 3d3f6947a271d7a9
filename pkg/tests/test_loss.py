import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from symbreak import _fallback, backend
from symbreak.cli import laplacian_target
from symbreak.kernels import CUBIC_GAUSSIAN, RELU, KernelKind, KernelSingularityError, poly
from symbreak.loss import (
    LossProblem,
    grad,
    hess,
    hess_extreme_eigs,
    identity_problem,
    loss,
    loss_and_grad,
    loss_direct,
)

KINDS = [poly(3), poly(5), CUBIC_GAUSSIAN, RELU]
mat = arrays(float, (3, 3), elements=st.floats(-1.5, 1.5, allow_nan=False))


def fd_grad(problem, W, h=1e-6):
    G = np.empty_like(W)
    for idx in np.ndindex(W.shape):
        E = np.zeros_like(W)
        E[idx] = h
        G[idx] = (loss(problem, W + E) - loss(problem, W - E)) / (2 * h)
    return G


def fd_hess(problem, W, h=1e-5):
    n = W.size
    H = np.empty((n, n))
    for j in range(n):
        E = np.zeros(n)
        E[j] = h
        H[:, j] = (grad(problem, W + E.reshape(W.shape)) - grad(problem, W - E.reshape(W.shape))).ravel() / (2 * h)
    return H


@pytest.mark.parametrize("kind", KINDS, ids=str)
def test_gradient_matches_differences(kind, rng):
    prob = LossProblem(kind, rng.normal(size=(3, 3)))
    for _ in range(100):
        W = rng.normal(size=(3, 3))
        G = grad(prob, W)
        assert np.linalg.norm(G - fd_grad(prob, W)) <= 1e-6 * max(1.0, np.linalg.norm(G))


@pytest.mark.parametrize("kind", KINDS, ids=str)
def test_hessian_matches_differences(kind, rng):
    prob = LossProblem(kind, rng.normal(size=(2, 3)))
    for _ in range(100):
        W = rng.normal(size=(3, 3))
        H = hess(prob, W)
        assert np.allclose(H, H.T)
        assert np.linalg.norm(H - fd_hess(prob, W)) <= 1e-5 * max(1.0, np.linalg.norm(H))


def test_fd_hessian_kernel_variant(rng):
    prob = LossProblem(RELU, np.eye(3))
    prob_fd = LossProblem(KernelKind("relu", fd_hessian=True), np.eye(3))
    W = rng.normal(size=(3, 3))
    assert np.allclose(hess(prob, W), hess(prob_fd, W), atol=1e-5)


@pytest.mark.parametrize("n", [3, 5])
@given(W=mat, V=mat)
def test_kernel_loss_equals_direct_tensor_loss(n, W, V):
    prob = LossProblem(poly(n), V)
    a, b = loss(prob, W), loss_direct(prob, W)
    assert a == pytest.approx(b, rel=1e-10, abs=1e-10)


def test_direct_loss_needs_poly():
    with pytest.raises(NotImplementedError):
        loss_direct(identity_problem(RELU, 2), np.eye(2))


@pytest.mark.parametrize("kind", KINDS, ids=str)
@given(W=mat, perm=st.permutations(range(3)))
def test_row_permutation_invariance_is_exact(kind, W, perm):
    prob = LossProblem(kind, np.array([[1.0, 0.5, -0.2], [0.1, 0.9, 0.4]]))
    assert loss(prob, W[list(perm)]) == pytest.approx(loss(prob, W), rel=1e-13, abs=1e-13)


@pytest.mark.parametrize("kind", KINDS, ids=str)
@given(W=mat, rows=st.permutations(range(3)), cols=st.permutations(range(3)))
def test_identity_target_full_invariance(kind, W, rows, cols):
    prob = identity_problem(kind, 3)
    moved = W[list(rows)][:, list(cols)]
    assert loss(prob, moved) == pytest.approx(loss(prob, W), rel=1e-10, abs=1e-10)


@given(W=arrays(float, (5, 5), elements=st.floats(-1, 1, allow_nan=False)), shift=st.integers(0, 4))
def test_circulant_target_cyclic_invariance(W, shift):
    prob = LossProblem(poly(3), laplacian_target(5))
    moved = np.roll(np.roll(W, shift, axis=0), shift, axis=1)
    assert loss(prob, moved) == pytest.approx(loss(prob, W), rel=1e-10, abs=1e-10)


def test_global_minimum_and_half_convention():
    for kind in KINDS:
        prob = identity_problem(kind, 4)
        L, G = loss_and_grad(prob, np.eye(4))
        assert abs(L) < 1e-12 and np.abs(G).max() < 1e-12
    W = np.zeros((2, 2))
    half = identity_problem(poly(3), 2, half=True)
    full = identity_problem(poly(3), 2, half=False)
    assert loss(full, W) == pytest.approx(2 * loss(half, W))
    assert loss(half, W) == pytest.approx(1.0)  # d/2


def test_relu_zero_row_is_singular():
    with pytest.raises(KernelSingularityError):
        loss_and_grad(identity_problem(RELU, 2), np.array([[0.0, 0.0], [1.0, 0.0]]))
    assert np.isfinite(loss(identity_problem(RELU, 2), np.array([[0.0, 0.0], [1.0, 0.0]])))


def test_shape_checks():
    with pytest.raises(ValueError):
        loss(identity_problem(poly(3), 3), np.eye(2))


def test_hess_extreme_eigs_at_identity():
    lo, hi = hess_extreme_eigs(identity_problem(poly(3), 3), np.eye(3))
    assert lo > 0 and hi >= lo


@pytest.mark.skipif(backend.NAME != "compiled", reason="compiled core not built")
@pytest.mark.parametrize("kind", KINDS, ids=str)
def test_compiled_and_python_backends_agree(kind, rng):
    core = backend.get("compiled")
    V = rng.normal(size=(3, 4))
    for _ in range(20):
        W = rng.normal(size=(5, 4))
        a = core.loss_grad(kind.code, kind.r, W, V, 0.5)
        b = _fallback.loss_grad(kind.code, kind.r, W, V, 0.5)
        assert a[0] == pytest.approx(b[0], rel=1e-12, abs=1e-12)
        assert np.allclose(a[1], b[1], rtol=1e-11, atol=1e-12)
        assert core.loss_value(kind.code, kind.r, W, V, 0.5) == pytest.approx(
            _fallback.loss_value(kind.code, kind.r, W, V, 0.5), rel=1e-12, abs=1e-12
        )
