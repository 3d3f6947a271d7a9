import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.stats import special_ortho_group

from symbreak.kernels import (
    CUBIC_GAUSSIAN,
    RELU,
    KernelKind,
    kernel_derivs,
    kernel_eval,
    parse_kernel,
    poly,
)
from symbreak.tensor_core import gaussian_moment_tensor, moment_inner, rank_one_power

KINDS = [poly(3), poly(5), CUBIC_GAUSSIAN, RELU]
vec3 = arrays(float, 3, elements=st.floats(-2, 2, allow_nan=False)).filter(lambda x: np.linalg.norm(x) > 0.1)


def _fd_grad(kind, w, v, h=1e-6):
    out = np.empty_like(w)
    for j in range(w.size):
        e = np.zeros_like(w)
        e[j] = h
        out[j] = (kernel_eval(kind, w + e, v) - kernel_eval(kind, w - e, v)) / (2 * h)
    return out


def _fd_hess(kind, w, v, wrt, h=1e-5):
    d = w.size
    H = np.empty((d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        if wrt == "w":
            gp, gm = kernel_derivs(kind, w + e, v).grad_w, kernel_derivs(kind, w - e, v).grad_w
        else:
            gp, gm = kernel_derivs(kind, w, v + e).grad_w, kernel_derivs(kind, w, v - e).grad_w
        H[:, j] = (gp - gm) / (2 * h)
    return H


@pytest.mark.parametrize("kind", KINDS, ids=str)
def test_pair_derivatives_against_differences(kind, rng):
    for _ in range(100):
        w, v = rng.normal(size=4), rng.normal(size=4)
        der = kernel_derivs(kind, w, v)
        scale = max(1.0, np.abs(der.grad_w).max())
        assert np.allclose(der.grad_w, _fd_grad(kind, w, v), atol=1e-6 * scale)
        hscale = max(1.0, np.abs(der.hess_ww).max(), np.abs(der.hess_wv).max())
        assert np.allclose(der.hess_ww, _fd_hess(kind, w, v, "w"), atol=1e-5 * hscale)
        assert np.allclose(der.hess_wv, _fd_hess(kind, w, v, "v"), atol=1e-5 * hscale)


@pytest.mark.parametrize("kind", KINDS, ids=str)
@given(w=vec3, v=vec3, seed=st.integers(0, 2**31))
def test_rotation_invariance(kind, w, v, seed):
    R = special_ortho_group.rvs(3, random_state=seed)
    a, b = kernel_eval(kind, w, v), kernel_eval(kind, R @ w, R @ v)
    assert b == pytest.approx(a, rel=1e-10, abs=1e-10)


@given(w=vec3, v=vec3)
def test_poly_and_relu_symmetric_in_arguments(w, v):
    for kind in KINDS:
        assert kernel_eval(kind, w, v) == pytest.approx(kernel_eval(kind, v, w), rel=1e-12, abs=1e-12)


def test_cubic_gaussian_is_moment_contraction(rng):
    M = gaussian_moment_tensor(3, 6)
    for _ in range(20):
        w, v = rng.normal(size=3), rng.normal(size=3)
        ref = moment_inner(rank_one_power(w, 3), rank_one_power(v, 3), M)
        assert kernel_eval(CUBIC_GAUSSIAN, w, v) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize(
    "kind, feature",
    [(CUBIC_GAUSSIAN, lambda z: z**3), (RELU, lambda z: np.maximum(z, 0.0))],
    ids=["cubic-gaussian", "relu"],
)
def test_monte_carlo_expectation(kind, feature):
    rng = np.random.default_rng(7)
    w = np.array([0.8, -0.3, 0.5])
    v = np.array([0.2, 0.9, -0.4])
    X = rng.standard_normal((10**6, 3))
    samples = feature(X @ w) * feature(X @ v)
    sigma = samples.std() / np.sqrt(samples.size)
    assert abs(samples.mean() - kernel_eval(kind, w, v)) <= 4 * sigma


def test_relu_closed_form_special_angles():
    w = np.array([2.0, 0.0])
    assert kernel_eval(RELU, w, w) == pytest.approx(2.0)  # |w|^2 / 2
    assert kernel_eval(RELU, w, -w) == pytest.approx(0.0, abs=1e-15)
    assert kernel_eval(RELU, w, np.array([0.0, 3.0])) == pytest.approx(6.0 / (2 * np.pi))


def test_relu_parallel_pair_is_finite_and_flagged():
    w = np.array([1.0, 2.0, -1.0])
    der = kernel_derivs(RELU, w, 3 * w)
    assert der.near_singular
    assert np.all(np.isfinite(der.hess_ww)) and np.all(np.isfinite(der.hess_wv))
    # boundary values are the limits along the shared direction
    assert np.allclose(der.hess_wv, 0.5 * np.eye(3), atol=1e-12)
    near = kernel_derivs(RELU, w, 3 * w + np.array([1e-4, 0.0, 0.0]))
    assert np.allclose(near.hess_wv, der.hess_wv, atol=1e-4)


def test_relu_fd_hessian_variant_agrees(rng):
    fd = KernelKind("relu", fd_hessian=True)
    for _ in range(10):
        w, v = rng.normal(size=3), rng.normal(size=3)
        a, b = kernel_derivs(RELU, w, v), kernel_derivs(fd, w, v)
        assert np.allclose(a.hess_ww, b.hess_ww, atol=1e-6)
        assert np.allclose(a.hess_wv, b.hess_wv, atol=1e-6)


def test_parse_kernel_ids():
    assert parse_kernel("poly:5") == poly(5)
    assert parse_kernel("cubic-gaussian") is CUBIC_GAUSSIAN
    assert parse_kernel("relu") is RELU
    assert parse_kernel("relu-fd").fd_hessian
    assert poly(3).id == "poly:3" and CUBIC_GAUSSIAN.id == "cubic-gaussian"
    with pytest.raises(ValueError):
        parse_kernel("poly:4")
    with pytest.raises(ValueError):
        parse_kernel("tanh")


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        kernel_eval(poly(3), np.ones(2), np.ones(3))
