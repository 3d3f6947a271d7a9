"""The kernel loss, its gradient and its dense Hessian."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import backend
from .kernels import (
    KernelKind,
    KernelSingularityError,
    kernel_derivs,
    mixed_coeffs,
    relu_theta,
    repeated_coeffs,
)
from .tensor_core import tau


@dataclass(frozen=True)
class LossProblem:
    """Kernel, target weights ``V`` (h x d) and the scale convention.

    With ``half=True`` (default) the loss carries a factor 1/2, which makes
    the gradient exactly ``sum_j k_w(w_i, w_j) - sum_j k_w(w_i, v_j)``.
    """

    kernel: KernelKind
    V: np.ndarray = field(repr=False)
    half: bool = True

    def __post_init__(self) -> None:
        V = np.atleast_2d(np.array(self.V, dtype=float))
        V.setflags(write=False)
        object.__setattr__(self, "V", V)

    @property
    def c(self) -> float:
        return 0.5 if self.half else 1.0

    @property
    def d(self) -> int:
        return self.V.shape[1]

    def check(self, W) -> np.ndarray:
        W = np.atleast_2d(np.asarray(W, dtype=float))
        if W.shape[1] != self.d:
            raise ValueError(f"W has {W.shape[1]} columns, target has {self.d}")
        return W


def identity_problem(kernel: KernelKind, d: int, half: bool = True) -> LossProblem:
    return LossProblem(kernel, np.eye(d), half)


def loss(problem: LossProblem, W) -> float:
    W = problem.check(W)
    k = problem.kernel
    return backend.get().loss_value(k.code, k.r, W, problem.V, problem.c)


def loss_direct(problem: LossProblem, W) -> float:
    """c * ||tau_n(W) - tau_n(V)||_F^2, only for polynomial kernels."""
    if problem.kernel.name != "poly":
        raise NotImplementedError("loss_direct needs a poly kernel")
    W = problem.check(W)
    n = problem.kernel.r
    diff = tau(W, n).data - tau(problem.V, n).data
    return float(problem.c * np.sum(diff * diff))


def loss_and_grad(problem: LossProblem, W) -> tuple[float, np.ndarray]:
    W = problem.check(W)
    k = problem.kernel
    try:
        L, G, _ = backend.get().loss_grad(k.code, k.r, W, problem.V, problem.c)
    except ZeroDivisionError as exc:
        raise KernelSingularityError(str(exc)) from None
    return L, G


def grad(problem: LossProblem, W) -> np.ndarray:
    return loss_and_grad(problem, W)[1]


def _invariants(kind: KernelKind, A: np.ndarray, B: np.ndarray):
    S = A @ B.T
    a = np.einsum("ij,ij->i", A, A)[:, None]
    b = np.einsum("ij,ij->i", B, B)[None, :]
    theta = relu_theta(A, B) if kind.name == "relu" else None
    return S, a, b, theta


def _pair_blocks(c, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Blocks[i, :, j, :] = c_ww a_i a_i^T + c_wv a_i b_j^T + c_vw b_j a_i^T + c_vv b_j b_j^T + c_I I."""
    d = A.shape[1]
    out = np.einsum("ij,ia,ib->iajb", c.ww, A, A)
    out += np.einsum("ij,ia,jb->iajb", c.wv, A, B)
    out += np.einsum("ij,ja,ib->iajb", c.vw, B, A)
    out += np.einsum("ij,ja,jb->iajb", c.vv, B, B)
    out += np.einsum("ij,ab->iajb", c.eye, np.eye(d))
    return out


def _row_sums(c, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Sums over j of the pair matrices, one d x d matrix per row of A."""
    d = A.shape[1]
    out = np.einsum("ij,ia,ib->iab", c.ww, A, A)
    out += np.einsum("ij,ia,jb->iab", c.wv, A, B)
    out += np.einsum("ij,ja,ib->iab", c.vw, B, A)
    out += np.einsum("ij,ja,jb->iab", c.vv, B, B)
    out += c.eye.sum(axis=1)[:, None, None] * np.eye(d)[None]
    return out


def hess(problem: LossProblem, W) -> np.ndarray:
    """Dense symmetrised Hessian of shape (k*d, k*d), rows ordered as W.ravel()."""
    W = problem.check(W)
    kind = problem.kernel
    k, d = W.shape
    if kind.fd_hessian:
        H = _hess_by_pairs(problem, W)
    else:
        H = _pair_blocks(mixed_coeffs(kind, *_invariants(kind, W, W)), W, W)
        diag = _row_sums(repeated_coeffs(kind, *_invariants(kind, W, W)), W, W)
        diag -= _row_sums(repeated_coeffs(kind, *_invariants(kind, W, problem.V)), W, problem.V)
        idx = np.arange(k)
        H[idx, :, idx, :] += diag
        H = 2.0 * problem.c * H.reshape(k * d, k * d)
    return 0.5 * (H + H.T)


def _hess_by_pairs(problem: LossProblem, W: np.ndarray) -> np.ndarray:
    k, d = W.shape
    H = np.zeros((k, d, k, d))
    for i in range(k):
        for j in range(k):
            der = kernel_derivs(problem.kernel, W[i], W[j])
            H[i, :, j, :] += der.hess_wv
            H[i, :, i, :] += der.hess_ww
        for v in problem.V:
            H[i, :, i, :] -= kernel_derivs(problem.kernel, W[i], v).hess_ww
    return 2.0 * problem.c * H.reshape(k * d, k * d)


def hess_extreme_eigs(problem: LossProblem, W) -> tuple[float, float]:
    ev = np.linalg.eigvalsh(hess(problem, W))
    return float(ev[0]), float(ev[-1])
