"""Pure numpy twin of the compiled core (same signatures and status codes)."""

from __future__ import annotations

import numpy as np

from .kernels import relu_theta

EPS = np.finfo(float).eps
NOISE = 64.0


def _pair_terms(kind: int, r: int, A: np.ndarray, B: np.ndarray, do_grad: bool):
    S = A @ B.T
    a = np.einsum("ij,ij->i", A, A)[:, None]
    b = np.einsum("ij,ij->i", B, B)[None, :]
    if kind == 0:
        K = S**r
        alpha = np.zeros_like(S)
        beta = r * S ** (r - 1)
    elif kind == 1:
        K = 6.0 * S**3 + 9.0 * a * b * S
        alpha = 18.0 * b * S
        beta = 18.0 * S * S + 9.0 * a * b
    else:
        ab = a * b
        zero = ab == 0.0
        if do_grad and zero.any():
            raise ZeroDivisionError("relu kernel is not differentiable at a zero row")
        nab = np.sqrt(ab)
        theta = relu_theta(A, B)
        q = nab * np.sin(theta)
        K = np.where(zero, 0.0, (q + (np.pi - theta) * S) / (2.0 * np.pi))
        alpha = np.where(zero, 0.0, q / (2.0 * np.pi * np.where(zero, 1.0, a)))
        beta = np.where(zero, 0.0, (np.pi - theta) / (2.0 * np.pi))
    return K, alpha, beta


def _row_grad(A, B, alpha, beta):
    return alpha.sum(axis=1)[:, None] * A + beta @ B


def _target_term(kind: int, r: int, V: np.ndarray, c: float):
    K, _, _ = _pair_terms(kind, r, V, V, False)
    return c * K.sum(), c * np.abs(K).sum()


def loss_value(kind: int, r: int, W, V, c: float) -> float:
    W = np.asarray(W, dtype=float)
    V = np.asarray(V, dtype=float)
    Kww, _, _ = _pair_terms(kind, r, W, W, False)
    Kwv, _, _ = _pair_terms(kind, r, W, V, False)
    Kvv, _, _ = _pair_terms(kind, r, V, V, False)
    return float(c * (Kww.sum() - 2.0 * Kwv.sum() + Kvv.sum()))


def _eval(kind, r, W, V, c, cvv, mvv):
    Kww, aww, bww = _pair_terms(kind, r, W, W, True)
    Kwv, awv, bwv = _pair_terms(kind, r, W, V, True)
    G = 2.0 * c * (_row_grad(W, W, aww, bww) - _row_grad(W, V, awv, bwv))
    L = c * (Kww.sum() - 2.0 * Kwv.sum()) + cvv
    mag = c * (np.abs(Kww).sum() + 2.0 * np.abs(Kwv).sum()) + mvv
    return float(L), G, float(mag)


def loss_grad(kind: int, r: int, W, V, c: float):
    W = np.asarray(W, dtype=float)
    V = np.asarray(V, dtype=float)
    cvv, mvv = _target_term(kind, r, V, c)
    return _eval(kind, r, W, V, c, cvv, mvv)


def gd_loop(kind, r, W0, V, c, backtracking, eta0, beta, c1, max_iter, eps_g, record=False):
    W = np.array(W0, dtype=float, copy=True)
    V = np.asarray(V, dtype=float)
    cvv, mvv = _target_term(kind, r, V, c)
    hist: list[float] = []
    status = -1
    it = 0
    eta_prev = eta0
    with np.errstate(all="ignore"):
        try:
            L, G, mag = _eval(kind, r, W, V, c, cvv, mvv)
        except ZeroDivisionError:
            return W, np.nan, np.nan, 0, 4, np.array(hist)
        gn2 = float(np.sum(G * G))
        if not (np.isfinite(L) and np.isfinite(gn2)):
            status = 2
        while status < 0:
            if record:
                hist.append(L)
            if np.sqrt(gn2) <= eps_g:
                status = 0
                break
            if it >= max_iter:
                status = 1
                break
            eta = eta0
            if backtracking and 2.0 * eta_prev < eta0:
                eta = 2.0 * eta_prev
            accepted = False
            while True:
                Wt = W - eta * G
                try:
                    Lt, Gt, magt = _eval(kind, r, Wt, V, c, cvv, mvv)
                except ZeroDivisionError:
                    status = 4
                    break
                gnt2 = float(np.sum(Gt * Gt))
                if np.isfinite(Lt) and np.isfinite(gnt2):
                    if not backtracking or Lt <= L - c1 * eta * gn2:
                        accepted = True
                        break
                    noise = NOISE * EPS * (mag + magt)
                    if c1 * eta * gn2 <= noise and Lt <= L + noise and gnt2 < gn2:
                        accepted = True
                        break
                elif not backtracking:
                    status = 2
                    break
                eta *= beta
                if eta < 1e-20:
                    status = 3
                    break
            if not accepted:
                break
            W, G, L, mag, gn2 = Wt, Gt, Lt, magt, gnt2
            eta_prev = eta
            it += 1
    return W, L, float(np.sqrt(gn2)), it, status, np.array(hist)
