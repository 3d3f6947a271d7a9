# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled loss/gradient evaluation and the gradient-descent loop.

Kernel codes: 0 = poly(r), 1 = cubic-gaussian, 2 = relu.
Status codes: 0 converged, 1 max_iter, 2 diverged, 3 stalled, 4 singular.
"""

import numpy as np

from libc.math cimport sqrt, atan2, sin, fabs, isfinite, M_PI

cdef double EPS = 2.220446049250313e-16
cdef double NOISE = 64.0


cdef inline double ipow(double x, int n) noexcept nogil:
    cdef double out = 1.0
    while n > 0:
        if n & 1:
            out *= x
        x *= x
        n >>= 1
    return out


cdef int accumulate(int kind, int r, const double[:, ::1] A, const double[:, ::1] B,
                    const double[::1] na, const double[::1] nb,
                    double[:, ::1] G, double gscale, bint do_grad,
                    double* total, double* mag) noexcept nogil:
    # total += sum_ij kappa(a_i, b_j); G[i] += gscale * sum_j kappa_w(a_i, b_j)
    cdef Py_ssize_t i, j, t
    cdef Py_ssize_t m = A.shape[0], n = B.shape[0], d = A.shape[1]
    cdef double s, a, b, kv, alpha, beta, asum, th, q, nab, ia, ib, x, y, dm, dp
    for i in range(m):
        asum = 0.0
        a = na[i]
        for j in range(n):
            b = nb[j]
            s = 0.0
            for t in range(d):
                s += A[i, t] * B[j, t]
            if kind == 0:
                kv = ipow(s, r)
                alpha = 0.0
                beta = r * ipow(s, r - 1)
            elif kind == 1:
                kv = 6.0 * s * s * s + 9.0 * a * b * s
                alpha = 18.0 * b * s
                beta = 18.0 * s * s + 9.0 * a * b
            else:
                if a == 0.0 or b == 0.0:
                    if do_grad:
                        return 1
                    kv = 0.0
                    alpha = 0.0
                    beta = 0.0
                else:
                    # angle via 2*atan2(|a^-b^|, |a^+b^|), accurate near 0 and pi
                    nab = sqrt(a * b)
                    ia = 1.0 / sqrt(a)
                    ib = 1.0 / sqrt(b)
                    dm = 0.0
                    dp = 0.0
                    for t in range(d):
                        x = A[i, t] * ia
                        y = B[j, t] * ib
                        dm += (x - y) * (x - y)
                        dp += (x + y) * (x + y)
                    th = 2.0 * atan2(sqrt(dm), sqrt(dp))
                    q = nab * sin(th)
                    kv = (q + (M_PI - th) * s) / (2.0 * M_PI)
                    alpha = q / (2.0 * M_PI * a)
                    beta = (M_PI - th) / (2.0 * M_PI)
            total[0] += kv
            mag[0] += fabs(kv)
            if do_grad:
                asum += alpha
                if beta != 0.0:
                    for t in range(d):
                        G[i, t] += gscale * beta * B[j, t]
        if do_grad and asum != 0.0:
            for t in range(d):
                G[i, t] += gscale * asum * A[i, t]
    return 0


cdef void row_norms(const double[:, ::1] A, double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, t
    cdef double acc
    for i in range(A.shape[0]):
        acc = 0.0
        for t in range(A.shape[1]):
            acc += A[i, t] * A[i, t]
        out[i] = acc


cdef int eval_all(int kind, int r, const double[:, ::1] W, const double[:, ::1] V,
                  double[::1] na, const double[::1] nv, double[:, ::1] G, double c,
                  double cvv, double mvv, double* L, double* mag) noexcept nogil:
    cdef double s1 = 0.0, s2 = 0.0, m1 = 0.0, m2 = 0.0
    cdef Py_ssize_t i, t
    cdef int rc
    for i in range(G.shape[0]):
        for t in range(G.shape[1]):
            G[i, t] = 0.0
    row_norms(W, na)
    rc = accumulate(kind, r, W, W, na, na, G, 2.0 * c, True, &s1, &m1)
    if rc:
        return rc
    rc = accumulate(kind, r, W, V, na, nv, G, -2.0 * c, True, &s2, &m2)
    if rc:
        return rc
    L[0] = c * (s1 - 2.0 * s2) + cvv
    mag[0] = c * (m1 + 2.0 * m2) + mvv
    return 0


cdef double sqnorm(const double[:, ::1] G) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t i, t
    for i in range(G.shape[0]):
        for t in range(G.shape[1]):
            acc += G[i, t] * G[i, t]
    return acc


def _target_term(int kind, int r, const double[:, ::1] V, double c):
    cdef const double[::1] nv = np.einsum("ij,ij->i", V, V)
    cdef double[:, ::1] dummy = np.zeros((1, 1))
    cdef double tot = 0.0, mag = 0.0
    accumulate(kind, r, V, V, nv, nv, dummy, 0.0, False, &tot, &mag)
    return c * tot, c * mag


def loss_value(int kind, int r, W, V, double c):
    cdef const double[:, ::1] Wm = np.ascontiguousarray(W, dtype=float)
    cdef const double[:, ::1] Vm = np.ascontiguousarray(V, dtype=float)
    cdef double[::1] nw = np.einsum("ij,ij->i", Wm, Wm)
    cdef const double[::1] nv = np.einsum("ij,ij->i", Vm, Vm)
    cdef double[:, ::1] dummy = np.zeros((1, 1))
    cdef double s1 = 0.0, s2 = 0.0, s3 = 0.0, m = 0.0
    with nogil:
        accumulate(kind, r, Wm, Wm, nw, nw, dummy, 0.0, False, &s1, &m)
        accumulate(kind, r, Wm, Vm, nw, nv, dummy, 0.0, False, &s2, &m)
        accumulate(kind, r, Vm, Vm, nv, nv, dummy, 0.0, False, &s3, &m)
    return c * (s1 - 2.0 * s2 + s3)


def loss_grad(int kind, int r, W, V, double c):
    """Return (loss, gradient, magnitude); magnitude bounds the rounding scale."""
    cdef const double[:, ::1] Wm = np.ascontiguousarray(W, dtype=float)
    cdef const double[:, ::1] Vm = np.ascontiguousarray(V, dtype=float)
    G = np.zeros((Wm.shape[0], Wm.shape[1]))
    cdef double[:, ::1] Gm = G
    cdef double[::1] na = np.empty(Wm.shape[0])
    cdef const double[::1] nv = np.einsum("ij,ij->i", Vm, Vm)
    cvv_py, mvv_py = _target_term(kind, r, Vm, c)
    cdef double cvv = cvv_py, mvv = mvv_py
    cdef double L = 0.0, mag = 0.0
    cdef int rc
    with nogil:
        rc = eval_all(kind, r, Wm, Vm, na, nv, Gm, c, cvv, mvv, &L, &mag)
    if rc:
        raise ZeroDivisionError("relu kernel is not differentiable at a zero row")
    return L, G, mag


def gd_loop(int kind, int r, W0, V, double c, bint backtracking, double eta0,
            double beta, double c1, long max_iter, double eps_g, bint record=False):
    """Gradient descent; returns (W, loss, grad_norm, iterations, status, history)."""
    W = np.array(W0, dtype=float, order="C", copy=True)
    Wt = np.empty_like(W)
    G = np.zeros_like(W)
    Gt = np.zeros_like(W)
    cdef double[:, ::1] Wm = W, Wtm = Wt, Gm = G, Gtm = Gt
    cdef const double[:, ::1] Vm = np.ascontiguousarray(V, dtype=float)
    cdef double[::1] na = np.empty(W.shape[0])
    cdef const double[::1] nv = np.einsum("ij,ij->i", Vm, Vm)
    cvv_py, mvv_py = _target_term(kind, r, Vm, c)
    cdef double cvv = cvv_py, mvv = mvv_py
    hist = np.empty(max_iter + 1 if record else 0)
    cdef double[::1] hm = hist
    cdef double L = 0.0, mag = 0.0, Lt = 0.0, magt = 0.0
    cdef double gn2 = 0.0, gnt2 = 0.0, eta, eta_prev = eta0, noise
    cdef long it = 0
    cdef int status = -1, rc
    cdef bint accepted
    cdef Py_ssize_t i, t, k = W.shape[0], d = W.shape[1]
    with nogil:
        rc = eval_all(kind, r, Wm, Vm, na, nv, Gm, c, cvv, mvv, &L, &mag)
        gn2 = sqnorm(Gm)
        if rc:
            status = 4
        elif not (isfinite(L) and isfinite(gn2)):
            status = 2
        while status < 0:
            if record:
                hm[it] = L
            if sqrt(gn2) <= eps_g:
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
                for i in range(k):
                    for t in range(d):
                        Wtm[i, t] = Wm[i, t] - eta * Gm[i, t]
                rc = eval_all(kind, r, Wtm, Vm, na, nv, Gtm, c, cvv, mvv, &Lt, &magt)
                if rc:
                    status = 4
                    break
                gnt2 = sqnorm(Gtm)
                if isfinite(Lt) and isfinite(gnt2):
                    if not backtracking or Lt <= L - c1 * eta * gn2:
                        accepted = True
                        break
                    # below rounding resolution Armijo cannot be decided; accept
                    # steps that keep the loss within noise and shrink the gradient
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
            for i in range(k):
                for t in range(d):
                    Wm[i, t] = Wtm[i, t]
                    Gm[i, t] = Gtm[i, t]
            L = Lt
            mag = magt
            gn2 = gnt2
            eta_prev = eta
            it += 1
    if record:
        hist = hist[: it + 1]
    return W, L, sqrt(gn2), it, status, hist
