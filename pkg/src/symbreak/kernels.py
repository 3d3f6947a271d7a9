"""Rotation-invariant kernels and their first and second derivatives.

Every kernel here depends on ``w`` and ``v`` only through ``s = <w, v>``,
``a = |w|^2`` and ``b = |v|^2``.  All second derivatives therefore have the
form ``c_ww w w^T + c_wv w v^T + c_vw v w^T + c_vv v v^T + c_I I``; the
coefficient functions below return those five scalars (vectorised over
arrays of ``s, a, b``) and are shared by the single-pair API and the dense
Hessian assembly in :mod:`symbreak.loss`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# |cos(theta)| at or beyond this is treated as exactly (anti)parallel.
RELU_BOUNDARY = 1e-12
# |cos(theta)| within this of 1 raises the ``near_singular`` flag.
RELU_FLAG = 1e-9
FD_STEP = 1e-5

KIND_CODES = {"poly": 0, "cubic_gaussian": 1, "relu": 2}


class KernelSingularityError(ValueError):
    """The kernel is not differentiable at the requested point."""


@dataclass(frozen=True)
class KernelKind:
    name: str
    r: int = 3
    fd_hessian: bool = False

    def __post_init__(self) -> None:
        if self.name not in KIND_CODES:
            raise ValueError(f"unknown kernel {self.name!r}")
        if self.name == "poly" and (self.r < 1 or self.r % 2 == 0):
            raise ValueError(f"poly exponent must be odd and >= 1, got {self.r}")

    @property
    def code(self) -> int:
        return KIND_CODES[self.name]

    @property
    def id(self) -> str:
        if self.name == "poly":
            return f"poly:{self.r}"
        return self.name.replace("_", "-")

    def __str__(self) -> str:
        return self.id


def poly(r: int) -> KernelKind:
    return KernelKind("poly", r)


CUBIC_GAUSSIAN = KernelKind("cubic_gaussian")
RELU = KernelKind("relu")


def parse_kernel(text: str) -> KernelKind:
    """Parse ids such as ``poly:3``, ``cubic-gaussian`` or ``relu``."""
    key = text.strip().lower()
    if key.startswith("poly:"):
        return poly(int(key.split(":", 1)[1]))
    if key in ("cubic-gaussian", "cubic_gaussian"):
        return CUBIC_GAUSSIAN
    if key == "relu":
        return RELU
    if key in ("relu-fd", "relu:fd"):
        return KernelKind("relu", fd_hessian=True)
    raise ValueError(f"unknown kernel id {text!r}")


@dataclass(frozen=True)
class KernelDerivs:
    value: float
    grad_w: np.ndarray
    hess_ww: np.ndarray
    hess_wv: np.ndarray
    near_singular: bool = False


class Coeffs(NamedTuple):
    ww: np.ndarray
    wv: np.ndarray
    vw: np.ndarray
    vv: np.ndarray
    eye: np.ndarray


def relu_theta(A, B) -> np.ndarray:
    """Pairwise angles between rows, 2*atan2(|a^ - b^|, |a^ + b^|).

    Unlike arccos of the cosine this keeps full relative accuracy near
    0 and pi, where the kernel's two terms nearly cancel.  Zero rows give 0.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    na = np.linalg.norm(A, axis=1)
    nb = np.linalg.norm(B, axis=1)
    Ah = A / np.where(na > 0, na, 1.0)[:, None]
    Bh = B / np.where(nb > 0, nb, 1.0)[:, None]
    minus = np.linalg.norm(Ah[:, None, :] - Bh[None, :, :], axis=2)
    plus = np.linalg.norm(Ah[:, None, :] + Bh[None, :, :], axis=2)
    return 2.0 * np.arctan2(minus, plus)


def _relu_angles(s, a, b, theta=None):
    nab = np.sqrt(a * b)
    if theta is None:
        with np.errstate(divide="ignore", invalid="ignore"):
            cos = np.where(nab > 0, s / np.where(nab > 0, nab, 1.0), 0.0)
        cos = np.clip(cos, -1.0, 1.0)
        theta = np.arccos(cos)
        q = np.sqrt(np.maximum(a * b - s * s, 0.0))
    else:
        theta = np.broadcast_to(np.asarray(theta, dtype=float), s.shape)
        cos = np.cos(theta)
        q = nab * np.sin(theta)
    return cos, theta, q


def values(kind: KernelKind, s, a, b, theta=None):
    """Kernel values from the invariants (vectorised)."""
    s, a, b = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (s, a, b)))
    if kind.name == "poly":
        return s**kind.r
    if kind.name == "cubic_gaussian":
        return 6.0 * s**3 + 9.0 * a * b * s
    _, theta, q = _relu_angles(s, a, b, theta)
    return (q + (np.pi - theta) * s) / (2.0 * np.pi)


def grad_coeffs(kind: KernelKind, s, a, b, theta=None):
    """(alpha, beta) with grad_w = alpha * w + beta * v."""
    s, a, b = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (s, a, b)))
    r = kind.r
    if kind.name == "poly":
        return np.zeros_like(s), r * s ** (r - 1)
    if kind.name == "cubic_gaussian":
        return 18.0 * b * s, 18.0 * s * s + 9.0 * a * b
    if np.any(a == 0) or np.any(b == 0):
        raise KernelSingularityError("relu kernel is not differentiable at a zero vector")
    _, theta, q = _relu_angles(s, a, b, theta)
    return q / (2.0 * np.pi * a), (np.pi - theta) / (2.0 * np.pi)


def _zeros(s):
    return np.zeros_like(s)


def mixed_coeffs(kind: KernelKind, s, a, b, theta=None) -> Coeffs:
    """Coefficients of d^2 kappa / dw dv (rows over w)."""
    s, a, b = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (s, a, b)))
    z = _zeros(s)
    r = kind.r
    if kind.name == "poly":
        c2 = r * (r - 1) * s ** (r - 2) if r >= 2 else z
        return Coeffs(z, z, c2, z, r * s ** (r - 1))
    if kind.name == "cubic_gaussian":
        return Coeffs(18.0 * b, 36.0 * s, 36.0 * s, 18.0 * a, 18.0 * s * s + 9.0 * a * b)
    if np.any(a == 0) or np.any(b == 0):
        raise KernelSingularityError("relu kernel is not differentiable at a zero vector")
    cos, theta, q = _relu_angles(s, a, b, theta)
    smooth = np.abs(cos) < 1.0 - RELU_BOUNDARY
    qs = np.where(smooth, q, 1.0)
    k = 1.0 / (2.0 * np.pi)
    ww = np.where(smooth, -k * s / (a * qs), 0.0)
    wv = np.where(smooth, k / qs, 0.0)
    vv = np.where(smooth, -k * s / (b * qs), 0.0)
    # at theta=0 the limit is I/2, at theta=pi it is 0
    eye = np.where(smooth, k * (np.pi - theta), np.where(cos > 0, 0.5, 0.0))
    return Coeffs(ww, wv, wv.copy(), vv, eye)


def repeated_coeffs(kind: KernelKind, s, a, b, theta=None) -> Coeffs:
    """Coefficients of d^2 kappa / dw dw."""
    s, a, b = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (s, a, b)))
    z = _zeros(s)
    r = kind.r
    if kind.name == "poly":
        c2 = r * (r - 1) * s ** (r - 2) if r >= 2 else z
        return Coeffs(z, z, z, c2, z)
    if kind.name == "cubic_gaussian":
        return Coeffs(z, 18.0 * b, 18.0 * b, 36.0 * s, 18.0 * b * s)
    if np.any(a == 0) or np.any(b == 0):
        raise KernelSingularityError("relu kernel is not differentiable at a zero vector")
    cos, _, q = _relu_angles(s, a, b, theta)
    smooth = np.abs(cos) < 1.0 - RELU_BOUNDARY
    qs = np.where(smooth, q, 1.0)
    k = 1.0 / (2.0 * np.pi)
    ww = np.where(smooth, k * (b / (a * qs) - 2.0 * q / a**2), 0.0)
    cross = np.where(smooth, -k * s / (a * qs), 0.0)
    vv = np.where(smooth, k / qs, 0.0)
    eye = np.where(smooth, k * q / a, 0.0)
    return Coeffs(ww, cross, cross.copy(), vv, eye)


def _assemble(c: Coeffs, w: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (
        c.ww * np.outer(w, w)
        + c.wv * np.outer(w, v)
        + c.vw * np.outer(v, w)
        + c.vv * np.outer(v, v)
        + c.eye * np.eye(w.shape[0])
    )


def _check_pair(w, v) -> tuple[np.ndarray, np.ndarray]:
    w = np.asarray(w, dtype=float)
    v = np.asarray(v, dtype=float)
    if w.ndim != 1 or w.shape != v.shape:
        raise ValueError(f"dimension mismatch: {w.shape} vs {v.shape}")
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
        raise ValueError("non-finite input")
    return w, v


def _theta(kind: KernelKind, w, v):
    return float(relu_theta(w, v)[0, 0]) if kind.name == "relu" else None


def kernel_eval(kind: KernelKind, w, v) -> float:
    w, v = _check_pair(w, v)
    return float(values(kind, w @ v, w @ w, v @ v, _theta(kind, w, v)))


def _grad_w(kind: KernelKind, w, v) -> np.ndarray:
    alpha, beta = grad_coeffs(kind, w @ v, w @ w, v @ v, _theta(kind, w, v))
    return float(alpha) * w + float(beta) * v


def kernel_derivs(kind: KernelKind, w, v) -> KernelDerivs:
    w, v = _check_pair(w, v)
    s, a, b = w @ v, w @ w, v @ v
    th = _theta(kind, w, v)
    value = float(values(kind, s, a, b, th))
    grad = _grad_w(kind, w, v)
    near = False
    if kind.name == "relu":
        cos = s / math.sqrt(a * b)
        near = abs(cos) >= 1.0 - RELU_FLAG
    if kind.fd_hessian:
        hww, hwv = _fd_second(kind, w, v)
    else:
        hww = _assemble(repeated_coeffs(kind, s, a, b, th), w, v)
        hwv = _assemble(mixed_coeffs(kind, s, a, b, th), w, v)
    return KernelDerivs(value, grad, 0.5 * (hww + hww.T), hwv, near)


def _fd_second(kind: KernelKind, w, v, h: float = FD_STEP):
    """Central differences of the analytic gradient."""
    d = w.shape[0]
    hww = np.empty((d, d))
    hwv = np.empty((d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        hww[:, j] = (_grad_w(kind, w + e, v) - _grad_w(kind, w - e, v)) / (2 * h)
        hwv[:, j] = (_grad_w(kind, w, v + e) - _grad_w(kind, w, v - e)) / (2 * h)
    return hww, hwv
