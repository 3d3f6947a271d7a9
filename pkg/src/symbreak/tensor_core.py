"""Dense symmetric tensors, the tau map and Gaussian moment tensors."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

# Largest dense tensor (number of entries) we are willing to materialise.
MAX_ENTRIES = 10**8


class SizeGuardError(ValueError):
    """Raised when a dense tensor would exceed ``MAX_ENTRIES`` entries."""


class InvalidOrderError(ValueError):
    pass


def _check_size(dim: int, order: int) -> None:
    if dim < 1 or order < 1:
        raise ValueError(f"need dim >= 1 and order >= 1, got dim={dim}, order={order}")
    if dim**order > MAX_ENTRIES:
        raise SizeGuardError(
            f"dense tensor with d={dim}, n={order} has {dim**order} entries (cap {MAX_ENTRIES})"
        )


@dataclass(frozen=True)
class SymTensor:
    """A dense order-n tensor over R^d stored as an ndarray of shape (d,)*n."""

    data: np.ndarray

    @property
    def order(self) -> int:
        return self.data.ndim

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def vec(self) -> np.ndarray:
        """Entries in lexicographic multi-index order."""
        return self.data.reshape(-1)

    def is_symmetric(self, atol: float = 0.0) -> bool:
        for axis in range(1, self.order):
            swapped = np.swapaxes(self.data, 0, axis)
            if not np.allclose(swapped, self.data, rtol=0.0, atol=atol):
                return False
        return True

    def __add__(self, other: SymTensor) -> SymTensor:
        return SymTensor(self.data + other.data)

    def __sub__(self, other: SymTensor) -> SymTensor:
        return SymTensor(self.data - other.data)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SymTensor) and np.array_equal(self.data, other.data)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class MomentTensor(SymTensor):
    """Gaussian moment tensor; only even orders exist."""

    @property
    def matrix(self) -> np.ndarray:
        """The (d^(n/2), d^(n/2)) matricisation used by ``moment_inner``."""
        half = self.dim ** (self.order // 2)
        return self.data.reshape(half, half)


def rank_one_power(v: np.ndarray, n: int) -> SymTensor:
    """``v`` tensored with itself ``n`` times."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("v must be a vector")
    _check_size(v.shape[0], n)
    out = v
    for _ in range(n - 1):
        out = np.multiply.outer(out, v)
    return SymTensor(out)


def tau(W: np.ndarray, n: int) -> SymTensor:
    """Sum of the n-th tensor powers of the rows of ``W`` (n odd)."""
    if n < 1 or n % 2 == 0:
        raise InvalidOrderError(f"tau is defined for odd n >= 1, got {n}")
    W = np.atleast_2d(np.asarray(W, dtype=float))
    k, d = W.shape
    _check_size(d, n)
    acc = np.zeros((d,) * n)
    for row in W:
        acc += rank_one_power(row, n).data
    return SymTensor(acc)


def frob_inner(S: SymTensor, T: SymTensor) -> float:
    if S.data.shape != T.data.shape:
        raise ValueError(f"shape mismatch {S.data.shape} vs {T.data.shape}")
    return float(np.dot(S.vec(), T.vec()))


# (c - 1)!! for even c, the number of perfect matchings on c points.
def _pairing_counts(max_count: int) -> np.ndarray:
    table = np.zeros(max_count + 1, dtype=np.int64)
    table[0] = 1
    for c in range(2, max_count + 1, 2):
        table[c] = table[c - 2] * (c - 1)
    return table


def gaussian_moment_tensor(d: int, order: int) -> MomentTensor:
    """E[x^{(x) order}] for x ~ N(0, I_d).

    Entry (i_1..i_n) counts the perfect pairings of positions whose indices
    agree, which is the product of (c_a - 1)!! over index multiplicities c_a
    when all are even and zero otherwise.
    """
    if order < 2 or order % 2:
        raise InvalidOrderError(f"moment tensors need an even order >= 2, got {order}")
    _check_size(d, order)
    idx = np.indices((d,) * order).reshape(order, -1)
    table = _pairing_counts(order)
    entries = np.ones(idx.shape[1], dtype=np.int64)
    for a in range(d):
        entries *= table[(idx == a).sum(axis=0)]
    return MomentTensor(entries.astype(float).reshape((d,) * order))


def moment_inner(S: SymTensor, T: SymTensor, M: MomentTensor) -> float:
    """vec(S)^T mat(M) vec(T), the expectation of <x^{(x)n}, S><x^{(x)n}, T>."""
    if M.order != S.order + T.order or S.dim != M.dim or T.dim != M.dim:
        raise ValueError("moment tensor order must equal the sum of the two tensor orders")
    # mat(M) has rows indexed by the first n/2 axes; S and T share the order here.
    rows = M.dim**S.order
    mat = M.data.reshape(rows, -1)
    return float(S.vec() @ mat @ T.vec())


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_tensor_csv(T: SymTensor, path: str | Path) -> None:
    """Header line ``order,dim`` followed by one entry per line in lexicographic order."""
    lines = [f"{T.order},{T.dim}"]
    lines.extend(_fmt(x) for x in T.vec())
    Path(path).write_text("\n".join(lines) + "\n")


def read_tensor_csv(path: str | Path) -> SymTensor:
    text = Path(path).read_text().split()
    order, dim = (int(x) for x in text[0].split(","))
    values = np.array([float(x) for x in ",".join(text[1:]).split(",") if x], dtype=float)
    if values.size != dim**order:
        raise ValueError(f"expected {dim**order} entries, found {values.size}")
    return SymTensor(values.reshape((dim,) * order))


def write_matrix_csv(W: np.ndarray, path: str | Path) -> None:
    np.savetxt(path, np.atleast_2d(W), fmt="%.17g", delimiter=",")


def read_matrix_csv(path: str | Path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float))
