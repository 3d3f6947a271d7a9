"""The S_k x S_d action on weight matrices, isotropy groups and fixed-point spaces.

Isotropy detection works on a coloured structure built from the matrix:
entries are clustered into tolerance classes, vertices (rows and columns, or
just indices for the diagonal action) are coloured, and colour refinement
plus individualisation finds automorphisms.  The search follows the first
path of the refinement tree as a base and, level by level from the bottom,
looks for automorphisms sending each base point to the other members of its
target cell.  The orbit sizes along the base multiply to the group order and
the resulting transversals give a membership test by sifting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

SUB = str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉")
SUP = str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹")
DEFAULT_TOL = 1e-6
NODE_BUDGET = 200_000


class SearchBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Permutation:
    """One-line notation: ``image[i]`` is where ``i`` goes (0-based)."""

    image: tuple[int, ...]

    def __post_init__(self) -> None:
        img = tuple(int(x) for x in self.image)
        if sorted(img) != list(range(len(img))):
            raise ValueError(f"not a permutation: {img}")
        object.__setattr__(self, "image", img)

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(n)))

    @classmethod
    def from_cycles(cls, n: int, cycles: Sequence[Sequence[int]], one_based: bool = True) -> Permutation:
        img = list(range(n))
        off = 1 if one_based else 0
        for cyc in cycles:
            for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
                img[a - off] = b - off
        return cls(tuple(img))

    @property
    def n(self) -> int:
        return len(self.image)

    def __call__(self, i: int) -> int:
        return self.image[i]

    def __mul__(self, other: Permutation) -> Permutation:
        """(self * other)(i) = self(other(i))."""
        return Permutation(tuple(self.image[j] for j in other.image))

    def inverse(self) -> Permutation:
        inv = [0] * self.n
        for i, j in enumerate(self.image):
            inv[j] = i
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.image))

    def matrix(self) -> np.ndarray:
        """P with P[i, j] = 1 iff i = pi(j)."""
        P = np.zeros((self.n, self.n))
        P[list(self.image), list(range(self.n))] = 1.0
        return P

    def cycles(self) -> list[tuple[int, ...]]:
        """Non-trivial cycles, 1-based."""
        seen = [False] * self.n
        out = []
        for start in range(self.n):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            j = self.image[start]
            while j != start:
                cyc.append(j)
                seen[j] = True
                j = self.image[j]
            if len(cyc) > 1:
                out.append(tuple(x + 1 for x in cyc))
        return out

    def __str__(self) -> str:
        cyc = self.cycles()
        return "".join("(" + " ".join(map(str, c)) + ")" for c in cyc) if cyc else "()"


@dataclass(frozen=True)
class PermPair:
    row: Permutation
    col: Permutation

    @classmethod
    def identity(cls, k: int, d: int) -> PermPair:
        return cls(Permutation.identity(k), Permutation.identity(d))

    @classmethod
    def diagonal(cls, p: Permutation) -> PermPair:
        return cls(p, p)

    def __mul__(self, other: PermPair) -> PermPair:
        return PermPair(self.row * other.row, self.col * other.col)

    def inverse(self) -> PermPair:
        return PermPair(self.row.inverse(), self.col.inverse())

    def is_identity(self) -> bool:
        return self.row.is_identity() and self.col.is_identity()

    def is_diagonal(self) -> bool:
        return self.row == self.col

    def __str__(self) -> str:
        if self.is_diagonal():
            return str(self.row)
        return f"[{self.row};{self.col}]"


def act(pair: PermPair, A) -> np.ndarray:
    """(pi, rho) . A = P_pi A P_rho^T, i.e. out[i, j] = A[pi^-1(i), rho^-1(j)]."""
    A = np.asarray(A)
    if A.shape != (pair.row.n, pair.col.n):
        raise ValueError(f"pair acts on {pair.row.n}x{pair.col.n}, got {A.shape}")
    ri = np.argsort(pair.row.image)
    ci = np.argsort(pair.col.image)
    return A[np.ix_(ri, ci)]


# ---------------------------------------------------------------- quantisation


def quantize(W, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, bool]:
    """Single-linkage classes of the entries of W / max(1, |W|_max).

    Class ids increase with value.  The flag is set when some gap between
    consecutive sorted values lies in (tol, 2*tol], i.e. a split that a
    slightly larger tolerance would undo.
    """
    W = np.asarray(W, dtype=float)
    scale = max(1.0, float(np.max(np.abs(W)))) if W.size else 1.0
    x = (W / scale).ravel()
    order = np.argsort(x, kind="stable")
    gaps = np.diff(x[order])
    ids_sorted = np.concatenate([[0], np.cumsum(gaps > tol)])
    Q = np.empty(x.size, dtype=np.int64)
    Q[order] = ids_sorted
    ambiguous = bool(np.any((gaps > tol) & (gaps <= 2 * tol)))
    return Q.reshape(W.shape), ambiguous


# ------------------------------------------------------------ colour refinement


def _refine(E: np.ndarray, cells: list[list[int]]):
    """Equitable refinement of an ordered partition; returns (cells, invariant)."""
    n = E.shape[0]
    cell_of = np.empty(n, dtype=np.int64)
    while True:
        nc = len(cells)
        for ci, cell in enumerate(cells):
            cell_of[cell] = ci
        sig = np.concatenate(
            [np.sort(E * nc + cell_of[None, :], axis=1), np.sort(E.T * nc + cell_of[None, :], axis=1)],
            axis=1,
        )
        new_cells: list[list[int]] = []
        for cell in cells:
            if len(cell) == 1:
                new_cells.append(cell)
                continue
            uniq, inv = np.unique(sig[cell], axis=0, return_inverse=True)
            inv = np.asarray(inv).ravel()
            if len(uniq) == 1:
                new_cells.append(cell)
                continue
            for u in range(len(uniq)):
                new_cells.append([v for v, t in zip(cell, inv) if t == u])
        if len(new_cells) == nc:
            invariant = tuple((len(c), sig[c[0]].tobytes()) for c in cells)
            return cells, invariant
        cells = new_cells


def _individualize(cells: list[list[int]], v: int) -> list[list[int]]:
    out = []
    for cell in cells:
        if v in cell and len(cell) > 1:
            out.append([v])
            out.append([u for u in cell if u != v])
        else:
            out.append(cell)
    return out


def _orbits(n: int, gens: Sequence[np.ndarray]) -> list[int]:
    """Union-find orbit representatives (smallest element) for each point."""
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in gens:
        for x in range(n):
            a, b = find(x), find(int(g[x]))
            if a != b:
                parent[max(a, b)] = min(a, b)
    return [find(x) for x in range(n)]


def _orbit_of(x: int, gens: Sequence[np.ndarray]) -> set[int]:
    seen = {x}
    stack = [x]
    while stack:
        y = stack.pop()
        for g in gens:
            z = int(g[y])
            if z not in seen:
                seen.add(z)
                stack.append(z)
    return seen


class _AutSearch:
    """Automorphism group of an edge-coloured complete digraph ``E``."""

    def __init__(self, E: np.ndarray, init_cells: list[list[int]], budget: int = NODE_BUDGET):
        self.E = E
        self.n = E.shape[0]
        self.budget = budget
        self.nodes = 0
        self.exact = True
        cells, inv = _refine(E, [list(c) for c in init_cells if c])
        self.path = [cells]
        self.invs = [inv]
        self.base: list[int] = []
        self.targets: list[int] = []
        while any(len(c) > 1 for c in cells):
            ti = next(i for i, c in enumerate(cells) if len(c) > 1)
            v = cells[ti][0]
            self.base.append(v)
            self.targets.append(ti)
            cells, inv = _refine(E, _individualize(cells, v))
            self.path.append(cells)
            self.invs.append(inv)
        self.leaf = cells
        self.gens: list[np.ndarray] = []
        self.level_gens: list[int] = [0] * (len(self.base) + 1)
        self.orbit_sizes: list[int] = [1] * len(self.base)
        self._run()
        self._transversals()

    def _is_auto(self, g: np.ndarray) -> bool:
        return bool(np.array_equal(self.E[np.ix_(g, g)], self.E))

    def _leaf_map(self, cells) -> np.ndarray:
        g = np.empty(self.n, dtype=np.int64)
        for a, b in zip(self.leaf, cells):
            g[a[0]] = b[0]
        return g

    def _dfs(self, cells, lvl: int):
        self.nodes += 1
        if self.nodes > self.budget:
            raise SearchBudgetExceeded
        if lvl == len(self.base):
            g = self._leaf_map(cells)
            return g if self._is_auto(g) else None
        for y in cells[self.targets[lvl]]:
            c2, inv2 = _refine(self.E, _individualize(cells, y))
            if inv2 != self.invs[lvl + 1]:
                continue
            g = self._dfs(c2, lvl + 1)
            if g is not None:
                return g
        return None

    def _run(self) -> None:
        m = len(self.base)
        self.level_gens[m] = 0
        for lvl in reversed(range(m)):
            b = self.base[lvl]
            cell = self.path[lvl][self.targets[lvl]]
            orbit = _orbit_of(b, self.gens)
            for y in cell:
                if y in orbit:
                    continue
                P = self.path[lvl]
                c2, inv2 = _refine(self.E, _individualize(P, y))
                if inv2 != self.invs[lvl + 1]:
                    continue
                try:
                    g = self._dfs(c2, lvl + 1)
                except SearchBudgetExceeded:
                    self.exact = False
                    self.nodes = 0
                    continue
                if g is not None:
                    self.gens.append(g)
                    orbit = _orbit_of(b, self.gens)
            self.orbit_sizes[lvl] = len(orbit)
            self.level_gens[lvl] = len(self.gens)

    def _transversals(self) -> None:
        # level l uses the generators found while processing levels >= l
        self.trans: list[dict[int, np.ndarray]] = []
        ident = np.arange(self.n)
        for lvl, b in enumerate(self.base):
            gens = self.gens[: self.level_gens[lvl]]
            T = {b: ident}
            stack = [b]
            while stack:
                y = stack.pop()
                for g in gens:
                    z = int(g[y])
                    if z not in T:
                        T[z] = g[T[y]]
                        stack.append(z)
            self.trans.append(T)

    @property
    def order(self) -> int:
        return math.prod(self.orbit_sizes)

    def contains(self, h: np.ndarray) -> bool:
        h = np.asarray(h, dtype=np.int64)
        for lvl, b in enumerate(self.base):
            y = int(h[b])
            u = self.trans[lvl].get(y)
            if u is None:
                return False
            uinv = np.argsort(u)
            h = uinv[h]
        return bool(np.array_equal(h, np.arange(self.n)))


# ---------------------------------------------------------------- structures


def _full_structure(Q: np.ndarray):
    k, d = Q.shape
    nq = int(Q.max()) + 1 if Q.size else 1
    n = k + d
    E = np.zeros((n, n), dtype=np.int64)
    E[k:, k:] = 1
    E[:k, k:] = 2 + Q
    E[k:, :k] = 2 + nq + Q.T
    return E, [list(range(k)), list(range(k, n))]


def _diag_structure(Q: np.ndarray):
    d = Q.shape[0]
    E = Q.astype(np.int64).copy()
    diag = np.diag(Q)
    cells = [[i for i in range(d) if diag[i] == c] for c in sorted(set(diag.tolist()))]
    return E, cells


@dataclass
class IsotropyGroup:
    generators: list[PermPair]
    order: int
    k: int
    d: int
    action: str = "full"
    exact: bool = True
    ambiguous: bool = False
    label: str | None = None
    _search: _AutSearch | None = field(default=None, repr=False)
    _Q: np.ndarray | None = field(default=None, repr=False)

    def contains(self, pair: PermPair) -> bool:
        if self.action == "diagonal":
            if not pair.is_diagonal():
                return False
            h = np.array(pair.row.image)
        else:
            h = np.array(pair.row.image + tuple(self.k + j for j in pair.col.image))
        return self._search.contains(h)

    def diagonal_subgroup(self) -> IsotropyGroup:
        if self.action == "diagonal":
            return self
        if self.k != self.d:
            raise ValueError("diagonal subgroup needs k == d")
        return _group_from_Q(self._Q, "diagonal", self.ambiguous)


def _group_from_Q(Q: np.ndarray, action: str, ambiguous: bool = False) -> IsotropyGroup:
    k, d = Q.shape
    if action == "full":
        E, cells = _full_structure(Q)
    elif action == "diagonal":
        if k != d:
            raise ValueError("the diagonal action needs a square matrix")
        E, cells = _diag_structure(Q)
    else:
        raise ValueError(f"unknown action {action!r}")
    search = _AutSearch(E, cells)
    gens = []
    for g in search.gens:
        if action == "full":
            gens.append(PermPair(Permutation(tuple(g[:k])), Permutation(tuple(int(x) - k for x in g[k:]))))
        else:
            gens.append(PermPair.diagonal(Permutation(tuple(g))))
    return IsotropyGroup(gens, search.order, k, d, action, search.exact, ambiguous, None, search, Q)


def isotropy_group(W, tol: float = DEFAULT_TOL, action: str = "full") -> IsotropyGroup:
    """Generators and order of {(pi, rho): act((pi, rho), W) = W up to tol}.

    ``action="diagonal"`` restricts to pairs (sigma, sigma).  Equality is
    judged on tolerance classes (see :func:`quantize`).
    """
    Q, amb = quantize(np.atleast_2d(W), tol)
    return _group_from_Q(Q, action, amb)


# ----------------------------------------------------------- canonical form


def _canonical_diag_order(Q: np.ndarray) -> list[int]:
    """Index order giving the lexicographically least relabelled matrix."""
    d = Q.shape[0]
    E = (Q.max() - Q).astype(np.int64)  # large values get small colours
    reps = _orbits(d, _group_from_Q(Q, "diagonal")._search.gens)
    size = {r: reps.count(r) for r in set(reps)}
    diag = np.diag(E)
    key = [(-size[reps[i]], int(diag[i])) for i in range(d)]
    cells = [[i for i in range(d) if key[i] == kk] for kk in sorted(set(key))]
    # same tree as the canonical search below, so its first path is the base
    aut = _AutSearch(E, cells)
    gens = aut.gens
    best: list = [None, None]
    nodes = [0]

    def stabiliser(path: list[int]) -> list[np.ndarray]:
        if path == aut.base[: len(path)]:
            return gens[: aut.level_gens[len(path)]] if len(path) < len(aut.base) else []
        return [g for g in gens if all(int(g[p]) == p for p in path)]

    def visit(cells, path):
        nodes[0] += 1
        if nodes[0] > NODE_BUDGET:
            raise SearchBudgetExceeded
        if all(len(c) == 1 for c in cells):
            order = [c[0] for c in cells]
            cert = E[np.ix_(order, order)].tobytes()
            if best[0] is None or cert < best[0]:
                best[0], best[1] = cert, order
            return
        ti = next(i for i, c in enumerate(cells) if len(c) > 1)
        stab = stabiliser(path)
        seen: set[int] = set()
        for y in cells[ti]:
            if y in seen:
                continue
            seen |= _orbit_of(y, stab)
            c2, _ = _refine(E, _individualize(cells, y))
            visit(c2, path + [y])

    try:
        visit(aut.path[0], [])
    except SearchBudgetExceeded:
        pass
    return best[1]


def canonical_align(W, tol: float = DEFAULT_TOL) -> tuple[PermPair, np.ndarray]:
    """A canonical representative of W under the action.

    Square W: rows are first matched to columns by a maximum-weight
    assignment on |W|, then a common relabelling puts the diagonal isotropy
    orbits in blocks (larger blocks first) and picks the least certificate.
    Rectangular W: rows are sorted by their tolerance classes.
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    k, d = W.shape
    Q0, _ = quantize(W, tol)
    if k != d:
        order = sorted(range(k), key=lambda i: tuple(Q0[i]))
        pi = Permutation(tuple(np.argsort(order)))
        pair = PermPair(pi, Permutation.identity(d))
        return pair, act(pair, W)
    _, col = linear_sum_assignment(-np.abs(W))
    first = PermPair(Permutation(tuple(int(c) for c in col)), Permutation.identity(d))
    W1 = act(first, W)
    Q1, _ = quantize(W1, tol)
    order = _canonical_diag_order(Q1)
    sigma = Permutation(tuple(int(x) for x in np.argsort(order)))
    pair = PermPair.diagonal(sigma) * first
    out = act(pair, W)
    if np.array_equal(quantize(out, tol)[0], Q0):
        return PermPair.identity(k, d), W.copy()
    return pair, out


# ------------------------------------------------------------------ labels


def _closure_order(gens: list[tuple[int, ...]], limit: int = 10**6) -> int:
    if not gens:
        return 1
    ident = tuple(range(len(gens[0])))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = tuple(g[i] for i in p)
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
                    if len(seen) > limit:
                        return -1
        frontier = nxt
    return len(seen)


def _fmt_young(n: int, ascii_: bool) -> str:
    return f"S{n}" if ascii_ else "S" + str(n).translate(SUB)


def _fmt_gens(gens: Sequence, ascii_: bool) -> str:
    body = ", ".join(str(g) for g in gens)
    return f"<{body}>" if ascii_ else f"⟨{body}⟩"


def label_isotropy(group: IsotropyGroup, k: int | None = None, d: int | None = None, ascii: bool = False) -> str:
    """Caption-style name of a group of pairs.

    Diagonal groups are written as products of full symmetric groups on
    their orbits, times whatever remains as an explicit subgroup, e.g.
    ``Δ(S₉×S₂×S₁)`` or ``Δ(S₈×⟨(9 10)(11 12)⟩)``.
    """
    k = group.k if k is None else k
    d = group.d if d is None else d
    gens = [g for g in group.generators if not g.is_identity()]
    if not gens:
        return "1"
    times = "x" if ascii else "×"
    if not all(g.is_diagonal() for g in gens):
        return _fmt_gens(gens, ascii)
    delta = "D" if ascii else "Δ"
    perms = [g.row for g in gens]
    arrs = [np.array(p.image) for p in perms]
    reps = _orbits(d, arrs)
    orbits: dict[int, list[int]] = {}
    for i, r in enumerate(reps):
        orbits.setdefault(r, []).append(i)

    def transposition(a: int, b: int) -> PermPair:
        img = list(range(d))
        img[a], img[b] = b, a
        return PermPair.diagonal(Permutation(tuple(img)))

    full = [
        o for o in orbits.values()
        if len(o) > 1 and all(group.contains(transposition(o[t], o[t + 1])) for t in range(len(o) - 1))
    ]
    covered = {i for o in full for i in o}
    rest = [i for i in range(d) if i not in covered]
    restricted = []
    for p in perms:
        img = tuple(rest.index(p(i)) for i in rest)
        if any(i != j for i, j in enumerate(img)) and img not in restricted:
            restricted.append(img)
    young = math.prod(math.factorial(len(o)) for o in full)
    h_order = _closure_order(restricted)
    if h_order < 0 or young * h_order != group.order:
        return delta + _fmt_gens(perms, ascii)
    # drop redundant generators of the remainder
    kept = list(restricted)
    for g in list(kept):
        trial = [x for x in kept if x != g]
        if _closure_order(trial) == h_order:
            kept = trial
    moved = {rest[i] for g in kept for i, j in enumerate(g) if i != j}
    fixed = [i for i in rest if i not in moved]
    parts = [_fmt_young(n, ascii) for n in sorted((len(o) for o in full), reverse=True)]
    if kept:
        lifted = []
        for g in kept:
            img = list(range(d))
            for i, j in enumerate(g):
                img[rest[i]] = rest[j]
            lifted.append(Permutation(tuple(img)))
        parts.append(_fmt_gens(lifted, ascii))
    if fixed and (full or kept):
        one = _fmt_young(1, ascii)
        if len(fixed) == 1:
            parts.append(one)
        else:
            parts.append(one + (f"^{len(fixed)}" if ascii else str(len(fixed)).translate(SUP)))
    if not full and kept:
        return delta + _fmt_gens(lifted, ascii)
    return f"{delta}({times.join(parts)})"


def label_matrix(W, tol: float = DEFAULT_TOL, ascii: bool = False) -> str:
    """Label of the diagonal isotropy of the canonically aligned ``W``."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    k, d = W.shape
    _, Wc = canonical_align(W, tol)
    if k != d:
        return label_isotropy(isotropy_group(Wc, tol), ascii=ascii)
    return label_isotropy(isotropy_group(Wc, tol, action="diagonal"), ascii=ascii)


def label_aligned(W, tol: float = DEFAULT_TOL, ascii: bool = False) -> str:
    """Label of the diagonal isotropy of ``W`` as given (no realignment)."""
    return label_isotropy(isotropy_group(W, tol, action="diagonal"), ascii=ascii)


# ------------------------------------------------------------ fixed points


@dataclass(frozen=True)
class FixedPointBasis:
    spec: str
    k: int
    d: int
    orbits: tuple[tuple[tuple[int, int], ...], ...]

    @property
    def dim(self) -> int:
        return len(self.orbits)

    @property
    def basis(self) -> list[np.ndarray]:
        out = []
        for orb in self.orbits:
            B = np.zeros((self.k, self.d))
            for i, j in orb:
                B[i, j] = 1.0
            out.append(B)
        return out

    def embed(self, coords) -> np.ndarray:
        coords = list(coords)
        if len(coords) != self.dim:
            raise ValueError(f"expected {self.dim} coordinates")
        numeric = all(isinstance(c, (int, float, np.floating, np.integer)) for c in coords)
        W = np.zeros((self.k, self.d), dtype=float if numeric else object)
        for c, orb in zip(coords, self.orbits):
            for i, j in orb:
                W[i, j] = c
        return W

    def project(self, W) -> list:
        W = np.asarray(W)
        return [sum(W[i, j] for i, j in orb) / len(orb) for orb in self.orbits]

    def maps(self) -> tuple[Callable, Callable]:
        return self.project, self.embed


def _cell_orbits(k: int, d: int, pairs: Sequence[PermPair]) -> tuple:
    gens = []
    for p in pairs:
        g = np.empty(k * d, dtype=np.int64)
        for i in range(k):
            for j in range(d):
                g[i * d + j] = p.row(i) * d + p.col(j)
        gens.append(g)
    reps = _orbits(k * d, gens)
    groups: dict[int, list[tuple[int, int]]] = {}
    for idx, r in enumerate(reps):
        groups.setdefault(r, []).append(divmod(idx, d))
    return tuple(tuple(v) for _, v in sorted(groups.items()))


def _sym_gens(block: Sequence[int], n: int) -> list[Permutation]:
    """Transposition and long cycle generating the symmetric group on ``block``."""
    if len(block) < 2:
        return []
    swap = list(range(n))
    swap[block[0]], swap[block[1]] = block[1], block[0]
    cyc = list(range(n))
    for a, b in zip(block, list(block[1:]) + [block[0]]):
        cyc[a] = b
    return [Permutation(tuple(swap)), Permutation(tuple(cyc))]


def parse_spec(spec) -> tuple[str, tuple[int, ...]]:
    """Normalise a fixed-point spec to (kind, sizes)."""
    if isinstance(spec, (tuple, list)):
        return "young", tuple(int(x) for x in spec)
    key = str(spec).replace(" ", "").replace("Δ", "Delta").replace("_", "")
    low = key.lower()
    if low in ("deltasd", "dsd"):
        return "deltasd", ()
    if low in ("sdxsd", "sd×sd"):
        return "sdxsd", ()
    if low in ("deltazd", "dzd"):
        return "deltazd", ()
    if low.startswith("young:") or low.startswith("delta(") or low.startswith("d("):
        body = key.split(":", 1)[1] if ":" in key else key[key.index("(") + 1 : key.rindex(")")]
        sizes: list[int] = []
        for part in body.replace("x", ",").replace("×", ",").split(","):
            if not part:
                continue
            part = part.lstrip("Ss")
            if "^" in part:
                n, m = part.split("^")
                sizes.extend([int(n)] * int(m))
            else:
                sizes.append(int(part))
        return "young", tuple(sizes)
    raise ValueError(f"invalid fixed-point spec {spec!r}")


def spec_generators(spec, k: int, d: int) -> list[PermPair]:
    kind, sizes = parse_spec(spec)
    if kind == "sdxsd":
        rows = _sym_gens(list(range(k)), k)
        cols = _sym_gens(list(range(d)), d)
        return [PermPair(r, Permutation.identity(d)) for r in rows] + [
            PermPair(Permutation.identity(k), c) for c in cols
        ]
    if k != d:
        raise ValueError("diagonal subgroups need k == d")
    if kind == "deltasd":
        return [PermPair.diagonal(p) for p in _sym_gens(list(range(d)), d)]
    if kind == "deltazd":
        return [PermPair.diagonal(Permutation(tuple((i + 1) % d for i in range(d))))]
    if sum(sizes) != d or any(s < 1 for s in sizes):
        raise ValueError(f"block sizes {sizes} do not partition {d}")
    gens = []
    start = 0
    for s in sizes:
        gens += [PermPair.diagonal(p) for p in _sym_gens(list(range(start, start + s)), d)]
        start += s
    return gens


def fixed_point_basis(spec, k: int, d: int) -> FixedPointBasis:
    """Orbit indicators of the cells of M(k, d) under the named subgroup.

    Specs: ``"DeltaSd"``, ``"SdxSd"``, ``"DeltaZd"`` or Young block sizes
    such as ``(9, 2, 1)`` / ``"Young:9,2,1"`` (contiguous blocks).
    """
    kind, sizes = parse_spec(spec)
    gens = spec_generators(spec, k, d)
    name = kind if kind != "young" else "young:" + ",".join(map(str, sizes))
    return FixedPointBasis(name, k, d, _cell_orbits(k, d, gens))


def project_and_embed(basis: FixedPointBasis) -> tuple[Callable, Callable]:
    return basis.maps()


def orbit_average(W, group: IsotropyGroup) -> np.ndarray:
    """Projection of ``W`` onto the fixed-point space of ``group``."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    k, d = W.shape
    out = np.empty_like(W)
    for orb in _cell_orbits(k, d, group.generators):
        idx = tuple(np.array(orb).T)
        out[idx] = W[idx].mean()
    return out
