"""Reduced lex Groebner bases over Q by Buchberger's algorithm with sugar selection."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .poly import MultiPoly, VariableMismatchError

MAX_DIGITS = 10**6
MAX_ELEMENTS = 500

Mono = tuple[int, ...]
Terms = dict[Mono, Fraction]


class GroebnerCapError(RuntimeError):
    """The run exceeded the coefficient-size or basis-size cap."""


@dataclass(frozen=True)
class GroebnerBasis:
    vars: tuple[str, ...]
    polys: tuple[MultiPoly, ...]

    def __iter__(self):
        return iter(self.polys)

    def __len__(self) -> int:
        return len(self.polys)

    def __getitem__(self, i) -> MultiPoly:
        return self.polys[i]

    def eliminant(self, var: str) -> MultiPoly | None:
        """The basis element involving only ``var`` (lex puts it last)."""
        for p in reversed(self.polys):
            if set(p.used_vars()) <= {var}:
                return p
        return None

    def is_unit(self) -> bool:
        return any(p.total_degree() == 0 for p in self.polys)


def _divides(a: Mono, b: Mono) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _lcm(a: Mono, b: Mono) -> Mono:
    return tuple(max(x, y) for x, y in zip(a, b))


def _sub(a: Mono, b: Mono) -> Mono:
    return tuple(x - y for x, y in zip(a, b))


def _lead(p: Terms) -> Mono:
    return max(p)


def _monic(p: Terms) -> Terms:
    c = p[_lead(p)]
    return p if c == 1 else {m: v / c for m, v in p.items()}


def _check_size(p: Terms) -> None:
    for c in p.values():
        if max(c.numerator.bit_length(), c.denominator.bit_length()) > 3.33 * MAX_DIGITS:
            raise GroebnerCapError("coefficient exceeds 10^6 digits")


def _normal_form(p: Terms, G: Sequence[Terms], leads: Sequence[Mono]) -> Terms:
    """Full reduction of ``p`` by ``G`` (all terms, not just the leading one)."""
    p = dict(p)
    rem: Terms = {}
    while p:
        m = max(p)
        c = p[m]
        for g, lg in zip(G, leads):
            if _divides(lg, m):
                shift = _sub(m, lg)
                f = c / g[lg]
                for gm, gc in g.items():
                    t = tuple(x + y for x, y in zip(gm, shift))
                    v = p.get(t, 0) - f * gc
                    if v:
                        p[t] = v
                    else:
                        p.pop(t, None)
                break
        else:
            rem[m] = c
            del p[m]
    return rem


def _spoly(f: Terms, g: Terms) -> Terms:
    lf, lg = _lead(f), _lead(g)
    l = _lcm(lf, lg)
    sf, sg = _sub(l, lf), _sub(l, lg)
    cf, cg = f[lf], g[lg]
    out: Terms = {}
    for m, c in f.items():
        out[tuple(x + y for x, y in zip(m, sf))] = c / cf
    for m, c in g.items():
        t = tuple(x + y for x, y in zip(m, sg))
        v = out.get(t, 0) - c / cg
        if v:
            out[t] = v
        else:
            out.pop(t, None)
    return out


def _interreduce(G: list[Terms]) -> list[Terms]:
    G = [_monic(g) for g in G if g]
    # drop elements whose leading term is divisible by another's
    G.sort(key=_lead)
    minimal: list[Terms] = []
    for g in G:
        lg = _lead(g)
        if not any(_divides(_lead(h), lg) for h in minimal):
            minimal = [h for h in minimal if not _divides(lg, _lead(h))]
            minimal.append(g)
    out = []
    for i, g in enumerate(minimal):
        others = minimal[:i] + minimal[i + 1 :]
        lg = _lead(g)
        tail = {m: c for m, c in g.items() if m != lg}
        r = _normal_form(tail, others, [_lead(h) for h in others])
        r[lg] = Fraction(1)
        out.append(r)
    out.sort(key=_lead, reverse=True)
    return out


def _align(polys: Iterable[MultiPoly], vars: Sequence[str] | None) -> tuple[tuple[str, ...], list[MultiPoly]]:
    polys = list(polys)
    if vars is None:
        if not polys:
            return (), []
        vars = polys[0].vars
    vars = tuple(vars)
    return vars, [p.with_vars(vars) for p in polys]


def groebner_lex(polys: Iterable[MultiPoly], vars: Sequence[str] | None = None) -> GroebnerBasis:
    """Reduced Groebner basis under lex with priority ``vars[0] > vars[1] > ...``.

    Pairs are taken smallest sugar first (ties by the lex-smaller lcm, then
    by insertion order), so the run is deterministic for a fixed input
    order.  Pairs with coprime leading monomials are skipped, as are pairs
    covered by the chain criterion.
    """
    vars, polys = _align(polys, vars)
    G: list[Terms] = []
    sugar: list[int] = []
    pairs: list[tuple[int, Mono, int, int]] = []

    def add(h: Terms, s: int) -> None:
        h = _monic(h)
        _check_size(h)
        lh = _lead(h)
        n = len(G)
        G.append(h)
        sugar.append(s)
        if len(G) > MAX_ELEMENTS:
            raise GroebnerCapError(f"basis exceeds {MAX_ELEMENTS} elements")
        for i in range(n):
            if G[i] is None:
                continue
            li = _lead(G[i])
            l = _lcm(li, lh)
            ps = max(sugar[i] + sum(l) - sum(li), s + sum(l) - sum(lh))
            pairs.append((ps, l, i, n))

    for p in polys:
        if p.terms:
            t = dict(p.terms)
            add(t, max(sum(m) for m in t))
    while pairs:
        pairs.sort(key=lambda q: (q[0], q[1], q[2], q[3]))
        s, l, i, j = pairs.pop(0)
        li, lj = _lead(G[i]), _lead(G[j])
        if all(not (x and y) for x, y in zip(li, lj)):
            continue  # coprime leading monomials
        if _chain(l, i, j, G, pairs):
            continue
        active = [g for g in G if g is not None]
        h = _normal_form(_spoly(G[i], G[j]), active, [_lead(g) for g in active])
        if h:
            add(h, s)
    basis = _interreduce([g for g in G if g is not None])
    return GroebnerBasis(vars, tuple(MultiPoly(g, vars) for g in basis))


def _chain(l: Mono, i: int, j: int, G: list[Terms], pending) -> bool:
    """Buchberger's second criterion: some k with lt(g_k) | lcm and both (i,k), (j,k) done."""
    open_pairs = {(a, b) for _, _, a, b in pending}
    for k, g in enumerate(G):
        if k in (i, j) or g is None:
            continue
        if _divides(_lead(g), l):
            if (min(i, k), max(i, k)) not in open_pairs and (min(j, k), max(j, k)) not in open_pairs:
                return True
    return False


def reduce(p: MultiPoly, basis: GroebnerBasis | Sequence[MultiPoly]) -> MultiPoly:
    """Remainder of multivariate division; zero iff ``p`` lies in the ideal of a Groebner basis."""
    if isinstance(basis, GroebnerBasis):
        vars, polys = basis.vars, list(basis.polys)
    else:
        polys = list(basis)
        vars = polys[0].vars if polys else p.vars
    if not polys:
        return p
    try:
        pv = p.with_vars(vars)
    except VariableMismatchError:
        raise
    G = [dict(g.with_vars(vars).terms) for g in polys if g.terms]
    r = _normal_form(dict(pv.terms), G, [_lead(g) for g in G])
    return MultiPoly(r, vars)


def s_polynomial(f: MultiPoly, g: MultiPoly) -> MultiPoly:
    vars = f.vars
    return MultiPoly(_spoly(dict(f.terms), dict(g.with_vars(vars).terms)), vars)


def is_groebner(basis: GroebnerBasis) -> bool:
    """Every pairwise S-polynomial reduces to zero."""
    ps = basis.polys
    return all(
        reduce(s_polynomial(ps[i], ps[j]), basis).is_zero()
        for i in range(len(ps))
        for j in range(i + 1, len(ps))
    )


def is_reduced(basis: GroebnerBasis) -> bool:
    """Monic, and no term of an element is divisible by another element's leading monomial."""
    leads = [p.leading()[0] for p in basis.polys]
    for i, p in enumerate(basis.polys):
        if p.leading()[1] != 1:
            return False
        for j, lj in enumerate(leads):
            if i != j and any(_divides(lj, m) for m in p.terms):
                return False
    return True
