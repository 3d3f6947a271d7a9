"""Certified real-root isolation for univariate rational polynomials."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Sequence

import mpmath

from .poly import MultiPoly

Coeffs = list[Fraction]  # low to high


@dataclass(frozen=True)
class IsolatedRoot:
    lo: Fraction
    hi: Fraction
    value: mpmath.mpf
    multiplicity: int
    exact: Fraction | None = None

    def __float__(self) -> float:
        return float(self.value)

    def contains(self, x) -> bool:
        return self.lo <= Fraction(x) <= self.hi


def _trim(p: Coeffs) -> Coeffs:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _eval(p: Coeffs, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _deriv(p: Coeffs) -> Coeffs:
    return [c * i for i, c in enumerate(p)][1:]


def _divmod(a: Coeffs, b: Coeffs) -> tuple[Coeffs, Coeffs]:
    a, b = _trim(a), _trim(b)
    if not b:
        raise ZeroDivisionError("division by the zero polynomial")
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    r = list(a)
    lb = b[-1]
    while len(r) >= len(b) and r:
        f = r[-1] / lb
        shift = len(r) - len(b)
        q[shift] = f
        for i, c in enumerate(b):
            r[i + shift] -= f * c
        r = _trim(r)
    return _trim(q), r


def _primitive(p: Coeffs) -> Coeffs:
    """Scale to integer coefficients with content 1 and positive leading coefficient."""
    p = _trim(p)
    if not p:
        return p
    den = 1
    for c in p:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in p]
    g = 0
    for c in ints:
        g = gcd(g, c)
    if ints[-1] < 0:
        g = -g
    return [Fraction(c // g) for c in ints]


def _gcd(a: Coeffs, b: Coeffs) -> Coeffs:
    a, b = _primitive(a), _primitive(b)
    while b:
        _, r = _divmod(a, b)
        a, b = b, _primitive(r)
    return _primitive(a)


def squarefree_decomposition(p: Coeffs) -> list[tuple[Coeffs, int]]:
    """Yun's algorithm: p = c * prod f_i^i with f_i square-free and pairwise coprime."""
    p = _primitive(p)
    if len(p) <= 1:
        return []
    out = []
    a = _gcd(p, _deriv(p))
    b, _ = _divmod(p, a)
    c, _ = _divmod(_deriv(p), a)
    d = [x - y for x, y in _pad(c, _deriv(b))]
    i = 1
    while len(_trim(b)) > 1:
        a = _gcd(b, d)
        b, _ = _divmod(b, a)
        c, _ = _divmod(d, a)
        d = [x - y for x, y in _pad(c, _deriv(b))]
        if len(_trim(a)) > 1:
            out.append((_primitive(a), i))
        i += 1
    return out


def _pad(a: Coeffs, b: Coeffs) -> list[tuple[Fraction, Fraction]]:
    n = max(len(a), len(b))
    a = list(a) + [Fraction(0)] * (n - len(a))
    b = list(b) + [Fraction(0)] * (n - len(b))
    return list(zip(a, b))


def sturm_sequence(p: Coeffs) -> list[Coeffs]:
    seq = [_primitive(p), _primitive(_deriv(p))]
    while len(_trim(seq[-1])) > 0:
        _, r = _divmod(seq[-2], seq[-1])
        r = _trim(r)
        if not r:
            break
        # keep the sign of -r while clearing denominators
        prim = _primitive(r)
        if (prim[-1] > 0) == (r[-1] > 0):
            prim = [-c for c in prim]
        seq.append(prim)
    return seq


def _sign_changes(seq: Sequence[Coeffs], x: Fraction) -> int:
    signs = [s for s in (_sign(_eval(p, x)) for p in seq) if s]
    return sum(1 for u, v in zip(signs, signs[1:]) if u != v)


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def cauchy_bound(p: Coeffs) -> Fraction:
    p = _trim(p)
    lead = abs(p[-1])
    return 1 + max((abs(c) / lead for c in p[:-1]), default=Fraction(0))


def _simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """Rational with the smallest denominator in [lo, hi] (Stern-Brocot descent)."""
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        return -_simplest_between(-hi, -lo)
    fl = lo.numerator // lo.denominator
    if Fraction(fl) == lo:
        return lo
    if fl + 1 <= hi:
        return Fraction(fl + 1)
    inner = _simplest_between(1 / (hi - fl), 1 / (lo - fl))
    return fl + 1 / inner


def _isolate(p: Coeffs, seq, lo: Fraction, hi: Fraction, out: list) -> None:
    n = _sign_changes(seq, lo) - _sign_changes(seq, hi)
    if n == 0:
        return
    if n == 1:
        out.append((lo, hi))
        return
    mid = (lo + hi) / 2
    if _eval(p, mid) == 0:
        # nudge the split point off the root
        eps = (hi - lo) / 1024
        while _eval(p, mid + eps) == 0 or _eval(p, mid - eps) == 0:
            eps /= 2
        out.append((mid - eps, mid + eps))
        _isolate(p, seq, lo, mid - eps, out)
        _isolate(p, seq, mid + eps, hi, out)
        return
    _isolate(p, seq, lo, mid, out)
    _isolate(p, seq, mid, hi, out)


def _refine(p: Coeffs, lo: Fraction, hi: Fraction, width: Fraction) -> tuple[Fraction, Fraction]:
    slo = _sign(_eval(p, lo))
    while hi - lo > width:
        mid = (lo + hi) / 2
        s = _sign(_eval(p, mid))
        if s == 0:
            return mid, mid
        if s == slo:
            lo = mid
        else:
            hi = mid
    return lo, hi


def real_roots(p: MultiPoly | Sequence, precision: float = 1e-30, var: str | None = None) -> list[IsolatedRoot]:
    """All real roots of a univariate polynomial, sorted, with multiplicities.

    ``p`` is a univariate MultiPoly or a coefficient list (low to high).
    Isolation is exact (Sturm sequences of each square-free factor); the
    reported ``value`` is polished by Newton in 128-bit mpmath arithmetic and
    ``exact`` is set when the root is rational.
    """
    if isinstance(p, MultiPoly):
        used = p.used_vars()
        if len(used) > 1:
            raise ValueError(f"not univariate: {used}")
        if p.is_zero():
            raise ValueError("the zero polynomial has no isolated roots")
        v = var or (used[0] if used else p.vars[0])
        coeffs = p.univariate(v)
    else:
        coeffs = [Fraction(c) for c in p]
    coeffs = _trim(coeffs)
    if not coeffs:
        raise ValueError("the zero polynomial has no isolated roots")
    width = Fraction(precision)
    roots: list[IsolatedRoot] = []
    for f, mult in squarefree_decomposition(coeffs):
        seq = sturm_sequence(f)
        B = cauchy_bound(f)
        boxes: list[tuple[Fraction, Fraction]] = []
        lo, hi = -B, B
        if _eval(f, lo) == 0 or _eval(f, hi) == 0:
            lo, hi = lo - 1, hi + 1
        _isolate(f, seq, lo, hi, boxes)
        for a, b in boxes:
            roots.append(_finish(f, a, b, mult, width))
    roots.sort(key=lambda r: r.lo)
    return roots


def _mpq(q: Fraction) -> mpmath.mpf:
    with mpmath.workprec(128):
        return mpmath.mpf(q.numerator) / q.denominator


def _finish(f: Coeffs, a: Fraction, b: Fraction, mult: int, width: Fraction) -> IsolatedRoot:
    # a square-free f with one root in [a, b]: shrink until the sign differs at the ends
    if _eval(f, a) == 0:
        return IsolatedRoot(a, a, _mpq(a), mult, a)
    if _eval(f, b) == 0:
        return IsolatedRoot(b, b, _mpq(b), mult, b)
    lo, hi = _refine(f, a, b, max(width, (b - a) / 2**40))
    if lo == hi:
        return IsolatedRoot(lo, hi, _mpq(lo), mult, lo)
    cand = _simplest_between(lo, hi)
    if _eval(f, cand) == 0:
        return IsolatedRoot(cand, cand, _mpq(cand), mult, cand)
    with mpmath.workprec(128):
        fp = [_mpq(c) for c in f]
        dfp = [c * i for i, c in enumerate(fp)][1:]
        x = (_mpq(lo) + _mpq(hi)) / 2
        mlo = _mpq(lo)
        mhi = _mpq(hi)
        for _ in range(100):
            fx = mpmath.polyval(fp[::-1], x)
            dx = mpmath.polyval(dfp[::-1], x)
            if dx == 0:
                break
            nx = x - fx / dx
            if not (mlo <= nx <= mhi):
                break
            if abs(nx - x) <= mpmath.mpf(2) ** -120 * max(1, abs(x)):
                x = nx
                break
            x = nx
        if width < hi - lo:
            lo, hi = _refine(f, lo, hi, width)
    return IsolatedRoot(lo, hi, x, mult, None)
