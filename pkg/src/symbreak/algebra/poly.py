"""Sparse multivariate polynomials with exact rational coefficients."""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping

Monomial = tuple[int, ...]
Number = int | Fraction


class VariableMismatchError(ValueError):
    pass


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"exact coefficients only, got {type(c).__name__}")


class MultiPoly:
    """Polynomial over Q in the variables ``vars``.

    The first variable has the highest priority in the lex order, so
    ``sorted(terms, reverse=True)`` lists terms from the leading one down.
    """

    __slots__ = ("vars", "terms")

    def __init__(self, terms: Mapping[Monomial, Number] | None = None, vars: Iterable[str] = ()):
        self.vars: tuple[str, ...] = tuple(vars)
        n = len(self.vars)
        clean: dict[Monomial, Fraction] = {}
        for mono, c in (terms or {}).items():
            if len(mono) != n:
                raise VariableMismatchError(f"monomial {mono} does not match {self.vars}")
            c = _frac(c)
            if c:
                clean[tuple(mono)] = clean.get(tuple(mono), Fraction(0)) + c
        self.terms: dict[Monomial, Fraction] = {m: c for m, c in clean.items() if c}

    # -- constructors
    @classmethod
    def var(cls, name: str, vars: Iterable[str]) -> MultiPoly:
        vars = tuple(vars)
        mono = tuple(1 if v == name else 0 for v in vars)
        if name not in vars:
            raise VariableMismatchError(f"{name} not in {vars}")
        return cls({mono: 1}, vars)

    @classmethod
    def const(cls, c: Number, vars: Iterable[str] = ()) -> MultiPoly:
        vars = tuple(vars)
        return cls({(0,) * len(vars): c}, vars)

    @classmethod
    def _raw(cls, terms: dict[Monomial, Fraction], vars: tuple[str, ...]) -> MultiPoly:
        p = cls.__new__(cls)
        p.vars = vars
        p.terms = terms
        return p

    # -- variable bookkeeping
    def with_vars(self, vars: Iterable[str]) -> MultiPoly:
        """Re-express over ``vars`` (a superset of the variables actually used)."""
        vars = tuple(vars)
        if vars == self.vars:
            return self
        pos = []
        for i, v in enumerate(self.vars):
            if v in vars:
                pos.append(vars.index(v))
            elif any(m[i] for m in self.terms):
                raise VariableMismatchError(f"variable {v} is used but missing from {vars}")
            else:
                pos.append(None)
        out: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            new = [0] * len(vars)
            for i, e in enumerate(m):
                if pos[i] is not None:
                    new[pos[i]] = e
            out[tuple(new)] = c
        return MultiPoly._raw(out, vars)

    def _coerce(self, other) -> tuple[MultiPoly, MultiPoly]:
        if not isinstance(other, MultiPoly):
            return self, MultiPoly.const(_frac(other), self.vars)
        if other.vars == self.vars:
            return self, other
        merged = self.vars + tuple(v for v in other.vars if v not in self.vars)
        return self.with_vars(merged), other.with_vars(merged)

    # -- ring operations
    def __add__(self, other) -> MultiPoly:
        a, b = self._coerce(other)
        out = dict(a.terms)
        for m, c in b.terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return MultiPoly._raw(out, a.vars)

    __radd__ = __add__

    def __neg__(self) -> MultiPoly:
        return MultiPoly._raw({m: -c for m, c in self.terms.items()}, self.vars)

    def __sub__(self, other) -> MultiPoly:
        return self + (-other if isinstance(other, MultiPoly) else -_frac(other))

    def __rsub__(self, other) -> MultiPoly:
        return (-self) + other

    def __mul__(self, other) -> MultiPoly:
        if not isinstance(other, MultiPoly):
            c = _frac(other)
            if not c:
                return MultiPoly._raw({}, self.vars)
            return MultiPoly._raw({m: v * c for m, v in self.terms.items()}, self.vars)
        a, b = self._coerce(other)
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in a.terms.items():
            for m2, c2 in b.terms.items():
                m = tuple(x + y for x, y in zip(m1, m2))
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return MultiPoly._raw(out, a.vars)

    __rmul__ = __mul__

    def __truediv__(self, other) -> MultiPoly:
        return self * (1 / _frac(other))

    def __pow__(self, n: int) -> MultiPoly:
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = MultiPoly.const(1, self.vars)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiPoly):
            try:
                other = MultiPoly.const(_frac(other), self.vars)
            except TypeError:
                return NotImplemented
        a, b = self._coerce(other)
        return a.terms == b.terms

    __hash__ = None  # type: ignore[assignment]

    # -- calculus and evaluation
    def derivative(self, var: str) -> MultiPoly:
        i = self.vars.index(var)
        out = {}
        for m, c in self.terms.items():
            if m[i]:
                mm = list(m)
                mm[i] -= 1
                out[tuple(mm)] = c * m[i]
        return MultiPoly._raw(out, self.vars)

    def substitute(self, var: str, value) -> MultiPoly:
        """Replace ``var`` by a number or a polynomial; ``var`` is dropped."""
        i = self.vars.index(var)
        rest = self.vars[:i] + self.vars[i + 1 :]
        if isinstance(value, MultiPoly):
            value = value.with_vars(rest + tuple(v for v in value.vars if v not in rest))
            rest = value.vars
            acc = MultiPoly._raw({}, rest)
            powers: dict[int, MultiPoly] = {}
            for m, c in self.terms.items():
                e = m[i]
                if e not in powers:
                    powers[e] = value**e
                mono = m[:i] + m[i + 1 :] + (0,) * (len(rest) - len(self.vars) + 1)
                acc = acc + MultiPoly._raw({mono: c}, rest) * powers[e]
            return acc
        value = _frac(value)
        out: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            mono = m[:i] + m[i + 1 :]
            s = out.get(mono, 0) + c * value ** m[i]
            if s:
                out[mono] = s
            else:
                out.pop(mono, None)
        return MultiPoly._raw(out, rest)

    def subs(self, **values) -> MultiPoly:
        p = self
        for k, v in values.items():
            p = p.substitute(k, v)
        return p

    def evaluate(self, values: Mapping[str, object]):
        """Value at a full assignment; works with Fraction, int, float or mpmath numbers."""
        missing = [v for v in self.vars if v not in values]
        if missing:
            raise VariableMismatchError(f"no value for {missing}")
        xs = [values[v] for v in self.vars]
        total = 0
        for m, c in self.terms.items():
            term = c if isinstance(xs[0] if xs else 0, (int, Fraction)) else _as_like(c, xs)
            for x, e in zip(xs, m):
                if e:
                    term = term * x**e
            total = total + term
        return total

    # -- inspection
    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def degree(self, var: str) -> int:
        i = self.vars.index(var)
        return max((m[i] for m in self.terms), default=-1)

    def used_vars(self) -> tuple[str, ...]:
        return tuple(v for i, v in enumerate(self.vars) if any(m[i] for m in self.terms))

    def coefficient(self, mono: Mapping[str, int]) -> Fraction:
        key = tuple(mono.get(v, 0) for v in self.vars)
        return self.terms.get(key, Fraction(0))

    def leading(self) -> tuple[Monomial, Fraction]:
        m = max(self.terms)
        return m, self.terms[m]

    def univariate(self, var: str) -> list[Fraction]:
        """Coefficients low to high; other variables must be absent."""
        i = self.vars.index(var)
        for m in self.terms:
            if any(e for j, e in enumerate(m) if j != i):
                raise VariableMismatchError(f"not univariate in {var}")
        deg = self.degree(var)
        out = [Fraction(0)] * (deg + 1)
        for m, c in self.terms.items():
            out[m[i]] = c
        return out

    def coeffs_in(self, vars: Iterable[str]) -> dict[Monomial, MultiPoly]:
        """Group terms by their exponents in ``vars``; values are polynomials in the rest."""
        vars = tuple(vars)
        idx = [self.vars.index(v) for v in vars]
        rest = tuple(v for v in self.vars if v not in vars)
        ridx = [self.vars.index(v) for v in rest]
        out: dict[Monomial, dict[Monomial, Fraction]] = {}
        for m, c in self.terms.items():
            key = tuple(m[i] for i in idx)
            out.setdefault(key, {})[tuple(m[i] for i in ridx)] = c
        return {k: MultiPoly._raw(v, rest) for k, v in out.items()}

    # -- text form
    def to_text(self) -> str:
        """Canonical text: lex order on ``vars``, factors alphabetical, ``num/den`` coefficients."""
        if not self.terms:
            return "0"
        names = sorted(range(len(self.vars)), key=lambda i: self.vars[i])
        pieces = []
        for m in sorted(self.terms, reverse=True):
            c = self.terms[m]
            factors = [self.vars[i] + (f"^{m[i]}" if m[i] > 1 else "") for i in names if m[i]]
            mag = abs(c)
            coef = str(mag.numerator) if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
            if factors:
                body = "*".join(([coef] if mag != 1 else []) + factors)
            else:
                body = coef
            sign = "-" if c < 0 else "+"
            pieces.append((sign, body))
        first_sign, first = pieces[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in pieces[1:]:
            text += f" {sign} {body}"
        return text

    __str__ = to_text

    def __repr__(self) -> str:
        return f"MultiPoly({self.to_text()!r}, vars={self.vars})"

    @classmethod
    def parse(cls, text: str, vars: Iterable[str] | None = None) -> MultiPoly:
        """Parse the canonical text form (``*``, ``^``, ``+``, ``-``, ``num/den``)."""
        body = "".join(text.split()).replace("**", "^")
        if not body:
            raise ValueError("empty polynomial")
        found = sorted(set(re.findall(r"[A-Za-z_][A-Za-z_0-9]*", body)))
        vars = tuple(vars) if vars is not None else tuple(found)
        if set(found) - set(vars):
            raise VariableMismatchError(f"unknown variables {set(found) - set(vars)}")
        terms: dict[Monomial, Fraction] = {}
        for sign, term in re.findall(r"([+-]?)([^+-]+)", body):
            coef = Fraction(-1 if sign == "-" else 1)
            mono = [0] * len(vars)
            for factor in term.split("*"):
                if re.fullmatch(r"\d+(/\d+)?", factor):
                    coef *= Fraction(factor)
                    continue
                m = re.fullmatch(r"([A-Za-z_][A-Za-z_0-9]*)(?:\^(\d+))?", factor)
                if not m:
                    raise ValueError(f"cannot parse factor {factor!r}")
                mono[vars.index(m.group(1))] += int(m.group(2) or 1)
            key = tuple(mono)
            terms[key] = terms.get(key, Fraction(0)) + coef
        return cls(terms, vars)


def _as_like(c: Fraction, xs):
    """Convert an exact coefficient to the numeric type of the evaluation point."""
    x = xs[0]
    if isinstance(x, float):
        return c.numerator / c.denominator
    try:
        return type(x)(c.numerator) / c.denominator
    except TypeError:
        return c


def variables(names: str, vars: Iterable[str] | None = None) -> tuple[MultiPoly, ...]:
    """``w1, w2, d = variables("w1 w2 d")``."""
    names_t = tuple(names.replace(",", " ").split())
    vars = tuple(vars) if vars is not None else names_t
    return tuple(MultiPoly.var(n, vars) for n in names_t)
