"""Poly-kernel losses restricted to fixed-point spaces, and their critical points."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .groebner import GroebnerBasis, groebner_lex
from .poly import MultiPoly, variables
from .roots import IsolatedRoot, real_roots

SPECS = ("SdxSd", "DeltaSd")
COORDS = {"SdxSd": ("w",), "DeltaSd": ("w1", "w2")}


def _normalize_spec(spec: str) -> str:
    s = spec.replace(" ", "").replace("×", "x").replace("Δ", "Delta").replace("_", "")
    for name in SPECS:
        if s.lower() == name.lower():
            return name
    raise ValueError(f"unsupported spec {spec!r}; expected one of {SPECS}")


def restrict_loss_symbolic(r: int, spec: str = "DeltaSd") -> MultiPoly:
    """Loss with target I_d restricted to the fixed space of ``spec``, as a polynomial in (coords, d).

    Uses the 1/2 convention.  Every inner product between rows of W and of
    the target takes one value per orbit class, so the pair sums collapse to
    (class size) * (value)^r.
    """
    if r < 1 or r % 2 == 0:
        raise ValueError("restriction is provided for odd r >= 1 only")
    spec = _normalize_spec(spec)
    half = Fraction(1, 2)
    if spec == "SdxSd":
        w, d = variables("w d")
        ww = w * w * d  # every pair of rows of w*11^T
        return half * (d * d * ww**r - 2 * d * d * w**r + d)
    w1, w2, d = variables("w1 w2 d")
    same = w1 * w1 + (d - 1) * w2 * w2
    other = 2 * w1 * w2 + (d - 2) * w2 * w2
    n_diag, n_off = d, d * (d - 1)
    L = n_diag * same**r + n_off * other**r - 2 * (n_diag * w1**r + n_off * w2**r) + d
    return half * L


def restricted_partials(L: MultiPoly) -> list[MultiPoly]:
    """Formal partials with respect to the coordinate variables (everything except d)."""
    return [L.derivative(v) for v in L.vars if v != "d"]


def restricted_system(d: int, r: int = 3, spec: str = "DeltaSd") -> list[MultiPoly]:
    """The partials with ``d`` substituted, as polynomials in the coordinates only."""
    return [p.substitute("d", d) for p in restricted_partials(restrict_loss_symbolic(r, spec))]


@dataclass
class RestrictedSolution:
    coords: tuple
    residual: float
    grad_norm: float
    exact: tuple | None = None

    def as_floats(self) -> tuple[float, ...]:
        return tuple(float(c) for c in self.coords)


@dataclass
class RestrictedReport:
    d: int
    spec: str
    basis: GroebnerBasis
    eliminant: MultiPoly | None
    roots: list[IsolatedRoot]
    solutions: list[RestrictedSolution]
    degenerate: list[str] = field(default_factory=list)

    @property
    def distinct_roots(self) -> int:
        return len(self.roots)


def _mp(x) -> mpmath.mpf:
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _full_grad_norm(spec: str, d: int, coords, r: int = 3) -> float:
    from ..kernels import poly
    from ..loss import grad, identity_problem
    from ..symmetry import fixed_point_basis

    fp = fixed_point_basis(spec, d, d)
    W = fp.embed([float(c) for c in coords])
    return float(np.linalg.norm(grad(identity_problem(poly(r), d), W)))


def solve_restricted(d: int, spec: str = "DeltaSd", r: int = 3, tol: float = 1e-12) -> RestrictedReport:
    """Real critical points of the restricted loss at numeric ``d``.

    Eliminates to a univariate polynomial with a lex basis, isolates its real
    roots and back-substitutes into the remaining basis elements.  Every
    candidate is checked on the original partials in 128-bit arithmetic
    (``tol``) and by the full-space gradient of the embedded matrix.
    """
    if d < 2:
        raise ValueError("need d >= 2")
    spec = _normalize_spec(spec)
    coords = COORDS[spec]
    system = restricted_system(d, r, spec)
    G = groebner_lex(system, coords)
    last = coords[-1]
    elim = G.eliminant(last)
    degenerate: list[str] = []
    if elim is None or elim.is_zero():
        degenerate.append("no univariate eliminant; the variety is not zero-dimensional")
        return RestrictedReport(d, spec, G, elim, [], [], degenerate)
    roots = real_roots(elim, var=last)
    if len(coords) == 1:
        sols = []
        for rt in roots:
            val = rt.exact if rt.exact is not None else rt.value
            sols.append(_make_solution(spec, d, system, coords, (val,), r))
        return RestrictedReport(d, spec, G, elim, roots, sols, degenerate)

    first = coords[0]
    solutions: list[RestrictedSolution] = []
    others = [p for p in G.polys if first in p.used_vars()]
    for rt in roots:
        cands = []
        if rt.exact is not None:
            spec_polys = [p.substitute(last, rt.exact) for p in others]
            live = [p for p in spec_polys if not p.is_zero()]
            if len(live) < len(spec_polys):
                degenerate.append(f"{len(spec_polys) - len(live)} basis element(s) vanish at {last}={rt.exact}")
            if not live:
                degenerate.append(f"every element vanishes at {last}={rt.exact}; {first} is free")
                continue
            g = _univariate_gcd([p.univariate(first) for p in live])
            for x in real_roots(g):
                cands.append((x.exact if x.exact is not None else x.value, rt.exact))
        else:
            cands.extend((x, rt.value) for x in _numeric_back_substitute(others, first, last, rt.value, degenerate))
        for c in cands:
            sol = _make_solution(spec, d, system, coords, c, r)
            if sol.residual <= tol and not any(_same(sol, s) for s in solutions):
                solutions.append(sol)
    solutions.sort(key=lambda s: tuple(float(c) for c in reversed(s.coords)))
    return RestrictedReport(d, spec, G, elim, roots, solutions, degenerate)


def _same(a: RestrictedSolution, b: RestrictedSolution) -> bool:
    return all(abs(_mp(x) - _mp(y)) < 1e-20 for x, y in zip(a.coords, b.coords))


def _univariate_gcd(polys: list[list[Fraction]]) -> list[Fraction]:
    from .roots import _gcd

    g = polys[0]
    for p in polys[1:]:
        g = _gcd(g, p)
    return g


def _numeric_back_substitute(others, first, last, value, degenerate) -> list:
    """Roots in ``first`` of the basis elements with ``last`` fixed to a 128-bit float."""
    with mpmath.workprec(128):
        best = None
        for p in others:
            groups = p.coeffs_in([first])
            deg = max(m[0] for m in groups)
            coeffs = [mpmath.mpf(0)] * (deg + 1)
            for (e,), q in groups.items():
                coeffs[e] = q.evaluate({last: _mp_value(value)})
            scale = max(abs(c) for c in coeffs)
            if scale == 0:
                degenerate.append(f"a basis element vanishes at {last}={mpmath.nstr(value, 20)}")
                continue
            while len(coeffs) > 1 and abs(coeffs[-1]) <= mpmath.mpf(10) ** -30 * scale:
                coeffs.pop()
            if len(coeffs) < 2:
                continue
            if best is None or len(coeffs) < len(best):
                best = coeffs
        if best is None:
            return []
        found = mpmath.polyroots(best[::-1], maxsteps=200, extraprec=256)
        return [mpmath.re(z) for z in found if abs(mpmath.im(z)) <= mpmath.mpf(10) ** -20]


def _mp_value(v):
    return v if isinstance(v, mpmath.mpf) else _mp(v)


def _make_solution(spec, d, system, coords, values, r) -> RestrictedSolution:
    exact = tuple(values) if all(isinstance(v, Fraction) for v in values) else None
    with mpmath.workprec(128):
        point = {c: _mp(v) for c, v in zip(coords, values)}
        res = max(abs(p.evaluate(point)) for p in system)
    if exact is not None:
        point_q = dict(zip(coords, exact))
        if all(p.evaluate(point_q) == 0 for p in system):
            res = mpmath.mpf(0)
    return RestrictedSolution(
        coords=tuple(values),
        residual=float(res),
        grad_norm=_full_grad_norm(spec, d, values, r),
        exact=exact,
    )
