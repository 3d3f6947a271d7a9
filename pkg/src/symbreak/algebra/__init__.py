"""Exact polynomial algebra for the restricted gradient systems."""

from .groebner import GroebnerBasis, GroebnerCapError, groebner_lex, is_groebner, is_reduced, reduce, s_polynomial
from .poly import MultiPoly, VariableMismatchError, variables
from .restricted import (
    RestrictedReport,
    RestrictedSolution,
    restrict_loss_symbolic,
    restricted_partials,
    restricted_system,
    solve_restricted,
)
from .roots import IsolatedRoot, real_roots, squarefree_decomposition, sturm_sequence

__all__ = [
    "GroebnerBasis",
    "GroebnerCapError",
    "IsolatedRoot",
    "MultiPoly",
    "RestrictedReport",
    "RestrictedSolution",
    "VariableMismatchError",
    "groebner_lex",
    "is_groebner",
    "is_reduced",
    "real_roots",
    "reduce",
    "restrict_loss_symbolic",
    "restricted_partials",
    "restricted_system",
    "s_polynomial",
    "solve_restricted",
    "squarefree_decomposition",
    "sturm_sequence",
    "variables",
]
