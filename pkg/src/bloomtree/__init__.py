"""Rational trees over finite signatures: solving recursive equation systems,
deciding tree equality, and checking solution laws and finite algebras."""

from .eqsolve import EqSystem, VarRef, classify, derived_chain, solve, solve_strict, solve_unique
from .rattree import RatTree, bisim_eq, from_term, minimize, unfold
from .sigcore import Signature, add_bottom, make_signature
from .syntax import parse_system, parse_tree_expr, render_tree

__version__ = "0.1.0"

__all__ = [
    "EqSystem",
    "RatTree",
    "Signature",
    "VarRef",
    "add_bottom",
    "bisim_eq",
    "classify",
    "derived_chain",
    "from_term",
    "make_signature",
    "minimize",
    "parse_system",
    "parse_tree_expr",
    "render_tree",
    "solve",
    "solve_strict",
    "solve_unique",
    "unfold",
]
