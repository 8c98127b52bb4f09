"""Monad structure on rational trees: unit, algebra structure, the
leaf/operation decomposition and Kleisli extension.

Multiplication is not a separate operation: a tree of trees is a tree with
tree-valued parameters, flattened by ``kleisli_extend`` of the identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

from .rattree import ParamNode, RatTree, TreeError, graft, leaf, op
from .sigcore import Signature


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Op:
    symbol: str
    children: tuple[RatTree, ...]


def eta(sig: Signature, y: str) -> RatTree:
    return leaf(sig, y)


def delta(sig: Signature, symbol: str, children: Sequence[RatTree]) -> RatTree:
    return op(sig, symbol, children)


def decompose(t: RatTree) -> Union[Param, Op]:
    """Split a tree into a parameter leaf or an operation applied to subtrees."""
    node = t.root_node
    if isinstance(node, ParamNode):
        return Param(node.name)
    return Op(node.symbol, tuple(t.subtree(c) for c in node.children))


def recompose(t: RatTree, part: Union[Param, Op]) -> RatTree:
    if isinstance(part, Param):
        return eta(t.sig, part.name)
    return delta(t.sig, part.symbol, part.children)


def kleisli_extend(h: Mapping[str, RatTree]) -> Callable[[RatTree], RatTree]:
    """The substitution sending every parameter leaf y to h(y)."""
    h = dict(h)

    def extend(t: RatTree) -> RatTree:
        missing = t.occurring_params() - set(h)
        if missing:
            raise TreeError(f"parameters outside the substitution's domain: {sorted(missing)}")
        return graft(t, h)

    return extend


def unit_substitution(sig: Signature, names) -> dict[str, RatTree]:
    return {y: eta(sig, y) for y in names}


def compose_substitutions(
    h: Mapping[str, RatTree], k: Mapping[str, RatTree]
) -> dict[str, RatTree]:
    """Kleisli composite: y -> kleisli_extend(k)(h(y))."""
    ext = kleisli_extend(k)
    return {y: ext(t) for y, t in h.items()}
