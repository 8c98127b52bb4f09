"""Recursive equation systems over rational trees and their solutions.

A system assigns to every variable either a bare variable (``VarRef``) or a
tree whose root is an operation; variable and parameter names appear as
leaves. Guarded (ideal) systems have unique solutions. Arbitrary systems
have a unique *strict* solution over the signature extended by ``bot``:
variables trapped in cycles of bare variable references get ``bot``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Union

from .rattree import (
    OpNode,
    ParamNode,
    RatTree,
    TreeError,
    bisim_eq,
    graph,
    graft,
    join_signatures,
    leaf,
    minimize,
)
from .sigcore import BOTTOM, Signature, strict


@dataclass(frozen=True)
class VarRef:
    name: str

    def __str__(self):
        return self.name


RHS = Union[VarRef, RatTree]
Solution = dict  # variable name -> RatTree


class EquationError(ValueError):
    pass


class NotIdealError(EquationError):
    def __init__(self, offenders):
        self.offenders = tuple(offenders)
        super().__init__(
            "system is not guarded; bare variable right-hand sides for: "
            + ", ".join(self.offenders)
            + " (use the strict solver)"
        )


@dataclass(frozen=True, eq=False)
class EqSystem:
    sig: Signature
    vars: tuple[str, ...]
    params: frozenset[str]
    rhs: Mapping[str, RHS] = field(repr=False)

    def __post_init__(self):
        names = set(self.vars)
        if len(names) != len(self.vars):
            raise EquationError("duplicate variable")
        if names & set(self.params):
            raise EquationError(f"names used as both variable and parameter: {sorted(names & set(self.params))}")
        if BOTTOM in names or BOTTOM in self.params:
            raise EquationError(f"{BOTTOM!r} is reserved")
        if set(self.rhs) != names:
            raise EquationError("right-hand sides must cover exactly the variables")
        allowed = names | set(self.params)
        for x in self.vars:
            r = self.rhs[x]
            if isinstance(r, VarRef):
                if r.name not in names:
                    raise EquationError(f"{x}: unknown variable {r.name!r}")
                continue
            join_signatures(self.sig, r.sig)
            if not isinstance(r.root_node, OpNode):
                raise EquationError(f"{x}: right-hand side must be a variable or start with an operation")
            stray = r.occurring_params() - allowed
            if stray:
                raise EquationError(f"{x}: unknown identifiers {sorted(stray)}")

    def __eq__(self, other):
        if not isinstance(other, EqSystem):
            return NotImplemented
        return (
            self.sig == other.sig
            and self.vars == other.vars
            and self.params == other.params
            and all(_rhs_equal(self.rhs[x], other.rhs[x]) for x in self.vars)
        )

    __hash__ = None

    def __str__(self):
        from .syntax import render_system

        return render_system(self)

    def var_refs(self) -> list[str]:
        return [x for x in self.vars if isinstance(self.rhs[x], VarRef)]


def _rhs_equal(a: RHS, b: RHS) -> bool:
    if isinstance(a, VarRef) or isinstance(b, VarRef):
        return a == b
    return bisim_eq(a, b)


def make_system(sig: Signature, equations, params=()) -> EqSystem:
    """Build a system from ``(var, rhs)`` pairs where rhs is a VarRef, a
    RatTree, or a bare tree whose root leaf names a variable."""
    equations = list(equations)
    xs = tuple(x for x, _ in equations)
    rhs = {x: as_rhs(r, xs) for x, r in equations}
    return EqSystem(sig, xs, frozenset(params), rhs)


def as_rhs(r: RHS, variables) -> RHS:
    """Normalize a tree consisting of a single variable leaf to a VarRef."""
    if isinstance(r, RatTree) and isinstance(r.root_node, ParamNode):
        if r.root_node.name in variables:
            return VarRef(r.root_node.name)
        raise EquationError(f"bare parameter {r.root_node.name!r} is not a valid right-hand side")
    return r


def rhs_tree(sys: EqSystem, x: str) -> RatTree:
    """The right-hand side of `x` as a tree (a VarRef becomes a leaf)."""
    r = sys.rhs[x]
    return leaf(sys.sig, r.name) if isinstance(r, VarRef) else r


def classify(sys: EqSystem) -> str:
    if sys.var_refs():
        return "general"
    variables = set(sys.vars)
    for x in sys.vars:
        t = sys.rhs[x]
        root = t.root_node
        kids = [t.nodes[c] for c in root.children]
        if not all(isinstance(k, ParamNode) and k.name in variables for k in kids):
            return "ideal"
    return "flat"


# ------------------------------------------------------------ derived chain


@dataclass(frozen=True)
class DerivedChain:
    stages: tuple[frozenset[str], ...]
    x_infinity: frozenset[str]
    redirect: Mapping[str, str]

    def stage(self, n: int) -> frozenset[str]:
        """X_n for any n >= 0 (the chain is stationary after its last stage)."""
        return self.stages[min(n, len(self.stages) - 1)]


def derived_chain(sys: EqSystem) -> DerivedChain:
    """X_0 = X, X_1 = variables with bare variable right-hand sides, and
    X_{i+1} = {x in X_i : redirect(x) in X_i}, up to the first repetition."""
    redirect = {x: sys.rhs[x].name for x in sys.var_refs()}
    stages = [frozenset(sys.vars), frozenset(redirect)]
    while stages[-1] != stages[-2]:
        cur = stages[-1]
        stages.append(frozenset(x for x in cur if redirect[x] in cur))
    assert len(stages) - 2 <= len(sys.vars), "derived chain failed to stabilize"
    return DerivedChain(tuple(stages), stages[-1], redirect)


# ----------------------------------------------------------------- solving


def _assemble(sys: EqSystem, sig: Signature, target: Mapping[str, str | None]) -> Solution:
    """Splice all tree right-hand sides into one graph; a variable leaf points
    at the root of target[var]'s right-hand side, or at a ``bot`` node when
    target[var] is None."""
    nodes: list = []
    root_of: dict[str, int] = {}
    leaves: list[tuple[int, str]] = []
    for x in sys.vars:
        t = sys.rhs[x]
        if isinstance(t, VarRef):
            continue
        sig = join_signatures(sig, t.sig)
        offset = len(nodes)
        root_of[x] = t.root + offset
        for i, node in enumerate(t.nodes):
            if isinstance(node, OpNode):
                node = OpNode(node.symbol, tuple(c + offset for c in node.children))
            elif node.name in target:
                leaves.append((i + offset, node.name))
            nodes.append(node)
    bot = len(nodes)
    nodes.append(OpNode(BOTTOM, ()))

    def where(v: str) -> int:
        g = target[v]
        return bot if g is None else root_of[g]

    redirect = {i: where(v) for i, v in leaves}
    out = []
    for node in nodes:
        if isinstance(node, OpNode):
            node = OpNode(node.symbol, tuple(redirect.get(c, c) for c in node.children))
        out.append(node)
    return {x: minimize(graph(sig, out, where(x), sys.params)) for x in sys.vars}


def solve_unique(sys: EqSystem) -> Solution:
    """The unique solution of a guarded system."""
    offenders = sys.var_refs()
    if offenders:
        raise NotIdealError(offenders)
    return _assemble(sys, sys.sig, {x: x for x in sys.vars})


def solve_strict(sys: EqSystem) -> Solution:
    """The unique strict solution over the signature extended by ``bot``."""
    chain = derived_chain(sys)
    target: dict[str, str | None] = {}
    for x in sys.vars:
        if x in chain.x_infinity:
            target[x] = None
            continue
        v = x
        for _ in range(len(sys.vars) + 1):
            if v not in chain.redirect:
                break
            v = chain.redirect[v]
        else:
            raise AssertionError(f"guard chase from {x} did not terminate")
        target[x] = v
    return _assemble(sys, strict(sys.sig), target)


def solve(sys: EqSystem) -> Solution:
    return solve_unique(sys) if classify(sys) != "general" else solve_strict(sys)


# ------------------------------------------------------------- substitution


def substitute(
    rhs: RHS, s: Mapping[str, RatTree], total: bool = False, sig: Signature | None = None
) -> RatTree:
    """Replace leaves named in `s` by (shared copies of) their images."""
    if isinstance(rhs, VarRef):
        if rhs.name in s:
            return s[rhs.name]
        if total or sig is None:
            raise TreeError(f"no replacement for leaf {rhs.name!r}")
        return leaf(sig, rhs.name)
    return graft(rhs, s, total=total)


def fixpoint_failures(sys: EqSystem, sol: Solution) -> list[str]:
    """Variables at which ``sol(x) = substitute(rhs(x), sol + identity on
    parameters)`` fails up to tree equality."""
    env = {**{y: leaf(sys.sig, y) for y in sys.params}, **sol}
    return [x for x in sys.vars if not bisim_eq(sol[x], substitute(sys.rhs[x], env, total=True))]


def self_substitute(sys: EqSystem) -> EqSystem:
    """The system whose right-hand sides are those of `sys` with every
    variable leaf replaced by that variable's right-hand side."""
    env = {x: rhs_tree(sys, x) for x in sys.vars}
    rhs = {}
    for x in sys.vars:
        r = sys.rhs[x]
        rhs[x] = as_rhs(env[r.name], sys.vars) if isinstance(r, VarRef) else graft(r, env)
    return EqSystem(sys.sig, sys.vars, sys.params, rhs)


def rename_params(sys: EqSystem, h: Mapping[str, RatTree], params=None) -> EqSystem:
    """Replace parameter leaves y by h(y) in every right-hand side."""
    rhs = {}
    sig = sys.sig
    for x in sys.vars:
        r = sys.rhs[x]
        if isinstance(r, RatTree):
            r = graft(r, {y: t for y, t in h.items() if y in sys.params})
            sig = join_signatures(sig, r.sig)
        rhs[x] = r
    if params is None:
        params = set(sys.params) - set(h)
        for t in h.values():
            params |= t.occurring_params()
    return EqSystem(sig, sys.vars, frozenset(params), rhs)
