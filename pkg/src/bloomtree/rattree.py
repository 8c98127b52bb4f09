"""Rational trees as finite rooted term graphs.

A node is either an operation node (symbol plus ordered child indices) or a
parameter leaf. Cycles are allowed; the tree denoted by a graph is its
(possibly infinite) unfolding from the root. Two graphs are equal as trees
iff they are bisimilar.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .sigcore import Signature, SignatureError


@dataclass(frozen=True)
class OpNode:
    symbol: str
    children: tuple[int, ...] = ()


@dataclass(frozen=True)
class ParamNode:
    name: str


Node = Union[OpNode, ParamNode]

# A partial term is a nested tuple ``(symbol, *children)`` for operations, a
# ``str`` for a parameter leaf, and ``...`` (Ellipsis) for the cut marker.
PartialTerm = Union[tuple, str, type(Ellipsis)]
MARK = ...


class TreeError(ValueError):
    pass


class _Infinite:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Infinite"


INFINITE = _Infinite()


def label(node: Node) -> tuple[str, str]:
    if isinstance(node, OpNode):
        return ("op", node.symbol)
    return ("param", node.name)


@dataclass(frozen=True)
class RatTree:
    sig: Signature
    nodes: tuple[Node, ...]
    root: int = 0
    params: frozenset[str] = field(default=frozenset())

    def __post_init__(self):
        if not 0 <= self.root < len(self.nodes):
            raise TreeError("root out of range")
        for i, node in enumerate(self.nodes):
            if isinstance(node, OpNode):
                if len(node.children) != self.sig.arity(node.symbol):
                    raise TreeError(
                        f"node {i}: {node.symbol} expects {self.sig.arity(node.symbol)} "
                        f"children, got {len(node.children)}"
                    )
                for c in node.children:
                    if not 0 <= c < len(self.nodes):
                        raise TreeError(f"node {i}: dangling child {c}")
            elif node.name not in self.params:
                raise TreeError(f"node {i}: parameter {node.name!r} not declared")
        if len(_reachable(self.nodes, self.root)) != len(self.nodes):
            raise TreeError("unreachable nodes")

    def __len__(self):
        return len(self.nodes)

    def __str__(self):
        from .syntax import render_tree

        return render_tree(self)

    @property
    def root_node(self) -> Node:
        return self.nodes[self.root]

    def occurring_params(self) -> frozenset[str]:
        return frozenset(n.name for n in self.nodes if isinstance(n, ParamNode))

    def subtree(self, i: int) -> RatTree:
        return graph(self.sig, self.nodes, i, self.params)


def _succ(node: Node) -> tuple[int, ...]:
    return node.children if isinstance(node, OpNode) else ()


def _reachable(nodes: Sequence[Node], root: int) -> list[int]:
    """Breadth-first order from `root`, children left to right."""
    order = [root]
    seen = {root}
    queue = deque([root])
    while queue:
        for c in _succ(nodes[queue.popleft()]):
            if c not in seen:
                seen.add(c)
                order.append(c)
                queue.append(c)
    return order


def graph(
    sig: Signature, nodes: Sequence[Node], root: int = 0, params: Iterable[str] | None = None
) -> RatTree:
    """Build a tree from an arbitrary node list: drop unreachable nodes and
    renumber breadth-first from the root."""
    order = _reachable(nodes, root)
    index = {old: new for new, old in enumerate(order)}
    out = []
    for old in order:
        node = nodes[old]
        if isinstance(node, OpNode):
            node = OpNode(node.symbol, tuple(index[c] for c in node.children))
        out.append(node)
    names = {n.name for n in out if isinstance(n, ParamNode)}
    if params is not None:
        names |= set(params)
    return RatTree(sig, tuple(out), 0, frozenset(names))


def join_signatures(a: Signature, b: Signature) -> Signature:
    """The larger of two signatures when one extends the other (e.g. a signature
    and its strict extension)."""
    if a == b:
        return a
    if b.ops[: len(a.ops)] == a.ops:
        return b
    if a.ops[: len(b.ops)] == b.ops:
        return a
    raise SignatureError(f"signature mismatch: {a} vs {b}")


# ----------------------------------------------------------------- building


def leaf(sig: Signature, name: str) -> RatTree:
    return RatTree(sig, (ParamNode(name),), 0, frozenset({name}))


def from_term(sig: Signature, term, params: Iterable[str] | None = None) -> RatTree:
    """Acyclic tree from a finite term. Terms are ``str`` (parameter leaf) or
    ``(symbol, *subterms)``; no sharing is introduced."""
    declared = None if params is None else frozenset(params)
    nodes: list[Node] = []

    def build(t) -> int:
        if isinstance(t, str):
            if declared is not None and t not in declared:
                raise TreeError(f"unknown parameter {t!r}")
            nodes.append(ParamNode(t))
            return len(nodes) - 1
        if not isinstance(t, tuple) or not t:
            raise TreeError(f"malformed term {t!r}")
        symbol, args = t[0], t[1:]
        if sig.arity(symbol) != len(args):
            raise TreeError(f"{symbol} expects {sig.arity(symbol)} arguments, got {len(args)}")
        i = len(nodes)
        nodes.append(None)
        kids = tuple(build(a) for a in args)
        nodes[i] = OpNode(symbol, kids)
        return i

    build(term)
    names = {n.name for n in nodes if isinstance(n, ParamNode)}
    return RatTree(sig, tuple(nodes), 0, frozenset(names | (declared or set())))


def mu(sig: Signature, symbol: str) -> RatTree:
    """The one-node cycle ``μt.symbol(t, ..., t)``."""
    return RatTree(sig, (OpNode(symbol, (0,) * sig.arity(symbol)),))


def op(sig: Signature, symbol: str, children: Sequence[RatTree]) -> RatTree:
    """New operation root over the given subtrees (kept as separate copies)."""
    if sig.arity(symbol) != len(children):
        raise TreeError(f"{symbol} expects {sig.arity(symbol)} children, got {len(children)}")
    nodes: list[Node] = [None]
    params: set[str] = set()
    roots = []
    for child in children:
        sig = join_signatures(sig, child.sig)
        offset = len(nodes)
        nodes.extend(_shift(child.nodes, offset))
        roots.append(child.root + offset)
        params |= child.params
    nodes[0] = OpNode(symbol, tuple(roots))
    return graph(sig, nodes, 0, params)


def _shift(nodes: Iterable[Node], offset: int) -> Iterator[Node]:
    for node in nodes:
        if isinstance(node, OpNode):
            yield OpNode(node.symbol, tuple(c + offset for c in node.children))
        else:
            yield node


def graft(t: RatTree, mapping: Mapping[str, RatTree], total: bool = False) -> RatTree:
    """Replace every parameter leaf named in `mapping` by the root of its image.

    Each image is copied once and shared by all occurrences. With
    ``total=True`` every parameter leaf of `t` must be covered."""
    sig = t.sig
    nodes: list[Node] = list(t.nodes)
    redirect: dict[int, int] = {}
    image_root: dict[str, int] = {}
    params = set(t.params) - set(mapping)
    for i, node in enumerate(t.nodes):
        if not isinstance(node, ParamNode):
            continue
        if node.name not in mapping:
            if total:
                raise TreeError(f"no replacement for leaf {node.name!r}")
            params.add(node.name)
            continue
        if node.name not in image_root:
            image = mapping[node.name]
            sig = join_signatures(sig, image.sig)
            image_root[node.name] = image.root + len(nodes)
            nodes.extend(_shift(image.nodes, len(nodes)))
            params |= image.params
        redirect[i] = image_root[node.name]
    if not redirect:
        return t if sig == t.sig else graph(sig, t.nodes, t.root, t.params)

    def follow(i: int) -> int:
        # a replaced leaf points straight into an image, never at another leaf of t
        return redirect.get(i, i)

    out = []
    for node in nodes:
        if isinstance(node, OpNode):
            node = OpNode(node.symbol, tuple(follow(c) for c in node.children))
        out.append(node)
    return graph(sig, out, follow(t.root), params)


# ---------------------------------------------------------------- semantics


def unfold(t: RatTree, depth: int) -> PartialTerm:
    """The unfolding of `t` cut at `depth`: nodes at depth >= `depth` become ``...``."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    memo: dict[tuple[int, int], PartialTerm] = {}

    def go(i: int, d: int) -> PartialTerm:
        if d == 0:
            return MARK
        key = (i, d)
        if key not in memo:
            node = t.nodes[i]
            if isinstance(node, ParamNode):
                memo[key] = node.name
            else:
                memo[key] = (node.symbol,) + tuple(go(c, d - 1) for c in node.children)
        return memo[key]

    return go(t.root, depth)


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        parent = self.parent
        root = x
        while parent.get(root, root) != root:
            root = parent[root]
        while x != root:
            parent[x], x = root, parent.get(x, x)
        return root

    def union(self, x, y) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        self.parent[rx] = ry
        return True


def bisim_eq(t1: RatTree, t2: RatTree) -> bool:
    """Tree equality of two graphs by on-the-fly union-find closure over node
    pairs (Hopcroft-Karp style)."""
    join_signatures(t1.sig, t2.sig)
    uf = _UnionFind()
    stack = [(t1.root, t2.root)]
    while stack:
        a, b = stack.pop()
        if not uf.union((0, a), (1, b)):
            continue
        na, nb = t1.nodes[a], t2.nodes[b]
        if label(na) != label(nb):
            return False
        if isinstance(na, OpNode):
            stack.extend(zip(na.children, nb.children))
    return True


def bisim_classes(t: RatTree) -> list[int]:
    """Block number of every node under the coarsest bisimulation, by
    iterated partition refinement."""
    labels = {}
    block = [labels.setdefault(label(n), len(labels)) for n in t.nodes]
    while True:
        keys: dict[tuple, int] = {}
        refined = []
        for i, node in enumerate(t.nodes):
            key = (block[i],) + tuple(block[c] for c in _succ(node))
            refined.append(keys.setdefault(key, len(keys)))
        if len(keys) == len(set(block)):
            return refined
        block = refined


def minimize(t: RatTree) -> RatTree:
    """The bisimulation quotient of `t`, numbered breadth-first from the root."""
    block = bisim_classes(t)
    rep: dict[int, Node] = {}
    for i, node in enumerate(t.nodes):
        if block[i] not in rep:
            if isinstance(node, OpNode):
                node = OpNode(node.symbol, tuple(block[c] for c in node.children))
            rep[block[i]] = node
    nodes = [rep[b] for b in range(len(rep))]
    return graph(t.sig, nodes, block[t.root], t.params)


def canonical_key(t: RatTree) -> tuple:
    """Hashable key equal for two trees iff they are bisimilar (given
    compatible signatures)."""
    return minimize(t).nodes


def count_subtrees(t: RatTree) -> int:
    return len(minimize(t).nodes)


# ------------------------------------------------------------ membership


def _cyclic_nodes(nodes: Sequence[Node]) -> set[int]:
    """Nodes lying on some cycle (iterative Tarjan SCC)."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    cyclic: set[int] = set()
    counter = 0
    for start in range(len(nodes)):
        if start in index:
            continue
        work = [(start, iter(_succ(nodes[start])))]
        index[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack.add(start)
        while work:
            v, it = work[-1]
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(_succ(nodes[w]))))
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    low[work[-1][0]] = min(low[work[-1][0]], low[v])
                if low[v] == index[v]:
                    scc = []
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        scc.append(w)
                        if w == v:
                            break
                    if len(scc) > 1 or v in _succ(nodes[v]):
                        cyclic.update(scc)
    return cyclic


def _param_reaching(t: RatTree) -> set[int]:
    reach: set[int] = {i for i, n in enumerate(t.nodes) if isinstance(n, ParamNode)}
    changed = True
    while changed:
        changed = False
        for i, node in enumerate(t.nodes):
            if i not in reach and any(c in reach for c in _succ(node)):
                reach.add(i)
                changed = True
    return reach


def param_occurrences(t: RatTree):
    """Per-parameter leaf count of the full unfolding, or ``INFINITE`` when a
    parameter leaf is reachable from a cycle."""
    reach = _param_reaching(t)
    if reach & _cyclic_nodes(t.nodes):
        return INFINITE
    # below here the param-reaching part of the graph is acyclic
    memo: dict[int, dict[str, int]] = {}

    def count(i: int) -> dict[str, int]:
        if i not in memo:
            node = t.nodes[i]
            if isinstance(node, ParamNode):
                memo[i] = {node.name: 1}
            else:
                total: dict[str, int] = {}
                for c in node.children:
                    if c in reach:
                        for k, v in count(c).items():
                            total[k] = total.get(k, 0) + v
                memo[i] = total
        return memo[i]

    return dict(sorted(count(t.root).items())) if t.root in reach else {}


def is_in_Mstar(t: RatTree) -> bool:
    return param_occurrences(t) is not INFINITE


def param_depth(t: RatTree) -> int | None:
    """Greatest depth of a parameter leaf in the unfolding; None when closed.
    Only meaningful for trees with finitely many parameter leaves."""
    reach = _param_reaching(t)
    if t.root not in reach:
        return None
    memo: dict[int, int] = {}

    def height(i: int) -> int:
        if i not in memo:
            node = t.nodes[i]
            if isinstance(node, ParamNode):
                memo[i] = 0
            else:
                memo[i] = 1 + max(height(c) for c in node.children if c in reach)
        return memo[i]

    return height(t.root)


def is_in_Un(t: RatTree, n: int) -> bool:
    """Member of the n-th step of the free-corecursive-algebra chain: finitely
    many parameter leaves, all at depth < n."""
    if not is_in_Mstar(t):
        return False
    d = param_depth(t)
    return d is None or d < n


# ---------------------------------------------------------------- chains


class ChainInfiniteError(ValueError):
    pass


def closed_trees_if_finite(sig: Signature) -> list[RatTree]:
    """All closed Σ-trees when there are finitely many of them."""
    positive = [s for s, n in sig.ops if n > 0]
    if not positive:
        return [RatTree(sig, (OpNode(s),)) for s in sig.nullary()]
    if len(sig.ops) == 1:
        return [mu(sig, positive[0])]
    raise ChainInfiniteError(f"infinitely many closed trees over {sig}")


def enumerate_chain(sig: Signature, params: Sequence[str], n: int, which: str) -> list[RatTree]:
    """Level `n` of the free-algebra chain (``freealg``, starting at Y) or the
    free-corecursive-algebra chain (``corec``, starting at all closed trees),
    each level being H(previous) + Y. Minimized and deduplicated."""
    if which == "freealg":
        level = [leaf(sig, y) for y in params]
    elif which == "corec":
        level = closed_trees_if_finite(sig)
    else:
        raise ValueError(f"unknown chain kind {which!r}")
    level = _dedupe(level)
    for _ in range(n):
        nxt = [leaf(sig, y) for y in params]
        for symbol, arity in sig.ops:
            for kids in itertools.product(level, repeat=arity):
                nxt.append(op(sig, symbol, kids))
        level = _dedupe(nxt)
    return level


def _dedupe(trees: Iterable[RatTree]) -> list[RatTree]:
    seen: dict[tuple, RatTree] = {}
    for t in trees:
        m = minimize(t)
        seen.setdefault(m.nodes, m)
    return sorted(seen.values(), key=lambda m: (len(m.nodes), str(m)))


def all_graphs(sig: Signature, params: Sequence[str], max_nodes: int) -> Iterator[RatTree]:
    """Every rooted graph with at most `max_nodes` nodes (root 0, all nodes
    reachable). Exponential; intended for tiny exhaustive checks."""
    labels = [(s, n) for s, n in sig.ops] + [(p, None) for p in params]
    for size in range(1, max_nodes + 1):
        choices = []
        for name, arity in labels:
            if arity is None:
                choices.append([ParamNode(name)])
            else:
                choices.append(
                    [OpNode(name, kids) for kids in itertools.product(range(size), repeat=arity)]
                )
        per_node = [node for group in choices for node in group]
        for nodes in itertools.product(per_node, repeat=size):
            if len(_reachable(nodes, 0)) == size:
                yield RatTree(sig, tuple(nodes), 0, frozenset(params))


# ---------------------------------------------------------- structured form


def to_record(t: RatTree) -> dict:
    nodes = []
    for i, node in enumerate(t.nodes):
        if isinstance(node, OpNode):
            nodes.append({"id": i, "label": {"op": node.symbol}, "children": list(node.children)})
        else:
            nodes.append({"id": i, "label": {"param": node.name}, "children": []})
    return {"root": t.root, "nodes": nodes}


def from_record(sig: Signature, record: Mapping, params: Iterable[str] = ()) -> RatTree:
    nodes: list[Node] = [None] * len(record["nodes"])
    for entry in record["nodes"]:
        lab = entry["label"]
        if "op" in lab:
            nodes[entry["id"]] = OpNode(lab["op"], tuple(entry.get("children", ())))
        else:
            nodes[entry["id"]] = ParamNode(lab["param"])
    names = {n.name for n in nodes if isinstance(n, ParamNode)} | set(params)
    return RatTree(sig, tuple(nodes), record["root"], frozenset(names))
