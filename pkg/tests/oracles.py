"""Slow reference implementations, written against raw node lists and plain
Python so they share no code paths with the library algorithms."""

import itertools

from bloomtree.rattree import MARK, OpNode

# Partial terms use the library's shape: (symbol, *kids), parameter names as
# str, MARK for a cut.


def naive_unfold(nodes, root, depth):
    node = nodes[root]
    if depth == 0:
        return MARK
    if isinstance(node, OpNode):
        return (node.symbol, *(naive_unfold(nodes, c, depth - 1) for c in node.children))
    return node.name


def prefix_equal(t1, t2, depth):
    """Whether the depth-`depth` unfoldings agree, by memoized recursion over
    (node, node, remaining depth) triples."""
    memo = {}

    def eq(i, j, d):
        if d == 0:
            return True
        key = (i, j, d)
        if key not in memo:
            a, b = t1.nodes[i], t2.nodes[j]
            if isinstance(a, OpNode) and isinstance(b, OpNode):
                memo[key] = a.symbol == b.symbol and all(
                    eq(x, y, d - 1) for x, y in zip(a.children, b.children)
                )
            else:
                memo[key] = type(a) is type(b) and a.name == b.name
        return memo[key]

    return eq(t1.root, t2.root, depth)


def unfold_equal(t1, t2):
    """Equal prefixes up to depth n1*n2 + 1 decide tree equality of two graphs."""
    return prefix_equal(t1, t2, len(t1.nodes) * len(t2.nodes) + 1)


def cut(term, depth):
    if depth == 0:
        return MARK
    if isinstance(term, tuple):
        return (term[0], *(cut(k, depth - 1) for k in term[1:]))
    return term


def as_term(t):
    """A finite (acyclic) RatTree as a nested tuple term."""
    def go(i, seen):
        assert i not in seen, "cyclic"
        node = t.nodes[i]
        if isinstance(node, OpNode):
            return (node.symbol, *(go(c, seen | {i}) for c in node.children))
        return node.name
    return go(t.root, frozenset())


def substitute_term(term, env):
    if term is MARK:
        return term
    if isinstance(term, tuple):
        return (term[0], *(substitute_term(k, env) for k in term[1:]))
    return env.get(term, term)


def iterate_substitution(rhs_terms, x, d):
    """Start from the variable x and replace every variable leaf by its
    right-hand side d times, then cut at depth d."""
    term = x
    for _ in range(d):
        # cutting each round keeps terms small and changes nothing above depth d
        term = cut(substitute_term(term, rhs_terms), d)
    return cut(term, d)


def leaf_depths(term, depth=0):
    if term is MARK:
        return []
    if isinstance(term, tuple):
        return [p for k in term[1:] for p in leaf_depths(k, depth + 1)]
    return [(term, depth)]


def count_solutions(eqs, carrier_size, apply):
    """eqs: list of (symbol, child indices), one per variable in order.
    apply(symbol, args) gives the table value."""
    total = 0
    for s in itertools.product(range(carrier_size), repeat=len(eqs)):
        if all(apply(sym, tuple(s[c] for c in kids)) == s[i] for i, (sym, kids) in enumerate(eqs)):
            total += 1
    return total
