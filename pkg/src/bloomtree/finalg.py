"""Finite Σ-algebras and brute-force checks of solution existence and
uniqueness for flat recursive systems.

Carrier elements are arbitrary hashable labels; tables are stored as integer
numpy arrays over carrier indices, one axis per argument.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np

from .eqsolve import EqSystem, classify
from .rattree import ParamNode, RatTree
from .sigcore import Signature


class AlgebraError(ValueError):
    pass


class PreconditionError(AlgebraError):
    pass


@dataclass(frozen=True, eq=False)
class FiniteAlgebra:
    sig: Signature
    carrier: tuple[Hashable, ...]
    tables: Mapping[str, np.ndarray]

    def __post_init__(self):
        m = len(self.carrier)
        if len(set(self.carrier)) != m:
            raise AlgebraError("duplicate carrier element")
        if m == 0 and self.sig.nullary():
            raise AlgebraError("empty carrier with a nullary symbol")
        for symbol, n in self.sig.ops:
            if symbol not in self.tables:
                raise AlgebraError(f"missing table for {symbol!r}")
            table = self.tables[symbol]
            if table.shape != (m,) * n:
                raise AlgebraError(f"table for {symbol!r} has shape {table.shape}")
            if table.size and (table.min() < 0 or table.max() >= m):
                raise AlgebraError(f"table for {symbol!r} leaves the carrier")
        extra = set(self.tables) - set(self.sig.symbols)
        if extra:
            raise AlgebraError(f"tables for undeclared symbols {sorted(extra)}")

    def __len__(self):
        return len(self.carrier)

    def __eq__(self, other):
        if not isinstance(other, FiniteAlgebra):
            return NotImplemented
        return (
            self.sig == other.sig
            and self.carrier == other.carrier
            and all(np.array_equal(self.tables[s], other.tables[s]) for s in self.sig.symbols)
        )

    __hash__ = None

    def index(self, element) -> int:
        try:
            return self.carrier.index(element)
        except ValueError:
            raise AlgebraError(f"{element!r} is not in the carrier") from None

    def apply(self, symbol: str, args: Sequence) -> Hashable:
        idx = tuple(self.index(a) for a in args)
        return self.carrier[int(self.tables[symbol][idx])]


def make_algebra(
    sig: Signature,
    carrier: Sequence[Hashable],
    tables: Mapping[str, Mapping[tuple, Hashable] | Callable],
) -> FiniteAlgebra:
    """Tables given by label, either as ``{args: value}`` (every tuple
    required) or as a function of the argument labels."""
    carrier = tuple(carrier)
    pos = {c: i for i, c in enumerate(carrier)}
    arrays = {}
    for symbol, n in sig.ops:
        spec = tables.get(symbol)
        if spec is None:
            raise AlgebraError(f"missing table for {symbol!r}")
        arr = np.zeros((len(carrier),) * n, dtype=np.int64)
        for args in itertools.product(carrier, repeat=n):
            try:
                value = spec(*args) if callable(spec) else spec[args]
            except KeyError:
                raise AlgebraError(f"table {symbol!r} has no entry for {args}") from None
            if value not in pos:
                raise AlgebraError(f"{symbol}{args} = {value!r} is not in the carrier")
            arr[tuple(pos[a] for a in args)] = pos[value]
        arrays[symbol] = arr
    return FiniteAlgebra(sig, carrier, arrays)


def random_algebra(rng: random.Random, sig: Signature, size: int) -> FiniteAlgebra:
    tables = {}
    for symbol, n in sig.ops:
        flat = [rng.randrange(size) for _ in range(size**n)]
        tables[symbol] = np.array(flat, dtype=np.int64).reshape((size,) * n)
    return FiniteAlgebra(sig, tuple(range(size)), tables)


def all_algebras(sig: Signature, size: int):
    """Every algebra on carrier ``0..size-1`` (exponential in table size)."""
    shapes = [(s, n) for s, n in sig.ops]
    cells = [size**n for _, n in shapes]
    for flat in itertools.product(range(size), repeat=sum(cells)):
        tables, k = {}, 0
        for (symbol, n), c in zip(shapes, cells):
            tables[symbol] = np.array(flat[k : k + c], dtype=np.int64).reshape((size,) * n)
            k += c
        yield FiniteAlgebra(sig, tuple(range(size)), tables)


# --------------------------------------------------------------- solutions


def _flat_equations(sys: EqSystem) -> list[tuple[str, tuple[int, ...]]]:
    if classify(sys) != "flat":
        raise AlgebraError("solutions_of needs a flat system")
    pos = {x: i for i, x in enumerate(sys.vars)}
    eqs = []
    for x in sys.vars:
        t = sys.rhs[x]
        eqs.append((t.root_node.symbol, tuple(pos[t.nodes[c].name] for c in t.root_node.children)))
    return eqs


def _assignments(m: int, k: int) -> np.ndarray:
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.indices((m,) * k).reshape(k, -1).T


def solutions_of(sys: EqSystem, alg: FiniteAlgebra) -> list[dict[str, Hashable]]:
    """Every assignment of carrier elements to the variables satisfying each
    equation ``x = σ(x1, ..., xn)``, by exhaustion."""
    eqs = _flat_equations(sys)
    S = _assignments(len(alg), len(sys.vars))
    ok = np.ones(len(S), dtype=bool)
    for i, (symbol, kids) in enumerate(eqs):
        ok &= alg.tables[symbol][tuple(S[:, c] for c in kids)] == S[:, i]
    return [{x: alg.carrier[int(v)] for x, v in zip(sys.vars, row)} for row in S[ok]]


def flat_choices(sig: Signature, k: int) -> list[tuple[str, tuple[int, ...]]]:
    """Every possible right-hand side of one equation in a flat system on k variables."""
    return [(s, kids) for s, n in sig.ops for kids in itertools.product(range(k), repeat=n)]


def _choice_values(alg: FiniteAlgebra, choices, S: np.ndarray) -> np.ndarray:
    """Table value of every right-hand-side choice under every assignment."""
    cols = [np.broadcast_to(alg.tables[s][tuple(S[:, c] for c in kids)], (len(S),)) for s, kids in choices]
    return np.stack(cols, axis=1) if cols else np.zeros((len(S), 0), dtype=np.int64)


def solution_counts(alg: FiniteAlgebra, k: int) -> np.ndarray:
    """Number of solutions of every flat system on exactly k variables, as a
    (C,)*k array indexed by each variable's right-hand-side choice (see
    ``flat_choices``)."""
    m = len(alg)
    S = _assignments(m, k)
    choices = flat_choices(alg.sig, k)
    values = _choice_values(alg, choices, S)
    match = [(values == S[:, [x]]).astype(np.float64) for x in range(k)]
    half = k // 2

    def outer(ms):
        p = np.ones((len(S), 1))
        for mx in ms:
            p = (p[:, :, None] * mx[:, None, :]).reshape(len(S), -1)
        return p

    counts = outer(match[:half]).T @ outer(match[half:])
    return np.rint(counts).astype(np.int64).reshape((len(choices),) * k)


def solution_masks(alg: FiniteAlgebra, k: int) -> np.ndarray:
    """Boolean array of shape (|A|^k, C^k): entry [s, e] says assignment s
    (row-major over variables) solves the system with choice vector e."""
    S = _assignments(len(alg), k)
    choices = flat_choices(alg.sig, k)
    values = _choice_values(alg, choices, S)
    mask = np.ones((len(S), 1), dtype=bool)
    for x in range(k):
        m = values == S[:, [x]]
        mask = (mask[:, :, None] & m[:, None, :]).reshape(len(S), -1)
    return mask


def _unary_symbol(sig: Signature) -> str | None:
    return sig.ops[0][0] if len(sig.ops) == 1 and sig.ops[0][1] == 1 else None


def _periodic_counts(alg: FiniteAlgebra, k: int) -> list[int]:
    """|Fix(a^L)| for L = 1..k. A flat unary system is a functional graph, and
    its solution count is the product over its cycles of |Fix(a^length)|."""
    a = alg.tables[_unary_symbol(alg.sig)]
    power = np.arange(len(alg))
    out = []
    for _ in range(k):
        power = a[power]
        out.append(int(np.count_nonzero(power == np.arange(len(alg)))))
    return out


def _extreme_counts(alg: FiniteAlgebra, k: int) -> tuple[int, int]:
    """Minimum and maximum solution count over flat systems with <= k variables.

    Padding a system with ``x' = σ(x1, ..., x1)`` (or ``x' = c``) keeps its
    count, so systems on exactly k variables cover all smaller ones."""
    if not alg.sig.ops:
        return 1, 1
    if _unary_symbol(alg.sig):
        fix = _periodic_counts(alg, k)
        return min(fix), max(fix)
    counts = solution_counts(alg, k)
    return int(counts.min()), int(counts.max())


def bounded_corecursive(alg: FiniteAlgebra, k: int) -> bool:
    """Every flat system on at most k variables has exactly one solution."""
    if k < 1:
        raise ValueError("k must be positive")
    return _extreme_counts(alg, k) == (1, 1)


def bounded_solvable(alg: FiniteAlgebra, k: int) -> bool:
    """Every flat system on at most k variables has at least one solution."""
    if k < 1:
        raise ValueError("k must be positive")
    return _extreme_counts(alg, k)[0] >= 1


# ------------------------------------------------- unary / binary structure


def _only(alg: FiniteAlgebra, arity: int) -> str:
    if len(alg.sig.ops) != 1 or alg.sig.ops[0][1] != arity:
        raise AlgebraError(f"expected a single symbol of arity {arity}, got {alg.sig}")
    return alg.sig.ops[0][0]


def idempotents(alg: FiniteAlgebra) -> set:
    t = alg.tables[_only(alg, 2)]
    return {alg.carrier[i] for i in range(len(alg)) if t[i, i] == i}


def fixpoints(alg: FiniteAlgebra) -> set:
    t = alg.tables[_only(alg, 1)]
    return {alg.carrier[i] for i in range(len(alg)) if t[i] == i}


def completely_factorizable(alg: FiniteAlgebra) -> set:
    """Greatest S ⊆ A with every element of S a product of two elements of S."""
    t = alg.tables[_only(alg, 2)]
    live = set(range(len(alg)))
    for _ in range(len(alg) + 1):
        products = {int(t[b, c]) for b in live for c in live}
        shrunk = live & products
        if shrunk == live:
            return {alg.carrier[i] for i in live}
        live = shrunk
    raise AssertionError("factorization fixpoint did not converge")


# ---------------------------------------------------------- constructions


def product(a: FiniteAlgebra, b: FiniteAlgebra) -> FiniteAlgebra:
    if a.sig != b.sig:
        raise AlgebraError("product needs a common signature")
    ma, mb = len(a), len(b)
    carrier = tuple(itertools.product(a.carrier, b.carrier))
    tables = {}
    for symbol, n in a.sig.ops:
        out = np.zeros((ma * mb,) * n, dtype=np.int64)
        for args in itertools.product(range(ma * mb), repeat=n):
            ia = tuple(x // mb for x in args)
            ib = tuple(x % mb for x in args)
            out[args] = a.tables[symbol][ia] * mb + b.tables[symbol][ib]
        tables[symbol] = out
    return FiniteAlgebra(a.sig, carrier, tables)


def generalized(alg: FiniteAlgebra, extra: Sequence[Hashable], f: Mapping[Hashable, Hashable]) -> FiniteAlgebra:
    """The algebra on H(A) + B whose operation τ sends (u1..un) to the formal
    term τ([a,f](u1), ..., [a,f](un)) in H(A), where [a,f] evaluates formal
    terms in A and maps B by f."""
    terms = [(s, args) for s, n in alg.sig.ops for args in itertools.product(range(len(alg)), repeat=n)]
    carrier = tuple(("inl", s, tuple(alg.carrier[i] for i in args)) for s, args in terms)
    carrier += tuple(("inr", b) for b in extra)
    term_pos = {t: i for i, t in enumerate(terms)}
    collapse = [int(alg.tables[s][args]) for s, args in terms] + [alg.index(f[b]) for b in extra]
    tables = {}
    size = len(carrier)
    for symbol, n in alg.sig.ops:
        out = np.zeros((size,) * n, dtype=np.int64)
        for args in itertools.product(range(size), repeat=n):
            out[args] = term_pos[(symbol, tuple(collapse[u] for u in args))]
        tables[symbol] = out
    return FiniteAlgebra(alg.sig, carrier, tables)


def collapse_map(alg: FiniteAlgebra, gen: FiniteAlgebra, f: Mapping) -> dict:
    """[a,f]: H(A) + B -> A as a map on carrier labels."""
    out = {}
    for u in gen.carrier:
        if u[0] == "inl":
            out[u] = alg.apply(u[1], u[2])
        else:
            out[u] = f[u[1]]
    return out


# ------------------------------------------------------------ homomorphisms


@dataclass(frozen=True, eq=False)
class AlgHom:
    source: FiniteAlgebra
    target: FiniteAlgebra
    map: Mapping[Hashable, Hashable]

    def __post_init__(self):
        if self.source.sig != self.target.sig:
            raise AlgebraError("homomorphism needs a common signature")
        if not is_homomorphism(self.source, self.target, self.map):
            raise AlgebraError("map does not commute with the operations")


def is_homomorphism(a: FiniteAlgebra, b: FiniteAlgebra, h: Mapping) -> bool:
    if set(h) != set(a.carrier) or not set(h.values()) <= set(b.carrier):
        return False
    idx = np.array([b.index(h[x]) for x in a.carrier], dtype=np.int64)
    for symbol, n in a.sig.ops:
        lhs = idx[a.tables[symbol]]
        grids = np.indices((len(a),) * n) if n else ()
        rhs = b.tables[symbol][tuple(idx[g] for g in grids)] if n else b.tables[symbol]
        if not np.array_equal(lhs, rhs):
            return False
    return True


def homomorphisms(a: FiniteAlgebra, b: FiniteAlgebra):
    """Every homomorphism a -> b (exhaustive over |B|^|A| maps)."""
    for image in itertools.product(b.carrier, repeat=len(a)):
        h = dict(zip(a.carrier, image))
        if is_homomorphism(a, b, h):
            yield AlgHom(a, b, h)


def hom_preserves(h: AlgHom, sys: EqSystem) -> bool:
    """Whether h maps the unique solution of `sys` in the source to the unique
    solution in the target."""
    src, tgt = solutions_of(sys, h.source), solutions_of(sys, h.target)
    if len(src) != 1 or len(tgt) != 1:
        raise PreconditionError(
            f"solutions are not unique (source {len(src)}, target {len(tgt)})"
        )
    return {x: h.map[v] for x, v in src[0].items()} == tgt[0]


# -------------------------------------------------------- tree evaluation


def node_system(t: RatTree) -> EqSystem:
    """The flat system with one variable per node of a closed tree."""
    from .eqsolve import make_system
    from .rattree import leaf, op

    names = [f"n{i}" for i in range(len(t.nodes))]
    eqs = []
    for i, node in enumerate(t.nodes):
        if isinstance(node, ParamNode):
            raise AlgebraError("only closed trees can be evaluated")
        eqs.append((names[i], op(t.sig, node.symbol, [leaf(t.sig, names[c]) for c in node.children])))
    return make_system(t.sig, eqs)


def evaluate(t: RatTree, alg: FiniteAlgebra) -> Hashable:
    """Value of a closed rational tree in an algebra where its node system has
    a unique solution."""
    sols = solutions_of(node_system(t), alg)
    if len(sols) != 1:
        raise PreconditionError(f"{len(sols)} solutions; evaluation is not determined")
    return sols[0][f"n{t.root}"]
