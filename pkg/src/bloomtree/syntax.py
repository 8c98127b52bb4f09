"""Text syntax: μ-notation for trees, and the line-oriented signature,
system, tree and algebra file formats.

Grammar (``#`` starts a comment)::

    sig NAME
    op SYMBOL/ARITY            one per symbol
    params IDENT ...           optional
    sys                        then one ``IDENT = EXPR`` per line
    tree EXPR                  (tree files)
    carrier IDENT ...          (algebra files)
    table SYMBOL: a,b->c ...   (algebra files, every tuple listed)

    EXPR := IDENT | SYMBOL '(' [EXPR {',' EXPR}] ')' | ('μ' | 'mu') IDENT '.' EXPR
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterator

from .rattree import MARK, OpNode, ParamNode, PartialTerm, RatTree, TreeError, graph
from .sigcore import BOTTOM, Signature, SignatureError, add_bottom, make_signature


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


# ------------------------------------------------------------------ render


def _binder_prefix(t: RatTree) -> str:
    prefix = "t"
    while any(re.fullmatch(re.escape(prefix) + r"\d+", p) for p in t.params):
        prefix += "t"
    return prefix


def render_tree(t: RatTree) -> str:
    """μ-notation. A binder is placed at each printed occurrence of a node that
    is re-entered from inside that occurrence; binders are named ``t0, t1,
    ...`` in order of appearance. Shared subgraphs are printed per occurrence."""
    used: set[int] = set()
    fresh = iter(range(1 << 62))

    def show(i: int, scope: dict) -> str:
        if i in scope:
            used.add(scope[i])
            return f"\0{scope[i]}\0"
        node = t.nodes[i]
        if isinstance(node, ParamNode):
            return node.name
        k = next(fresh)
        inner = {**scope, i: k}
        body = f"{node.symbol}({','.join(show(c, inner) for c in node.children)})"
        return f"μ\0{k}\0.{body}" if k in used else body

    text = show(t.root, {})
    prefix = _binder_prefix(t)
    names: dict[str, str] = {}
    for k in re.findall(r"μ\0(\d+)\0", text):
        names[k] = f"{prefix}{len(names)}"
    return re.sub(r"\0(\d+)\0", lambda m: names[m.group(1)], text)


def render_partial(term: PartialTerm) -> str:
    if term is MARK:
        return "…"
    if isinstance(term, str):
        return term
    return f"{term[0]}({','.join(render_partial(c) for c in term[1:])})"


def render_signature(sig: Signature, name: str = "S") -> str:
    base = sig.base_signature()
    lines = [f"sig {name}"] + [f"op {s}/{n}" for s, n in base.ops]
    return "\n".join(lines)


# ------------------------------------------------------------ expressions

_TOKEN = re.compile(r"\s*(?:(μ)|([(),.])|([^\s(),.=#μ]+))")


@dataclass(frozen=True)
class Ident:
    name: str


@dataclass(frozen=True)
class App:
    symbol: str
    args: tuple


@dataclass(frozen=True)
class Mu:
    binder: str
    body: object


def _tokens(text: str, line: int | None) -> list[str]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:].strip()[:1]!r}", line)
        out.append(m.group(1) or m.group(2) or m.group(3))
        pos = m.end()
    return out


def parse_expr(text: str, line: int | None = None):
    toks = _tokens(text, line)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def take(expected=None):
        nonlocal pos
        tok = peek()
        if tok is None or (expected is not None and tok != expected):
            raise ParseError(f"expected {expected or 'expression'}, got {tok!r}", line)
        pos += 1
        return tok

    def expr():
        tok = take()
        if tok in ("(", ")", ",", "."):
            raise ParseError(f"unexpected {tok!r}", line)
        if tok == "μ" or (tok == "mu" and pos + 1 < len(toks) and toks[pos + 1] == "."):
            binder = take()
            take(".")
            return Mu(binder, expr())
        if peek() == "(":
            take("(")
            args = []
            if peek() != ")":
                args.append(expr())
                while peek() == ",":
                    take(",")
                    args.append(expr())
            take(")")
            return App(tok, tuple(args))
        return Ident(tok)

    result = expr()
    if pos != len(toks):
        raise ParseError(f"trailing input {' '.join(toks[pos:])!r}", line)
    return result


@dataclass
class _Alias:
    target: int


def build_tree(
    sig: Signature,
    ast,
    resolve: Callable[[str], str],
    params=(),
    line: int | None = None,
) -> RatTree:
    """Graph for an expression AST. `resolve` classifies a free identifier as
    ``"leaf"`` (parameter or variable) or ``"const"`` (nullary symbol)."""
    nodes: list = []

    def go(e, env: dict[str, int]) -> int:
        if isinstance(e, Ident):
            if e.name in env:
                return env[e.name]
            kind = resolve(e.name)
            if kind == "const":
                nodes.append(OpNode(e.name, ()))
            else:
                nodes.append(ParamNode(e.name))
            return len(nodes) - 1
        if isinstance(e, Mu):
            slot = len(nodes)
            nodes.append(None)
            nodes[slot] = _Alias(go(e.body, {**env, e.binder: slot}))
            return slot
        if e.symbol not in sig:
            raise ParseError(f"unknown symbol {e.symbol!r}", line)
        if sig.arity(e.symbol) != len(e.args):
            raise ParseError(
                f"{e.symbol} expects {sig.arity(e.symbol)} arguments, got {len(e.args)}", line
            )
        slot = len(nodes)
        nodes.append(None)
        nodes[slot] = OpNode(e.symbol, tuple(go(a, env) for a in e.args))
        return slot

    root = go(ast, {})

    def final(i: int) -> int:
        seen = set()
        while isinstance(nodes[i], _Alias):
            if i in seen:
                raise ParseError("unguarded μ-binder", line)
            seen.add(i)
            i = nodes[i].target
        return i

    out = []
    for node in nodes:
        if isinstance(node, OpNode):
            node = OpNode(node.symbol, tuple(final(c) for c in node.children))
        out.append(None if isinstance(node, _Alias) else node)
    try:
        return graph(sig, out, final(root), params)
    except (TreeError, SignatureError) as err:
        raise ParseError(str(err), line) from None


def parse_tree_expr(
    sig: Signature, text: str, params=(), line: int | None = None, open_names: bool = True
) -> RatTree:
    """Parse one μ-expression. With `open_names`, unknown identifiers become
    parameter leaves; otherwise only names in `params` may."""
    params = set(params)

    def resolve(name: str) -> str:
        if name in params:
            return "leaf"
        if name in sig and sig.arity(name) == 0:
            return "const"
        if name == BOTTOM:
            return "const"
        if open_names:
            return "leaf"
        raise ParseError(f"unknown identifier {name!r}", line)

    ast = parse_expr(text, line)
    if not sig.is_strict and BOTTOM not in params and mentions(ast, BOTTOM):
        sig = add_bottom(sig)
    return build_tree(sig, ast, resolve, params, line)


def mentions(ast, name: str) -> bool:
    if isinstance(ast, Ident):
        return ast.name == name
    if isinstance(ast, Mu):
        return ast.binder != name and mentions(ast.body, name)
    return ast.symbol == name or any(mentions(a, name) for a in ast.args)


# ------------------------------------------------------------------- files


def _lines(text: str) -> Iterator[tuple[int, str]]:
    for no, raw in enumerate(text.splitlines(), 1):
        content = raw.split("#", 1)[0].strip()
        if content:
            yield no, content


@dataclass
class Document:
    """Raw sections of any input file, in order of appearance."""

    sig: Signature
    sig_name: str
    params: tuple[str, ...]
    equations: list[tuple[int, str, str]]
    tree: tuple[int, str] | None
    carrier: tuple[str, ...] | None
    tables: list[tuple[int, str, str]]


def parse_document(text: str) -> Document:
    sig_name = None
    decls: list[tuple[str, int]] = []
    params: list[str] = []
    equations = []
    tree = None
    carrier = None
    tables = []
    in_sys = False
    for no, line in _lines(text):
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "sig":
            if sig_name is not None:
                raise ParseError("duplicate sig header", no)
            sig_name = rest or "S"
        elif head == "op" and not in_sys:
            if sig_name is None:
                raise ParseError("op before sig header", no)
            symbol, slash, arity = rest.rpartition("/")
            if not slash or not symbol or not arity.isdigit():
                raise ParseError(f"bad op declaration {rest!r}", no)
            decls.append((symbol, int(arity)))
        elif head == "params" and not in_sys:
            params.extend(rest.split())
        elif head == "sys" and not rest:
            in_sys = True
        elif head == "tree":
            tree = (no, rest)
        elif head == "carrier":
            carrier = tuple(rest.split())
        elif head == "table":
            symbol, colon, entries = rest.partition(":")
            if not colon:
                raise ParseError("table needs 'SYMBOL:'", no)
            tables.append((no, symbol.strip(), entries.strip()))
        elif in_sys and "=" in line:
            lhs, _, rhs = line.partition("=")
            lhs = lhs.strip()
            if not re.fullmatch(r"[^\s(),.=#μ]+", lhs):
                raise ParseError(f"bad variable name {lhs!r}", no)
            equations.append((no, lhs, rhs.strip()))
        else:
            raise ParseError(f"unrecognized line {line!r}", no)
    if sig_name is None:
        raise ParseError("missing sig header")
    try:
        sig = make_signature(decls)
    except SignatureError as err:
        raise ParseError(str(err)) from None
    if len(set(params)) != len(params):
        raise ParseError("duplicate parameter")
    return Document(sig, sig_name, tuple(params), equations, tree, carrier, tables)


def parse_signature(text: str) -> Signature:
    return parse_document(text).sig


def parse_tree_file(text: str) -> RatTree:
    doc = parse_document(text)
    if doc.tree is None:
        raise ParseError("missing 'tree' line")
    no, expr = doc.tree
    return parse_tree_expr(doc.sig, expr, doc.params, no, open_names=False)


def render_tree_file(t: RatTree, name: str = "S") -> str:
    lines = [render_signature(t.sig, name)]
    if t.params:
        lines.append("params " + " ".join(sorted(t.params)))
    lines.append(f"tree {render_tree(t)}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------- systems


def parse_system(text: str):
    from .eqsolve import EqSystem, EquationError, VarRef

    doc = parse_document(text)
    if doc.carrier is not None or doc.tables or doc.tree is not None:
        raise ParseError("not a system file")
    variables = []
    for no, x, _ in doc.equations:
        if x in variables:
            raise ParseError(f"duplicate equation for {x!r}", no)
        variables.append(x)
    names = set(variables) | set(doc.params)
    asts = [(no, x, parse_expr(rhs, no)) for no, x, rhs in doc.equations]
    sig = doc.sig
    if any(mentions(ast, BOTTOM) for _, _, ast in asts):
        sig = add_bottom(sig)

    rhs = {}
    for no, x, ast in asts:

        def resolve(name: str, no=no) -> str:
            if name in names:
                return "leaf"
            if name in sig and sig.arity(name) == 0:
                return "const"
            raise ParseError(f"unknown identifier {name!r}", no)

        if isinstance(ast, Ident) and ast.name in variables:
            rhs[x] = VarRef(ast.name)
        elif isinstance(ast, Ident) and ast.name in doc.params:
            raise ParseError(f"bare parameter {ast.name!r} is not a valid right-hand side", no)
        else:
            rhs[x] = build_tree(sig, ast, resolve, (), no)
    try:
        return EqSystem(sig, tuple(variables), frozenset(doc.params), rhs)
    except (EquationError, SignatureError, TreeError) as err:
        raise ParseError(str(err)) from None


def render_system(sys, name: str = "S") -> str:
    from .eqsolve import VarRef

    lines = [render_signature(sys.sig, name)]
    if sys.params:
        lines.append("params " + " ".join(sorted(sys.params)))
    lines.append("sys")
    for x in sys.vars:
        r = sys.rhs[x]
        lines.append(f"{x} = {r.name if isinstance(r, VarRef) else render_tree(r)}")
    return "\n".join(lines) + "\n"


def render_solution(sol, order=None) -> str:
    order = order or list(sol)
    return "\n".join(f"{x} = {render_tree(sol[x])}" for x in order) + "\n"


# ---------------------------------------------------------------- algebras


def parse_algebra(text: str):
    from .finalg import AlgebraError, FiniteAlgebra
    import numpy as np

    doc = parse_document(text)
    if doc.carrier is None:
        raise ParseError("missing 'carrier' line")
    if doc.equations or doc.tree is not None:
        raise ParseError("not an algebra file")
    carrier = doc.carrier
    pos = {c: i for i, c in enumerate(carrier)}
    if len(pos) != len(carrier):
        raise ParseError("duplicate carrier element")
    tables = {}
    for no, symbol, entries in doc.tables:
        if symbol not in doc.sig:
            raise ParseError(f"unknown symbol {symbol!r}", no)
        if symbol in tables:
            raise ParseError(f"duplicate table for {symbol!r}", no)
        n = doc.sig.arity(symbol)
        arr = np.full((len(carrier),) * n, -1, dtype=np.int64)
        for entry in entries.split():
            args, arrow, value = entry.partition("->")
            names = [a for a in args.split(",")] if args else []
            if not arrow or len(names) != n:
                raise ParseError(f"bad table entry {entry!r} for {symbol}/{n}", no)
            for name in names + [value]:
                if name not in pos:
                    raise ParseError(f"unknown identifier {name!r}", no)
            idx = tuple(pos[a] for a in names)
            if arr[idx] != -1:
                raise ParseError(f"duplicate entry {entry!r}", no)
            arr[idx] = pos[value]
        if (arr == -1).any():
            raise ParseError(f"table for {symbol!r} is incomplete", no)
        tables[symbol] = arr
    for symbol in doc.sig.symbols:
        if symbol not in tables:
            raise ParseError(f"missing table for {symbol!r}")
    try:
        return FiniteAlgebra(doc.sig, carrier, tables)
    except AlgebraError as err:
        raise ParseError(str(err)) from None


def render_algebra(alg, name: str = "S") -> str:
    import itertools

    names = [str(c) for c in alg.carrier]
    lines = [render_signature(alg.sig, name), "carrier " + " ".join(names)]
    for symbol, n in alg.sig.ops:
        cells = []
        for args in itertools.product(range(len(names)), repeat=n):
            value = names[int(alg.tables[symbol][args])]
            cells.append(",".join(names[a] for a in args) + "->" + value)
        lines.append(f"table {symbol}: " + " ".join(cells))
    return "\n".join(lines) + "\n"
