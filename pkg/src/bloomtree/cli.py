"""Command-line front end.

Exit status: 0 on success (equal trees, passing laws), 1 on a law failure
or unequal trees, 2 on usage and input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import finalg, lawcheck
from .eqsolve import EquationError, NotIdealError, classify, solve_strict, solve_unique
from .rattree import (
    ChainInfiniteError,
    RatTree,
    TreeError,
    bisim_eq,
    enumerate_chain,
    from_record,
    to_record,
    unfold,
)
from .sigcore import SignatureError, make_signature
from .syntax import (
    ParseError,
    parse_algebra,
    parse_signature,
    parse_system,
    parse_tree_file,
    render_partial,
    render_tree,
)

SCHEMA = 1


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise UsageError(f"{path}: {err.strerror}") from None


def load_tree(path: str) -> RatTree:
    """A tree file (``tree EXPR``) or a structured record with ``sig`` and
    ``params`` next to the graph fields."""
    text = _read(path)
    if not text.lstrip().startswith("{"):
        return parse_tree_file(text)
    try:
        rec = json.loads(text)
        sig = make_signature([(s, int(n)) for s, n in rec["sig"]])
        return from_record(sig, rec, rec.get("params", ()))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as err:
        raise ParseError(f"{path}: bad tree record ({err})") from None


def tree_record(t: RatTree) -> dict:
    return {
        "sig": [[s, n] for s, n in t.sig.ops],
        "params": sorted(t.params),
        **to_record(t),
        "mu": render_tree(t),
    }


def _emit(args, record: dict, lines: list[str]) -> None:
    if args.format == "structured":
        print(json.dumps({"v": SCHEMA, "command": args.command, **record}, sort_keys=True, ensure_ascii=False))
    else:
        for line in lines:
            print(line)


# ----------------------------------------------------------------- commands


def cmd_solve(args) -> int:
    system = parse_system(_read(args.file))
    if args.strict:
        sol = solve_strict(system)
    elif classify(system) == "general":
        raise NotIdealError(system.var_refs())
    else:
        sol = solve_unique(system)
    lines = [f"{x} = {render_tree(sol[x])}" for x in system.vars]
    record = {"strict": args.strict, "solution": [{"var": x, **tree_record(sol[x])} for x in system.vars]}
    _emit(args, record, lines)
    return 0


def cmd_eq(args) -> int:
    a, b = load_tree(args.file1), load_tree(args.file2)
    try:
        equal = bisim_eq(a, b)
    except SignatureError as err:
        raise UsageError(str(err)) from None
    _emit(args, {"equal": equal}, ["equal" if equal else "not equal"])
    return 0 if equal else 1


def cmd_unfold(args) -> int:
    if args.depth < 0:
        raise UsageError("--depth must be non-negative")
    t = load_tree(args.file)
    text = render_partial(unfold(t, args.depth))
    _emit(args, {"depth": args.depth, "term": text}, [text])
    return 0


def _chain_signature(args):
    if args.sig and args.op:
        raise UsageError("give either --sig or --op, not both")
    if args.sig:
        return parse_signature(_read(args.sig))
    if not args.op:
        raise UsageError("chain needs a signature (--sig FILE or --op SYMBOL/ARITY)")
    decls = []
    for spec in args.op:
        symbol, slash, arity = spec.rpartition("/")
        if not slash or not symbol or not arity.isdigit():
            raise UsageError(f"bad --op {spec!r}")
        decls.append((symbol, int(arity)))
    return make_signature(decls)


def cmd_chain(args) -> int:
    if args.level < 0:
        raise UsageError("--level must be non-negative")
    sig = _chain_signature(args)
    params = args.params if args.params is not None else ["y"]
    try:
        level = enumerate_chain(sig, params, args.level, args.kind)
    except ChainInfiniteError as err:
        raise UsageError(str(err)) from None
    shown = [render_tree(t) for t in level]
    record = {"kind": args.kind, "level": args.level, "cardinality": len(level), "elements": shown}
    _emit(args, record, shown + [f"cardinality {len(level)}"])
    return 0


def cmd_laws(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    laws = lawcheck.LAWS if args.law == "all" else (args.law,)
    reports = lawcheck.run_laws(laws, trials=args.trials, seed=args.seed)
    lines = []
    for r in reports:
        lines.append(str(r) + (f" notes={'; '.join(r.notes)}" if r.notes else ""))
        for f in r.failures:
            lines.append(f"  seed={f.seed} variable={f.variable} {f.detail}".rstrip())
            lines.extend("    " + s.replace("\n", "\n    ").rstrip() for s in f.systems)
    record = {
        "seed": args.seed,
        "reports": [
            {
                "law": r.law,
                "trials": r.trials,
                "notes": r.notes,
                "failures": [
                    {"seed": f.seed, "variable": f.variable, "detail": f.detail, "systems": list(f.systems)}
                    for f in r.failures
                ],
            }
            for r in reports
        ],
    }
    _emit(args, record, lines)
    return 0 if all(r.passed for r in reports) else 1


def cmd_alg(args) -> int:
    alg = parse_algebra(_read(args.file))
    k = args.max_vars if args.max_vars is not None else max(len(alg), 1)
    if k < 1:
        raise UsageError("--max-vars must be positive")
    record = {
        "size": len(alg),
        "max_vars": k,
        "bounded_corecursive": finalg.bounded_corecursive(alg, k),
        "bounded_solvable": finalg.bounded_solvable(alg, k),
    }
    ops = alg.sig.ops
    if len(ops) == 1 and ops[0][1] == 1:
        record["fixpoints"] = sorted(map(str, finalg.fixpoints(alg)))
    if len(ops) == 1 and ops[0][1] == 2:
        record["idempotents"] = sorted(map(str, finalg.idempotents(alg)))
        record["completely_factorizable"] = sorted(map(str, finalg.completely_factorizable(alg)))
    lines = []
    for key, value in record.items():
        if isinstance(value, bool):
            value = str(value).lower()
        elif isinstance(value, list):
            value = "{" + ", ".join(value) + "}"
        lines.append(f"{key}: {value}")
    _emit(args, record, lines)
    return 0


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "structured"), default="text")

    p = argparse.ArgumentParser(prog="bloomtree", description="Rational trees, recursive systems and finite algebras.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="solve a system file")
    s.add_argument("file")
    s.add_argument("--strict", action="store_true", help="allow unguarded systems (bot for trapped variables)")
    s.set_defaults(run=cmd_solve)

    s = sub.add_parser("eq", parents=[common], help="tree equality of two tree files")
    s.add_argument("file1")
    s.add_argument("file2")
    s.set_defaults(run=cmd_eq)

    s = sub.add_parser("unfold", parents=[common], help="finite unfolding of a tree file")
    s.add_argument("file")
    s.add_argument("--depth", type=int, required=True)
    s.set_defaults(run=cmd_unfold)

    s = sub.add_parser("chain", parents=[common], help="enumerate a level of an initial chain")
    s.add_argument("--kind", choices=("freealg", "corec"), required=True)
    s.add_argument("--level", type=int, required=True)
    s.add_argument("--sig", help="signature file")
    s.add_argument("--op", action="append", help="SYMBOL/ARITY, repeatable")
    s.add_argument("--params", nargs="*", help="parameter names (default: y)")
    s.set_defaults(run=cmd_chain)

    s = sub.add_parser("laws", parents=[common], help="run the randomized law suites")
    s.add_argument("--law", choices=("all",) + lawcheck.LAWS, default="all")
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(run=cmd_laws)

    s = sub.add_parser("alg", help="finite algebra checks")
    alg_sub = s.add_subparsers(dest="alg_command", required=True)
    c = alg_sub.add_parser("check", parents=[common], help="solution checks on an algebra file")
    c.add_argument("file")
    c.add_argument("--max-vars", type=int)
    c.set_defaults(run=cmd_alg)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except (UsageError, ParseError, EquationError, TreeError, SignatureError, finalg.AlgebraError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
