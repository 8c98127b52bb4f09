"""Seeded property checks for the equational laws of the strict-solution
operation: fixpoint identity, functoriality, parameter identity, double
iteration and dinaturality.

Every check works on the free rational-tree monad over the signature
extended by ``bot``; a failure means a bug in the solver or substitution.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .eqsolve import (
    EqSystem,
    VarRef,
    as_rhs,
    derived_chain,
    fixpoint_failures,
    rename_params,
    self_substitute,
    solve_strict,
    substitute,
)
from .monadkit import kleisli_extend
from .rattree import OpNode, ParamNode, RatTree, bisim_eq, from_term, graph, leaf
from .sigcore import Signature, make_signature

DEFAULT_SIGNATURE = make_signature([("*", 2), ("s", 1), ("c", 0)])
LAWS = ("fixpoint", "functoriality", "parameter", "double", "dinaturality")


@dataclass(frozen=True)
class Bounds:
    max_vars: int = 4
    max_rhs_nodes: int = 6
    params: tuple[str, ...] = ("a", "b")
    guardedness: float = 0.5
    sig: Signature = DEFAULT_SIGNATURE

    def __post_init__(self):
        if self.max_vars < 1 or self.max_rhs_nodes < 1:
            raise ValueError("bounds must be positive")
        if not 0.0 <= self.guardedness <= 1.0:
            raise ValueError("guardedness must lie in [0, 1]")


@dataclass(frozen=True)
class Failure:
    seed: int
    systems: tuple[str, ...]
    variable: str
    detail: str = ""


@dataclass
class LawReport:
    law: str
    trials: int = 0
    failures: list[Failure] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def merge(self, other: LawReport) -> None:
        self.trials += other.trials
        self.failures.extend(other.failures)
        for note in other.notes:
            if note not in self.notes:
                self.notes.append(note)

    def __str__(self):
        return f"law={self.law} trials={self.trials} failures={len(self.failures)}"


@dataclass(frozen=True)
class CoalgHom:
    source: EqSystem
    target: EqSystem
    h: Mapping[str, str]


# -------------------------------------------------------------- generators


def _random_term(rng: random.Random, sig: Signature, leaves: Sequence, budget: int, root: bool):
    """A random finite term with at most `budget` nodes. Leaves are names from
    `leaves` or nullary symbols; `root` forces an operation at the top."""
    fitting = [(s, n) for s, n in sig.ops if n < budget]
    consts = [(s,) for s in sig.nullary()]
    if fitting and (root or not (leaves or consts) or rng.random() < 0.55):
        symbol, arity = rng.choice(fitting)
        budget -= 1
        kids = []
        for i in range(arity):
            later = arity - i - 1
            share = rng.randint(1, budget - later)
            kid, used = _random_term(rng, sig, leaves, share, False)
            kids.append(kid)
            budget -= used
        return (symbol, *kids), 1 + sum(_size(k) for k in kids)
    pick = rng.choice(list(leaves) + consts)
    return pick, 1


def _size(term) -> int:
    return 1 if isinstance(term, str) else 1 + sum(_size(k) for k in term[1:])


def random_tree(rng, sig, leaves, max_nodes, root_op=True) -> RatTree:
    term, _ = _random_term(rng, sig, leaves, rng.randint(1, max_nodes), root_op)
    return from_term(sig, term)


def gen_system(seed: int, bounds: Bounds = Bounds()) -> EqSystem:
    """Deterministic random system: up to `max_vars` variables, each right-hand
    side a guarded tree (probability `guardedness`) or a bare variable."""
    rng = random.Random(seed)
    sig = bounds.sig
    xs = [f"x{i}" for i in range(rng.randint(1, bounds.max_vars))]
    ys = list(bounds.params[: rng.randint(0, len(bounds.params))])
    can_guard = any(n > 0 for _, n in sig.ops) or bool(sig.nullary())
    rhs = {}
    for x in xs:
        if can_guard and rng.random() < bounds.guardedness:
            rhs[x] = random_tree(rng, sig, xs + ys, bounds.max_rhs_nodes)
        else:
            rhs[x] = VarRef(rng.choice(xs))
    return EqSystem(sig, tuple(xs), frozenset(ys), rhs)


def relabel(sys: EqSystem, x: str, h: Mapping[str, str]) -> object:
    r = sys.rhs[x]
    if isinstance(r, VarRef):
        return VarRef(h[r.name])
    nodes = [ParamNode(h[n.name]) if isinstance(n, ParamNode) and n.name in h else n for n in r.nodes]
    return graph(r.sig, nodes, r.root)


def check_square(hom: CoalgHom) -> list[str]:
    """Source variables at which the homomorphism square fails."""
    bad = []
    for x in hom.source.vars:
        lhs = relabel(hom.source, x, hom.h)
        rhs = hom.target.rhs[hom.h[x]]
        if isinstance(lhs, VarRef) or isinstance(rhs, VarRef):
            ok = lhs == rhs
        else:
            ok = bisim_eq(lhs, rhs)
        if not ok:
            bad.append(x)
    return bad


def gen_hom_instance(
    seed: int,
    bounds: Bounds = Bounds(),
    target: EqSystem | None = None,
    h: Mapping[str, str] | None = None,
) -> CoalgHom:
    """A target system, a surjection h onto its variables, and a source system
    lifting each right-hand side along h (every variable leaf replaced by a
    randomly chosen preimage)."""
    rng = random.Random(seed)
    if target is None:
        target = gen_system(rng.randrange(2**32), bounds)
    if h is None:
        extra = rng.randint(0, max(0, bounds.max_vars - len(target.vars)))
        images = list(target.vars) + [rng.choice(target.vars) for _ in range(extra)]
        rng.shuffle(images)
        h = {f"u{i}": v for i, v in enumerate(images)}
    else:
        h = dict(h)
        if set(h.values()) != set(target.vars):
            raise ValueError("h must be a surjection onto the target variables")
    pre: dict[str, list[str]] = {}
    for u, v in h.items():
        pre.setdefault(v, []).append(u)
    rhs = {}
    for u, v in h.items():
        r = target.rhs[v]
        if isinstance(r, VarRef):
            rhs[u] = VarRef(rng.choice(pre[r.name]))
        else:
            nodes = [
                ParamNode(rng.choice(pre[n.name])) if isinstance(n, ParamNode) and n.name in pre else n
                for n in r.nodes
            ]
            rhs[u] = graph(r.sig, nodes, r.root, target.params)
    source = EqSystem(target.sig, tuple(h), target.params, rhs)
    return CoalgHom(source, target, h)


def gen_substitution(rng: random.Random, sig: Signature, names, leaves, max_nodes: int):
    """Random substitution: each name maps to a tree (or leaf) over `leaves`."""
    out = {}
    for y in names:
        if leaves and rng.random() < 0.25:
            out[y] = leaf(sig, rng.choice(list(leaves)))
        else:
            out[y] = random_tree(rng, sig, list(leaves), max_nodes, root_op=False)
    return out


def gen_dinat_instance(seed: int, bounds: Bounds = Bounds()):
    """Random f: X -> trees over Z and g: Z -> trees over X."""
    rng = random.Random(seed)
    sig = bounds.sig
    xs = [f"x{i}" for i in range(rng.randint(1, bounds.max_vars))]
    zs = [f"z{i}" for i in range(rng.randint(1, bounds.max_vars))]

    def side(names, leaves):
        out = {}
        for n in names:
            if rng.random() < bounds.guardedness:
                out[n] = random_tree(rng, sig, leaves, bounds.max_rhs_nodes)
            else:
                out[n] = leaf(sig, rng.choice(leaves))
        return out

    return side(xs, zs), side(zs, xs)


# ------------------------------------------------------------------ checks


def _fail(report: LawReport, systems, variable: str, detail: str = "", seed: int = -1):
    report.failures.append(Failure(seed, tuple(str(s) for s in systems), variable, detail))


def check_fixpoint(sys: EqSystem) -> LawReport:
    report = LawReport("fixpoint", 1)
    for x in fixpoint_failures(sys, solve_strict(sys)):
        _fail(report, [sys], x)
    return report


def check_functoriality(hom: CoalgHom) -> LawReport:
    bad = check_square(hom)
    if bad:
        raise ValueError(f"homomorphism square fails at {bad}")
    report = LawReport("functoriality", 1)
    src, tgt = solve_strict(hom.source), solve_strict(hom.target)
    for x in hom.source.vars:
        if not bisim_eq(src[x], tgt[hom.h[x]]):
            _fail(report, [hom.source, hom.target], x)
    return report


def check_parameter(sys: EqSystem, h: Mapping[str, RatTree]) -> LawReport:
    """Solving then substituting parameters agrees with substituting then
    solving. For a parameter-free system this is the literal law (the
    substitution fixes every solution)."""
    report = LawReport("parameter", 1)
    missing = set(sys.params) - set(h)
    if missing:
        raise ValueError(f"substitution undefined on {sorted(missing)}")
    h = {y: t for y, t in h.items() if y in sys.params}
    sol = solve_strict(sys)
    ext = kleisli_extend(h)
    if not sys.params:
        report.notes.append("literal")
        for x in sys.vars:
            if not bisim_eq(ext(sol[x]), sol[x]):
                _fail(report, [sys], x, "substitution moved a closed solution")
        return report
    report.notes.append("substitution-exchange (extension)")
    moved = solve_strict(rename_params(sys, h))
    for x in sys.vars:
        if not bisim_eq(ext(sol[x]), moved[x]):
            _fail(report, [sys], x)
    return report


def check_double(sys: EqSystem) -> LawReport:
    report = LawReport("double", 1)
    twice = self_substitute(sys)
    a, b = solve_strict(sys), solve_strict(twice)
    for x in sys.vars:
        if not bisim_eq(a[x], b[x]):
            _fail(report, [sys, twice], x)
    ca, cb = derived_chain(sys), derived_chain(twice)
    for n in range(len(ca.stages) + 1):
        if cb.stage(n) != ca.stage(2 * n):
            _fail(report, [sys, twice], "", f"stage {n} of the doubled system is not stage {2 * n}")
            break
    return report


def dinat_systems(f: Mapping[str, RatTree], g: Mapping[str, RatTree], sig: Signature):
    """The systems x -> f(x)[g] and z -> g(z)[f]."""
    xs, zs = tuple(f), tuple(g)
    gf = EqSystem(sig, xs, frozenset(), {x: as_rhs(substitute(f[x], g), xs) for x in xs})
    fg = EqSystem(sig, zs, frozenset(), {z: as_rhs(substitute(g[z], f), zs) for z in zs})
    return gf, fg


def check_dinaturality(f: Mapping[str, RatTree], g: Mapping[str, RatTree], sig: Signature | None = None) -> LawReport:
    report = LawReport("dinaturality", 1)
    sig = sig or next(iter(f.values())).sig
    gf, fg = dinat_systems(f, g, sig)
    lhs = solve_strict(gf)
    ext = kleisli_extend(solve_strict(fg))
    for x in gf.vars:
        if not bisim_eq(lhs[x], ext(f[x])):
            _fail(report, [gf, fg], x)
    return report


# ----------------------------------------------------------------- shrinking


def _shrink_candidates(sys: EqSystem):
    xs = sys.vars
    if len(xs) > 1:
        for v in xs:
            for w in xs:
                if w == v:
                    continue
                rest = tuple(x for x in xs if x != v)
                rhs = {}
                for x in rest:
                    r = sys.rhs[x]
                    if isinstance(r, VarRef):
                        rhs[x] = VarRef(w) if r.name == v else r
                    else:
                        rhs[x] = graph(r.sig, [ParamNode(w) if isinstance(n, ParamNode) and n.name == v else n for n in r.nodes], r.root)
                yield EqSystem(sys.sig, rest, sys.params, rhs)
                break
    for x in xs:
        r = sys.rhs[x]
        if isinstance(r, VarRef):
            continue
        for i, node in enumerate(r.nodes):
            if i != r.root and isinstance(node, OpNode):
                nodes = list(r.nodes)
                nodes[i] = ParamNode(xs[0])
                yield EqSystem(sys.sig, xs, sys.params, {**sys.rhs, x: graph(r.sig, nodes, r.root)})
        yield EqSystem(sys.sig, xs, sys.params, {**sys.rhs, x: VarRef(x)})


def shrink_system(sys: EqSystem, fails: Callable[[EqSystem], bool], max_steps: int = 200) -> EqSystem:
    """Greedy shrinking: delete variables and operation nodes while `fails`
    keeps holding."""
    for _ in range(max_steps):
        for cand in _shrink_candidates(sys):
            try:
                if fails(cand):
                    sys = cand
                    break
            except ValueError:
                continue
        else:
            return sys
    return sys


# ------------------------------------------------------------------ harness


def _law_trial(law: str, seed: int, bounds: Bounds) -> LawReport:
    if law == "fixpoint":
        return check_fixpoint(gen_system(seed, bounds))
    if law == "functoriality":
        return check_functoriality(gen_hom_instance(seed, bounds))
    if law == "parameter":
        rng = random.Random(seed)
        sys = gen_system(rng.randrange(2**32), bounds)
        zs = ["z0", "z1"]
        h = gen_substitution(rng, bounds.sig, sorted(sys.params), zs, bounds.max_rhs_nodes)
        return check_parameter(sys, h)
    if law == "double":
        return check_double(gen_system(seed, bounds))
    if law == "dinaturality":
        f, g = gen_dinat_instance(seed, bounds)
        return check_dinaturality(f, g, bounds.sig)
    raise ValueError(f"unknown law {law!r}")


def _replay(law: str, seed: int, bounds: Bounds, failures: list[Failure]) -> list[Failure]:
    """Attach the trial seed, shrinking single-system counterexamples."""
    check = {"fixpoint": check_fixpoint, "double": check_double}.get(law)
    out = []
    for failure in failures:
        systems = failure.systems
        if check is not None:
            small = shrink_system(gen_system(seed, bounds), lambda s: not check(s).passed)
            systems = (str(small),)
        out.append(Failure(seed, systems, failure.variable, failure.detail))
    return out


def run_law(law: str, trials: int = 1000, seed: int = 0, bounds: Bounds = Bounds()) -> LawReport:
    report = LawReport(law)
    for i in range(trials):
        trial = _law_trial(law, seed + i, bounds)
        trial.failures = _replay(law, seed + i, bounds, trial.failures)
        report.merge(trial)
    report.failures.sort(key=lambda f: f.seed)
    return report


def run_laws(laws: Sequence[str] = LAWS, trials: int = 1000, seed: int = 0, bounds: Bounds = Bounds()) -> list[LawReport]:
    return [run_law(law, trials, seed, bounds) for law in laws]
