import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bloomtree.lawcheck import DEFAULT_SIGNATURE, gen_substitution, random_tree
from bloomtree.monadkit import (
    Op,
    Param,
    compose_substitutions,
    decompose,
    delta,
    eta,
    kleisli_extend,
    recompose,
    unit_substitution,
)
from bloomtree.rattree import TreeError, bisim_eq, is_in_Mstar, mu, param_occurrences
from bloomtree.syntax import parse_tree_expr

from oracles import unfold_equal
from strategies import SIG, trees

YS = ["a", "b"]
ZS = ["z0", "z1"]
WS = ["w"]


def monad_law_trial(seed):
    """One random instance of each monad law and of δ-naturality; returns
    law name -> holds."""
    rng = random.Random(seed)
    sig = DEFAULT_SIGNATURE
    t = random_tree(rng, sig, YS, 8, root_op=rng.random() < 0.8)
    h = gen_substitution(rng, sig, YS, ZS, 6)
    k = gen_substitution(rng, sig, ZS, WS, 6)
    y = rng.choice(YS)
    symbol, arity = rng.choice(sig.ops)
    kids = [random_tree(rng, sig, YS, 5, root_op=False) for _ in range(arity)]
    ext_h, ext_k = kleisli_extend(h), kleisli_extend(k)
    return {
        "left unit": bisim_eq(ext_h(eta(sig, y)), h[y]),
        "right unit": bisim_eq(kleisli_extend(unit_substitution(sig, YS))(t), t),
        "associativity": bisim_eq(ext_k(ext_h(t)), kleisli_extend(compose_substitutions(h, k))(t)),
        "delta naturality": bisim_eq(
            ext_h(delta(sig, symbol, kids)), delta(sig, symbol, [ext_h(c) for c in kids])
        ),
    }


def test_eta():
    a = eta(SIG, "a")
    assert len(a) == 1
    assert is_in_Mstar(a) and param_occurrences(a) == {"a": 1}
    assert decompose(a) == Param("a")


def test_delta_examples():
    t = delta(SIG, "*", [eta(SIG, "a"), eta(SIG, "a")])
    assert bisim_eq(t, parse_tree_expr(SIG, "*(a,a)"))
    s = mu(SIG, "s")
    assert bisim_eq(delta(SIG, "s", [s]), s)
    assert unfold_equal(delta(SIG, "s", [s]), s)
    c = delta(SIG, "c", [])
    assert c.root_node.symbol == "c" and len(c) == 1


def test_decompose_cycle():
    full = mu(SIG, "*")
    part = decompose(full)
    assert isinstance(part, Op) and part.symbol == "*"
    assert all(bisim_eq(k, full) for k in part.children)


@settings(max_examples=300)
@given(trees())
def test_decompose_round_trip(t):
    assert bisim_eq(recompose(t, decompose(t)), t)


def test_kleisli_example():
    h = {"a": mu(SIG, "*")}
    t = kleisli_extend(h)(parse_tree_expr(SIG, "*(a,a)"))
    assert bisim_eq(t, parse_tree_expr(SIG, "*(μt.*(t,t),μu.*(u,u))"))


def test_kleisli_rejects_missing_parameters():
    with pytest.raises(TreeError):
        kleisli_extend({"a": eta(SIG, "z")})(parse_tree_expr(SIG, "*(a,b)"))


@settings(max_examples=200)
@given(st.integers(0, 10**6))
def test_monad_laws(seed):
    assert all(monad_law_trial(seed).values())
