import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bloomtree.rattree import (
    INFINITE,
    MARK,
    ChainInfiniteError,
    OpNode,
    ParamNode,
    RatTree,
    TreeError,
    all_graphs,
    bisim_classes,
    bisim_eq,
    count_subtrees,
    enumerate_chain,
    from_record,
    from_term,
    graft,
    graph,
    is_in_Mstar,
    is_in_Un,
    leaf,
    minimize,
    mu,
    op,
    param_depth,
    param_occurrences,
    to_record,
    unfold,
)
from bloomtree.sigcore import make_signature
from bloomtree.syntax import parse_tree_expr

from oracles import leaf_depths, naive_unfold, unfold_equal
from strategies import SIG, trees

BIN = make_signature([("*", 2)])
UN = make_signature([("s", 1)])


def t(text, sig=SIG):
    return parse_tree_expr(sig, text)


# -------------------------------------------------------------- construction


def test_from_term_binary():
    tr = from_term(BIN, ("*", "y", "y"))
    assert len(tr) == 3
    assert unfold(tr, 5) == ("*", "y", "y")


def test_from_term_constant():
    tr = from_term(SIG, ("c",))
    assert tr.nodes == (OpNode("c", ()),)


def test_free_chain_element():
    tr = from_term(BIN, ("*", ("*", "y", "y"), "y"))
    assert param_depth(tr) == 2
    assert unfold(tr, 10) == ("*", ("*", "y", "y"), "y")


def test_from_term_arity_error():
    with pytest.raises(TreeError):
        from_term(BIN, ("*", "y"))


def test_validation():
    with pytest.raises(TreeError):
        RatTree(BIN, (OpNode("*", (0, 5)),))
    with pytest.raises(TreeError):
        RatTree(BIN, (ParamNode("y"),))  # undeclared
    with pytest.raises(TreeError):
        RatTree(BIN, (OpNode("*", (0, 0)), ParamNode("y")), params=frozenset("y"))


# -------------------------------------------------------------------- unfold


def test_unfold_examples():
    assert unfold(mu(BIN, "*"), 2) == ("*", ("*", MARK, MARK), ("*", MARK, MARK))
    assert unfold(mu(UN, "s"), 3) == ("s", ("s", ("s", MARK)))
    assert unfold(mu(UN, "s"), 0) is MARK


@given(trees(), st.integers(0, 7))
def test_unfold_matches_naive(tr, d):
    assert unfold(tr, d) == naive_unfold(tr.nodes, tr.root, d)


# ----------------------------------------------------------------- equality


def test_bisim_examples():
    assert bisim_eq(t("μx.s(x)"), t("μy.s(s(y))"))
    tr = t("μx.*(x,s(a))")
    assert bisim_eq(tr, tr)
    assert not bisim_eq(leaf(SIG, "a"), leaf(SIG, "b"))
    assert not bisim_eq(t("μx.*(x,a)"), t("μx.*(a,x)"))


@settings(max_examples=300)
@given(trees(max_nodes=8), trees(max_nodes=8))
def test_bisim_agrees_with_unfold_oracle(a, b):
    assert bisim_eq(a, b) == unfold_equal(a, b)


@given(trees(), trees(), trees())
def test_bisim_is_an_equivalence(a, b, c):
    assert bisim_eq(a, a)
    assert bisim_eq(a, b) == bisim_eq(b, a)
    if bisim_eq(a, b) and bisim_eq(b, c):
        assert bisim_eq(a, c)


# ------------------------------------------------------------- minimization


def test_minimize_examples():
    m = minimize(t("μy.s(s(y))"))
    assert len(m) == 1 and bisim_eq(m, t("μx.s(x)"))
    shared = minimize(from_term(BIN, ("*", "y", "y")))
    assert len(shared) == 2
    assert shared.nodes == (OpNode("*", (1, 1)), ParamNode("y"))


def test_count_subtrees_examples():
    assert count_subtrees(mu(BIN, "*")) == 1
    assert count_subtrees(from_term(BIN, ("*", "y", "y"))) == 2
    assert count_subtrees(t("μx.s(s(x))")) == 1


def test_minimal_size_by_exhaustion():
    # every graph of at most 3 nodes over {*, s} with parameter a; within each
    # class of the unfolding oracle the minimized size is the least size
    small = list(all_graphs(make_signature([("*", 2), ("s", 1)]), ["a"], 3))
    classes = {}  # shallow prefix -> list of [representative, least size]
    for tr in small:
        reps = classes.setdefault(naive_unfold(tr.nodes, tr.root, 4), [])
        for entry in reps:
            if unfold_equal(entry[0], tr):
                entry[1] = min(entry[1], len(tr))
                break
        else:
            reps.append([tr, len(tr)])
    for reps in classes.values():
        for rep, least in reps:
            assert len(minimize(rep)) == least


@given(trees())
def test_minimize_preserves_tree_and_is_idempotent(tr):
    m = minimize(tr)
    assert bisim_eq(m, tr)
    assert unfold_equal(m, tr)
    assert minimize(m) == m
    assert len(m) <= len(tr)
    assert len(set(bisim_classes(m))) == len(m)


@given(trees(), trees())
def test_minimal_forms_are_canonical(a, b):
    assert (minimize(a) == minimize(b)) == bisim_eq(a, b)


# -------------------------------------------------------------- occurrences


def test_param_occurrences_examples():
    assert param_occurrences(t("μx.*(a,x)")) is INFINITE
    assert param_occurrences(t("*(a,a)")) == {"a": 2}
    assert param_occurrences(mu(BIN, "*")) == {}


def test_infinite_occurrences_grow_with_depth():
    tr = t("μx.*(a,x)")
    for k in range(1, 12):
        leaves = [n for n, _ in leaf_depths(unfold(tr, k + 1)) if n == "a"]
        assert len(leaves) >= k


def test_mstar_examples():
    assert is_in_Mstar(mu(BIN, "*"))
    assert is_in_Mstar(t("*(a,μx.*(x,x))"))
    assert not is_in_Mstar(t("μx.*(a,x)"))


def test_un_examples():
    y = leaf(BIN, "y")
    assert is_in_Un(y, 1) and not is_in_Un(y, 0)
    assert all(is_in_Un(mu(BIN, "*"), n) for n in range(5))
    tr = from_term(BIN, ("*", "y", ("*", "y", "y")))
    assert not is_in_Un(tr, 2) and is_in_Un(tr, 3)


@given(trees())
def test_occurrences_match_depth_scan(tr):
    occ = param_occurrences(tr)
    n = len(tr)
    deep = leaf_depths(unfold(tr, n + 1))
    if occ is INFINITE:
        # a parameter below a cycle appears again after at most n more levels
        more = leaf_depths(unfold(tr, 3 * n + 2))
        assert len(more) > len(deep)
    else:
        assert all(d < n for _, d in deep)
        counts = {}
        for name, _ in deep:
            counts[name] = counts.get(name, 0) + 1
        assert counts == occ


@given(trees(), st.integers(0, 8))
def test_un_is_monotone_and_covers_mstar(tr, n):
    if is_in_Un(tr, n):
        assert is_in_Un(tr, n + 1)
    assert is_in_Mstar(tr) == any(is_in_Un(tr, k) for k in range(len(tr) + 1))


# ------------------------------------------------------------------- chains


def test_freealg_chain_counts():
    assert [len(enumerate_chain(BIN, ["y"], n, "freealg")) for n in range(4)] == [1, 2, 5, 26]


def test_corec_chain_counts():
    assert [len(enumerate_chain(BIN, ["y"], n, "corec")) for n in range(3)] == [1, 2, 5]
    for n in range(6):
        assert len(enumerate_chain(UN, ["y"], n, "corec")) == n + 1


def test_chain_levels_are_in_un():
    for tr in enumerate_chain(BIN, ["y"], 3, "corec"):
        assert is_in_Un(tr, 3)


def test_corec_levels_increase():
    for sig in (BIN, UN):
        levels = [enumerate_chain(sig, ["y"], n, "corec") for n in range(4)]
        for small, big in zip(levels, levels[1:]):
            assert all(any(bisim_eq(t, u) for u in big) for t in small)


def test_bisim_on_close_pairs():
    # random pairs rarely agree; perturbing one node of a tree gives near misses
    rng = random.Random(1)
    for _ in range(300):
        n = rng.randint(1, 8)
        nodes = [OpNode("*", (rng.randrange(n), rng.randrange(n))) if rng.random() < 0.7 else ParamNode("a") for _ in range(n)]
        a = graph(SIG, nodes, 0, ["a"])
        nodes[rng.randrange(n)] = OpNode("*", (rng.randrange(n), rng.randrange(n)))
        b = graph(SIG, nodes, 0, ["a"])
        assert bisim_eq(a, b) == unfold_equal(a, b)


def test_freealg_oracle():
    # direct construction of V_n as sets of finite terms
    level = {"y"}
    for n in range(4):
        assert len(enumerate_chain(BIN, ["y"], n, "freealg")) == len(level)
        level = {("*", a, b) for a, b in itertools.product(level, repeat=2)} | {"y"}


def test_corec_needs_finite_closed_part():
    with pytest.raises(ChainInfiniteError):
        enumerate_chain(SIG, ["y"], 1, "corec")


# ------------------------------------------------------------ substitution


def test_graft_shares_images():
    tr = graft(t("*(a,a)"), {"a": mu(SIG, "*")})
    assert bisim_eq(tr, t("*(μt.*(t,t),μt.*(t,t))"))
    assert len(tr) == 2


def test_op_builds_root():
    tr = op(SIG, "s", [mu(SIG, "s")])
    assert bisim_eq(tr, mu(SIG, "s"))


@given(trees())
def test_record_round_trip(tr):
    back = from_record(tr.sig, to_record(tr), tr.params)
    assert back == tr
