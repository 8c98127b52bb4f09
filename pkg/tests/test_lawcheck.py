import pytest

from bloomtree.eqsolve import VarRef, classify, derived_chain, solve_strict
from bloomtree.lawcheck import (
    LAWS,
    Bounds,
    CoalgHom,
    check_dinaturality,
    check_double,
    check_fixpoint,
    check_functoriality,
    check_parameter,
    gen_hom_instance,
    gen_system,
    run_law,
    shrink_system,
)
from bloomtree.rattree import bisim_eq, leaf, mu
from bloomtree.sigcore import make_signature
from bloomtree.syntax import parse_system, parse_tree_expr, render_system

S = make_signature([("*", 2), ("s", 1), ("c", 0)])
UN = make_signature([("s", 1)])
BIN2 = make_signature([("*", 2)])


def system(body, ops="op */2\nop s/1\nop c/0", params=""):
    head = f"sig S\n{ops}\n" + (f"params {params}\n" if params else "")
    return parse_system(head + "sys\n" + body)


GOLDEN_SEED0 = """sig S
op */2
sys
x0 = *(x1,x1)
x1 = x0
"""


def test_gen_system_golden():
    sys = gen_system(0, Bounds(max_vars=2, sig=BIN2, params=()))
    assert render_system(sys) == GOLDEN_SEED0


def test_gen_system_is_deterministic():
    assert all(render_system(gen_system(s)) == render_system(gen_system(s)) for s in range(50))


def test_guardedness_extremes():
    for seed in range(100):
        assert classify(gen_system(seed, Bounds(guardedness=1.0))) != "general"
        sys = gen_system(seed, Bounds(guardedness=0.0, max_vars=1))
        assert sys.rhs == {"x0": VarRef("x0")}


def test_hom_instance_lift():
    target = system("x = s(x)\n", ops="op s/1")
    hom = gen_hom_instance(3, Bounds(sig=UN), target=target, h={"x0": "x", "x1": "x"})
    assert set(hom.source.vars) == {"x0", "x1"}
    report = check_functoriality(hom)
    assert report.passed
    src = solve_strict(hom.source)
    assert all(bisim_eq(src[u], mu(UN, "s")) for u in ("x0", "x1"))


def test_identity_hom():
    target = gen_system(5)
    h = {x: x for x in target.vars}
    hom = gen_hom_instance(0, target=target, h=h)
    assert hom.source == target
    assert check_functoriality(hom).passed


def test_hom_instance_needs_surjection():
    target = system("x = s(x)\ny = s(y)\n")
    with pytest.raises(ValueError):
        gen_hom_instance(0, target=target, h={"u": "x"})


def test_functoriality_rejects_broken_square():
    a = system("x = s(x)\n")
    b = system("x = c()\n")
    with pytest.raises(ValueError):
        check_functoriality(CoalgHom(a, b, {"x": "x"}))


def test_fixpoint_examples():
    assert check_fixpoint(system("x = *(x,x)\n")).passed
    assert check_fixpoint(system("x = x\n")).passed


def test_parameter_examples():
    sys = system("x = *(a,*(x,x))\n", params="a")
    report = check_parameter(sys, {"a": parse_tree_expr(S, "c")})
    assert report.passed and report.notes == ["substitution-exchange (extension)"]
    closed = system("x = s(x)\n")
    report = check_parameter(closed, {})
    assert report.passed and report.notes == ["literal"]


def test_double_examples():
    assert check_double(system("x = x\n")).passed
    assert check_double(system("x = s(x)\n")).passed


def test_double_stage_relation():
    sys = system("a = b\nb = c\nc = d\nd = s(a)\n")
    from bloomtree.eqsolve import self_substitute

    once, twice = derived_chain(sys), derived_chain(self_substitute(sys))
    for n in range(4):
        assert twice.stage(n) == once.stage(2 * n)


def test_dinaturality_examples():
    f = {"x": leaf(S, "z")}
    g = {"z": parse_tree_expr(S, "s(x)")}
    assert check_dinaturality(f, g, S).passed
    f = {"x": parse_tree_expr(S, "*(z,z)")}
    g = {"z": parse_tree_expr(S, "c")}
    assert check_dinaturality(f, g, S).passed


@pytest.mark.parametrize("law", LAWS)
def test_each_law_small_run(law):
    report = run_law(law, trials=100, seed=7)
    assert report.trials == 100 and report.passed, report.failures[:1]


def test_shrinker_reaches_minimal_counterexample():
    # artificial property: "no variable is bound to bot" fails for any system
    # with a trapped variable; the shrinker should end at a single x = x
    def fails(sys):
        return bool(derived_chain(sys).x_infinity)

    seed = next(s for s in range(1000) if fails(gen_system(s)) and len(gen_system(s).vars) > 2)
    small = shrink_system(gen_system(seed), fails)
    assert fails(small)
    assert len(small.vars) == 1 and isinstance(small.rhs[small.vars[0]], VarRef)


def test_broken_solver_is_detected(monkeypatch):
    # mutation check: a solver that ignores the right-hand sides must fail
    import bloomtree.lawcheck as lc

    monkeypatch.setattr(lc, "solve_strict", lambda sys: {x: mu(S, "s") for x in sys.vars})
    report = run_law("fixpoint", trials=50)
    assert not report.passed
    assert report.failures[0].systems
