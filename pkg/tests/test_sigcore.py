import pytest

from bloomtree.sigcore import BOTTOM, SignatureError, add_bottom, make_signature, strict


def test_binary_signature():
    sig = make_signature([("*", 2)])
    assert sig.ops == (("*", 2),)
    assert sig.arity("*") == 2
    assert not sig.is_strict
    assert str(sig) == "{*/2}"


def test_unary_and_empty():
    assert make_signature([("s", 1)]).arity("s") == 1
    empty = make_signature([])
    assert len(empty) == 0 and empty.nullary() == ()


@pytest.mark.parametrize(
    "decls",
    [[("*", 2), ("*", 1)], [("s", -1)], [(BOTTOM, 0)], [("s", 1.5)]],
)
def test_rejects_bad_declarations(decls):
    with pytest.raises(SignatureError):
        make_signature(decls)


def test_unknown_symbol_arity():
    with pytest.raises(SignatureError):
        make_signature([("s", 1)]).arity("t")


def test_add_bottom_appends_reserved_constant():
    sig = make_signature([("*", 2)])
    s = add_bottom(sig)
    assert s.ops == (("*", 2), (BOTTOM, 0))
    assert s.is_strict and s.base_signature() == sig
    assert add_bottom(make_signature([])).ops == ((BOTTOM, 0),)


def test_add_bottom_twice_fails():
    with pytest.raises(SignatureError):
        add_bottom(add_bottom(make_signature([("s", 1)])))


def test_strict_is_idempotent():
    s = strict(make_signature([("s", 1)]))
    assert strict(s) is s
