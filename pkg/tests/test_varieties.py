import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cloneops.axioms import check_axioms
from cloneops.block_algebra import BlockAlgebra
from cloneops.clone_engine import FinAlgebra, full_section, term_block, term_clone
from cloneops.congruence import clv_block_algebra
from cloneops.finite_ops import FinUniverse, OpTable, constant_block
from cloneops.terms import App, Var, parse_term
from cloneops.varieties import (HomomorphismError, Interpretation, InterpretationError,
                                ProductAlgebra, TrivialAlgebra, check_diagonal_identity,
                                diagonal_identity, f_expansion, independence_search,
                                interp_to_purehom, is_minimal_bounded, minimal_section,
                                product_minimality_check)

from conftest import load

U2 = FinUniverse("2", ("0", "1"))


def test_product_satisfies_axioms():
    P = ProductAlgebra(clv_block_algebra(load("lz"), 2), clv_block_algebra(load("rz"), 2))
    assert len(P.elements()) == 4 and P.max_e() == 2
    assert check_axioms(P, max_n=2).ok
    with pytest.raises(ValueError):
        ProductAlgebra(clv_block_algebra(load("lz"), 2), clv_block_algebra(load("sets"), 2))


def test_minimal_section_examples():
    S = clv_block_algebra(load("sets"), 3)
    ms = minimal_section(S, 4)
    assert set(ms.elements) == {S.e(1), S.e(2), S.e(3)} and ms.saturated
    B = clv_block_algebra(load("ba"), 2)
    ms = minimal_section(B, 2)
    ba = load("ba")
    assert term_block(parse_term("(and v1 v2)"), ba) in ms.elements
    assert term_block(parse_term("(not v1)"), ba) in ms.elements
    L = clv_block_algebra(load("lz"), 2)
    ms = minimal_section(L, 3)
    assert set(ms.elements) == {L.e(1), L.e(2)}
    assert ms.witnesses[L.e(2)] == "e2" and ms.q_closed


def test_minimality_verdicts():
    assert is_minimal_bounded(clv_block_algebra(load("ba"), 2), 4).verdict == "minimal"
    assert is_minimal_bounded(clv_block_algebra(load("sets"), 3), 1).verdict == "minimal"
    full = BlockAlgebra(full_section(load("and"), 2))
    v = is_minimal_bounded(full, 5)
    assert v.verdict == "not-minimal" and "1:10" in v.missing
    assert (v.reached, v.total) == (3, 16)
    assert is_minimal_bounded(clv_block_algebra(load("nand"), 2), 1).verdict == "unknown"


def test_minimal_section_grows_with_depth():
    B = clv_block_algebra(load("nand"), 2)
    sizes = [len(minimal_section(B, d).elements) for d in range(6)]
    assert sizes == sorted(sizes) and sizes[-1] == 16
    prev = set()
    for d in range(6):
        cur = set(minimal_section(B, d).elements)
        assert prev <= cur
        prev = cur


def test_identity_interpretation_is_identity():
    ba = load("ba")
    I = Interpretation(ba.signature, ba, {name: App(name, tuple(Var(i + 1) for i in range(k)))
                                          for name, k in ba.signature.items()})
    F = interp_to_purehom(I, ba, 2)
    assert F.ok and all(F(b) == b for b in F.source.elements())


def test_left_zero_into_sets():
    I = Interpretation({"*": 2}, load("sets"), {"*": Var(1)})
    F = interp_to_purehom(I, load("lz"), 2)
    assert F.ok
    assert set(F.table.values()) <= {F.target.e(1), F.target.e(2)}
    assert I.translate(parse_term("(* (* v2 v1) v3)")) == Var(2)


def test_interpretation_errors():
    with pytest.raises(InterpretationError):
        Interpretation({"c": 0}, load("sets"), {"c": Var(1)})
    with pytest.raises(InterpretationError):
        Interpretation({"*": 2}, load("sets"), {})
    with pytest.raises(InterpretationError):
        Interpretation({"*": 2}, load("sets"), {"*": Var(3)})
    # a constant term is fine for a nullary symbol
    Interpretation({"c": 0}, load("ba"), {"c": parse_term("(zero)")})
    I = Interpretation({"*": 2}, load("sets"), {"*": Var(1)})
    with pytest.raises(InterpretationError):
        interp_to_purehom(I, load("ba"), 2)


def test_independence_examples():
    r = independence_search(load("lz"), load("rz"), 3)
    assert str(r.witness) == "(* v1 v2)" and r.depth == 1
    r = independence_search(load("sets"), load("sets"), 5)
    assert r.witness is None and r.saturated
    assert r.describe() == "none (exhaustive)"
    r = independence_search(load("unary"), load("unary-const"), 6)
    assert r.witness is None
    r = independence_search(load("ba"), load("ba"), 2)
    assert r.witness is None and r.describe() == "none at depth 2"
    with pytest.raises(ValueError):
        independence_search(load("lz"), load("ba"), 1)


@pytest.mark.parametrize("a1,a2,depth,minimal,found", [
    ("lz", "rz", 3, "minimal", True),
    ("sets", "sets", 3, "not-minimal", False),
    ("ba", "ba", 4, "not-minimal", False),
    ("unary", "unary-const", 4, "not-minimal", False),
])
def test_independence_agrees_with_minimality(a1, a2, depth, minimal, found):
    pm = product_minimality_check(load(a1), load(a2), depth, 2)
    assert pm.minimality.verdict == minimal
    assert (pm.independence.witness is not None) == found
    assert pm.agree is True
    assert pm.to_dict()["agree"] is True


def _binary_groupoid(table):
    return FinAlgebra("g", U2, {"*": OpTable(U2, 2, tuple(table))})


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=4, max_size=4),
       st.lists(st.integers(0, 1), min_size=4, max_size=4))
def test_independence_and_minimality_never_disagree(t1, t2):
    pm = product_minimality_check(_binary_groupoid(t1), _binary_groupoid(t2), 4, 2)
    assert pm.agree is not False


def test_f_expansion_identity():
    B = clv_block_algebra(load("ba"), 2)
    Df = f_expansion(B, B.pure(), lambda x: x)
    for name, k in B.signature.items():
        for xs in itertools.product(B.elements(), repeat=k):
            assert Df.sigma(name, *xs) == B.sigma(name, *xs)


def test_f_expansion_of_product_projection():
    L, R = clv_block_algebra(load("lz"), 2), clv_block_algebra(load("rz"), 2)
    P = ProductAlgebra(L, R)
    Df = f_expansion(P, L.pure(), lambda p: p[0])
    for x, y in itertools.product(L.elements(), repeat=2):
        assert Df.sigma("*", x, y) == L.sigma("*", x, y)
    Dg = f_expansion(P, R.pure(), lambda p: p[1])
    for x, y in itertools.product(R.elements(), repeat=2):
        assert Dg.sigma("*", x, y) == R.sigma("*", x, y)


def test_f_expansion_onto_trivial_and_errors():
    B = clv_block_algebra(load("ba"), 2)
    T = TrivialAlgebra(bound=2)
    Df = f_expansion(B, T, lambda x: "*")
    assert all(Df.sigma(n, *["*"] * k) == "*" for n, k in B.signature.items())
    with pytest.raises(HomomorphismError):
        f_expansion(B, B.pure(), lambda x: B.e(1))


def test_diagonal_identity_in_sets_and_b2():
    assert diagonal_identity(2).key.startswith("diagonal")
    S = clv_block_algebra(load("sets"), 2)
    assert check_diagonal_identity(S, 2).ok
    B = clv_block_algebra(load("ba"), 2)
    assert not check_diagonal_identity(B, 2).ok
    ba = load("ba")
    OR = term_block(parse_term("(or v1 v2)"), ba)
    zero, one = constant_block(U2, 0), constant_block(U2, 1)
    lhs = B.q(OR, B.q(OR, zero, one), B.q(OR, one, zero))
    rhs = B.q(OR, zero, zero)
    assert (lhs, rhs) == (one, zero)
