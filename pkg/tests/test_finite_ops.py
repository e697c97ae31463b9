import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cloneops.finite_ops import (Block, FinUniverse, OperationError, OpTable, Stream,
                                 all_operations, canonicalize, compose, constant,
                                 constant_stream, depends_on, evaluate, expand, projection,
                                 projection_block, restrict, similar, top_eval)

U2 = FinUniverse("2", ("0", "1"))
U3 = FinUniverse("3", ("a", "b", "c"))


def ops_on(u, max_arity=2):
    return st.integers(0, max_arity).flatmap(
        lambda k: st.lists(st.integers(0, u.size - 1), min_size=u.size ** k,
                           max_size=u.size ** k).map(lambda t: OpTable(u, k, tuple(t))))


def test_universe_rejects_repeats_and_empty():
    with pytest.raises(OperationError):
        FinUniverse("x", ("a", "a"))
    with pytest.raises(OperationError):
        FinUniverse("x", ())


def test_table_validation():
    with pytest.raises(OperationError):
        OpTable(U2, 2, (0, 1, 1))
    with pytest.raises(OperationError):
        OpTable(U2, 1, (0, 2))
    assert OpTable(U2, 0, (1,)).table == (1,)


def test_evaluate_examples(ops2):
    assert evaluate(ops2["and"], ["1", "1"]) == "1"
    assert evaluate(projection(U2, 1, 2), ["0", "1"]) == "0"
    assert evaluate(constant(U2, 0), []) == "0"
    with pytest.raises(OperationError):
        evaluate(ops2["and"], ["1"])
    with pytest.raises(OperationError):
        evaluate(ops2["and"], ["1", "2"])


def test_row_major_layout():
    # leftmost argument most significant: row index of (x, y) is 2x + y
    f = OpTable.from_function(U2, 2, lambda x, y: x)
    assert f.table == (0, 0, 1, 1)
    g = OpTable.from_symbols(U3, 2, ["a", "b", "c"] * 3)
    assert evaluate(g, ["c", "b"]) == "b"


def test_compose_examples(ops2):
    assert compose(ops2["and"], [ops2["not"], ops2["not"]], 1).table == (1, 0)
    assert compose(ops2["c0"], [], 2).table == (0, 0, 0, 0)
    g1, g2 = ops2["and"], ops2["xor"]
    assert compose(projection(U2, 2, 2), [g1, g2], 2) == g2


def test_compose_errors(ops2):
    with pytest.raises(OperationError):
        compose(ops2["and"], [ops2["not"]], 1)
    with pytest.raises(OperationError):
        compose(ops2["and"], [ops2["not"], ops2["xor"]], 1)
    with pytest.raises(OperationError):
        compose(ops2["not"], [OpTable(U3, 1, (0, 1, 2))], 1)


def test_depends_on_examples(ops2):
    assert depends_on(ops2["and"], 2)
    assert not depends_on(projection(U2, 1, 2), 2)
    assert not depends_on(OpTable(U2, 1, (0, 0)), 1)
    with pytest.raises(OperationError):
        depends_on(ops2["and"], 3)


def test_canonicalize_examples(ops2):
    b = canonicalize(OpTable(U2, 2, (0, 0, 1, 1)))
    assert b.arity == 1 and b.generator.table == (0, 1)
    b = canonicalize(constant(U2, 1, 3))
    assert b.arity == 0 and b.generator.table == (1,)
    assert canonicalize(ops2["not"]).generator == ops2["not"]


def test_similar_examples(ops2):
    assert similar(projection(U2, 1, 2), projection(U2, 1, 1))
    assert similar(constant(U2, 0, 1), constant(U2, 0, 4))
    assert not similar(ops2["not"], ops2["id"])
    with pytest.raises(OperationError):
        similar(ops2["not"], OpTable(U3, 1, (0, 1, 2)))


def test_top_eval_examples(ops2):
    s = Stream(lambda i: 1, {1: 0})
    assert top_eval(Block(ops2["not"]), s) == 1
    s2 = Stream(lambda i: i % 2, {})
    assert top_eval(projection_block(U2, 2), s2) == s2[2]
    assert top_eval(canonicalize(constant(U2, 1, 0)), s2) == 1


def test_stream_prefix_and_support():
    s = constant_stream(0, {3: 1})
    assert s.prefix(4) == [0, 0, 1, 0]
    assert s.support() == 3
    t = s.replace_prefix([1, 1])
    assert t.prefix(4) == [1, 1, 1, 0]
    assert constant_stream(0, {2: 0}).support() == 0
    with pytest.raises(OperationError):
        Stream(lambda i: 0, {0: 1})


def test_expand_restrict_roundtrip(ops2):
    e = expand(ops2["xor"], 4)
    assert e.arity == 4
    assert restrict(restrict(e)) == ops2["xor"]
    with pytest.raises(OperationError):
        expand(ops2["xor"], 1)


@given(ops_on(U3))
def test_canonicalize_is_idempotent_and_similar(f):
    b = canonicalize(f)
    assert canonicalize(b.generator) == b
    assert similar(f, b.generator)


@given(ops_on(U2, 3))
def test_no_dependence_beyond_canonical_arity(f):
    k = canonicalize(f).arity
    for i in range(k + 1, f.arity + 1):
        assert not depends_on(f, i)
    if k:
        assert depends_on(f, k)


@given(ops_on(U3), st.integers(0, 2), st.lists(st.integers(0, 2), min_size=6, max_size=6))
def test_top_eval_constant_on_blocks(f, extra, values):
    g = expand(f, f.arity + extra)
    s = Stream(lambda i: values[(i - 1) % 6], {})
    assert top_eval(canonicalize(f), s) == top_eval(canonicalize(g), s)
    # the literal value of f on the prefix agrees with the canonical generator
    assert f.value(s.prefix(f.arity)) == top_eval(canonicalize(f), s)


def test_compose_associativity_exhaustive():
    """Every f of arity <= 2 on {0,1}, inner arity k <= 1 and outer m <= 2."""
    by_arity = {k: list(all_operations(U2, k)) for k in range(3)}
    count = 0
    for f in by_arity[0] + by_arity[1] + by_arity[2]:
        for k in (0, 1):
            for gs in itertools.product(by_arity[k], repeat=f.arity):
                for m in (0, 1, 2):
                    for hs in itertools.product(by_arity[m], repeat=k):
                        lhs = compose(compose(f, list(gs), k), list(hs), m)
                        rhs = compose(f, [compose(g, list(hs), m) for g in gs], m)
                        assert lhs == rhs
                        count += 1
    assert count == 6250


@settings(max_examples=200)
@given(st.data())
def test_compose_associativity_binary_inner(data):
    f = data.draw(ops_on(U2, 2))
    gs = [data.draw(ops_on(U2, 2).filter(lambda g: g.arity == 2)) for _ in range(f.arity)]
    hs = [data.draw(ops_on(U2, 2).filter(lambda g: g.arity == 2)) for _ in range(2)]
    lhs = compose(compose(f, gs, 2), hs, 2)
    assert lhs == compose(f, [compose(g, hs, 2) for g in gs], 2)


def test_compose_matches_pointwise_definition():
    rng = list(all_operations(U2, 2))
    for f in rng[::3]:
        for g1, g2 in itertools.product(rng[::5], repeat=2):
            c = compose(f, [g1, g2], 2)
            for x, y in itertools.product(range(2), repeat=2):
                assert c.value((x, y)) == f.value((g1.value((x, y)), g2.value((x, y))))
