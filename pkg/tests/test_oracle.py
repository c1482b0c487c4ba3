"""The oracle is only checked against hand-readable tables; everything else
is checked against the oracle."""

import pytest

from conceptmeter import oracle, running_example
from conceptmeter.context import FormalContext

from conftest import REFERENCE_INTENTS, VECTOR_GROUPS


@pytest.fixture
def ctx_q():
    return running_example()


def _label_sets(ctx, concepts):
    return {frozenset(ctx.labels(i)) for _, i in concepts}


@pytest.mark.parametrize("method", ["powerset", "intersections"])
def test_enumerates_nineteen_concepts(ctx_q, method):
    ctx, _ = ctx_q
    concepts = oracle.enumerate_concepts(ctx, method)
    assert len(concepts) == 19
    intents = _label_sets(ctx, concepts)
    for group in VECTOR_GROUPS.values():
        for intent in group:
            assert frozenset(intent) in intents
    c8 = next(e for e, i in concepts if set(ctx.labels(i)) == REFERENCE_INTENTS["c8"])
    assert set(ctx.flow_names(c8)) == {"f0", "f1", "f4", "f5"}


def test_single_flow_has_one_concept():
    ctx = FormalContext(["h1"])
    ctx.add_flow(["h1"])
    assert oracle.enumerate_concepts(ctx) == {(frozenset({0}), frozenset({0}))}


def test_powerset_guard():
    ctx = FormalContext([f"m{i}" for i in range(30)])
    for i in range(21):
        ctx.add_flow([i])
    with pytest.raises(oracle.OracleSizeError):
        oracle.enumerate_concepts(ctx, "powerset")


def test_signatures(ctx_q):
    ctx, queries = ctx_q
    qs = [ctx.resolve(q) for q in queries]
    sig = oracle.signatures(ctx, qs)
    assert sig[0] == "00111"
    assert sig[5] == "10101"
    assert sig[6] == sig[7] == "10000"
    assert set(oracle.signatures(ctx, []).values()) == {""}


def test_signature_of_f8(ctx_q):
    ctx, queries = ctx_q
    ctx.add_flow(["h2", "h7", "h9"], name="f8")
    sig = oracle.signatures(ctx, [ctx.resolve(q) for q in queries])
    assert sig[8] == "00001"


def test_minimal_partition(ctx_q):
    ctx, queries = ctx_q
    cells = oracle.minimal_partition(ctx, [ctx.resolve(q) for q in queries])
    assert [set(ctx.flow_names(c)) for c in cells] == [
        {"f0"}, {"f1"}, {"f2"}, {"f3"}, {"f4"}, {"f5"}, {"f6", "f7"}
    ]
    assert oracle.minimal_partition(ctx, []) == []


def test_answer_direct(ctx_q):
    ctx, _ = ctx_q
    assert set(ctx.flow_names(oracle.answer_direct(ctx, ctx.resolve(["h2", "h6", "h8"])))) == {"f2", "f3"}
    f4 = ctx.flows[4].matchfields
    # f4's row also fits inside f0's row
    assert set(ctx.flow_names(oracle.answer_direct(ctx, f4))) == {"f0", "f4"}
    f1 = ctx.flows[1].matchfields
    assert oracle.answer_direct(ctx, f1) == {1}


def test_covers_of_a_chain():
    a, b, c = frozenset({0, 1, 2}), frozenset({0, 1}), frozenset({0})
    concepts = {(a, frozenset()), (b, frozenset({1})), (c, frozenset({1, 2}))}
    assert oracle.covers(concepts) == {(frozenset(), frozenset({1})), (frozenset({1}), frozenset({1, 2}))}


def test_decomposes():
    cells = [frozenset({0}), frozenset({1, 2}), frozenset({3})]
    assert oracle.decomposes(frozenset({0, 1, 2}), cells)
    assert not oracle.decomposes(frozenset({0, 1}), cells)
    assert oracle.decomposes(frozenset(), cells)
