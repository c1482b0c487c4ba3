import pytest
from hypothesis import given, settings

from conceptmeter import oracle
from conceptmeter._bits import popcount, to_mask
from conceptmeter.context import FormalContext
from conceptmeter.lattice import build
from conceptmeter.measurement import (
    add_query,
    compute_support,
    load_queries,
    save_queries,
    support_from_json,
    support_to_json,
)

from conftest import REFERENCE_INTENTS, VECTOR_GROUPS, cid, contexts_with_queries


def test_targets(example):
    _, lat, support, _ = example
    expected = ["c6", "c5", "c8", "c2", "c8"]
    assert [support.targets[i] for i in range(5)] == [cid(lat, REFERENCE_INTENTS[c]) for c in expected]
    assert support.targeted[cid(lat, REFERENCE_INTENTS["c8"])] == {2, 4}


def test_vector_groups(example):
    _, lat, support, _ = example
    groups = {}
    for c in lat:
        groups.setdefault(support.vector_string(c.id), set()).add(c.intent)
    want = {v: {to_mask(lat.ctx.resolve(sorted(i))) for i in g} for v, g in VECTOR_GROUPS.items()}
    assert groups == want


def test_grounds_and_partition(example):
    ctx, lat, support, _ = example
    mu = {ctx.flows[f].name: lat[g].intent for f, g in support.mu.items()}
    expected = {
        "f0": "c2", "f1": "c3", "f2": "c5", "f3": "c7",
        "f4": "c8", "f5": "c10", "f6": "c6", "f7": "c6",
    }
    assert mu == {f: to_mask(ctx.resolve(sorted(REFERENCE_INTENTS[c]))) for f, c in expected.items()}
    assert len(support.grounds) == 7
    assert [set(ctx.flow_names(c)) for c in support.partition()] == [
        {"f0"}, {"f1"}, {"f2"}, {"f3"}, {"f4"}, {"f5"}, {"f6", "f7"}
    ]


def test_projections_are_meets_of_targets(example):
    _, lat, support, _ = example
    for p in support.projections:
        qs = [i for i in range(support.n_queries) if (support.vectors[p] >> i) & 1]
        assert lat.meet_all(support.targets[i] for i in qs) == p
    # c4 (empty intent, no query inside) is not a projection
    assert cid(lat, set()) not in support.projections
    assert support.grounds <= support.projections
    assert support.target_set <= support.projections


def test_answers(example):
    ctx, lat, support, _ = example
    assert set(ctx.flow_names(support.answer_flowset("q2"))) == {"f2", "f3"}
    assert set(ctx.flow_names(support.answer_flowset(0))) == {"f1", "f3", "f5", "f6", "f7"}
    assert len(support.grounds_for("q1")) == 4
    with pytest.raises(KeyError):
        support.answer_flowset("q9")


def test_no_queries():
    ctx = FormalContext.from_rows({"f0": ["a", "b"], "f1": ["b"]})
    support = compute_support(build(ctx), [])
    assert support.grounds == set() and support.mu == {}
    assert support.partition() == []


def test_unsatisfiable_query_is_flagged():
    ctx = FormalContext.from_rows({"f0": ["a", "b"], "f1": ["b", "c"]})
    lat = build(ctx)
    support = compute_support(lat, [["a", "c"], ["b"]])
    assert support.unsatisfiable(lat) == [0]
    assert support.answer_flowset(0) == frozenset()
    assert support.answer_flowset(1) == {0, 1}


def test_unknown_query_label_rejected():
    ctx = FormalContext.from_rows({"f0": ["a"]})
    with pytest.raises(Exception, match="zz"):
        compute_support(build(ctx), [["zz"]])


def test_vectors_are_monotone(example):
    _, lat, support, _ = example
    for c in lat:
        for p in c.parents:
            assert support.vectors[p] & ~support.vectors[c.id] == 0


def test_add_query_recomputes(example):
    ctx, lat, support, _ = example
    bigger = add_query(lat, support, ["h9"], label="q6")
    assert bigger.n_queries == 6
    assert bigger.targets[5] == cid(lat, REFERENCE_INTENTS["c12"])
    assert oracle.minimal_partition(ctx, [q.matchfields for q in bigger.queries]) == bigger.partition()


def test_json_round_trips(tmp_path, example):
    ctx, lat, support, _ = example
    path = tmp_path / "q.json"
    save_queries(ctx, support.queries, path)
    queries = load_queries(path, ctx)
    assert [q.matchfields for q in queries] == [q.matchfields for q in support.queries]
    again = support_from_json(support_to_json(support, ctx), ctx, queries)
    assert again.canonical(lat) == support.canonical(lat)


@settings(max_examples=150, deadline=None)
@given(contexts_with_queries(min_flows=1))
def test_answers_decompose_and_are_correct(data):
    ctx, qs = data
    lat = build(ctx)
    support = compute_support(lat, qs)
    cells = support.partition()
    seen = set()
    for cell in cells:
        assert cell and not (cell & seen)
        seen |= cell
    for q in support.queries:
        answer = support.answer_flowset(q.id)
        assert answer == oracle.answer_direct(ctx, q.matchfields)
        assert oracle.decomposes(answer, cells)


@settings(max_examples=150, deadline=None)
@given(contexts_with_queries(min_flows=1))
def test_counter_count_is_minimal(data):
    ctx, qs = data
    lat = build(ctx)
    support = compute_support(lat, qs)
    sets = [q.matchfields for q in support.queries]
    assert support.partition() == oracle.minimal_partition(ctx, sets)
    sigs = {s for s in oracle.signatures(ctx, sets).values() if "1" in s}
    assert len(support.grounds) == len(sigs) <= ctx.n_flows


@settings(max_examples=100, deadline=None)
@given(contexts_with_queries(min_flows=1))
def test_projection_test_matches_definition(data):
    ctx, qs = data
    lat = build(ctx)
    support = compute_support(lat, qs)
    meets = set()
    for v in {support.vectors[c.id] for c in lat}:
        if v:
            idx = [i for i in range(support.n_queries) if (v >> i) & 1]
            meets.add(lat.meet_all(support.targets[i] for i in idx))
    # every non-empty subset's meet is a projection; only count distinct vectors
    assert meets <= support.projections
    for p in support.projections:
        assert popcount(support.vectors[p]) > max(
            (popcount(support.vectors[x]) for x in lat[p].parents), default=0
        )
