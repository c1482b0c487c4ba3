import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conceptmeter import running_example
from conceptmeter.context import (
    ContextError,
    FormalContext,
    context_from_csv,
    context_to_csv,
    load_context,
    save_context,
)

from conftest import contexts

H = lambda *ns: {f"h{n}" for n in ns}  # noqa: E731


@pytest.fixture
def ctx():
    return running_example()[0]


def labels(ctx, ids):
    return set(ctx.labels(ids))


def names(ctx, ids):
    return set(ctx.flow_names(ids))


def test_image_of_flows(ctx):
    assert labels(ctx, ctx.image_of_flows(["f0", "f4"])) == H(1, 7, 9)
    assert labels(ctx, ctx.image_of_flows([])) == H(*range(1, 11))
    assert ctx.image_of_flows(range(8)) == frozenset()


def test_image_of_matchfields(ctx):
    assert names(ctx, ctx.image_of_matchfields(["h1", "h7"])) == {"f0", "f1", "f4", "f5"}
    assert ctx.image_of_matchfields([]) == frozenset(range(8))
    assert names(ctx, ctx.image_of_matchfields(["h2", "h6", "h8"])) == {"f2", "f3"}


def test_close_matchfields(ctx):
    assert labels(ctx, ctx.close_matchfields(["h1"])) == H(1, 7)
    assert labels(ctx, ctx.close_matchfields(["h1", "h7"])) == H(1, 7)
    assert labels(ctx, ctx.close_matchfields(["h10"])) == H(10)


def test_unknown_ids_are_named(ctx):
    with pytest.raises(ContextError, match="f99"):
        ctx.image_of_flows(["f99"])
    with pytest.raises(ContextError, match="42"):
        ctx.image_of_flows([42])
    with pytest.raises(ContextError, match="h11"):
        ctx.image_of_matchfields(["h11"])


def test_incidence_rows_and_columns_agree(ctx):
    for f, row in enumerate(ctx.rows):
        for m in range(ctx.n_matchfields):
            assert bool(row >> m & 1) == bool(ctx.columns[m] >> f & 1)


def test_load_csv(tmp_path):
    from importlib import resources

    text = resources.files("conceptmeter").joinpath("data/running_example.csv").read_text()
    ctx = context_from_csv(text)
    assert (ctx.n_flows, ctx.n_matchfields) == (8, 10)
    assert ctx.rows == running_example()[0].rows


def test_empty_flow_row_rejected():
    with pytest.raises(ContextError, match="line 3"):
        context_from_csv("flow,a,b\nf0,1,0\nf1,0,0\n")


def test_duplicate_row_rejected_naming_original():
    text = "flow,a,b,c\nf0,1,1,0\nf1,0,1,1\nf2,0,1,1\n"
    with pytest.raises(ContextError, match="f1"):
        context_from_csv(text)


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ContextError, match="line 2"):
        context_from_csv("flow,a,b\nf0,1\n")
    with pytest.raises(ContextError, match="line 2"):
        context_from_csv("flow,a,b\nf0,1,x\n")
    with pytest.raises(ContextError, match="line 1"):
        context_from_csv("name,a\n")


def test_strict_mode_rejects_nested_flows():
    ctx = FormalContext(["a", "b", "c"], strict_subsets=True)
    ctx.add_flow(["a", "b"])
    with pytest.raises(ContextError, match="nested"):
        ctx.add_flow(["a"])
    with pytest.raises(ContextError, match="nested"):
        ctx.add_flow(["a", "b", "c"])
    assert ctx.n_flows == 1
    # the running example has nested rows (f4 inside f0) and is rejected in strict mode
    with pytest.raises(ContextError):
        FormalContext.from_rows(
            {"f0": ["h1", "h4", "h7", "h9"], "f4": ["h1", "h7", "h9"]}, strict_subsets=True
        )


def test_field_kind_from_label():
    ctx = FormalContext(["ipv4_src=10/8", "plain"])
    assert ctx.matchfields[0].field_kind == "ipv4_src"
    assert ctx.matchfields[1].field_kind == ""


@pytest.mark.parametrize("suffix", [".csv", ".json"])
def test_round_trip(tmp_path, ctx, suffix):
    path = tmp_path / f"ctx{suffix}"
    save_context(ctx, path)
    again = load_context(path)
    assert again.rows == ctx.rows and again.columns == ctx.columns
    assert [f.name for f in again.flows] == [f.name for f in ctx.flows]
    if suffix == ".json":
        assert [m.field_kind for m in again.matchfields] == [m.field_kind for m in ctx.matchfields]


def test_json_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"matchfields": [}')
    with pytest.raises(ContextError, match="line 1"):
        load_context(p)
    p.write_text(json.dumps({"flows": []}))
    with pytest.raises(ContextError):
        load_context(p)


@settings(max_examples=150, deadline=None)
@given(contexts(), st.data())
def test_galois_connection(ctx, data):
    flows = data.draw(st.frozensets(st.integers(0, max(ctx.n_flows - 1, 0))) if ctx.n_flows else st.just(frozenset()))
    mfs = data.draw(st.frozensets(st.integers(0, ctx.n_matchfields - 1)))
    left = flows <= ctx.image_of_matchfields(mfs)
    right = mfs <= ctx.image_of_flows(flows)
    assert left == right


@settings(max_examples=150, deadline=None)
@given(contexts(), st.data())
def test_closure_is_extensive_monotone_idempotent(ctx, data):
    a = data.draw(st.frozensets(st.integers(0, ctx.n_matchfields - 1)))
    b = data.draw(st.frozensets(st.integers(0, ctx.n_matchfields - 1)))
    ca = ctx.close_matchfields(a)
    assert a <= ca
    assert ctx.close_matchfields(ca) == ca
    assert ca <= ctx.close_matchfields(a | b)


@settings(max_examples=50, deadline=None)
@given(contexts())
def test_csv_round_trip_property(ctx):
    again = context_from_csv(context_to_csv(ctx))
    assert again.rows == ctx.rows
