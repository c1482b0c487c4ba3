import pytest
from hypothesis import strategies as st

from conceptmeter import running_example
from conceptmeter.context import FormalContext
from conceptmeter.lattice import build
from conceptmeter.measurement import compute_support

# Concepts of the running example by their reference numbers, as intents.
# c11/c15 and c13/c14/c16/c17/c18 are only identified as groups (same vector).
REFERENCE_INTENTS = {
    "c0": {"h1", "h4", "h7", "h9"},
    "c1": {f"h{i}" for i in range(1, 11)},
    "c2": {"h1", "h4", "h7"},
    "c3": {"h1", "h4", "h5", "h7", "h10"},
    "c4": set(),
    "c5": {"h2", "h6", "h8"},
    "c6": {"h10"},
    "c7": {"h2", "h6", "h8", "h10"},
    "c8": {"h1", "h7"},
    "c9": {"h1", "h7", "h9"},
    "c10": {"h1", "h5", "h7", "h10"},
    "c12": {"h9"},
}
VECTOR_GROUPS = {
    "00000": [set(), {"h6"}, {"h9"}, {"h6", "h8"}],
    "10000": [{"h10"}, {"h6", "h10"}, {"h3", "h6", "h10"}, {"h6", "h8", "h10"},
              {"h3", "h6", "h9", "h10"}, {"h3", "h6", "h8", "h10"}],
    "01000": [REFERENCE_INTENTS["c5"]],
    "10111": [REFERENCE_INTENTS["c3"]],
    "11111": [REFERENCE_INTENTS["c1"]],
    "00111": [REFERENCE_INTENTS["c0"], REFERENCE_INTENTS["c2"]],
    "10101": [REFERENCE_INTENTS["c10"]],
    "11000": [REFERENCE_INTENTS["c7"]],
    "00101": [REFERENCE_INTENTS["c8"], REFERENCE_INTENTS["c9"]],
}
F8 = ["h2", "h7", "h9"]


@pytest.fixture
def example():
    ctx, queries = running_example()
    lat = build(ctx)
    support = compute_support(lat, queries)
    return ctx, lat, support, queries


def cid(lat, labels):
    """Concept id for an intent given by labels."""
    c = lat.by_intent(sorted(labels))
    assert c is not None, f"no concept with intent {sorted(labels)}"
    return c.id


def intent_labels(lat, c):
    return set(lat.ctx.labels(lat[c].intent_set))


@st.composite
def contexts(draw, max_flows=9, max_fields=7, min_flows=0):
    n_h = draw(st.integers(1, max_fields))
    rows = draw(st.lists(
        st.frozensets(st.integers(0, n_h - 1), min_size=1),
        min_size=min_flows, max_size=max_flows, unique=True,
    ))
    ctx = FormalContext([f"m{i}" for i in range(n_h)])
    for r in rows:
        ctx.add_flow(sorted(r))
    return ctx


@st.composite
def contexts_with_queries(draw, max_flows=9, max_fields=7, max_queries=5, min_flows=0):
    ctx = draw(contexts(max_flows, max_fields, min_flows))
    qs = draw(st.lists(
        st.frozensets(st.integers(0, ctx.n_matchfields - 1), min_size=1), max_size=max_queries,
    ))
    return ctx, [sorted(q) for q in qs]


# -- acceptance reporting -------------------------------------------------------

_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    n, title = marker.args
    prev = _criteria.get(n, (title, True))
    _criteria[n] = (title, prev[1] and rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, ok = _criteria[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {title}")
