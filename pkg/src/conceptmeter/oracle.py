"""Brute-force reference answers, written straight from the definitions.

Nothing here touches the bitset machinery of :mod:`lattice` or
:mod:`measurement`: flows are read as plain frozensets of matchfield ids and
every answer is recomputed by subset tests.
"""

from __future__ import annotations

from itertools import combinations


class OracleSizeError(ValueError):
    pass


POWERSET_LIMIT = 16
FAMILY_LIMIT = 500_000


def _rows(ctx) -> list:
    return [frozenset(f.matchfields) for f in ctx.flows]


def _extent(rows, intent) -> frozenset:
    return frozenset(i for i, r in enumerate(rows) if intent <= r)


def enumerate_concepts(ctx, method: str = "auto") -> set:
    """All (extent, intent) pairs of the context as frozensets of ids.

    ``powerset`` closes the image of every flow subset; ``intersections``
    closes the family of flow rows under pairwise intersection.
    """
    rows = _rows(ctx)
    everything = frozenset(range(ctx.n_matchfields))
    if method == "auto":
        method = "powerset" if len(rows) <= POWERSET_LIMIT else "intersections"
    intents = set()
    if method == "powerset":
        if len(rows) > 20:
            raise OracleSizeError(f"{len(rows)} flows is too many for the powerset oracle")
        for k in range(len(rows) + 1):
            for subset in combinations(rows, k):
                common = everything
                for r in subset:
                    common = common & r
                intents.add(common)
    elif method == "intersections":
        intents = {everything}
        frontier = set(rows) - intents
        intents |= frontier
        while frontier:
            nxt = set()
            for a in frontier:
                for r in rows:
                    x = a & r
                    if x not in intents:
                        nxt.add(x)
            intents |= nxt
            if len(intents) > FAMILY_LIMIT:
                raise OracleSizeError("intent family exceeds the oracle size guard")
            frontier = nxt
    else:
        raise ValueError(f"unknown method {method!r}")
    return {(_extent(rows, i), i) for i in intents}


def covers(concepts) -> set:
    """Hasse edges (upper intent, lower intent) of a concept set, by brute force."""
    cs = list(concepts)
    edges = set()
    for ea, ia in cs:
        below = [(e, i) for e, i in cs if e < ea]
        for eb, ib in below:
            if not any(eb < e < ea for e, _ in below):
                edges.add((ia, ib))
    return edges


def signatures(ctx, queries) -> dict:
    """flow id -> bitstring, character ``i`` is '1' iff query ``i`` fits the flow."""
    qsets = [frozenset(getattr(q, "matchfields", q)) for q in queries]
    return {
        f: "".join("1" if q <= r else "0" for q in qsets)
        for f, r in enumerate(_rows(ctx))
    }


def minimal_partition(ctx, queries) -> list:
    """Matched flows grouped by identical query-satisfaction signature."""
    groups: dict = {}
    for f, sig in signatures(ctx, queries).items():
        if "1" in sig:
            groups.setdefault(sig, set()).add(f)
    return sorted((frozenset(g) for g in groups.values()), key=min)


def answer_direct(ctx, query) -> frozenset:
    q = frozenset(getattr(query, "matchfields", query))
    return _extent(_rows(ctx), q)


def decomposes(answer: frozenset, cells) -> bool:
    """True if ``answer`` is a union of some of ``cells``."""
    covered = set()
    for cell in cells:
        if cell <= answer:
            covered |= cell
        elif cell & answer:
            return False
    return covered == set(answer)
