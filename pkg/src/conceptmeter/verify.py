"""Cross-check a lattice and its measurement support against the oracle.

Each check has a stable name so a failing run can say which invariant broke.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import oracle
from ._bits import is_subset, iter_bits, popcount, to_mask, to_set
from .lattice import build
from .measurement import compute_support

ORACLE_CONCEPT_LIMIT = 20_000
COVER_CHECK_LIMIT = 400


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


def _check(results, name, fn):
    try:
        detail = fn()
    except AssertionError as exc:
        results.append(CheckResult(name, False, str(exc)))
    except Exception as exc:  # a crash inside a check is a failed check
        results.append(CheckResult(name, False, f"{type(exc).__name__}: {exc}"))
    else:
        results.append(CheckResult(name, True, detail or ""))


def verify(lat, support) -> list:
    ctx = lat.ctx
    qs = support.queries
    results: list = []
    fresh = build(ctx)

    def concepts():
        ours = {(c.extent, c.intent) for c in lat}
        ref = None
        if len(lat) <= ORACLE_CONCEPT_LIMIT:
            try:
                ref = oracle.enumerate_concepts(ctx)
            except oracle.OracleSizeError:
                pass
        if ref is not None:
            ref_bits = {(to_mask(e), to_mask(i)) for e, i in ref}
            assert ours == ref_bits, f"{len(ours ^ ref_bits)} concepts differ from the enumeration"
            return f"{len(ours)} concepts match enumeration"
        assert ours == {(c.extent, c.intent) for c in fresh}, "concept set differs from a rebuild"
        return f"{len(ours)} concepts match rebuild"

    def hasse():
        edges = lat.hasse_edges()
        assert edges == fresh.hasse_edges(), "Hasse links differ from a rebuild"
        if len(lat) <= COVER_CHECK_LIMIT:
            cover = oracle.covers({(to_set(c.extent), to_set(c.intent)) for c in lat})
            assert edges == {(to_mask(a), to_mask(b)) for a, b in cover}, \
                "Hasse links are not the cover relation"
        return f"{len(edges)} links"

    def vectors():
        for c in lat:
            want = to_mask(q.id for q in qs if is_subset(q.mask, c.intent))
            assert support.vectors.get(c.id) == want, f"query vector of concept {c.id} is wrong"

    def targets():
        for q in qs:
            want = lat.intent_index[ctx.close_bits(q.mask)]
            assert support.targets.get(q.id) == want, f"target of {q.label} is wrong"

    def projections():
        for c in lat:
            v = support.vectors[c.id]
            is_proj = popcount(v) > max((popcount(support.vectors[p]) for p in c.parents), default=0)
            assert (c.id in support.projections) == is_proj, f"projection status of {c.id} is wrong"
            if is_proj:
                m = lat.meet_all(support.targets[i] for i in iter_bits(v))
                assert m == c.id, f"projection {c.id} is not the meet of its targets"

    def grounds():
        sig = oracle.signatures(ctx, qs)
        for f in range(ctx.n_flows):
            v = int(sig[f][::-1], 2) if sig[f] else 0
            if v == 0:
                assert f not in support.mu, f"unmatched flow {ctx.flows[f].name} has a ground"
                continue
            g = support.mu.get(f)
            assert g is not None, f"flow {ctx.flows[f].name} has no ground"
            assert support.vectors[g] == v and g in support.projections, \
                f"ground of {ctx.flows[f].name} does not carry its signature"
        assert support.grounds == set(support.mu.values()), "ground set differs from flow grounds"

    def recompute():
        ref = compute_support(lat, [sorted(q.matchfields) for q in qs], labels=[q.label for q in qs])
        assert support.canonical(lat) == ref.canonical(lat), "support differs from a recomputation"

    def correctness():
        for q in qs:
            assert support.answer_flowset(q.id) == oracle.answer_direct(ctx, q), \
                f"answer of {q.label} differs from a direct scan"
        return f"{len(qs)} queries"

    def minimality():
        cells = oracle.minimal_partition(ctx, qs)
        assert len(support.grounds) == len(cells), \
            f"{len(support.grounds)} grounds but {len(cells)} signature classes"
        assert support.partition() == cells, "partition differs from signature classes"
        for q in qs:
            assert oracle.decomposes(oracle.answer_direct(ctx, q), cells)
        return f"{len(cells)} counters"

    _check(results, "lattice.concepts", concepts)
    _check(results, "lattice.hasse", hasse)
    _check(results, "support.vectors", vectors)
    _check(results, "support.targets", targets)
    _check(results, "support.projections", projections)
    _check(results, "support.grounds", grounds)
    _check(results, "support.recompute", recompute)
    _check(results, "answers.correctness", correctness)
    _check(results, "counters.minimality", minimality)
    return results
