"""Targets, projections, grounds and the counter partition.

A query is a set of matchfield values; its target is the highest concept
whose intent contains it. A concept's query vector has bit ``i`` set when
query ``i`` is contained in its intent. Projections are the concepts whose
vector has more bits than every parent's; the ground of a flow is the
projection carrying the same vector as the concept whose intent is the
flow's own matchfield set. Flows sharing a ground share one counter, and the
answer to query ``i`` is the union of the grounds with bit ``i`` set.

Vectors are ints; bit ``i`` is query ``i`` (0-based). :meth:`vector_string`
renders them first-query-first, e.g. ``"10101"``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from ._bits import is_subset, iter_bits, popcount, to_mask
from .context import ContextError, FormalContext


@dataclass(frozen=True)
class Query:
    id: int
    label: str
    matchfields: frozenset

    @property
    def mask(self) -> int:
        return to_mask(self.matchfields)


class SupportError(RuntimeError):
    """Internal inconsistency of the measurement support."""


@dataclass
class MeasurementSupport:
    queries: list
    targets: dict = field(default_factory=dict)  # query id -> concept id
    targeted: dict = field(default_factory=dict)  # concept id -> set of query ids
    projections: set = field(default_factory=set)
    grounds: set = field(default_factory=set)
    vectors: dict = field(default_factory=dict)  # concept id -> int
    grounded: dict = field(default_factory=dict)  # ground id -> set of flow ids
    mu: dict = field(default_factory=dict)  # flow id -> ground id
    proj_by_vector: dict = field(default_factory=dict)

    @property
    def n_queries(self) -> int:
        return len(self.queries)

    @property
    def target_set(self) -> set:
        return {c for c, qs in self.targeted.items() if qs}

    def query_index(self, q: Union[int, str, Query]) -> int:
        if isinstance(q, Query):
            return q.id
        if isinstance(q, str):
            for query in self.queries:
                if query.label == q:
                    return query.id
            raise KeyError(f"unknown query {q!r}")
        if not 0 <= q < len(self.queries):
            raise KeyError(f"unknown query index {q}")
        return int(q)

    def vector_string(self, cid: int) -> str:
        v = self.vectors.get(cid, 0)
        return "".join("1" if (v >> i) & 1 else "0" for i in range(len(self.queries)))

    def unsatisfiable(self, lat) -> list:
        """Queries no installed flow satisfies (their target has an empty extent)."""
        return [q.id for q in self.queries if lat[self.targets[q.id]].extent == 0]

    # -- incremental maintenance, called from lattice.add_flow ---------------

    def update_status(self, lat, cn, genitor, report=None) -> None:
        """Set the status of new concept ``cn`` and revise its genitor's."""
        qs = self.queries
        vg = self.vectors[genitor.id]
        vn = 0
        for i in iter_bits(vg):
            if is_subset(qs[i].mask, cn.intent):
                vn |= 1 << i
        self.vectors[cn.id] = vn

        moved = {i for i in self.targeted.get(genitor.id, ()) if is_subset(qs[i].mask, cn.intent)}
        if moved:
            self.targeted[genitor.id] -= moved
            if not self.targeted[genitor.id]:
                del self.targeted[genitor.id]
            self.targeted[cn.id] = moved
            for i in sorted(moved):
                self.targets[i] = cn.id
                if report is not None:
                    report.retargeted.append((i, genitor.id, cn.id))

        n = popcount(vn)
        if n > max((popcount(self.vectors[p]) for p in cn.parents), default=0):
            self.projections.add(cn.id)
            self.proj_by_vector[vn] = cn.id
            if popcount(vg) == n:
                self.projections.discard(genitor.id)
                if report is not None:
                    report.eclipsed.append((genitor.id, cn.id))
                flows = self.grounded.pop(genitor.id, None)
                if flows:
                    self.grounds.discard(genitor.id)
                    self.grounds.add(cn.id)
                    self.grounded[cn.id] = flows
                    for f in flows:
                        self.mu[f] = cn.id

    def register_bottom(self, lat, bottom) -> None:
        """A fresh empty bottom concept (new matchfield values arrived)."""
        self.vectors[bottom.id] = self.vectors[next(iter(bottom.parents))]

    def ground_new_flow(self, lat, flow: int) -> Optional[int]:
        v = self.vectors[lat.flow_concept(flow)]
        if v == 0:
            return None
        p = self.proj_by_vector.get(v)
        if p is None or p not in self.projections:
            raise SupportError(f"no projection carries vector {v:#x} of flow {flow}")
        self.grounded.setdefault(p, set()).add(flow)
        self.grounds.add(p)
        self.mu[flow] = p
        return p

    # -- reading ------------------------------------------------------------

    def partition(self) -> list:
        cells = [frozenset(self.grounded[g]) for g in self.grounds]
        return sorted(cells, key=min)

    def answer_flowset(self, q: Union[int, str, Query]) -> frozenset:
        i = self.query_index(q)
        out = set()
        for g in self.grounds:
            if (self.vectors[g] >> i) & 1:
                out |= self.grounded[g]
        return frozenset(out)

    def grounds_for(self, q: Union[int, str, Query]) -> list:
        i = self.query_index(q)
        return sorted(g for g in self.grounds if (self.vectors[g] >> i) & 1)

    def canonical(self, lat) -> dict:
        """Id-free view (concepts named by intent) for comparing supports."""
        I = lambda c: lat[c].intent  # noqa: E731
        return {
            "targets": {q: I(c) for q, c in self.targets.items()},
            "projections": {I(c) for c in self.projections},
            "grounds": {I(c) for c in self.grounds},
            "vectors": {I(c): v for c, v in self.vectors.items()},
            "mu": {f: I(c) for f, c in self.mu.items()},
        }


def make_queries(ctx: FormalContext, queries: Iterable, labels: Optional[Sequence[str]] = None) -> list:
    out = []
    for i, q in enumerate(queries):
        if isinstance(q, Query):
            mfs, label = q.matchfields, q.label
        else:
            mfs, label = ctx.resolve(q), None
        if labels is not None:
            label = labels[i]
        if not mfs:
            raise ContextError(f"query {label or i + 1} has no matchfields")
        out.append(Query(i, label or f"q{i + 1}", frozenset(mfs)))
    return out


def compute_support(lat, queries: Iterable, labels: Optional[Sequence[str]] = None) -> MeasurementSupport:
    """Targets, vectors, projections and grounds in one top-down pass."""
    ctx = lat.ctx
    qs = make_queries(ctx, queries, labels)
    s = MeasurementSupport(qs)
    flow_rows = set(ctx.rows)
    # pending queries bucketed by their rarest matchfield: a concept can only
    # contain a query if its intent holds that matchfield
    pending: dict = {}
    for q in qs:
        key = min(q.matchfields, key=lambda m: (ctx.columns[m].bit_count(), m))
        pending.setdefault(key, []).append(q)
    for c in lat.sorted_top_down():
        local = 0
        if pending:
            for m in iter_bits(c.intent):
                bucket = pending.get(m)
                if not bucket:
                    continue
                keep = []
                for q in bucket:
                    if is_subset(q.mask, c.intent):
                        local |= 1 << q.id
                        s.targets[q.id] = c.id
                        s.targeted.setdefault(c.id, set()).add(q.id)
                    else:
                        keep.append(q)
                if keep:
                    pending[m] = keep
                else:
                    del pending[m]
        v, top = local, 0
        for p in c.parents:
            pv = s.vectors[p]
            v |= pv
            top = max(top, popcount(pv))
        s.vectors[c.id] = v
        if popcount(v) > top:
            s.projections.add(c.id)
            s.proj_by_vector[v] = c.id
        if v and c.intent in flow_rows:
            s.grounds.add(s.proj_by_vector[v])
    for f, row in enumerate(ctx.rows):
        v = s.vectors[lat.intent_index[row]]
        if v:
            g = s.proj_by_vector[v]
            s.mu[f] = g
            s.grounded.setdefault(g, set()).add(f)
    return s


def add_query(lat, support: MeasurementSupport, matchfields, label: Optional[str] = None) -> MeasurementSupport:
    """Vectors are fixed-width, so a new query means a full recomputation."""
    qs = [sorted(q.matchfields) for q in support.queries] + [list(lat.ctx.resolve(matchfields))]
    labels = [q.label for q in support.queries] + [label or f"q{len(qs)}"]
    return compute_support(lat, qs, labels=labels)


def partition(support: MeasurementSupport) -> list:
    return support.partition()


def answer_flowset(support: MeasurementSupport, q) -> frozenset:
    return support.answer_flowset(q)


def update_status(support: MeasurementSupport, lat, cn, genitor) -> None:
    support.update_status(lat, cn, genitor)


def ground_new_flow(support: MeasurementSupport, lat, flow: int) -> Optional[int]:
    return support.ground_new_flow(lat, flow)


# -- files -------------------------------------------------------------------


def queries_to_json(ctx: FormalContext, queries: Sequence[Query]) -> list:
    return [{"label": q.label, "matchfields": ctx.labels(q.matchfields)} for q in queries]


def load_queries(source: Union[str, Path], ctx: FormalContext) -> list:
    data = json.loads(Path(source).read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise ContextError("query file must hold a JSON list")
    try:
        return make_queries(ctx, [d["matchfields"] for d in data], [d["label"] for d in data])
    except (KeyError, TypeError) as exc:
        raise ContextError(f"malformed query entry: {exc}") from None


def save_queries(ctx: FormalContext, queries: Sequence[Query], dest: Union[str, Path]) -> None:
    Path(dest).write_text(json.dumps(queries_to_json(ctx, queries), indent=1) + "\n", encoding="utf-8")


def support_to_json(support: MeasurementSupport, ctx: FormalContext) -> dict:
    return {
        "queries": [q.label for q in support.queries],
        "targets": {support.queries[i].label: c for i, c in sorted(support.targets.items())},
        "projections": sorted(support.projections),
        "grounds": sorted(support.grounds),
        "vectors": {str(c): format(v, "x") for c, v in sorted(support.vectors.items())},
        "flow_to_ground": {ctx.flows[f].name: g for f, g in sorted(support.mu.items())},
    }


def support_from_json(data: dict, ctx: FormalContext, queries: Sequence[Query]) -> MeasurementSupport:
    s = MeasurementSupport(list(queries))
    by_label = {q.label: q.id for q in queries}
    for label, c in data["targets"].items():
        s.targets[by_label[label]] = int(c)
        s.targeted.setdefault(int(c), set()).add(by_label[label])
    s.projections = {int(c) for c in data["projections"]}
    s.grounds = {int(c) for c in data["grounds"]}
    s.vectors = {int(c): int(v, 16) for c, v in data["vectors"].items()}
    for c in s.projections:
        s.proj_by_vector[s.vectors[c]] = c
    for name, g in data["flow_to_ground"].items():
        f = ctx.flow_id(name)
        s.mu[f] = int(g)
        s.grounded.setdefault(int(g), set()).add(f)
    return s
