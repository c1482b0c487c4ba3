"""Concept lattice of a flow context.

``build`` descends from the top concept, producing the lower covers of each
concept as the maximal sets among ``extent & column[h]`` for the matchfields
``h`` outside its intent. Matchfields yielding the same intersection form the
face of that child and are accumulated into its intent.

``add_flow`` inserts one flow entry into an existing lattice. Concepts are
visited by decreasing extent size; a concept whose intent fits inside the new
flow's image absorbs the flow (modified), otherwise the intersection of its
intent with that image, when not yet an intent, yields a new concept with the
visited concept as genitor. Hasse links of the new concept are recovered from
the modified/new concepts already visited.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from ._bits import is_subset, iter_bits, popcount, to_mask, to_set
from .context import ContextError, FormalContext


@dataclass(eq=False)
class Concept:
    id: int
    extent: int
    intent: int
    parents: set = field(default_factory=set)
    children: set = field(default_factory=set)

    @property
    def extent_set(self) -> frozenset:
        return to_set(self.extent)

    @property
    def intent_set(self) -> frozenset:
        return to_set(self.intent)

    def __repr__(self) -> str:
        return f"Concept({self.id}, E={sorted(self.extent_set)}, I={sorted(self.intent_set)})"


@dataclass
class FlowAddReport:
    flow: int
    modified: list
    new: list  # (new id, genitor id)
    retargeted: list = field(default_factory=list)  # (query index, old id, new id)
    eclipsed: list = field(default_factory=list)  # (genitor id, new id)
    ground: Optional[int] = None


class ConceptLattice:
    def __init__(self, ctx: FormalContext, first_id: int = 0):
        self.ctx = ctx
        self.concepts: dict[int, Concept] = {}
        self.intent_index: dict[int, int] = {}
        self.top: int = -1
        self.bottom: int = -1
        self.next_id = first_id
        self.ops = 0  # elementary set operations, for complexity checks

    def __len__(self) -> int:
        return len(self.concepts)

    def __iter__(self):
        return iter(self.concepts.values())

    def __getitem__(self, cid: int) -> Concept:
        try:
            return self.concepts[cid]
        except KeyError:
            raise KeyError(f"unknown concept id {cid}") from None

    def _new_concept(self, extent: int, intent: int) -> Concept:
        c = Concept(self.next_id, extent, intent)
        self.next_id += 1
        self.concepts[c.id] = c
        self.intent_index[intent] = c.id
        return c

    def _link(self, parent: Concept, child: Concept) -> None:
        parent.children.add(child.id)
        child.parents.add(parent.id)

    def _unlink(self, parent: Concept, child: Concept) -> None:
        parent.children.discard(child.id)
        child.parents.discard(parent.id)

    def by_intent(self, matchfields) -> Optional[Concept]:
        """Concept whose intent is exactly ``matchfields`` (labels or ids), if any."""
        cid = self.intent_index.get(to_mask(self.ctx.resolve(matchfields)))
        return None if cid is None else self.concepts[cid]

    def by_extent(self, flows) -> Optional[Concept]:
        mask = to_mask(self.ctx.flow_id(f) for f in flows)
        c = self.concepts.get(self.intent_index.get(self.ctx.flows_image_bits(mask), -1))
        return c if c is not None and c.extent == mask else None

    def sorted_top_down(self) -> list:
        return sorted(self.concepts.values(), key=lambda c: (-popcount(c.extent), c.id))

    def intent_family(self) -> set:
        return set(self.intent_index)

    def hasse_edges(self) -> set:
        """Cover relation as (parent intent, child intent) pairs."""
        return {
            (c.intent, self.concepts[k].intent) for c in self.concepts.values() for k in c.children
        }

    # -- order --------------------------------------------------------------

    def leq(self, a: int, b: int) -> bool:
        return is_subset(self[a].extent, self[b].extent)

    def meet(self, a: int, b: int) -> int:
        extent = self[a].extent & self[b].extent
        return self.intent_index[self.ctx.flows_image_bits(extent)]

    def join(self, a: int, b: int) -> int:
        intent = self[a].intent & self[b].intent
        return self.intent_index[intent]

    def meet_all(self, ids: Iterable[int]) -> int:
        extent = self.ctx.all_flows
        for i in ids:
            extent &= self[i].extent
        return self.intent_index[self.ctx.flows_image_bits(extent)]

    def flow_concept(self, flow: Union[int, str]) -> int:
        """Concept whose intent is the flow's full matchfield set."""
        return self.intent_index[self.ctx.rows[self.ctx.flow_id(flow)]]


def build(ctx: FormalContext, first_id: int = 0) -> ConceptLattice:
    lat = ConceptLattice(ctx, first_id)
    all_h = ctx.all_matchfields
    cols = ctx.columns
    top = lat._new_concept(ctx.all_flows, ctx.flows_image_bits(ctx.all_flows))
    lat.top = top.id
    queue = deque([top])
    rows = ctx.rows
    while queue:
        c = queue.popleft()
        if c.intent == all_h:
            continue
        # matchfields carried by no flow of the extent only give the empty
        # intersection, which is a child only when nothing else is
        reach = all_h
        if c.extent.bit_count() <= 64:
            reach = 0
            for f in iter_bits(c.extent):
                reach |= rows[f]
        faces: dict[int, int] = {}
        for h in iter_bits(reach & ~c.intent):
            e = c.extent & cols[h]
            faces[e] = faces.get(e, c.intent) | (1 << h)
        if not faces or (len(faces) == 1 and 0 in faces):
            faces = {0: all_h}
        lat.ops += len(faces)
        cands = sorted(faces, key=int.bit_count, reverse=True)
        maxima: list = []
        for e in cands:
            for m in maxima:
                if e & ~m == 0:
                    break
            else:
                maxima.append(e)
        lat.ops += len(cands) * max(1, len(maxima))
        for e in maxima:
            intent = faces[e]
            cid = lat.intent_index.get(intent)
            if cid is None:
                child = lat._new_concept(e, intent)
                queue.append(child)
            else:
                child = lat.concepts[cid]
            lat._link(c, child)
    lat.bottom = lat.intent_index[all_h]
    return lat


def _update_order(lat: ConceptLattice, cn: Concept, genitor: Concept, visited: list) -> None:
    lat._link(cn, genitor)
    above = [p for p in visited if is_subset(p.intent, cn.intent)]
    lat.ops += len(visited)
    above.sort(key=lambda p: popcount(p.intent), reverse=True)
    parents: list = []
    for p in above:
        if any(is_subset(p.intent, q.intent) for q in parents):
            continue
        parents.append(p)
    lat.ops += len(above) * max(1, len(parents))
    for p in parents:
        if genitor.id in p.children:
            lat._unlink(p, genitor)
        lat._link(p, cn)


def _extend_matchfields(lat: ConceptLattice, labels: list, support=None) -> None:
    """Register matchfield values unseen so far; keeps the bottom intent equal to H."""
    ctx = lat.ctx
    for label in labels:
        ctx.add_matchfield(label)
    bottom = lat.concepts[lat.bottom]
    all_h = ctx.all_matchfields
    if bottom.extent == 0:
        del lat.intent_index[bottom.intent]
        bottom.intent = all_h
        lat.intent_index[all_h] = bottom.id
    else:
        nb = lat._new_concept(0, all_h)
        lat._link(bottom, nb)
        lat.bottom = nb.id
        if support is not None:
            support.register_bottom(lat, nb)


def add_flow(
    lat: ConceptLattice,
    matchfields: Iterable,
    name: str | None = None,
    support=None,
) -> FlowAddReport:
    """Insert a flow entry into the lattice (and its measurement support).

    ``matchfields`` may mix labels and ids; unknown labels become new
    matchfield values. Invalid flows raise ContextError before anything is
    changed.
    """
    ctx = lat.ctx
    items = list(matchfields)
    fresh = [m for m in dict.fromkeys(items) if isinstance(m, str) and m not in ctx._labels]
    known = ctx.resolve([m for m in items if not (isinstance(m, str) and m in fresh)])
    if fresh:
        # a flow with unseen values cannot duplicate or be nested in an old
        # one; validate the rest here since extending H is not undoable
        if name is not None and name in ctx._names:
            raise ContextError(f"duplicate flow name {name!r}")
        if ctx.strict_subsets:
            known_mask = to_mask(known)
            for f, r in zip(ctx.flows, ctx.rows):
                if is_subset(r, known_mask):
                    raise ContextError(f"flow {name or '?'} and flow {f.name} have nested matchfield sets")
        _extend_matchfields(lat, fresh, support)
    flow = ctx.add_flow(list(known) + fresh, name=name)
    fbit = 1 << flow.id
    row = ctx.rows[flow.id]

    report = FlowAddReport(flow.id, [], [])
    visited: list = []
    for c in lat.sorted_top_down():
        h = c.intent & row
        lat.ops += 1
        if h == c.intent:
            c.extent |= fbit
            report.modified.append(c.id)
            visited.append(c)
        elif h not in lat.intent_index:
            cn = lat._new_concept(c.extent | fbit, h)
            _update_order(lat, cn, c, visited)
            visited.append(cn)
            report.new.append((cn.id, c.id))
            if support is not None:
                support.update_status(lat, cn, c, report)

    all_f = ctx.all_flows
    if lat.concepts[lat.top].extent != all_f:
        lat.top = lat.intent_index[ctx.flows_image_bits(all_f)]
    if support is not None:
        report.ground = support.ground_new_flow(lat, flow.id)
    return report


def rebuild_after_removal(lat: ConceptLattice, support=None, flow=None, query=None):
    """Drop one flow or one query and recompute everything from scratch.

    Returns ``(context, lattice, support)``. Concept ids of the rebuilt
    lattice continue after the old lattice's ids.
    """
    from .measurement import compute_support

    if (flow is None) == (query is None):
        raise ValueError("give exactly one of flow= or query=")
    ctx = lat.ctx
    queries = list(support.queries) if support is not None else []
    if flow is not None:
        ctx = ctx.without_flow(flow)
    else:
        if support is None:
            raise ValueError("removing a query needs the measurement support")
        idx = support.query_index(query)
        queries = [q for q in queries if q.id != idx]
    new_lat = build(ctx, first_id=lat.next_id)
    new_support = compute_support(new_lat, [sorted(q.matchfields) for q in queries],
                                  labels=[q.label for q in queries])
    return ctx, new_lat, new_support


def check_integrity(lat: ConceptLattice) -> None:
    """Assert the structural invariants; raises AssertionError naming the first failure."""
    ctx = lat.ctx
    assert len(lat.intent_index) == len(lat.concepts), "intent index is not a bijection"
    for intent, cid in lat.intent_index.items():
        assert lat.concepts[cid].intent == intent, f"intent index stale at {cid}"
    for c in lat.concepts.values():
        assert ctx.matchfields_image_bits(c.intent) == c.extent, f"extent of {c.id} not closed"
        assert ctx.flows_image_bits(c.extent) == c.intent, f"intent of {c.id} not closed"
        for p in c.parents:
            assert c.id in lat.concepts[p].children, f"link {p}->{c.id} one-sided"
            assert c.extent != lat.concepts[p].extent and is_subset(c.extent, lat.concepts[p].extent), \
                f"parent {p} of {c.id} is not above it"
        for k in c.children:
            assert c.id in lat.concepts[k].parents, f"link {c.id}->{k} one-sided"
    cs = list(lat.concepts.values())
    for c in cs:
        below = [d for d in cs if d is not c and is_subset(d.extent, c.extent)]
        covers = {
            d.id for d in below
            if not any(e is not d and is_subset(d.extent, e.extent) for e in below)
        }
        assert covers == c.children, f"children of {c.id} are not its lower covers"
    assert lat.concepts[lat.top].extent == ctx.all_flows, "top is not (F, F')"
    assert lat.concepts[lat.bottom].intent == ctx.all_matchfields, "bottom is not (H', H)"


# -- export -----------------------------------------------------------------


def dump(lat: ConceptLattice) -> list:
    ctx = lat.ctx
    return [
        {
            "id": c.id,
            "intent": ctx.labels(iter_bits(c.intent)),
            "extent": ctx.flow_names(iter_bits(c.extent)),
            "parents": sorted(c.parents),
        }
        for c in sorted(lat.concepts.values(), key=lambda c: c.id)
    ]


def from_dump(ctx: FormalContext, data: list) -> ConceptLattice:
    """Rebuild a lattice object from :func:`dump` output (ids preserved)."""
    lat = ConceptLattice(ctx)
    for entry in data:
        intent = to_mask(ctx.resolve(entry["intent"]))
        extent = to_mask(ctx.flow_id(n) for n in entry["extent"])
        c = Concept(int(entry["id"]), extent, intent)
        lat.concepts[c.id] = c
        lat.intent_index[intent] = c.id
    for entry in data:
        for p in entry["parents"]:
            lat._link(lat.concepts[int(p)], lat.concepts[int(entry["id"])])
    lat.next_id = max(lat.concepts, default=-1) + 1
    lat.top = lat.intent_index.get(ctx.flows_image_bits(ctx.all_flows), -1)
    lat.bottom = lat.intent_index.get(ctx.all_matchfields, -1)
    return lat


def to_dot(lat: ConceptLattice, support=None) -> str:
    """Hasse diagram in Graphviz DOT with reduced labels.

    Each node shows the matchfields it introduces and the flows it
    introduces; with ``support`` the query vector is appended and
    projections/grounds are highlighted.
    """
    ctx = lat.ctx
    lines = ["digraph lattice {", "  rankdir=TB;", "  node [shape=box, fontsize=10];"]
    for c in sorted(lat.concepts.values(), key=lambda c: c.id):
        inherited = 0
        for p in c.parents:
            inherited |= lat.concepts[p].intent
        below = 0
        for k in c.children:
            below |= lat.concepts[k].extent
        own_h = ctx.labels(iter_bits(c.intent & ~inherited))
        own_f = ctx.flow_names(iter_bits(c.extent & ~below))
        label = f"c{c.id}\\n{', '.join(own_h)}\\n{', '.join(own_f)}"
        attrs = ""
        if support is not None:
            label += f"\\n{support.vector_string(c.id)}"
            if c.id in support.grounds:
                attrs = ", style=filled, fillcolor=lightgray"
            elif c.id in support.projections:
                attrs = ", style=bold"
        lines.append(f'  c{c.id} [label="{label}"{attrs}];')
    for c in sorted(lat.concepts.values(), key=lambda c: c.id):
        for k in sorted(c.children):
            lines.append(f"  c{c.id} -> c{k};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def meet(lat: ConceptLattice, a: int, b: int) -> int:
    return lat.meet(a, b)


def leq(lat: ConceptLattice, a: int, b: int) -> bool:
    return lat.leq(a, b)
