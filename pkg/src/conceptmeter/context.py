"""Formal context: flow entries, matchfield values and their incidence.

Flows and matchfield values get dense integer ids. The incidence relation is
stored twice, once as one bitset per flow (its matchfield image) and once as
one bitset per matchfield value (the flows carrying it), so that both image
operators reduce to a handful of big-int ANDs.

Matchfield values are opaque labelled atoms: ``"ipv4_src=10/8"`` and
``"ipv4_src=10.1/16"`` are unrelated unless the incidence says otherwise.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

from ._bits import is_subset, iter_bits, to_mask, to_set

MatchfieldRef = Union[int, str]


class ContextError(ValueError):
    """Invalid context input or invariant violation."""


@dataclass(frozen=True)
class MatchfieldValue:
    id: int
    label: str
    field_kind: str = ""


@dataclass(frozen=True)
class FlowEntry:
    id: int
    name: str
    matchfields: frozenset


def _kind_from_label(label: str) -> str:
    head, sep, _ = label.partition("=")
    return head.strip() if sep else ""


class FormalContext:
    """Flows x matchfield values incidence relation.

    ``strict_subsets`` additionally rejects flows whose matchfield set is a
    proper subset or superset of an existing flow's. Identical matchfield
    sets are always rejected.
    """

    def __init__(self, matchfields: Iterable = (), strict_subsets: bool = False):
        self.strict_subsets = strict_subsets
        self.matchfields: list[MatchfieldValue] = []
        self.flows: list[FlowEntry] = []
        self.rows: list[int] = []
        self.columns: list[int] = []
        self._labels: dict[str, int] = {}
        self._names: dict[str, int] = {}
        for m in matchfields:
            if isinstance(m, str):
                self.add_matchfield(m)
            else:
                label, kind = m
                self.add_matchfield(label, kind)

    # -- construction ---------------------------------------------------

    @classmethod
    def from_rows(cls, rows, matchfields: Iterable = (), strict_subsets: bool = False):
        """Build from ``{flow_name: [labels]}`` (or a list of label lists).

        Labels not present in ``matchfields`` are appended in order of first
        appearance.
        """
        ctx = cls(matchfields, strict_subsets=strict_subsets)
        items = rows.items() if isinstance(rows, dict) else ((None, r) for r in rows)
        for name, labels in items:
            for label in labels:
                if label not in ctx._labels:
                    ctx.add_matchfield(label)
            ctx.add_flow(labels, name=name)
        return ctx

    def add_matchfield(self, label: str, field_kind: str | None = None) -> int:
        if label in self._labels:
            raise ContextError(f"duplicate matchfield label {label!r}")
        mid = len(self.matchfields)
        kind = _kind_from_label(label) if field_kind is None else field_kind
        self.matchfields.append(MatchfieldValue(mid, label, kind))
        self._labels[label] = mid
        self.columns.append(0)
        return mid

    def resolve(self, refs: Iterable[MatchfieldRef]) -> frozenset:
        """Map labels and/or ids to a set of matchfield ids."""
        out = set()
        for r in refs:
            if isinstance(r, str):
                if r not in self._labels:
                    raise ContextError(f"unknown matchfield {r!r}")
                out.add(self._labels[r])
            else:
                if not 0 <= r < len(self.matchfields):
                    raise ContextError(f"unknown matchfield id {r}")
                out.add(int(r))
        return frozenset(out)

    def check_flow(self, matchfields: frozenset, name: str | None = None) -> None:
        """Raise ContextError if a flow with these matchfield ids may not be added."""
        if not matchfields:
            raise ContextError(f"flow {name or '?'} has no matchfields")
        if name is not None and name in self._names:
            raise ContextError(f"duplicate flow name {name!r}")
        row = to_mask(matchfields)
        for f, r in zip(self.flows, self.rows):
            if r == row:
                raise ContextError(f"flow {name or '?'} duplicates flow {f.name}")
            if self.strict_subsets and (is_subset(r, row) or is_subset(row, r)):
                raise ContextError(
                    f"flow {name or '?'} and flow {f.name} have nested matchfield sets"
                )

    def add_flow(self, matchfields: Iterable[MatchfieldRef], name: str | None = None) -> FlowEntry:
        ids = self.resolve(matchfields)
        fid = len(self.flows)
        name = f"f{fid}" if name is None else name
        self.check_flow(ids, name)
        flow = FlowEntry(fid, name, ids)
        row = to_mask(ids)
        self.flows.append(flow)
        self.rows.append(row)
        self._names[name] = fid
        bit = 1 << fid
        for m in ids:
            self.columns[m] |= bit
        return flow

    def without_flow(self, flow: Union[int, str]) -> "FormalContext":
        """Copy of this context with one flow removed; remaining flows are renumbered."""
        fid = self.flow_id(flow)
        ctx = FormalContext(
            [(m.label, m.field_kind) for m in self.matchfields],
            strict_subsets=self.strict_subsets,
        )
        for f in self.flows:
            if f.id != fid:
                ctx.add_flow(sorted(f.matchfields), name=f.name)
        return ctx

    def copy(self) -> "FormalContext":
        ctx = FormalContext(
            [(m.label, m.field_kind) for m in self.matchfields],
            strict_subsets=self.strict_subsets,
        )
        for f in self.flows:
            ctx.add_flow(sorted(f.matchfields), name=f.name)
        return ctx

    # -- lookups ----------------------------------------------------------

    @property
    def n_flows(self) -> int:
        return len(self.flows)

    @property
    def n_matchfields(self) -> int:
        return len(self.matchfields)

    @property
    def all_flows(self) -> int:
        return (1 << len(self.flows)) - 1

    @property
    def all_matchfields(self) -> int:
        return (1 << len(self.matchfields)) - 1

    def flow_id(self, flow: Union[int, str]) -> int:
        if isinstance(flow, str):
            if flow not in self._names:
                raise ContextError(f"unknown flow {flow!r}")
            return self._names[flow]
        if not 0 <= flow < len(self.flows):
            raise ContextError(f"unknown flow id {flow}")
        return int(flow)

    def matchfield_id(self, label: str) -> int:
        return next(iter(self.resolve([label])))

    def flow_names(self, flows: Iterable[int]) -> list[str]:
        return [self.flows[f].name for f in sorted(flows)]

    def labels(self, matchfields: Iterable[int]) -> list[str]:
        return [self.matchfields[m].label for m in sorted(matchfields)]

    # -- image and closure operators on bitsets -----------------------------

    def flows_image_bits(self, extent: int) -> int:
        """Matchfields shared by every flow of ``extent`` (all of H for none)."""
        out = self.all_matchfields
        for f in iter_bits(extent):
            out &= self.rows[f]
            if not out:
                break
        return out

    def matchfields_image_bits(self, intent: int) -> int:
        """Flows carrying every matchfield of ``intent`` (all of F for none)."""
        out = self.all_flows
        for m in iter_bits(intent):
            out &= self.columns[m]
            if not out:
                break
        return out

    def close_bits(self, intent: int) -> int:
        return self.flows_image_bits(self.matchfields_image_bits(intent))

    # -- the same operators on id sets ----------------------------------

    def _flow_mask(self, flows: Iterable[Union[int, str]]) -> int:
        return to_mask(self.flow_id(f) for f in flows)

    def image_of_flows(self, flows: Iterable[Union[int, str]]) -> frozenset:
        return to_set(self.flows_image_bits(self._flow_mask(flows)))

    def image_of_matchfields(self, matchfields: Iterable[MatchfieldRef]) -> frozenset:
        return to_set(self.matchfields_image_bits(to_mask(self.resolve(matchfields))))

    def close_matchfields(self, matchfields: Iterable[MatchfieldRef]) -> frozenset:
        return to_set(self.close_bits(to_mask(self.resolve(matchfields))))

    def __repr__(self) -> str:
        return f"FormalContext(|F|={self.n_flows}, |H|={self.n_matchfields})"


# -- file formats -----------------------------------------------------------


def context_to_json(ctx: FormalContext) -> dict:
    return {
        "matchfields": [{"label": m.label, "field_kind": m.field_kind} for m in ctx.matchfields],
        "flows": [{"name": f.name, "matchfields": ctx.labels(f.matchfields)} for f in ctx.flows],
    }


def context_from_json(data: dict, strict_subsets: bool = False) -> FormalContext:
    try:
        mfs = [(m["label"], m.get("field_kind")) for m in data["matchfields"]]
        flows = [(f["name"], f["matchfields"]) for f in data["flows"]]
    except (KeyError, TypeError) as exc:
        raise ContextError(f"malformed context JSON: {exc}") from exc
    ctx = FormalContext(strict_subsets=strict_subsets)
    for label, kind in mfs:
        ctx.add_matchfield(label, kind)
    for name, labels in flows:
        ctx.add_flow(labels, name=name)
    return ctx


def context_to_csv(ctx: FormalContext) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["flow"] + [m.label for m in ctx.matchfields])
    for f, row in zip(ctx.flows, ctx.rows):
        w.writerow([f.name] + [(row >> m) & 1 for m in range(ctx.n_matchfields)])
    return buf.getvalue()


def context_from_csv(text: str, strict_subsets: bool = False) -> FormalContext:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ContextError("line 1: empty context file") from None
    if not header or header[0].strip() != "flow":
        raise ContextError("line 1: header must start with 'flow'")
    labels = [h.strip() for h in header[1:]]
    ctx = FormalContext(strict_subsets=strict_subsets)
    for label in labels:
        ctx.add_matchfield(label)
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(labels) + 1:
            raise ContextError(f"line {line}: expected {len(labels) + 1} cells, got {len(row)}")
        cells = [c.strip() for c in row[1:]]
        if any(c not in ("0", "1") for c in cells):
            raise ContextError(f"line {line}: cells must be 0 or 1")
        try:
            ctx.add_flow([i for i, c in enumerate(cells) if c == "1"], name=row[0].strip())
        except ContextError as exc:
            raise ContextError(f"line {line}: {exc}") from None
    return ctx


def load_context(source: Union[str, Path], strict_subsets: bool = False) -> FormalContext:
    """Read a context from a ``.csv`` cross-table or a ``.json`` file."""
    path = Path(source)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ContextError(f"line {exc.lineno}: {exc.msg}") from None
        return context_from_json(data, strict_subsets=strict_subsets)
    return context_from_csv(text, strict_subsets=strict_subsets)


def save_context(ctx: FormalContext, dest: Union[str, Path]) -> None:
    path = Path(dest)
    if path.suffix.lower() == ".json":
        path.write_text(json.dumps(context_to_json(ctx), indent=1) + "\n", encoding="utf-8")
    else:
        path.write_text(context_to_csv(ctx), encoding="utf-8")


def image_of_flows(ctx: FormalContext, flows: Sequence) -> frozenset:
    return ctx.image_of_flows(flows)


def image_of_matchfields(ctx: FormalContext, matchfields: Sequence) -> frozenset:
    return ctx.image_of_matchfields(matchfields)


def close_matchfields(ctx: FormalContext, matchfields: Sequence) -> frozenset:
    return ctx.close_matchfields(matchfields)
