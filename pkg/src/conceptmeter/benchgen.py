"""Synthetic flow tables and query sets.

Every field of a flow entry is drawn independently from that field's value
distribution. Listed values carry their given probability; whatever mass is
left over is spread evenly over ``tail`` extra values labelled
``<field>=other<k>``. Queries copy a randomly chosen flow entry and wildcard
each field with probability ``wildcard_pct`` (per-field overrides allowed), so
every query matches at least the entry it was cut from.

Randomness comes from ``numpy.random.default_rng`` (PCG64) seeded with
``seed`` for flows and ``[seed, 1]`` for queries; the output is a pure
function of the spec.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .context import FormalContext
from .measurement import Query, make_queries

RETRY_FACTOR = 100


class BenchSpecError(ValueError):
    pass


@dataclass(frozen=True)
class FieldSpec:
    field_kind: str
    values: tuple  # ((label, probability), ...)
    tail: int = 0

    def labels(self) -> list:
        out = [f"{self.field_kind}={v}" for v, _ in self.values]
        out += [f"{self.field_kind}=other{k}" for k in range(self.tail)]
        return out

    def probabilities(self) -> np.ndarray:
        listed = [p for _, p in self.values]
        rest = 1.0 - sum(listed)
        if self.tail:
            listed += [rest / self.tail] * self.tail
        p = np.asarray(listed, dtype=float)
        return p / p.sum()


@dataclass(frozen=True)
class BenchSpec:
    fields: tuple
    num_flows: int = 100
    num_queries: int = 10
    wildcard_pct: float = 0.5
    wildcard_overrides: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if not self.fields:
            raise BenchSpecError("spec needs at least one field")
        for f in self.fields:
            total = sum(p for _, p in f.values)
            if any(p < 0 for _, p in f.values) or total > 1 + 1e-9:
                raise BenchSpecError(f"{f.field_kind}: probabilities must be >= 0 and sum to <= 1")
            if total < 1 - 1e-9 and f.tail < 1:
                raise BenchSpecError(f"{f.field_kind}: leftover mass {1 - total:.3f} needs tail >= 1")
            if not f.values and f.tail < 1:
                raise BenchSpecError(f"{f.field_kind}: no values")
        for pct in [self.wildcard_pct, *self.wildcard_overrides.values()]:
            if not 0.0 <= pct <= 1.0:
                raise BenchSpecError(f"wildcard percentage {pct} outside [0, 1]")
        if self.num_flows < 0 or self.num_queries < 0:
            raise BenchSpecError("counts must be non-negative")

    def wildcard_for(self, kind: str) -> float:
        return self.wildcard_overrides.get(kind, self.wildcard_pct)

    def with_(self, **changes) -> "BenchSpec":
        return replace(self, **changes)


def spec_from_dict(data: dict) -> BenchSpec:
    fields = tuple(
        FieldSpec(f["field_kind"], tuple((str(v), float(p)) for v, p in f.get("values", [])),
                  int(f.get("tail", 0)))
        for f in data["fields"]
    )
    return BenchSpec(
        fields,
        num_flows=int(data.get("num_flows", 100)),
        num_queries=int(data.get("num_queries", 10)),
        wildcard_pct=float(data.get("wildcard_pct", 0.5)),
        wildcard_overrides={k: float(v) for k, v in data.get("wildcard_overrides", {}).items()},
        seed=int(data.get("seed", 0)),
    )


def spec_to_dict(spec: BenchSpec) -> dict:
    return {
        "num_flows": spec.num_flows,
        "num_queries": spec.num_queries,
        "wildcard_pct": spec.wildcard_pct,
        "wildcard_overrides": dict(spec.wildcard_overrides),
        "seed": spec.seed,
        "fields": [
            {"field_kind": f.field_kind, "values": [list(v) for v in f.values], "tail": f.tail}
            for f in spec.fields
        ],
    }


def load_spec(source: Union[str, Path]) -> BenchSpec:
    return spec_from_dict(json.loads(Path(source).read_text(encoding="utf-8")))


def default_spec(**changes) -> BenchSpec:
    """The bundled 12-field spec built around the packet-trace value densities."""
    text = resources.files("conceptmeter").joinpath("data/default_bench.json").read_text()
    spec = spec_from_dict(json.loads(text))
    return spec.with_(**changes) if changes else spec


def gen_flows(spec: BenchSpec) -> FormalContext:
    rng = np.random.default_rng(spec.seed)
    n = spec.num_flows
    probs = [f.probabilities() for f in spec.fields]
    sizes = [len(p) for p in probs]

    def draw(k: int) -> np.ndarray:
        cols = [rng.choice(sz, size=k, p=p) for sz, p in zip(sizes, probs)]
        return np.stack(cols, axis=1) if k else np.zeros((0, len(sizes)), dtype=int)

    table = draw(n)
    seen: set = set()
    budget = RETRY_FACTOR * max(n, 1)
    for i in range(n):
        row = tuple(int(x) for x in table[i])
        while row in seen:
            budget -= 1
            if budget < 0:
                raise BenchSpecError(
                    f"cannot draw {n} distinct flow entries within {RETRY_FACTOR * n} redraws"
                )
            table[i] = draw(1)[0]
            row = tuple(int(x) for x in table[i])
        seen.add(row)

    labels = [f.labels() for f in spec.fields]
    used = [sorted(set(table[:, j].tolist())) for j in range(len(spec.fields))]
    ctx = FormalContext()
    for j, f in enumerate(spec.fields):
        for v in used[j]:
            ctx.add_matchfield(labels[j][v], f.field_kind)
    for i in range(n):
        ctx.add_flow([labels[j][int(v)] for j, v in enumerate(table[i])], name=f"f{i}")
    return ctx


def gen_queries(spec: BenchSpec, ctx: FormalContext) -> list:
    if spec.num_queries and ctx.n_flows == 0:
        raise BenchSpecError("cannot cut queries from an empty flow table")
    rng = np.random.default_rng([spec.seed, 1])
    kinds = [f.field_kind for f in spec.fields]
    pct = np.array([spec.wildcard_for(k) for k in kinds])
    if spec.num_queries and np.all(pct >= 1.0):
        raise BenchSpecError("every field is always wildcarded")
    n = spec.num_queries
    if n <= ctx.n_flows:
        sources = rng.choice(ctx.n_flows, size=n, replace=False)
    else:
        sources = rng.integers(0, ctx.n_flows, size=n)
    by_kind = {}
    for m in ctx.matchfields:
        by_kind[m.id] = m.field_kind
    out = []
    for src in sources:
        row = {by_kind[m]: m for m in ctx.flows[int(src)].matchfields}
        while True:
            wild = rng.random(len(kinds)) < pct
            if not wild.all():
                break
        out.append(sorted(row[k] for k, w in zip(kinds, wild) if not w and k in row))
    queries = make_queries(ctx, out)
    for q, src in zip(queries, sources):
        if not q.matchfields <= ctx.flows[int(src)].matchfields:
            raise AssertionError(f"{q.label} does not cover its source flow")
    return queries


def sweep(
    spec: BenchSpec,
    wildcard_pcts: Sequence[float],
    num_queries: Sequence[int],
    seeds: Iterable[int],
) -> list:
    """Counter counts per (seed, N_Q, wildcard_pct); flows depend only on the seed."""
    from .lattice import build
    from .measurement import compute_support

    rows = []
    for seed in seeds:
        s = spec.with_(seed=seed)
        ctx = gen_flows(s)
        lat = build(ctx)
        for nq in num_queries:
            for pct in wildcard_pcts:
                qs = gen_queries(s.with_(num_queries=nq, wildcard_pct=pct), ctx) if nq else []
                support = compute_support(lat, qs)
                rows.append({
                    "N_Q": nq,
                    "wildcard_pct": pct,
                    "N_c": len(support.grounds),
                    "num_flows": ctx.n_flows,
                    "seed": seed,
                    "num_concepts": len(lat),
                })
    return rows


def queries_as_labels(ctx: FormalContext, queries: Sequence[Query]) -> list:
    return [ctx.labels(q.matchfields) for q in queries]
