"""Software switch counters.

In ``minimal`` mode one counter register exists per ground and every flow
grounded there points to it; flows matching no query have no counter at all.
``baseline`` mode is the conventional one-counter-per-flow table and serves
as the reference for query sums.

Packets arrive already classified to a flow id; header classification is
the TCAM's job and not modelled.
"""

from __future__ import annotations

import csv
import io
import threading
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, TextIO

MINIMAL = "minimal"
BASELINE = "baseline"


@dataclass
class Counter:
    id: int
    packets: int = 0
    bytes: int = 0


@dataclass(frozen=True)
class PacketEvent:
    flow: int
    size: int
    timestamp: int = 0


@dataclass
class CounterStore:
    mode: str
    counters: list = field(default_factory=list)
    ground_to_counter: dict = field(default_factory=dict)
    flow_to_counter: dict = field(default_factory=dict)  # flow id -> counter id or None
    events: int = 0
    drops: int = 0
    epoch: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @property
    def counters_in_use(self) -> int:
        return len(self.counters)

    def process(self, ev: PacketEvent) -> None:
        with self._lock:
            if ev.flow not in self.flow_to_counter:
                self.drops += 1
                return
            self.events += 1
            cid = self.flow_to_counter[ev.flow]
            if cid is not None:
                c = self.counters[cid]
                c.packets += 1
                c.bytes += ev.size

    def process_all(self, events: Iterable[PacketEvent]) -> None:
        for ev in events:
            self.process(ev)

    def snapshot(self) -> list:
        with self._lock:
            return [(c.packets, c.bytes) for c in self.counters]

    def summary(self) -> dict:
        return {
            "mode": self.mode,
            "epoch": self.epoch,
            "counters_in_use": self.counters_in_use,
            "events": self.events,
            "drops": self.drops,
        }

    def rollover(self) -> dict:
        """Close the epoch: report it, zero every register."""
        with self._lock:
            report = self.summary()
            report["registers"] = [(c.packets, c.bytes) for c in self.counters]
            for c in self.counters:
                c.packets = c.bytes = 0
            self.events = self.drops = 0
            self.epoch += 1
        return report


def install_counters(support, mode: str = MINIMAL, n_flows: Optional[int] = None) -> CounterStore:
    """Allocate zeroed registers for a support (``n_flows`` is needed in baseline mode
    to cover flows that match no query)."""
    store = CounterStore(mode)
    if mode == MINIMAL:
        for g in sorted(support.grounds):
            store.ground_to_counter[g] = len(store.counters)
            store.counters.append(Counter(len(store.counters)))
        total = n_flows if n_flows is not None else max(support.mu, default=-1) + 1
        for f in range(total):
            g = support.mu.get(f)
            store.flow_to_counter[f] = None if g is None else store.ground_to_counter[g]
    elif mode == BASELINE:
        if n_flows is None:
            raise ValueError("baseline mode needs n_flows")
        for f in range(n_flows):
            store.flow_to_counter[f] = f
            store.counters.append(Counter(f))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return store


def process(store: CounterStore, ev: PacketEvent) -> None:
    store.process(ev)


def query_stats(store: CounterStore, support, q) -> tuple:
    """(packets, bytes, flow ids) for one query from the ground counters."""
    if store.mode != MINIMAL:
        raise ValueError("query_stats reads ground counters; use baseline_stats for per-flow mode")
    regs = store.snapshot()
    packets = nbytes = 0
    for g in support.grounds_for(q):
        p, b = regs[store.ground_to_counter[g]]
        packets += p
        nbytes += b
    return packets, nbytes, support.answer_flowset(q)


def baseline_stats(store: CounterStore, flows: Iterable[int]) -> tuple:
    """(packets, bytes) summed over per-flow registers of ``flows``."""
    if store.mode != BASELINE:
        raise ValueError("baseline_stats needs a per-flow store")
    regs = store.snapshot()
    packets = nbytes = 0
    for f in flows:
        p, b = regs[store.flow_to_counter[f]]
        packets += p
        nbytes += b
    return packets, nbytes


@dataclass
class MigrationReport:
    preserved: list = field(default_factory=list)  # (old ground, new ground)
    fresh: list = field(default_factory=list)  # new grounds starting at zero
    archived: list = field(default_factory=list)  # (old ground, packets, bytes)

    @property
    def identity(self) -> bool:
        return not self.fresh and not self.archived and all(a == b for a, b in self.preserved)


def reinstall_on_change(
    store: CounterStore,
    old_support,
    new_support,
    old_names: Optional[list] = None,
    new_names: Optional[list] = None,
) -> tuple:
    """Move a minimal-mode store onto a new support.

    A new ground keeps the register of the old ground whose grounded flows
    are exactly its own flows that existed before (flows new to the table
    carry no traffic yet). Every other old register is archived in the
    report and dropped. Flow identity is by id unless name lists are given,
    which is required when ids were renumbered.
    """
    if store.mode != MINIMAL:
        raise ValueError("only minimal-mode stores are re-grounded")
    old_key = (lambda f: old_names[f]) if old_names is not None else (lambda f: f)
    new_key = (lambda f: new_names[f]) if new_names is not None else (lambda f: f)
    # every flow of the old table, matched or not: an unmatched flow's past
    # packets were never counted, so a cell gaining it cannot keep its value
    known = set(old_names) if old_names is not None else set(store.flow_to_counter)
    old_cells = {
        frozenset(old_key(f) for f in old_support.grounded[g]): g for g in old_support.grounds
    }
    regs = store.snapshot()
    report = MigrationReport()
    new_store = CounterStore(MINIMAL, epoch=store.epoch, events=store.events, drops=store.drops)
    used = set()
    for g in sorted(new_support.grounds):
        cell = frozenset(new_key(f) for f in new_support.grounded[g])
        old_g = old_cells.get(cell & known)
        cid = len(new_store.counters)
        if old_g is not None and old_g not in used:
            p, b = regs[store.ground_to_counter[old_g]]
            used.add(old_g)
            report.preserved.append((old_g, g))
        else:
            p = b = 0
            report.fresh.append(g)
        new_store.counters.append(Counter(cid, p, b))
        new_store.ground_to_counter[g] = cid
    for old_g in sorted(old_support.grounds):
        if old_g not in used:
            p, b = regs[store.ground_to_counter[old_g]]
            report.archived.append((old_g, p, b))
    n = len(new_names) if new_names is not None else max(
        [*new_support.mu, *store.flow_to_counter, -1]) + 1
    for f in range(n):
        g = new_support.mu.get(f)
        new_store.flow_to_counter[f] = None if g is None else new_store.ground_to_counter[g]
    return new_store, report


# -- event and report files ---------------------------------------------------


def read_events(stream: TextIO, flow_ids: dict) -> Iterator:
    """Parse ``tick,flow_name,bytes`` lines; unknown names yield flow id -1."""
    for lineno, line in enumerate(stream, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected tick,flow_name,bytes")
        try:
            tick, size = int(parts[0]), int(parts[2])
        except ValueError:
            raise ValueError(f"line {lineno}: tick and bytes must be integers") from None
        if size < 0:
            raise ValueError(f"line {lineno}: negative packet size")
        yield PacketEvent(flow_ids.get(parts[1], -1), size, tick)


def stats_csv(rows: Iterable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["query", "packets", "bytes", "num_counters_touched"])
    for r in rows:
        w.writerow(r)
    return buf.getvalue()
