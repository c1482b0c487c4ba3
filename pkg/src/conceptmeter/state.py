"""State directory: one sub-directory per epoch, newest named in ``CURRENT``.

Layout::

    <state>/CURRENT              "3"
    <state>/epoch-0003/context.json
                       queries.json
                       lattice.json
                       support.json
                       partition.csv
                       lattice.dot
                       summary.json
                       delta.json      (add-flow / remove only)
"""

from __future__ import annotations

import contextlib
import csv
import fcntl
import io
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .context import FormalContext, context_from_json, context_to_json
from .lattice import ConceptLattice, dump, from_dump, to_dot
from .measurement import (
    MeasurementSupport,
    make_queries,
    queries_to_json,
    support_from_json,
    support_to_json,
)

STATE_ENV = "CONCEPTMETER_STATE"


class StateError(ValueError):
    pass


@dataclass
class State:
    root: Path
    epoch: int
    ctx: FormalContext
    lat: ConceptLattice
    support: MeasurementSupport

    @property
    def path(self) -> Path:
        return epoch_dir(self.root, self.epoch)


def epoch_dir(root: Path, epoch: int) -> Path:
    return Path(root) / f"epoch-{epoch:04d}"


def current_epoch(root: Path) -> Optional[int]:
    p = Path(root) / "CURRENT"
    if not p.exists():
        return None
    return int(p.read_text().strip())


@contextlib.contextmanager
def locked(root: Path):
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    with open(root / ".lock", "w") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX)
        try:
            yield
        finally:
            fcntl.flock(fh, fcntl.LOCK_UN)


def partition_csv(ctx: FormalContext, support: MeasurementSupport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["counter", "ground", "flows"])
    for k, g in enumerate(sorted(support.grounds)):
        w.writerow([k, g, " ".join(ctx.flow_names(support.grounded[g]))])
    return buf.getvalue()


def summary(lat: ConceptLattice, support: MeasurementSupport) -> dict:
    return {
        "concepts": len(lat),
        "targets": len(support.target_set),
        "projections": len(support.projections),
        "grounds": len(support.grounds),
        "counters": len(support.grounds),
        "flows": lat.ctx.n_flows,
        "queries": support.n_queries,
        "unsatisfiable": [support.queries[i].label for i in support.unsatisfiable(lat)],
    }


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=1) + "\n", encoding="utf-8")


def write_epoch(root: Path, lat: ConceptLattice, support: MeasurementSupport,
                delta: Optional[dict] = None) -> int:
    root = Path(root)
    prev = current_epoch(root)
    epoch = 0 if prev is None else prev + 1
    d = epoch_dir(root, epoch)
    d.mkdir(parents=True, exist_ok=False)
    ctx = lat.ctx
    _write_json(d / "context.json", context_to_json(ctx))
    _write_json(d / "queries.json", queries_to_json(ctx, support.queries))
    _write_json(d / "lattice.json", dump(lat))
    _write_json(d / "support.json", support_to_json(support, ctx))
    (d / "partition.csv").write_text(partition_csv(ctx, support), encoding="utf-8")
    (d / "lattice.dot").write_text(to_dot(lat, support), encoding="utf-8")
    _write_json(d / "summary.json", summary(lat, support))
    if delta is not None:
        _write_json(d / "delta.json", delta)
    tmp = root / "CURRENT.tmp"
    tmp.write_text(f"{epoch}\n")
    os.replace(tmp, root / "CURRENT")
    return epoch


def load_state(root: Path, epoch: Optional[int] = None) -> State:
    root = Path(root)
    if epoch is None:
        epoch = current_epoch(root)
        if epoch is None:
            raise StateError(f"{root} holds no state (missing CURRENT)")
    d = epoch_dir(root, epoch)
    try:
        ctx = context_from_json(json.loads((d / "context.json").read_text()))
        qdata = json.loads((d / "queries.json").read_text())
        queries = make_queries(ctx, [q["matchfields"] for q in qdata], [q["label"] for q in qdata])
        lat = from_dump(ctx, json.loads((d / "lattice.json").read_text()))
        support = support_from_json(json.loads((d / "support.json").read_text()), ctx, queries)
    except FileNotFoundError as exc:
        raise StateError(f"incomplete epoch {d}: {exc.filename}") from None
    except (KeyError, ValueError, TypeError) as exc:
        raise StateError(f"corrupt epoch {d}: {exc}") from None
    return State(root, epoch, ctx, lat, support)
