"""Minimal aggregated traffic counters from a concept lattice of flow entries."""

from .context import ContextError, FormalContext, load_context, save_context
from .lattice import ConceptLattice, add_flow, build, rebuild_after_removal
from .measurement import MeasurementSupport, Query, compute_support, load_queries

__all__ = [
    "ConceptLattice",
    "ContextError",
    "FormalContext",
    "MeasurementSupport",
    "Query",
    "add_flow",
    "build",
    "compute_support",
    "load_context",
    "load_queries",
    "rebuild_after_removal",
    "running_example",
    "save_context",
]


def running_example():
    """The 8-flow, 10-value example context and its five queries."""
    from importlib import resources

    from .context import context_from_json
    import json

    base = resources.files(__name__).joinpath("data")
    ctx = context_from_json(json.loads(base.joinpath("running_example.json").read_text()))
    qdata = json.loads(base.joinpath("running_example_queries.json").read_text())
    return ctx, [q["matchfields"] for q in qdata]
