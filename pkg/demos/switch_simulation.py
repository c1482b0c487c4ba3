"""
Replaying traffic through shared counters
==========================================

Random packets over the running example, counted twice: once with a
register per flow and once with a register per ground. Query sums agree.
"""

import numpy as np

from conceptmeter import build, compute_support, engine, oracle, running_example

ctx, queries = running_example()
support = compute_support(build(ctx), queries)

rng = np.random.default_rng(7)
flows = rng.integers(0, ctx.n_flows, size=10_000)
sizes = rng.integers(64, 1501, size=flows.size)
events = [engine.PacketEvent(int(f), int(s), t) for t, (f, s) in enumerate(zip(flows, sizes))]

minimal = engine.install_counters(support, engine.MINIMAL, ctx.n_flows)
baseline = engine.install_counters(support, engine.BASELINE, ctx.n_flows)
minimal.process_all(events)
baseline.process_all(events)

print(f"registers: {minimal.counters_in_use} shared vs {baseline.counters_in_use} per-flow")
print(f"{'query':<6}{'packets':>9}{'bytes':>11}{'regs read':>11}")
for q in support.queries:
    p, b, _ = engine.query_stats(minimal, support, q.id)
    assert (p, b) == engine.baseline_stats(baseline, oracle.answer_direct(ctx, q.matchfields))
    print(f"{q.label:<6}{p:>9}{b:>11}{len(support.grounds_for(q.id)):>11}")
